//! Preset real functions used as multipliers `q` and as potentials `h`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// A bounded function of one real variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `value * 1_{x > above}`.
    Indicator {
        above: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// `value / (1 + exp(-(x - above) / width))`.
    Logistic {
        above: f64,
        width: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// `value * exp(-((x - center) / width)^2)`.
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        value: f64,
    },
}

impl Profile {
    pub fn indicator(above: f64) -> Self {
        Profile::Indicator { above, value: 1.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Constant { value } => value,
            Profile::Indicator { above, value } => {
                if x > above {
                    value
                } else {
                    0.0
                }
            }
            Profile::Logistic { above, width, value } => {
                value / (1.0 + (-(x - above) / width).exp())
            }
            Profile::Gaussian {
                center,
                width,
                value,
            } => value * (-((x - center) / width).powi(2)).exp(),
        }
    }

    /// `1 - q(x)`.
    pub fn complement(&self, x: f64) -> f64 {
        1.0 - self.eval(x)
    }

    pub fn sup_abs(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Constant { value }
            | Profile::Indicator { value, .. }
            | Profile::Logistic { value, .. }
            | Profile::Gaussian { value, .. } => value.abs(),
        }
    }

    /// Points where the function jumps; quadrature panels should break there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Profile::Indicator { above, .. } => vec![above],
            _ => Vec::new(),
        }
    }

    /// A point `a` with `|f| <= 1e-16 sup|f|` on `(-inf, a]`, if one exists.
    pub fn support_start(&self) -> Option<f64> {
        if self.is_zero() {
            return Some(f64::INFINITY);
        }
        match *self {
            Profile::Indicator { above, .. } => Some(above),
            Profile::Logistic { above, width, .. } => Some(above + width * 1e-16f64.ln()),
            Profile::Gaussian { center, width, .. } => Some(center - width * (-(1e-16f64.ln())).sqrt()),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_abs() == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("{self}: {m}")));
        let finite = |v: f64| v.is_finite();
        match *self {
            Profile::Zero => Ok(()),
            Profile::Constant { value } if !finite(value) => bad("value must be finite"),
            Profile::Indicator { above, value } if !finite(above) || !finite(value) => {
                bad("parameters must be finite")
            }
            Profile::Logistic { width, .. } | Profile::Gaussian { width, .. }
                if !(width > 0.0 && width.is_finite()) =>
            {
                bad("width must be positive")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Profile::Zero => write!(f, "zero"),
            Profile::Constant { value } => write!(f, "const:{value}"),
            Profile::Indicator { above, value } => write!(f, "step:{value}@{above}"),
            Profile::Logistic {
                above,
                width,
                value,
            } => write!(f, "smooth:{value}@{above}~{width}"),
            Profile::Gaussian {
                center,
                width,
                value,
            } => write!(f, "bump:{value}@{center}~{width}"),
        }
    }
}

/// Parses `zero`, `const:c`, `step:c@s`, `smooth:c@s~w` and `bump:c@m~w`.
impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse profile '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let s = s.trim();
        if s == "zero" {
            return Ok(Profile::Zero);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let p = match kind {
            "const" => Profile::Constant { value: num(rest)? },
            "step" => {
                let (v, a) = rest.split_once('@').ok_or_else(bad)?;
                Profile::Indicator {
                    above: num(a)?,
                    value: num(v)?,
                }
            }
            "smooth" | "bump" => {
                let (v, loc) = rest.split_once('@').ok_or_else(bad)?;
                let (a, w) = loc.split_once('~').ok_or_else(bad)?;
                let (value, at, width) = (num(v)?, num(a)?, num(w)?);
                if kind == "smooth" {
                    Profile::Logistic {
                        above: at,
                        width,
                        value,
                    }
                } else {
                    Profile::Gaussian {
                        center: at,
                        width,
                        value,
                    }
                }
            }
            _ => return Err(bad()),
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        let q = Profile::indicator(0.5);
        assert_eq!(q.eval(0.5), 0.0);
        assert_eq!(q.eval(0.6), 1.0);
        assert_eq!(q.complement(0.0), 1.0);
        let l = Profile::Logistic {
            above: 0.0,
            width: 0.1,
            value: 0.5,
        };
        assert!((l.eval(0.0) - 0.25).abs() < 1e-15);
        assert_eq!(q.breakpoints(), vec![0.5]);
        assert_eq!(q.support_start(), Some(0.5));
    }

    #[test]
    fn text_round_trip() {
        for s in ["zero", "const:0.5", "step:1@-0.5", "smooth:0.5@0~0.2", "bump:0.3@1~2"] {
            let p: Profile = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<Profile>().unwrap(), p);
        }
        assert!("smooth:1@0~0".parse::<Profile>().is_err());
        assert!("wave:1".parse::<Profile>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = Profile::Logistic {
            above: 1.0,
            width: 0.3,
            value: 0.5,
        };
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Profile>(&j).unwrap(), p);
        let q: Profile = serde_json::from_str(r#"{"kind":"indicator","above":0}"#).unwrap();
        assert_eq!(q, Profile::indicator(0.0));
        assert!(serde_json::from_str::<Profile>(r#"{"kind":"constant","value":1,"x":1}"#).is_err());
    }
}
