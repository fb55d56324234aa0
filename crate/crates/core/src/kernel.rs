//! Two-argument kernel functions with symmetry and decay metadata.

use crate::error::{Error, Result};

/// How a kernel decays away from its bulk; informational only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decay {
    Gaussian,
    /// Like `exp(-c x^{3/2})` to the right, as for Airy kernels.
    SuperExponential,
    Unknown,
}

pub trait Kernel: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;

    fn is_symmetric(&self) -> bool {
        false
    }

    fn decay(&self) -> Decay {
        Decay::Unknown
    }

    /// `eval` with a finiteness check.
    fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        let v = self.eval(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                value: v,
                context: format!("kernel at ({x}, {y})"),
            })
        }
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn eval(&self, x: f64, y: f64) -> f64 {
        (**self).eval(x, y)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn decay(&self) -> Decay {
        (**self).decay()
    }
    fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        (**self).try_eval(x, y)
    }
}

impl<K: Kernel + ?Sized> Kernel for Box<K> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        (**self).eval(x, y)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
    fn decay(&self) -> Decay {
        (**self).decay()
    }
    fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        (**self).try_eval(x, y)
    }
}

/// A closure with declared metadata.
#[derive(Clone, Copy)]
pub struct FnKernel<F> {
    f: F,
    symmetric: bool,
    decay: Decay,
}

impl<F: Fn(f64, f64) -> f64 + Sync> FnKernel<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            symmetric: false,
            decay: Decay::Unknown,
        }
    }

    pub fn symmetric(f: F) -> Self {
        Self {
            f,
            symmetric: true,
            decay: Decay::Unknown,
        }
    }

    pub fn with_decay(mut self, decay: Decay) -> Self {
        self.decay = decay;
        self
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> Kernel for FnKernel<F> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }
    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
    fn decay(&self) -> Decay {
        self.decay
    }
}

/// The zero kernel.
pub struct Zero;

impl Kernel for Zero {
    fn eval(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}
