//! Command-line and config-file arguments.
//!
//! Every subcommand's flags can also be given as a JSON object through
//! `--config`; keys are the flag names with `-` replaced by `_`. Flags given
//! on the command line win over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const OUTPUT_DIR_ENV: &str = "DETPATH_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "detpath", version, about = "Extended-kernel vs path-integral Fredholm determinant checks")]
pub struct Cli {
    /// JSON file supplying the subcommand's parameters.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for the JSON report and CSV/SVG artifacts; defaults to $DETPATH_OUTPUT_DIR.
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact LGV, path-functional and multiplier checks on a weighted graph.
    LgvVerify(LgvArgs),
    /// The finite-dimensional identity for an operator family.
    IdentityCheck(IdentityArgs),
    /// The Hermite (GUE Dyson) identity for indicator functionals.
    Gue(GueArgs),
    /// The Airy2 identity, Tracy-Widom tables and continuum statistics.
    Airy2(Airy2Args),
    /// Monte-Carlo estimate of a GUE Dyson functional against its determinant.
    McGue(McArgs),
    /// A battery of checks across all modules.
    Suite(SuiteArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LgvVerify(_) => "lgv-verify",
            Command::IdentityCheck(_) => "identity-check",
            Command::Gue(_) => "gue",
            Command::Airy2(_) => "airy2",
            Command::McGue(_) => "mc-gue",
            Command::Suite(_) => "suite",
        }
    }

    /// Fills unset flags from the JSON object in `path`.
    pub fn apply_config(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        match self {
            Command::LgvVerify(a) => a.overlay(parse(&text, path)?),
            Command::IdentityCheck(a) => a.overlay(parse(&text, path)?),
            Command::Gue(a) => a.overlay(parse(&text, path)?),
            Command::Airy2(a) => a.overlay(parse(&text, path)?),
            Command::McGue(a) => a.overlay(parse(&text, path)?),
            Command::Suite(a) => a.overlay(parse(&text, path)?),
        }
        Ok(())
    }
}

fn parse<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

macro_rules! overlay {
    ($ty:ident { $($opt:ident),* } { $($flag:ident),* }) => {
        impl $ty {
            fn overlay(&mut self, base: $ty) {
                $(if self.$opt.is_none() { self.$opt = base.$opt; })*
                $(self.$flag |= base.$flag;)*
            }
        }
    };
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LgvArgs {
    /// Graph document (layers, edges, weights, optional boundary data, q, functional).
    #[arg(long, value_name = "PATH")]
    pub graph: Option<PathBuf>,
    /// Generate a random planar instance from this seed instead.
    #[arg(long)]
    pub seed: Option<u64>,
}
overlay!(LgvArgs { graph, seed } {});

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityArgs {
    /// Operator-family document (kernels, forward, backward, q).
    #[arg(long, value_name = "PATH")]
    pub family: Option<PathBuf>,
    /// Seed of a random commuting family.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of times of the random family.
    #[arg(long)]
    pub n: Option<usize>,
    /// State dimension of the random family.
    #[arg(long)]
    pub d: Option<usize>,
    /// Spectrum of the generator of the random family.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub spectrum: Option<Vec<f64>>,
    /// Rank of the projector of the random family.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Relative tolerance for `|lhs - rhs|`.
    #[arg(long)]
    pub tolerance: Option<f64>,
}
overlay!(IdentityArgs { family, seed, n, d, spectrum, rank, tolerance } {});

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GueArgs {
    #[arg(long)]
    pub matrix_size: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thresholds: Option<Vec<f64>>,
    /// Gauss-Legendre nodes per unit panel.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Truncation half-width L of [-L, L].
    #[arg(long)]
    pub domain: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Write kernel slices as CSV and SVG.
    #[arg(long)]
    pub slices: bool,
    /// Matrix sizes for the edge-scaling study, written as CSV and SVG.
    #[arg(long, value_delimiter = ',')]
    pub edge_study: Option<Vec<usize>>,
    /// Potential h for the continuum statistic, e.g. `smooth:0.5@0~0.2`.
    #[arg(long, value_name = "H")]
    pub continuum: Option<String>,
    /// Time interval `l,r` of the continuum statistic.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub interval: Option<Vec<f64>>,
    /// Step counts of the continuum refinement study.
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<usize>>,
}
overlay!(GueArgs { matrix_size, times, thresholds, nodes, domain, tolerance, edge_study, continuum, interval, steps } { slices });

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Airy2Args {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thresholds: Option<Vec<f64>>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Left truncation point is -domain.
    #[arg(long)]
    pub domain: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Tracy-Widom table: `s1,s2,...` or `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true, value_name = "S")]
    pub tw: Option<String>,
    /// Potential h for the continuum statistic, e.g. `step:1@0` or `smooth:0.5@0~0.2`.
    #[arg(long, value_name = "H")]
    pub continuum: Option<String>,
    /// Time interval `l,r` of the continuum statistic.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub interval: Option<Vec<f64>>,
    /// Step counts of the continuum refinement study.
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<usize>>,
}
overlay!(Airy2Args { times, thresholds, nodes, domain, tolerance, tw, continuum, interval, steps } {});

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McArgs {
    #[arg(long)]
    pub matrix_size: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}
overlay!(McArgs { matrix_size, times, thresholds, samples, seed } {});

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteArgs {
    /// Only the fast sanity tier.
    #[arg(long)]
    pub quick: bool,
}
overlay!(SuiteArgs {} { quick });
