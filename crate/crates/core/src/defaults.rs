//! Default grids and tolerances, in one place.

use crate::airy2::AiryWindow;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GueDefaults {
    /// Gauss-Legendre nodes per unit-length panel.
    pub nodes: usize,
    /// Half-width `L` of the window `[-L, L]`.
    pub domain: f64,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Airy2Defaults {
    pub window: AiryWindow,
    pub tolerance: f64,
    /// Gauss-Legendre nodes for Tracy-Widom marginals.
    pub tw_nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuumDefaults {
    pub window: AiryWindow,
    pub steps: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorDefaults {
    pub tolerance: f64,
    pub expansion_tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloDefaults {
    pub samples: usize,
    pub seed: u64,
    /// Allowed `|mean - reference| / stderr`.
    pub z_limit: f64,
}

pub const GUE: GueDefaults = GueDefaults {
    nodes: 20,
    domain: 10.0,
    tolerance: 1e-8,
};

pub const AIRY2: Airy2Defaults = Airy2Defaults {
    window: AiryWindow {
        left: -12.0,
        right: 6.0,
        panel: 1.0,
        per_panel: 16,
    },
    tolerance: 1e-6,
    tw_nodes: 60,
};

pub const CONTINUUM: ContinuumDefaults = ContinuumDefaults {
    window: AiryWindow {
        left: -12.0,
        right: 6.0,
        panel: 0.5,
        per_panel: 16,
    },
    steps: [64, 128],
};

pub const OPERATOR: OperatorDefaults = OperatorDefaults {
    tolerance: 1e-10,
    expansion_tolerance: 1e-12,
};

pub const MONTE_CARLO: MonteCarloDefaults = MonteCarloDefaults {
    samples: 10_000,
    seed: 20_240_601,
    z_limit: 3.0,
};
