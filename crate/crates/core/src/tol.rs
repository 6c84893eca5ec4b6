//! Shared numerical tolerances.
//!
//! Every check in the crate reads its threshold from here, either from the
//! constants directly or from a [`Tolerances`] value that callers may
//! override per check.

use serde::{Deserialize, Serialize};

/// Identities of the measure constructions (selector measures, projections).
pub const CONSTRUCTION: f64 = 1e-8;
/// Transform identities: round trips, Parseval, spectral convolution.
pub const TRANSFORM: f64 = 1e-10;
/// Maximum residual accepted from the Vandermonde solve.
pub const SOLVE_RESIDUAL: f64 = 1e-6;
/// Coefficient pattern of the exponent selector measure.
pub const SELECTOR_PATTERN: f64 = 1e-6;
/// Mass, integral and positivity of Riesz products.
pub const RIESZ_MASS: f64 = 1e-12;
/// Fast transform against the naive sum, relative.
pub const FAST_VS_NAIVE: f64 = 1e-12;
/// Slack added to Young-type norm inequalities.
pub const YOUNG_SLACK: f64 = 1e-8;
/// Exact Sidon identity for real Rademacher sums.
pub const EXACT_SIDON: f64 = 1e-12;
/// Modulus slack when validating |a_k| <= 1.
pub const MODULUS_SLACK: f64 = 1e-12;

/// Per-check thresholds used by the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub transform: f64,
    pub fast_vs_naive: f64,
    pub riesz_mass: f64,
    pub selector_pattern: f64,
    pub construction: f64,
    pub decomposition: f64,
    pub sign_scaling: f64,
    pub young_slack: f64,
    pub exact_sidon: f64,
    pub solve_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            transform: TRANSFORM,
            fast_vs_naive: FAST_VS_NAIVE,
            riesz_mass: RIESZ_MASS,
            selector_pattern: SELECTOR_PATTERN,
            construction: CONSTRUCTION,
            decomposition: TRANSFORM,
            sign_scaling: TRANSFORM,
            young_slack: YOUNG_SLACK,
            exact_sidon: EXACT_SIDON,
            solve_residual: SOLVE_RESIDUAL,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 10] = [
        "transform",
        "fast_vs_naive",
        "riesz_mass",
        "selector_pattern",
        "construction",
        "decomposition",
        "sign_scaling",
        "young_slack",
        "exact_sidon",
        "solve_residual",
    ];

    /// Overrides a single tolerance by name. Returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "transform" => &mut self.transform,
            "fast_vs_naive" => &mut self.fast_vs_naive,
            "riesz_mass" => &mut self.riesz_mass,
            "selector_pattern" => &mut self.selector_pattern,
            "construction" => &mut self.construction,
            "decomposition" => &mut self.decomposition,
            "sign_scaling" => &mut self.sign_scaling,
            "young_slack" => &mut self.young_slack,
            "exact_sidon" => &mut self.exact_sidon,
            "solve_residual" => &mut self.solve_residual,
            _ => return false,
        };
        *slot = value;
        true
    }
}
