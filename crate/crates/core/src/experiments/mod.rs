//! Seeded randomized studies of Sidon ratios.
//!
//! Every trial draws from its own ChaCha8 stream keyed by
//! `(seed, p, d, N, trial)`, so results do not depend on how trials are
//! scheduled across threads. Rows are aggregated from trial results in
//! trial order.

mod verify;

pub use verify::{
    exponent_pattern_residual, order_pattern_residual, random_exponents, random_mixed, random_pure,
    verify_suite, CheckEntry, CheckStatus, Fault, VerifyConfig, VerifyReport,
};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::format::FORMAT_VERSION;
use crate::measures::selector_system;
use crate::padic::{cell_count_with_limit, check_base, enumerate_nd, ChaosTerm, MAX_CELLS};
use crate::poly::{l1_ratio, linf_norm, lq_norm, ChaosPolynomial};

/// Largest factor allowed between the extreme ℓ_{2d/(d+1)} medians of a
/// growth study.
pub const GROWTH_BAND_LIMIT: f64 = 2.0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for the stream named by `seed` and `path`.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let key = path
        .iter()
        .fold(splitmix64(seed), |acc, &x| splitmix64(acc ^ splitmix64(x)));
    ChaCha8Rng::seed_from_u64(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Independent ±1 coefficients.
    RealSigns,
    /// Independent uniformly distributed phases.
    UnimodularComplex,
}

impl Ensemble {
    pub fn draw(self, rng: &mut impl Rng) -> Complex64 {
        match self {
            Ensemble::RealSigns => Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0),
            Ensemble::UnimodularComplex => Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Ensemble::RealSigns => "real-signs",
            Ensemble::UnimodularComplex => "unimodular-complex",
        }
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real-signs" | "signs" => Ok(Ensemble::RealSigns),
            "unimodular-complex" | "complex" => Ok(Ensemble::UnimodularComplex),
            other => Err(Error::InvalidArgument(format!(
                "unknown ensemble `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub ensemble: Ensemble,
    /// Guard on `p^{N+1}`.
    pub max_cells: usize,
}

impl ExperimentConfig {
    pub fn new(p: usize, d: usize, n_values: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            p,
            d,
            n_values,
            trials,
            seed,
            ensemble: Ensemble::RealSigns,
            max_cells: MAX_CELLS,
        }
    }

    pub fn with_ensemble(mut self, ensemble: Ensemble) -> Self {
        self.ensemble = ensemble;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_base(self.p)?;
        if self.d == 0 {
            return Err(Error::InvalidOrder("chaos order must be at least 1".into()));
        }
        for &n in &self.n_values {
            if self.d > n + 1 {
                return Err(Error::EmptyIndexSet {
                    d: self.d,
                    n_max: n,
                });
            }
            cell_count_with_limit(self.p, n + 1, self.max_cells)?;
        }
        Ok(())
    }
}

/// Summary of all trials at one `(p, d, N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub p: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// `ℓ_{2d/(d+1)}` ratio statistics.
    pub median_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `ℓ_1` ratio statistics.
    pub l1_median: f64,
    pub l1_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerdict {
    pub l1_medians: Vec<f64>,
    pub lq_medians: Vec<f64>,
    /// `None` for `d = 1`, where both ratios are bounded.
    pub l1_strictly_increasing: Option<bool>,
    pub band_ratio: f64,
    pub band_limit: f64,
    pub failures: Vec<String>,
}

impl GrowthVerdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Reference constants for a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBaseline {
    /// `‖c‖_1` of the exponent selector of order `d`, when it is solvable in
    /// double precision.
    pub selector_l1: Option<f64>,
    /// Largest `ℓ_{2d/(d+1)}` ratio observed in this report.
    pub ratio_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub exponent: f64,
    pub rows: Vec<StudyRow>,
    pub baseline: ReportBaseline,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthVerdict>,
    /// Seconds per row; not part of the reproducible content.
    pub wall_time: Vec<f64>,
}

/// One CSV line: a single statistic of a single row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub format_version: u32,
    pub p: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub statistic: String,
    pub value: f64,
    pub trials: usize,
    pub seed: u64,
    pub ensemble: String,
}

impl ExperimentReport {
    pub fn csv_records(&self) -> Vec<CsvRecord> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (name, value) in [
                ("median_ratio", row.median_ratio),
                ("min_ratio", row.min_ratio),
                ("max_ratio", row.max_ratio),
                ("l1_median", row.l1_median),
                ("l1_max", row.l1_max),
            ] {
                out.push(CsvRecord {
                    format_version: FORMAT_VERSION,
                    p: row.p,
                    d: row.d,
                    n: row.n,
                    statistic: name.to_string(),
                    value,
                    trials: row.trials,
                    seed: row.seed,
                    ensemble: self.config.ensemble.name().to_string(),
                });
            }
        }
        out
    }
}

/// Random polynomial over every order-`d` term with positions `0..=n`.
pub fn random_polynomial(
    p: usize,
    d: usize,
    n: usize,
    ensemble: Ensemble,
    rng: &mut impl Rng,
) -> Result<ChaosPolynomial> {
    let terms = enumerate_nd(p, d, n)?;
    random_on_terms(p, n, terms, ensemble, rng)
}

pub fn random_on_terms(
    p: usize,
    n: usize,
    terms: Vec<ChaosTerm>,
    ensemble: Ensemble,
    rng: &mut impl Rng,
) -> Result<ChaosPolynomial> {
    ChaosPolynomial::from_terms(p, n, terms.into_iter().map(|t| (t, ensemble.draw(rng))))
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn run_row(cfg: &ExperimentConfig, n: usize, exponent: f64) -> Result<StudyRow> {
    let terms = enumerate_nd(cfg.p, cfg.d, n)?;
    let results: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(
                cfg.seed,
                &[cfg.p as u64, cfg.d as u64, n as u64, trial as u64],
            );
            let q = random_on_terms(cfg.p, n, terms.clone(), cfg.ensemble, &mut rng)?;
            let (sup, _) = linf_norm(&q)?;
            let lq = lq_norm(q.coefficients(), exponent)?;
            if sup == 0.0 {
                return Err(Error::DegenerateInput("drew a zero polynomial".into()));
            }
            Ok((lq / sup, l1_ratio(&q)?))
        })
        .collect::<Result<_>>()?;

    let mut lq: Vec<f64> = results.iter().map(|r| r.0).collect();
    let mut l1: Vec<f64> = results.iter().map(|r| r.1).collect();
    lq.sort_by(f64::total_cmp);
    l1.sort_by(f64::total_cmp);
    Ok(StudyRow {
        p: cfg.p,
        d: cfg.d,
        n,
        trials: cfg.trials,
        seed: cfg.seed,
        median_ratio: median(&lq),
        min_ratio: lq[0],
        max_ratio: lq[lq.len() - 1],
        l1_median: median(&l1),
        l1_max: l1[l1.len() - 1],
    })
}

/// Draws `trials` random polynomials per `N` and records
/// `‖C‖_{2d/(d+1)} / ‖Q‖_∞` and `‖C‖_1 / ‖Q‖_∞`.
pub fn random_ensemble_study(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let exponent = 2.0 * cfg.d as f64 / (cfg.d as f64 + 1.0);
    let mut rows = Vec::new();
    let mut wall_time = Vec::new();
    if cfg.trials > 0 {
        for &n in &cfg.n_values {
            let start = Instant::now();
            rows.push(run_row(cfg, n, exponent)?);
            wall_time.push(start.elapsed().as_secs_f64());
        }
    }
    let ratio_cap = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(ExperimentReport {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        exponent,
        rows,
        baseline: ReportBaseline {
            selector_l1: selector_system(cfg.d).ok().map(|s| s.l1_norm()),
            ratio_cap,
        },
        growth: None,
        wall_time,
    })
}

/// Ensemble study across `N` plus the growth verdict: for `d >= 2` the
/// `ℓ_1` median must increase strictly with `N`, and the
/// `ℓ_{2d/(d+1)}` medians must stay within a factor [`GROWTH_BAND_LIMIT`].
pub fn growth_study(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut cfg = cfg.clone();
    cfg.n_values.sort_unstable();
    cfg.n_values.dedup();
    let mut report = random_ensemble_study(&cfg)?;
    report.growth = Some(growth_verdict(&report.rows, cfg.d));
    Ok(report)
}

pub fn growth_verdict(rows: &[StudyRow], d: usize) -> GrowthVerdict {
    let l1_medians: Vec<f64> = rows.iter().map(|r| r.l1_median).collect();
    let lq_medians: Vec<f64> = rows.iter().map(|r| r.median_ratio).collect();
    let mut failures = Vec::new();
    let l1_strictly_increasing = if d >= 2 {
        let ok = l1_medians.windows(2).all(|w| w[1] > w[0]);
        if !ok {
            failures.push(format!(
                "l1 medians not strictly increasing: {l1_medians:?}"
            ));
        }
        Some(ok)
    } else {
        None
    };
    let hi = lq_medians.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = lq_medians.iter().copied().fold(f64::INFINITY, f64::min);
    let band_ratio = if lq_medians.is_empty() { 1.0 } else { hi / lo };
    if !(band_ratio <= GROWTH_BAND_LIMIT) {
        failures.push(format!(
            "l_q median band {band_ratio} exceeds {GROWTH_BAND_LIMIT}"
        ));
    }
    GrowthVerdict {
        l1_medians,
        lq_medians,
        l1_strictly_increasing,
        band_ratio,
        band_limit: GROWTH_BAND_LIMIT,
        failures,
    }
}

/// A committed reference value for regression checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub p: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub ensemble: Ensemble,
    pub median_ratio: f64,
    pub max_ratio: f64,
    pub l1_median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSet {
    pub format_version: u32,
    /// Allowed relative drift.
    pub drift: f64,
    pub entries: Vec<BaselineEntry>,
}

impl BaselineSet {
    /// Compares every matching row with its baseline. A row fails when a
    /// statistic drifts by more than `drift` or its max ratio exceeds the
    /// recorded cap scaled by `1 + drift`.
    pub fn check(&self, report: &ExperimentReport) -> Vec<String> {
        let mut failures = Vec::new();
        for row in &report.rows {
            let Some(base) = self.entries.iter().find(|b| {
                b.p == row.p
                    && b.d == row.d
                    && b.n == row.n
                    && b.trials == row.trials
                    && b.seed == row.seed
                    && b.ensemble == report.config.ensemble
            }) else {
                continue;
            };
            for (name, got, want) in [
                ("median_ratio", row.median_ratio, base.median_ratio),
                ("max_ratio", row.max_ratio, base.max_ratio),
                ("l1_median", row.l1_median, base.l1_median),
            ] {
                let drift = (got - want).abs() / want.abs();
                if !(drift <= self.drift) {
                    failures.push(format!(
                        "p={} d={} N={}: {name} {got} drifted {:.2}% from {want}",
                        row.p,
                        row.d,
                        row.n,
                        100.0 * drift
                    ));
                }
            }
            if row.max_ratio > base.max_ratio * (1.0 + self.drift) {
                failures.push(format!(
                    "p={} d={} N={}: max ratio {} above cap {}",
                    row.p, row.d, row.n, row.max_ratio, base.max_ratio
                ));
            }
        }
        failures
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_distinct_and_stable() {
        let a: u64 = substream(1, &[2, 3]).gen();
        let b: u64 = substream(1, &[2, 3]).gen();
        let c: u64 = substream(1, &[3, 2]).gen();
        let d: u64 = substream(2, &[2, 3]).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn binary_order_one_is_exact() {
        let cfg = ExperimentConfig::new(2, 1, vec![3, 6], 25, 9);
        let report = random_ensemble_study(&cfg).unwrap();
        for row in &report.rows {
            assert!((row.max_ratio - 1.0).abs() < 1e-12);
            assert!((row.min_ratio - 1.0).abs() < 1e-12);
            assert!((row.l1_median - 1.0).abs() < 1e-12);
        }
        let growth = growth_study(&cfg).unwrap().growth.unwrap();
        assert!(growth.passed());
        assert_eq!(growth.l1_strictly_increasing, None);
    }

    #[test]
    fn zero_trials_give_empty_report() {
        let report = random_ensemble_study(&ExperimentConfig::new(3, 2, vec![4], 0, 1)).unwrap();
        assert!(report.rows.is_empty());
        assert!(report.csv_records().is_empty());
    }

    #[test]
    fn guards_are_enforced() {
        let mut cfg = ExperimentConfig::new(2, 2, vec![30], 1, 1);
        assert!(matches!(cfg.validate(), Err(Error::TooManyCells { .. })));
        cfg.n_values = vec![0];
        assert!(matches!(cfg.validate(), Err(Error::EmptyIndexSet { .. })));
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = ExperimentConfig::new(3, 2, vec![3, 4], 12, 77)
            .with_ensemble(Ensemble::UnimodularComplex);
        let a = random_ensemble_study(&cfg).unwrap();
        let b = random_ensemble_study(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = single.install(|| random_ensemble_study(&cfg).unwrap());
        assert_eq!(a.rows, c.rows);
    }

    #[test]
    fn baseline_drift_is_detected() {
        let cfg = ExperimentConfig::new(2, 2, vec![4], 20, 3);
        let report = random_ensemble_study(&cfg).unwrap();
        let row = &report.rows[0];
        let mut set = BaselineSet {
            format_version: FORMAT_VERSION,
            drift: 0.05,
            entries: vec![BaselineEntry {
                p: 2,
                d: 2,
                n: 4,
                trials: 20,
                seed: 3,
                ensemble: Ensemble::RealSigns,
                median_ratio: row.median_ratio,
                max_ratio: row.max_ratio,
                l1_median: row.l1_median,
            }],
        };
        assert!(set.check(&report).is_empty());
        set.entries[0].median_ratio *= 1.2;
        assert_eq!(set.check(&report).len(), 1);
    }
}
