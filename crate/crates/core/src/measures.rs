//! Finite-level Riesz products and the measures built from them.
//!
//! A level-`L` Riesz product has density
//! `Π_{k<L} (1 + Re(a_k R_k^{j_k}))`, which is non-negative with mass one
//! whenever `|a_k| <= 1`. Polynomials in its Fourier coefficients give
//! measures whose coefficients select chaos terms:
//!
//! * [`exponent_selector`] is one on order-`d` terms whose exponents match a
//!   fixed sequence `J` and zero on the other order-`d` terms;
//! * [`order_selector`] is one on order-`s` terms and zero on every other
//!   order up to `d`.
//!
//! A measure of the form `c_0 δ_0 + c_1 ρ + c_2 ρ∗ρ + …` has coefficients
//! `Σ c_i ρ̂^i`, so both are evaluated coefficient by coefficient and never
//! by repeated convolution. Every statement about indices below `p^L` is an
//! exact finite identity at level `L`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interp::{divided_differences, horner, lagrange, newton_to_monomial};
use crate::padic::{cell_count, check_base};
use crate::tol;
use crate::transform::{forward, inverse, roots_table, Spectrum, StepFunction};

/// How a measure was built; stored alongside serialized spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Provenance {
    Riesz {
        a: Vec<Complex64>,
        j: Vec<usize>,
    },
    ExponentSelector {
        d: usize,
        j: Vec<usize>,
        c: Vec<Complex64>,
    },
    UniformDigit,
    OrderSelector {
        d: usize,
        s: usize,
        c: Vec<f64>,
    },
    SignTwisted {
        j: Vec<usize>,
        signs: Vec<i8>,
    },
    Dirac,
    Raw,
}

/// A finite-level measure given by its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRep {
    pub spectrum: Spectrum,
    /// `p^{-L} Σ_c |density[c]|`.
    pub variation: f64,
    pub provenance: Provenance,
}

impl MeasureRep {
    pub fn from_spectrum(spectrum: Spectrum, provenance: Provenance) -> Self {
        let variation = inverse(&spectrum).l1_norm();
        Self {
            spectrum,
            variation,
            provenance,
        }
    }

    pub fn dirac(p: usize, level: usize) -> Result<Self> {
        Ok(Self::from_spectrum(
            Spectrum::dirac(p, level)?,
            Provenance::Dirac,
        ))
    }

    pub fn density(&self) -> StepFunction {
        inverse(&self.spectrum)
    }

    pub fn base(&self) -> usize {
        self.spectrum.base()
    }

    pub fn level(&self) -> usize {
        self.spectrum.level()
    }

    /// A priori bound on the variation: one for Riesz products, `‖c‖_1` for
    /// polynomial combinations of them.
    pub fn variation_bound(&self) -> f64 {
        match &self.provenance {
            Provenance::Riesz { .. }
            | Provenance::UniformDigit
            | Provenance::SignTwisted { .. }
            | Provenance::Dirac => 1.0,
            Provenance::ExponentSelector { c, .. } => c.iter().map(|v| v.norm()).sum(),
            Provenance::OrderSelector { c, .. } => c.iter().map(|v| v.abs()).sum(),
            Provenance::Raw => self.variation,
        }
    }
}

/// Total variation of the finite-level measure.
pub fn total_variation(m: &MeasureRep) -> f64 {
    inverse(&m.spectrum).l1_norm()
}

/// `R^j` is real-valued exactly when `2j ≡ 0 (mod p)`.
pub fn is_self_conjugate(p: usize, j: usize) -> bool {
    (2 * j).is_multiple_of(p)
}

fn check_exponents(p: usize, level: usize, j: &[usize]) -> Result<()> {
    if j.len() != level {
        return Err(Error::InvalidArgument(format!(
            "exponent sequence has length {}, level is {level}",
            j.len()
        )));
    }
    if let Some((index, &value)) = j.iter().enumerate().find(|(_, &v)| v == 0 || v >= p) {
        return Err(Error::ExponentOutOfRange { index, value });
    }
    Ok(())
}

/// Density of a product of independent per-digit factors; `factors[k][c]` is
/// the factor for position `k` on digit value `c`.
fn tensor_density(p: usize, level: usize, factors: &[Vec<f64>]) -> Result<StepFunction> {
    let n = cell_count(p, level)?;
    let mut values = Vec::with_capacity(n);
    values.push(1.0);
    // c_1 is the most significant digit of the cell index, so it goes first
    for f in factors {
        let prev = std::mem::take(&mut values);
        values.reserve(prev.len() * p);
        for v in prev {
            values.extend(f.iter().map(|&x| v * x));
        }
    }
    StepFunction::from_real(p, level, &values)
}

/// `Π_{k<L} (1 + Re(a_k R_k^{j_k}))` on the `p^L` cells.
pub fn riesz_density(p: usize, level: usize, a: &[Complex64], j: &[usize]) -> Result<StepFunction> {
    check_base(p)?;
    if a.len() != level {
        return Err(Error::InvalidArgument(format!(
            "coefficient sequence has length {}, level is {level}",
            a.len()
        )));
    }
    check_exponents(p, level, j)?;
    if let Some((index, v)) = a
        .iter()
        .enumerate()
        .find(|(_, v)| v.norm() > 1.0 + tol::MODULUS_SLACK)
    {
        return Err(Error::CoefficientOutOfRange {
            index,
            modulus: v.norm(),
        });
    }
    let roots = roots_table(p);
    let factors: Vec<Vec<f64>> = a
        .iter()
        .zip(j)
        .map(|(ak, &jk)| {
            (0..p)
                .map(|c| 1.0 + (ak * roots[(jk * c) % p]).re)
                .collect()
        })
        .collect();
    tensor_density(p, level, &factors)
}

pub fn riesz_measure(p: usize, level: usize, a: &[Complex64], j: &[usize]) -> Result<MeasureRep> {
    let density = riesz_density(p, level, a, j)?;
    Ok(MeasureRep::from_spectrum(
        forward(&density),
        Provenance::Riesz {
            a: a.to_vec(),
            j: j.to_vec(),
        },
    ))
}

/// The primitive `(2d+1)`-th root of unity driving the exponent selector.
pub fn selector_root(d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / (2 * d + 1) as f64)
}

/// Largest order for which interpolation nodes are generated.
pub const MAX_SELECTOR_ORDER: usize = 6;

/// One interpolation node `t_{li} = a^{2i-(d-l)} / 2^{d-l}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorNode {
    /// Number of self-conjugate factors.
    pub l: usize,
    pub i: usize,
    pub value: Complex64,
    /// One exactly on the node reached by fully matched exponents.
    pub target: Complex64,
}

/// Nodes `t_{li}` for `l ∈ 0..=d`, `i ∈ 0..=d-l`, in that order.
///
/// These are the only nonzero values the base Riesz product's coefficients
/// take on order-`d` indices.
pub fn selector_nodes(d: usize) -> Vec<SelectorNode> {
    let modulus = (2 * d + 1) as i64;
    let mut out = Vec::with_capacity((d + 1) * (d + 2) / 2);
    for l in 0..=d {
        let free = d - l;
        for i in 0..=free {
            let e = (2 * i as i64 - free as i64).rem_euclid(modulus);
            let value = Complex64::from_polar(
                2f64.powi(-(free as i32)),
                2.0 * PI * e as f64 / modulus as f64,
            );
            let target = if i == free { 1.0 } else { 0.0 };
            out.push(SelectorNode {
                l,
                i,
                value,
                target: Complex64::new(target, 0.0),
            });
        }
    }
    out
}

/// Checks that the nodes (together with 0) are pairwise distinct, both
/// arithmetically and numerically. Returns the minimal pairwise distance.
pub fn selector_nodes_distinct(d: usize) -> Result<f64> {
    let nodes = selector_nodes(d);
    let modulus = (2 * d + 1) as i64;
    // distinct moduli 2^{-(d-l)} separate different l; within one l the
    // exponents 2i-(d-l) differ by 2(i-i') with 1 <= |i-i'| <= d
    let mut keys: Vec<(usize, i64)> = nodes
        .iter()
        .map(|n| (n.l, (2 * n.i as i64 - (d - n.l) as i64).rem_euclid(modulus)))
        .collect();
    keys.sort();
    if keys.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateInput(format!(
            "repeated node for order {d}"
        )));
    }
    let mut values: Vec<Complex64> = nodes.iter().map(|n| n.value).collect();
    values.push(Complex64::new(0.0, 0.0));
    let mut min = f64::INFINITY;
    for (i, x) in values.iter().enumerate() {
        for y in &values[i + 1..] {
            min = min.min((x - y).norm());
        }
    }
    if !(min > 1e-12) {
        return Err(Error::DegenerateInput(format!(
            "nodes for order {d} are numerically coincident (min gap {min:e})"
        )));
    }
    Ok(min)
}

/// The square Vandermonde system whose solution `c` makes `Σ c_i ρ̂^i` the
/// exponent selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VandermondeSystem {
    pub d: usize,
    /// `0` followed by the `t_{li}`.
    pub nodes: Vec<Complex64>,
    pub targets: Vec<Complex64>,
    /// Monomial coefficients `c_0 … c_{(d+1)(d+2)/2}`.
    pub solution: Vec<Complex64>,
    /// `max |T c - b|`.
    pub residual: f64,
}

impl VandermondeSystem {
    pub fn degree(&self) -> usize {
        self.solution.len() - 1
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        horner(&self.solution, t)
    }

    pub fn l1_norm(&self) -> f64 {
        self.solution.iter().map(|c| c.norm()).sum()
    }
}

/// Solves the selector system for order `d` by Newton divided differences.
pub fn selector_system(d: usize) -> Result<VandermondeSystem> {
    selector_system_with(d, tol::SOLVE_RESIDUAL)
}

pub fn selector_system_with(d: usize, max_residual: f64) -> Result<VandermondeSystem> {
    if d == 0 || d > MAX_SELECTOR_ORDER {
        return Err(Error::InvalidOrder(format!(
            "selector order {d} outside 1..={MAX_SELECTOR_ORDER}"
        )));
    }
    selector_nodes_distinct(d)?;
    let zero = Complex64::new(0.0, 0.0);
    let (mut nodes, mut targets) = (vec![zero], vec![zero]);
    for n in selector_nodes(d) {
        nodes.push(n.value);
        targets.push(n.target);
    }
    let dd = divided_differences(&nodes, &targets);
    let solution = newton_to_monomial(&nodes, &dd);
    let residual = nodes
        .iter()
        .zip(&targets)
        .map(|(&t, &b)| (horner(&solution, t) - b).norm())
        .fold(0.0, f64::max);
    if !(residual <= max_residual) {
        return Err(Error::IllConditionedSystem { d, residual });
    }
    Ok(VandermondeSystem {
        d,
        nodes,
        targets,
        solution,
        residual,
    })
}

/// The Riesz product underlying the exponent selector: `a_k = exp(2πi/(2d+1))`
/// where `R_k^{j_k}` is complex and `a_k = 1` where it is real.
pub fn exponent_selector_base(p: usize, d: usize, j: &[usize], level: usize) -> Result<MeasureRep> {
    check_base(p)?;
    check_exponents(p, level, j)?;
    let a = selector_root(d);
    let coeffs: Vec<Complex64> = j
        .iter()
        .map(|&jk| {
            if is_self_conjugate(p, jk) {
                Complex64::new(1.0, 0.0)
            } else {
                a
            }
        })
        .collect();
    riesz_measure(p, level, &coeffs, j)
}

/// Measure with coefficient one on order-`d` indices whose exponents follow
/// `j` and zero on all other order-`d` indices below `p^level`.
pub fn exponent_selector(p: usize, d: usize, j: &[usize], level: usize) -> Result<MeasureRep> {
    let system = selector_system(d)?;
    let base = exponent_selector_base(p, d, j, level)?;
    Ok(exponent_selector_from(&base, &system, j))
}

pub fn exponent_selector_from(
    base: &MeasureRep,
    system: &VandermondeSystem,
    j: &[usize],
) -> MeasureRep {
    let c = system.solution.clone();
    let spectrum = base.spectrum.map(|r| horner(&c, r));
    MeasureRep::from_spectrum(
        spectrum,
        Provenance::ExponentSelector {
            d: system.d,
            j: j.to_vec(),
            c,
        },
    )
}

/// `Π_k (1 + (R_k + R_k² + … + R_k^{p-1}) / p)`: coefficient `p^{-s}` on every
/// index with `s` nonzero digits.
pub fn uniform_digit_riesz(p: usize, level: usize) -> Result<MeasureRep> {
    check_base(p)?;
    let pf = p as f64;
    let factor: Vec<f64> = (0..p)
        .map(|c| {
            if c == 0 {
                (2.0 * pf - 1.0) / pf
            } else {
                (pf - 1.0) / pf
            }
        })
        .collect();
    let density = tensor_density(p, level, &vec![factor; level])?;
    Ok(MeasureRep::from_spectrum(
        forward(&density),
        Provenance::UniformDigit,
    ))
}

/// Coefficients of the degree-`d` polynomial `P` with `P(0) = 0`,
/// `P(p^{-s}) = 1` and `P(p^{-j}) = 0` for the other `j ∈ 1..=d`.
pub fn order_selector_polynomial(p: usize, d: usize, s: usize) -> Result<Vec<f64>> {
    check_base(p)?;
    if s == 0 || s > d {
        return Err(Error::InvalidOrder(format!("order {s} outside 1..={d}")));
    }
    let mut nodes = vec![0.0];
    let mut values = vec![0.0];
    for j in 1..=d {
        nodes.push((p as f64).powi(-(j as i32)));
        values.push(if j == s { 1.0 } else { 0.0 });
    }
    Ok(lagrange(&nodes, &values))
}

/// Measure with coefficient one on order-`s` indices and zero on indices of
/// every other order `1..=d`.
pub fn order_selector(p: usize, d: usize, s: usize, level: usize) -> Result<MeasureRep> {
    let c = order_selector_polynomial(p, d, s)?;
    let base = uniform_digit_riesz(p, level)?;
    let cc: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spectrum = base.spectrum.map(|r| horner(&cc, r));
    Ok(MeasureRep::from_spectrum(
        spectrum,
        Provenance::OrderSelector { d, s, c },
    ))
}

/// Riesz product with `a_k = ε_k` (or `ε_k / 2` where `R_k^{j_k}` is real), so
/// the coefficient at `Σ j_{k_i} p^{k_i}` is `Π ε_{k_i} / 2^d`.
pub fn sign_twisted_riesz(p: usize, j: &[usize], signs: &[i8], level: usize) -> Result<MeasureRep> {
    check_base(p)?;
    check_exponents(p, level, j)?;
    if signs.len() != level {
        return Err(Error::InvalidArgument(format!(
            "sign sequence has length {}, level is {level}",
            signs.len()
        )));
    }
    if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
        return Err(Error::InvalidArgument(format!("sign {s} is not ±1")));
    }
    let a: Vec<Complex64> = signs
        .iter()
        .zip(j)
        .map(|(&s, &jk)| {
            let v = s as f64;
            Complex64::new(if is_self_conjugate(p, jk) { v / 2.0 } else { v }, 0.0)
        })
        .collect();
    let density = riesz_density(p, level, &a, j)?;
    Ok(MeasureRep::from_spectrum(
        forward(&density),
        Provenance::SignTwisted {
            j: j.to_vec(),
            signs: signs.to_vec(),
        },
    ))
}

/// Literal constructions in the cell domain, quadratic in `p^L`.
pub mod reference {
    use super::*;
    use crate::transform::reference::direct_convolution;

    /// Density of `c_0 δ_0 + c_1 ρ + c_2 ρ∗ρ + …` built by repeated direct
    /// convolution; `δ_0` has density `p^L` on cell 0.
    pub fn convolution_powers(base: &StepFunction, c: &[Complex64]) -> Result<StepFunction> {
        let (p, level) = (base.base(), base.level());
        let n = base.len();
        let mut delta = vec![Complex64::new(0.0, 0.0); n];
        delta[0] = Complex64::new(n as f64, 0.0);
        let mut power = StepFunction::new(p, level, delta)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (i, &ci) in c.iter().enumerate() {
            if i > 0 {
                power = direct_convolution(&power, base)?;
            }
            for (a, v) in acc.iter_mut().zip(power.values()) {
                *a += ci * v;
            }
        }
        StepFunction::new(p, level, acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{enumerate_nd, nonzero_digits};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn riesz_examples() {
        let f = riesz_density(2, 2, &[c(1.0, 0.0), c(1.0, 0.0)], &[1, 1]).unwrap();
        let vals: Vec<f64> = f.values().iter().map(|v| v.re).collect();
        assert_eq!(vals, vec![4.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.integral(), c(1.0, 0.0));

        let f = riesz_density(3, 1, &[c(1.0, 0.0)], &[1]).unwrap();
        let want = [2.0, 0.5, 0.5];
        for (v, w) in f.values().iter().zip(want) {
            assert!((v.re - w).abs() < 1e-15 && v.im == 0.0);
        }

        let f = riesz_density(5, 3, &[c(0.0, 0.0); 3], &[1, 2, 3]).unwrap();
        assert!(f.values().iter().all(|&v| v == c(1.0, 0.0)));
    }

    #[test]
    fn riesz_rejects_bad_input() {
        assert!(matches!(
            riesz_density(3, 1, &[c(1.0, 0.1)], &[1]),
            Err(Error::CoefficientOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            riesz_density(3, 1, &[c(0.5, 0.0)], &[3]),
            Err(Error::ExponentOutOfRange { .. })
        ));
        assert!(riesz_density(3, 2, &[c(0.5, 0.0)], &[1, 1]).is_err());
    }

    #[test]
    fn riesz_coefficients_match_factor_expansion() {
        // coefficient at digit l of position k is a/2 if l = j, conj(a)/2 if l = -j
        let (p, level) = (5, 2);
        let a = [c(0.3, 0.4), c(-0.6, 0.2)];
        let j = [2, 1];
        let m = riesz_measure(p, level, &a, &j).unwrap();
        let s = m.spectrum.coeffs();
        assert!((s[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s[2] - a[0] / 2.0).norm() < 1e-15);
        assert!((s[3] - a[0].conj() / 2.0).norm() < 1e-15);
        assert!((s[5] - a[1] / 2.0).norm() < 1e-15);
        assert!((s[4 * 5] - a[1].conj() / 2.0).norm() < 1e-15);
        assert!(s[1].norm() < 1e-15);
        assert!((s[2 + 5] - a[0] * a[1] / 4.0).norm() < 1e-15);
        assert!((m.variation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selector_system_small_orders() {
        let sys = selector_system(1).unwrap();
        let a = selector_root(1);
        assert_eq!(sys.nodes.len(), 4);
        assert_eq!(sys.degree(), 3);
        let want_nodes = [c(0.0, 0.0), a.conj() / 2.0, a / 2.0, c(1.0, 0.0)];
        for (n, w) in sys.nodes.iter().zip(want_nodes) {
            assert!((n - w).norm() < 1e-15);
        }
        let targets: Vec<f64> = sys.targets.iter().map(|t| t.re).collect();
        assert_eq!(targets, vec![0.0, 0.0, 1.0, 1.0]);
        for d in 1..=3 {
            let sys = selector_system(d).unwrap();
            assert_eq!(sys.degree(), (d + 1) * (d + 2) / 2);
            for (t, b) in sys.nodes.iter().zip(&sys.targets) {
                assert!((sys.eval(*t) - b).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn selector_nodes_distinct_up_to_six() {
        for d in 1..=MAX_SELECTOR_ORDER {
            assert!(selector_nodes_distinct(d).unwrap() > 0.0);
            assert_eq!(selector_nodes(d).len(), (d + 1) * (d + 2) / 2);
        }
    }

    #[test]
    fn selector_system_fails_loudly_when_f64_runs_out() {
        for d in 4..=MAX_SELECTOR_ORDER {
            assert!(matches!(
                selector_system(d),
                Err(Error::IllConditionedSystem { .. })
            ));
        }
        assert!(matches!(selector_system(0), Err(Error::InvalidOrder(_))));
        assert!(matches!(selector_system(7), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn exponent_selector_binary() {
        let nu = exponent_selector(2, 1, &[1; 4], 4).unwrap();
        for k in 0..4 {
            assert!((nu.spectrum.coeffs()[1 << k] - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn exponent_selector_ternary_order_one() {
        let nu = exponent_selector(3, 1, &[1; 4], 4).unwrap();
        for k in 0..4u32 {
            let s = nu.spectrum.coeffs();
            assert!((s[3usize.pow(k)] - c(1.0, 0.0)).norm() < 1e-6);
            assert!(s[2 * 3usize.pow(k)].norm() < 1e-6);
        }
        assert!(nu.variation <= nu.variation_bound() + 1e-8);
    }

    #[test]
    fn base_coefficients_lie_in_node_set() {
        for (p, d) in [(2, 2), (3, 2), (4, 3), (6, 2)] {
            let level = 5;
            let j: Vec<usize> = (0..level).map(|k| 1 + (k * 7 + 3) % (p - 1)).collect();
            let base = exponent_selector_base(p, d, &j, level).unwrap();
            let nodes = selector_nodes(d);
            for t in enumerate_nd(p, d, level - 1).unwrap() {
                let v = base.spectrum.coeffs()[t.paley_value(p)];
                let hit = v.norm() < 1e-8 || nodes.iter().any(|n| (n.value - v).norm() < 1e-8);
                assert!(hit, "p={p} d={d} {t:?} -> {v}");
                // matched terms land on the target-one node
                if t.matches(&j) {
                    let node = nodes.iter().find(|n| (n.value - v).norm() < 1e-8).unwrap();
                    assert_eq!(node.target, c(1.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn order_selector_examples() {
        let poly = order_selector_polynomial(2, 2, 1).unwrap();
        assert!((poly[0]).abs() < 1e-12);
        assert!((poly[1] + 2.0).abs() < 1e-12);
        assert!((poly[2] - 8.0).abs() < 1e-12);
        for p in [2, 3, 7] {
            let lin = order_selector_polynomial(p, 1, 1).unwrap();
            assert!((lin[1] - p as f64).abs() < 1e-12 && lin[0] == 0.0);
        }
        assert!(matches!(
            order_selector_polynomial(3, 2, 3),
            Err(Error::InvalidOrder(_))
        ));

        let (p, level) = (3, 5);
        let nu = order_selector(p, 3, 2, level).unwrap();
        for (m, v) in nu.spectrum.coeffs().iter().enumerate().skip(1) {
            match nonzero_digits(m, p) {
                2 => assert!((v - c(1.0, 0.0)).norm() < 1e-8),
                1 | 3 => assert!(v.norm() < 1e-8),
                _ => {}
            }
        }
    }

    #[test]
    fn uniform_digit_coefficients() {
        let (p, level) = (5, 3);
        let rho = uniform_digit_riesz(p, level).unwrap();
        for (m, v) in rho.spectrum.coeffs().iter().enumerate() {
            let want = (p as f64).powi(-(nonzero_digits(m, p) as i32));
            assert!((v - c(want, 0.0)).norm() < 1e-14);
        }
        assert!((rho.variation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sign_twisted_examples() {
        // p = 3, d = 1, all signs +1: coefficient 1/2 at j_0
        let rho = sign_twisted_riesz(3, &[2, 1], &[1, 1], 2).unwrap();
        assert!((rho.spectrum.coeffs()[2] - c(0.5, 0.0)).norm() < 1e-15);
        // p = 2: real case, a_k halved, coefficient ε_k / 2
        let signs = [1, -1, -1, 1];
        let rho = sign_twisted_riesz(2, &[1; 4], &signs, 4).unwrap();
        for (k, &s) in signs.iter().enumerate() {
            assert!((rho.spectrum.coeffs()[1 << k] - c(s as f64 / 2.0, 0.0)).norm() < 1e-15);
        }
        assert!((rho.variation - 1.0).abs() < 1e-12);
        assert!(sign_twisted_riesz(2, &[1], &[0], 1).is_err());
    }

    #[test]
    fn sign_flip_negates_terms_containing_position() {
        let (p, level) = (4, 3);
        let j = [1, 2, 3];
        let a = sign_twisted_riesz(p, &j, &[1, 1, 1], level).unwrap();
        let b = sign_twisted_riesz(p, &j, &[1, -1, 1], level).unwrap();
        for d in 1..=3 {
            for t in enumerate_nd(p, d, 2)
                .unwrap()
                .into_iter()
                .filter(|t| t.matches(&j))
            {
                let m = t.paley_value(p);
                let flip = if t.positions().contains(&1) {
                    -1.0
                } else {
                    1.0
                };
                assert!((a.spectrum.coeffs()[m] * flip - b.spectrum.coeffs()[m]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dirac_variation_is_one() {
        let m = MeasureRep::dirac(3, 3).unwrap();
        assert!((total_variation(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_polynomial_equals_convolution_powers() {
        for (p, d, level) in [(2, 1, 4), (3, 1, 3), (3, 2, 4), (4, 2, 3)] {
            let j: Vec<usize> = (0..level).map(|k| 1 + k % (p - 1)).collect();
            let base = exponent_selector_base(p, d, &j, level).unwrap();
            let sys = selector_system(d).unwrap();
            let nu = exponent_selector_from(&base, &sys, &j);
            let literal =
                forward(&reference::convolution_powers(&base.density(), &sys.solution).unwrap());
            let err = literal
                .coeffs()
                .iter()
                .zip(nu.spectrum.coeffs())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "p={p} d={d}: {err}");
        }
    }
}
