//! Polynomials in generalized Rademacher chaos and their norms.
//!
//! A [`ChaosPolynomial`] with maximal position `N` is a cylinder function of
//! level `N + 1`, so its sup norm is an exact maximum over `p^{N+1}` cells.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measures::{exponent_selector, order_selector, sign_twisted_riesz, MeasureRep};
use crate::padic::{cell_count, check_base, enumerate_nd, CellIndex, ChaosTerm};
use crate::transform::{convolve, forward, inverse, Spectrum, StepFunction};

/// Largest number of exponent sequences summed by [`decomposition_residual`].
pub const MAX_EXPONENT_SEQUENCES: u128 = 1_000_000;

/// `Σ C^{l}_{k} R_{k_1}^{l_1} ⋯ R_{k_d}^{l_d}` over terms of one or more orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosPolynomial {
    p: usize,
    n_max: usize,
    by_order: BTreeMap<usize, BTreeMap<ChaosTerm, Complex64>>,
}

impl ChaosPolynomial {
    pub fn new(p: usize, n_max: usize) -> Result<Self> {
        check_base(p)?;
        Ok(Self {
            p,
            n_max,
            by_order: BTreeMap::new(),
        })
    }

    pub fn from_terms(
        p: usize,
        n_max: usize,
        terms: impl IntoIterator<Item = (ChaosTerm, Complex64)>,
    ) -> Result<Self> {
        let mut q = Self::new(p, n_max)?;
        for (t, c) in terms {
            q.insert(t, c)?;
        }
        Ok(q)
    }

    /// Sets the coefficient of `term`, replacing any previous value.
    pub fn insert(&mut self, term: ChaosTerm, coeff: Complex64) -> Result<()> {
        if term.max_position() > self.n_max {
            return Err(Error::MalformedIndex(format!(
                "term {term:?} reaches past position {}",
                self.n_max
            )));
        }
        if let Some((index, &value)) = term
            .exponents()
            .iter()
            .enumerate()
            .find(|(_, &l)| l >= self.p)
        {
            return Err(Error::ExponentOutOfRange { index, value });
        }
        self.by_order
            .entry(term.order())
            .or_default()
            .insert(term, coeff);
        Ok(())
    }

    pub fn base(&self) -> usize {
        self.p
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Level on which the polynomial is exactly represented.
    pub fn level(&self) -> usize {
        self.n_max + 1
    }

    pub fn coeff(&self, term: &ChaosTerm) -> Complex64 {
        self.by_order
            .get(&term.order())
            .and_then(|m| m.get(term))
            .copied()
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.by_order.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn orders(&self) -> Vec<usize> {
        self.by_order
            .iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|(&d, _)| d)
            .collect()
    }

    pub fn max_order(&self) -> Option<usize> {
        self.orders().last().copied()
    }

    /// The order when every term has the same order.
    pub fn pure_order(&self) -> Option<usize> {
        match self.orders().as_slice() {
            [d] => Some(*d),
            _ => None,
        }
    }

    /// Terms by increasing order, lexicographic within an order.
    pub fn iter(&self) -> impl Iterator<Item = (&ChaosTerm, &Complex64)> {
        self.by_order.values().flat_map(|m| m.iter())
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.iter().map(|(_, &c)| c).collect()
    }

    /// `2d/(d+1)` for the largest order present.
    pub fn sidon_exponent(&self) -> Option<f64> {
        self.max_order().map(|d| 2.0 * d as f64 / (d as f64 + 1.0))
    }

    pub fn order_part(&self, s: usize) -> Self {
        let mut by_order = BTreeMap::new();
        if let Some(m) = self.by_order.get(&s) {
            if !m.is_empty() {
                by_order.insert(s, m.clone());
            }
        }
        Self {
            p: self.p,
            n_max: self.n_max,
            by_order,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for m in out.by_order.values_mut() {
            for c in m.values_mut() {
                *c *= factor;
            }
        }
        out
    }

    /// Places the coefficients at their Paley indices.
    pub fn to_spectrum(&self, level: usize) -> Result<Spectrum> {
        if level < self.level() {
            return Err(Error::InsufficientLevel {
                have: level,
                need: self.level(),
            });
        }
        let mut s = Spectrum::zeros(self.p, level)?;
        let coeffs = s.coeffs_mut();
        for (t, &c) in self.iter() {
            coeffs[t.paley_value(self.p)] += c;
        }
        Ok(s)
    }

    /// Reads the coefficients of `terms` out of a spectrum.
    pub fn from_spectrum(
        spectrum: &Spectrum,
        n_max: usize,
        terms: impl IntoIterator<Item = ChaosTerm>,
    ) -> Result<Self> {
        let p = spectrum.base();
        if spectrum.level() < n_max + 1 {
            return Err(Error::InsufficientLevel {
                have: spectrum.level(),
                need: n_max + 1,
            });
        }
        let mut q = Self::new(p, n_max)?;
        for t in terms {
            let c = spectrum.coeffs()[t.paley_value(p)];
            q.insert(t, c)?;
        }
        Ok(q)
    }
}

/// Largest coefficient difference over the union of both term sets.
pub fn max_coeff_diff(a: &ChaosPolynomial, b: &ChaosPolynomial) -> f64 {
    let left = a.iter().map(|(t, c)| (c - b.coeff(t)).norm());
    let right = b.iter().map(|(t, c)| (c - a.coeff(t)).norm());
    left.chain(right).fold(0.0, f64::max)
}

/// The polynomial as a step function of the given level.
pub fn synthesize(q: &ChaosPolynomial, level: usize) -> Result<StepFunction> {
    Ok(inverse(&q.to_spectrum(level)?))
}

/// Exact `‖Q‖_∞` and the first cell attaining it.
pub fn linf_norm(q: &ChaosPolynomial) -> Result<(f64, CellIndex)> {
    cell_count(q.base(), q.level())?;
    let f = synthesize(q, q.level())?;
    let (norm, index) = f.linf_norm();
    Ok((
        norm,
        CellIndex {
            p: q.base(),
            level: q.level(),
            index,
        },
    ))
}

/// `(Σ |c|^q)^{1/q}`.
pub fn lq_norm(coeffs: impl IntoIterator<Item = Complex64>, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidExponent(q));
    }
    let sum: f64 = coeffs.into_iter().map(|c| c.norm().powf(q)).sum();
    Ok(sum.powf(1.0 / q))
}

fn ratio_with(q: &ChaosPolynomial, exponent: f64) -> Result<f64> {
    let (sup, _) = linf_norm(q)?;
    if q.is_empty() || sup == 0.0 {
        return Err(Error::DegenerateInput(
            "polynomial is identically zero".into(),
        ));
    }
    Ok(lq_norm(q.coefficients(), exponent)? / sup)
}

/// `‖C‖_{ℓ_{2d/(d+1)}} / ‖Q‖_∞`, with `d` the largest order present.
pub fn sidon_ratio(q: &ChaosPolynomial) -> Result<f64> {
    let exponent = q
        .sidon_exponent()
        .ok_or_else(|| Error::DegenerateInput("polynomial has no terms".into()))?;
    ratio_with(q, exponent)
}

/// `‖C‖_{ℓ_1} / ‖Q‖_∞`.
pub fn l1_ratio(q: &ChaosPolynomial) -> Result<f64> {
    ratio_with(q, 1.0)
}

fn require_pure(q: &ChaosPolynomial) -> Result<usize> {
    q.pure_order().ok_or_else(|| {
        Error::InvalidOrder(format!(
            "expected a single chaos order, found {:?}",
            q.orders()
        ))
    })
}

fn check_sequence(q: &ChaosPolynomial, j: &[usize]) -> Result<()> {
    if j.len() != q.level() {
        return Err(Error::LevelMismatch {
            left: (q.base(), j.len()),
            right: (q.base(), q.level()),
        });
    }
    if let Some((index, &value)) = j.iter().enumerate().find(|(_, &v)| v == 0 || v >= q.base()) {
        return Err(Error::ExponentOutOfRange { index, value });
    }
    Ok(())
}

/// Keeps exactly the terms whose exponents agree with `j` at their positions.
pub fn project_exponents(q: &ChaosPolynomial, j: &[usize]) -> Result<ChaosPolynomial> {
    check_sequence(q, j)?;
    ChaosPolynomial::from_terms(
        q.base(),
        q.n_max(),
        q.iter()
            .filter(|(t, _)| t.matches(j))
            .map(|(t, &c)| (t.clone(), c)),
    )
}

/// `Q ∗ ν` for the exponent selector `ν`, read back on every order-`d` term.
pub fn project_exponents_by_convolution(
    q: &ChaosPolynomial,
    j: &[usize],
) -> Result<ChaosPolynomial> {
    let d = require_pure(q)?;
    check_sequence(q, j)?;
    let nu = exponent_selector(q.base(), d, j, q.level())?;
    let smoothed = convolve(&forward(&synthesize(q, q.level())?), &nu.spectrum)?;
    ChaosPolynomial::from_spectrum(&smoothed, q.n_max(), enumerate_nd(q.base(), d, q.n_max())?)
}

/// `Q ∗ ν` as a step function on the measure's level.
pub fn convolve_with(q: &ChaosPolynomial, nu: &MeasureRep) -> Result<StepFunction> {
    if nu.base() != q.base() {
        return Err(Error::LevelMismatch {
            left: (q.base(), q.level()),
            right: (nu.base(), nu.level()),
        });
    }
    let f = synthesize(q, nu.level())?;
    Ok(inverse(&convolve(&forward(&f), &nu.spectrum)?))
}

/// Both sides of `‖Q ∗ ν‖_∞ <= ‖ν‖ ‖Q‖_∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoungCheck {
    pub smoothed_sup: f64,
    pub variation: f64,
    pub sup: f64,
}

impl YoungCheck {
    pub fn bound(&self) -> f64 {
        self.variation * self.sup
    }

    pub fn excess(&self) -> f64 {
        self.smoothed_sup - self.bound()
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.excess() <= slack
    }
}

pub fn young_check(q: &ChaosPolynomial, nu: &MeasureRep) -> Result<YoungCheck> {
    let smoothed_sup = convolve_with(q, nu)?.linf_norm().0;
    let (sup, _) = linf_norm(q)?;
    Ok(YoungCheck {
        smoothed_sup,
        variation: nu.variation,
        sup,
    })
}

/// Max coefficient deviation of `Q - (p-1)^{-(N+1-d)} Σ_J Q_J`, summing the
/// exponent projections over all `(p-1)^{N+1}` sequences `J`.
pub fn decomposition_residual(q: &ChaosPolynomial) -> Result<f64> {
    let d = require_pure(q)?;
    let p = q.base();
    let count = ((p - 1) as u128).saturating_pow(q.level() as u32);
    if count > MAX_EXPONENT_SEQUENCES {
        return Err(Error::CombinatorialBlowup {
            count,
            limit: MAX_EXPONENT_SEQUENCES,
        });
    }
    if d > q.level() {
        return Err(Error::EmptyIndexSet {
            d,
            n_max: q.n_max(),
        });
    }
    let terms: Vec<(&ChaosTerm, Complex64)> = q.iter().map(|(t, &c)| (t, c)).collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); terms.len()];
    for j in crate::padic::exponent_sequences(p, q.level()) {
        for ((t, c), slot) in terms.iter().zip(acc.iter_mut()) {
            if t.matches(&j) {
                *slot += c;
            }
        }
    }
    let scale = ((p - 1) as f64).powi(-((q.level() - d) as i32));
    Ok(terms
        .iter()
        .zip(&acc)
        .map(|((_, c), s)| (c - s * scale).norm())
        .fold(0.0, f64::max))
}

/// The order-`s` part of a mixed polynomial (zero when `s` is absent).
pub fn project_order(q: &ChaosPolynomial, s: usize) -> Result<ChaosPolynomial> {
    let d = q.max_order().unwrap_or(s);
    if s == 0 || s > d {
        return Err(Error::InvalidOrder(format!("order {s} outside 1..={d}")));
    }
    Ok(q.order_part(s))
}

/// `Q ∗ ν` for the order selector, read back on every term of order `1..=d`.
pub fn project_order_by_convolution(q: &ChaosPolynomial, s: usize) -> Result<ChaosPolynomial> {
    let d = q
        .max_order()
        .ok_or_else(|| Error::DegenerateInput("polynomial has no terms".into()))?;
    let nu = order_selector(q.base(), d, s, q.level())?;
    let smoothed = convolve(&forward(&synthesize(q, q.level())?), &nu.spectrum)?;
    let mut terms = Vec::new();
    for order in 1..=d.min(q.level()) {
        terms.extend(enumerate_nd(q.base(), order, q.n_max())?);
    }
    ChaosPolynomial::from_spectrum(&smoothed, q.n_max(), terms)
}

/// Order projection measured two ways, with its sup-norm inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderProjectionCheck {
    /// Selection against convolution, max coefficient difference.
    pub agreement: f64,
    pub part_sup: f64,
    pub sup: f64,
    /// Finite-level variation of the order selector.
    pub variation: f64,
}

impl OrderProjectionCheck {
    pub fn norm_excess(&self) -> f64 {
        self.part_sup - self.variation * self.sup
    }
}

pub fn order_projection_check(q: &ChaosPolynomial, s: usize) -> Result<OrderProjectionCheck> {
    let d = q
        .max_order()
        .ok_or_else(|| Error::DegenerateInput("polynomial has no terms".into()))?;
    let part = project_order(q, s)?;
    let conv = project_order_by_convolution(q, s)?;
    let nu = order_selector(q.base(), d, s, q.level())?;
    Ok(OrderProjectionCheck {
        agreement: max_coeff_diff(&part, &conv),
        part_sup: linf_norm(&part)?.0,
        sup: linf_norm(q)?.0,
        variation: nu.variation,
    })
}

/// Max deviation of the spectrum of `Q ∗ ρ_y` from `Π ε_{k_i} / 2^d · C`.
///
/// Every term of `q` must carry the exponents prescribed by `j`.
pub fn sign_scaling_residual(q: &ChaosPolynomial, j: &[usize], signs: &[i8]) -> Result<f64> {
    let d = require_pure(q)?;
    check_sequence(q, j)?;
    if let Some((t, _)) = q.iter().find(|(t, _)| !t.matches(j)) {
        return Err(Error::InvalidArgument(format!(
            "term {t:?} does not follow the exponent sequence"
        )));
    }
    let rho = sign_twisted_riesz(q.base(), j, signs, q.level())?;
    let smoothed = convolve(&forward(&synthesize(q, q.level())?), &rho.spectrum)?;
    let mut expected = Spectrum::zeros(q.base(), q.level())?;
    let scale = 2f64.powi(-(d as i32));
    for (t, &c) in q.iter() {
        let sign: f64 = t.positions().iter().map(|&k| signs[k] as f64).product();
        expected.coeffs_mut()[t.paley_value(q.base())] = c * sign * scale;
    }
    Ok(smoothed
        .coeffs()
        .iter()
        .zip(expected.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}
