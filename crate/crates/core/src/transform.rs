//! Vilenkin–Chrestenson transform on level-`L` step functions.
//!
//! The character with Paley index `m` takes the value
//! `ω^{Σ_k m_k c_{k+1}}` on the cell with fractional digits `(c_1, …, c_L)`,
//! where `ω = exp(2πi/p)`. Cell arrays are indexed most-significant digit
//! first and spectra by Paley index, so digit `c_{k+1}` sits at position
//! `L-1-k` of the cell index while `m_k` sits at position `k`.
//!
//! [`forward`] carries the `p^{-L}` normalization and [`inverse`] carries
//! none, so the coefficients of a mass-one density are `O(1)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::padic::{cell_count, CellIndex, PaleyIndex};

/// Arrays at least this long are processed in parallel chunks.
const PAR_THRESHOLD: usize = 1 << 15;
const CHUNK: usize = 1 << 12;

/// `exp(2πi e / p)`, exact at multiples of a quarter turn.
pub fn root_of_unity(p: usize, e: usize) -> Complex64 {
    let e = e % p;
    if e == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if (4 * e).is_multiple_of(p) {
        return match 4 * e / p {
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * e as f64 / p as f64)
}

/// `[ω^0, …, ω^{p-1}]`.
pub fn roots_table(p: usize) -> Vec<Complex64> {
    (0..p).map(|e| root_of_unity(p, e)).collect()
}

/// A complex function on `[0, 1)` constant on each level-`L` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    p: usize,
    level: usize,
    values: Vec<Complex64>,
}

impl StepFunction {
    pub fn new(p: usize, level: usize, values: Vec<Complex64>) -> Result<Self> {
        let n = cell_count(p, level)?;
        if values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "step function of level {level} needs {n} values, got {}",
                values.len()
            )));
        }
        Ok(Self { p, level, values })
    }

    pub fn constant(p: usize, level: usize, value: Complex64) -> Result<Self> {
        let n = cell_count(p, level)?;
        Self::new(p, level, vec![value; n])
    }

    pub fn from_real(p: usize, level: usize, values: &[f64]) -> Result<Self> {
        Self::new(
            p,
            level,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn base(&self) -> usize {
        self.p
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn weight(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    /// Haar integral `p^{-L} Σ f[c]`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.weight()
    }

    /// `p^{-L} Σ |f[c]|`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.weight()
    }

    /// `p^{-L} Σ |f[c]|²`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.weight()
    }

    /// Largest modulus and the first cell attaining it.
    pub fn linf_norm(&self) -> (f64, usize) {
        let mut best = (0.0, 0);
        for (i, v) in self.values.iter().enumerate() {
            let a = v.norm();
            if a > best.0 {
                best = (a, i);
            }
        }
        best
    }
}

/// Fourier–Vilenkin–Chrestenson coefficients indexed by Paley index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    p: usize,
    level: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(p: usize, level: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = cell_count(p, level)?;
        if coeffs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "spectrum of level {level} needs {n} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { p, level, coeffs })
    }

    pub fn zeros(p: usize, level: usize) -> Result<Self> {
        let n = cell_count(p, level)?;
        Self::new(p, level, vec![Complex64::new(0.0, 0.0); n])
    }

    /// Spectrum of the unit atom at zero: every coefficient equals one.
    pub fn dirac(p: usize, level: usize) -> Result<Self> {
        let n = cell_count(p, level)?;
        Self::new(p, level, vec![Complex64::new(1.0, 0.0); n])
    }

    /// The unit vector `e_m`.
    pub fn unit(p: usize, level: usize, m: usize) -> Result<Self> {
        let mut s = Self::zeros(p, level)?;
        if m >= s.coeffs.len() {
            return Err(Error::MalformedIndex(format!(
                "Paley index {m} out of range for {p}^{level}"
            )));
        }
        s.coeffs[m] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn base(&self) -> usize {
        self.p
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ |f̂[m]|²`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        let coeffs = if self.coeffs.len() >= PAR_THRESHOLD {
            self.coeffs.par_iter().map(|&c| f(c)).collect()
        } else {
            self.coeffs.iter().map(|&c| f(c)).collect()
        };
        Self {
            p: self.p,
            level: self.level,
            coeffs,
        }
    }
}

fn same_shape(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::LevelMismatch { left: a, right: b });
    }
    Ok(())
}

/// `R_k(x)^l` on cell `c`: `ω^{l·c_{k+1}}`.
pub fn rademacher_value(k: usize, l: usize, cell: &CellIndex) -> Result<Complex64> {
    if k + 1 > cell.level {
        return Err(Error::InsufficientLevel {
            have: cell.level,
            need: k + 1,
        });
    }
    Ok(root_of_unity(cell.p, l * cell.digit(k + 1)))
}

/// Exponent `e` with `χ_m(c) = ω^e`.
pub(crate) fn character_exponent(m: usize, cell: usize, p: usize, level: usize) -> usize {
    let mut e = 0;
    let (mut m, mut c) = (m, cell);
    // m is read from its low digit (k = 0), the cell from its high digit (c_1)
    let mut cell_digits = [0usize; 64];
    for slot in cell_digits.iter_mut().take(level) {
        *slot = c % p;
        c /= p;
    }
    for k in 0..level {
        if m == 0 {
            break;
        }
        e += (m % p) * cell_digits[level - 1 - k];
        m /= p;
    }
    e % p
}

/// The character `χ_m` on cell `c`.
pub fn character_value(m: &PaleyIndex, cell: &CellIndex) -> Result<Complex64> {
    if m.base() != cell.p {
        return Err(Error::LevelMismatch {
            left: (m.base(), m.digits().len()),
            right: (cell.p, cell.level),
        });
    }
    if m.digits().len() > cell.level {
        return Err(Error::InsufficientLevel {
            have: cell.level,
            need: m.digits().len(),
        });
    }
    Ok(root_of_unity(
        cell.p,
        character_exponent(m.value(), cell.index, cell.p, cell.level),
    ))
}

/// The character `χ_m` sampled on every level-`L` cell.
pub fn character(p: usize, level: usize, m: usize) -> Result<StepFunction> {
    let n = cell_count(p, level)?;
    if m >= n {
        return Err(Error::InsufficientLevel {
            have: level,
            need: level + 1,
        });
    }
    let roots = roots_table(p);
    let values = (0..n)
        .map(|c| roots[character_exponent(m, c, p, level)])
        .collect();
    StepFunction::new(p, level, values)
}

fn run_stage(
    src: &[Complex64],
    dst: &mut [Complex64],
    gather: impl Fn(usize, &[Complex64]) -> Complex64 + Sync,
) {
    if dst.len() >= PAR_THRESHOLD {
        dst.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let base = ci * CHUNK;
                for (i, out) in chunk.iter_mut().enumerate() {
                    *out = gather(base + i, src);
                }
            });
    } else {
        for (o, out) in dst.iter_mut().enumerate() {
            *out = gather(o, src);
        }
    }
}

/// Unnormalized analysis: consumes the cell digits `c_1, c_2, …` from the top
/// of the index and emits `m_0, m_1, …` upward from the bottom, so the last
/// stage leaves the array in Paley order.
fn analysis(p: usize, level: usize, mut buf: Vec<Complex64>) -> Vec<Complex64> {
    let n = buf.len();
    if level == 0 {
        return buf;
    }
    let roots = roots_table(p);
    let top = n / p;
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut low_size = 1;
    for _ in 0..level {
        let roots = &roots;
        run_stage(&buf, &mut scratch, move |o, src| {
            let low = o % low_size;
            let m = (o / low_size) % p;
            let r = o / (low_size * p);
            let base = r * low_size + low;
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..p {
                acc += src[c * top + base] * roots[(p - (m * c) % p) % p];
            }
            acc
        });
        std::mem::swap(&mut buf, &mut scratch);
        low_size *= p;
    }
    buf
}

/// Synthesis: the exact reverse of [`analysis`] with conjugate twiddles.
fn synthesis(p: usize, level: usize, mut buf: Vec<Complex64>) -> Vec<Complex64> {
    let n = buf.len();
    if level == 0 {
        return buf;
    }
    let roots = roots_table(p);
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    // stage t: layout (c_1..c_t, m_{L-1}..m_t) -> (c_1..c_{t+1}, m_{L-1}..m_{t+1})
    let mut mid_size = n / p;
    for _ in 0..level {
        let roots = &roots;
        run_stage(&buf, &mut scratch, move |o, src| {
            let mid = o % mid_size;
            let c = (o / mid_size) % p;
            let hi = o / (mid_size * p);
            let base = hi * mid_size * p + mid * p;
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..p {
                acc += src[base + m] * roots[(m * c) % p];
            }
            acc
        });
        std::mem::swap(&mut buf, &mut scratch);
        mid_size /= p;
    }
    buf
}

/// `f̂[m] = p^{-L} Σ_c f[c] conj(χ_m(c))`, in `O(L p^{L+1})` operations.
pub fn forward(f: &StepFunction) -> Spectrum {
    let (p, level) = (f.p, f.level);
    let mut coeffs = analysis(p, level, f.values.clone());
    let scale = 1.0 / coeffs.len() as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    Spectrum { p, level, coeffs }
}

/// `f[c] = Σ_m f̂[m] χ_m(c)`.
pub fn inverse(s: &Spectrum) -> StepFunction {
    let values = synthesis(s.p, s.level, s.coeffs.clone());
    StepFunction {
        p: s.p,
        level: s.level,
        values,
    }
}

/// Spectrum of `(f ∗ g)(x) = ∫ f(x ⊖ z) g(z) dμ(z)`: the pointwise product.
pub fn convolve(a: &Spectrum, b: &Spectrum) -> Result<Spectrum> {
    same_shape((a.p, a.level), (b.p, b.level))?;
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).collect();
    Ok(Spectrum {
        p: a.p,
        level: a.level,
        coeffs,
    })
}

/// Quadratic-time reference implementations built directly from the
/// character table.
pub mod reference {
    use super::*;
    use crate::padic::sub_indices;

    pub fn naive_forward(f: &StepFunction) -> Spectrum {
        let (p, level) = (f.p, f.level);
        let n = f.values.len();
        let roots = roots_table(p);
        let coeffs = (0..n)
            .into_par_iter()
            .map(|m| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, v) in f.values.iter().enumerate() {
                    let e = character_exponent(m, c, p, level);
                    acc += v * roots[(p - e) % p];
                }
                acc / n as f64
            })
            .collect();
        Spectrum { p, level, coeffs }
    }

    pub fn naive_inverse(s: &Spectrum) -> StepFunction {
        let (p, level) = (s.p, s.level);
        let n = s.coeffs.len();
        let roots = roots_table(p);
        let values = (0..n)
            .into_par_iter()
            .map(|c| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, v) in s.coeffs.iter().enumerate() {
                    acc += v * roots[character_exponent(m, c, p, level)];
                }
                acc
            })
            .collect();
        StepFunction { p, level, values }
    }

    /// `(f ∗ g)[x] = p^{-L} Σ_z f[x ⊖ z] g[z]` evaluated cell by cell.
    pub fn direct_convolution(f: &StepFunction, g: &StepFunction) -> Result<StepFunction> {
        same_shape((f.p, f.level), (g.p, g.level))?;
        let (p, level) = (f.p, f.level);
        let n = f.values.len();
        let values = (0..n)
            .into_par_iter()
            .map(|x| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (z, gz) in g.values.iter().enumerate() {
                    acc += f.values[sub_indices(x, z, p, level)] * gz;
                }
                acc / n as f64
            })
            .collect();
        Ok(StepFunction { p, level, values })
    }
}
