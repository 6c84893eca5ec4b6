//! Polynomial interpolation on small node sets.

use num_complex::Complex64;

/// Newton divided differences `f[x_0], f[x_0, x_1], …, f[x_0, …, x_n]`.
///
/// Nodes must be pairwise distinct.
pub fn divided_differences(nodes: &[Complex64], values: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(nodes.len(), values.len());
    let n = nodes.len();
    let mut table = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            table[i] = (table[i] - table[i - 1]) / (nodes[i] - nodes[i - j]);
        }
    }
    table
}

/// Expands the Newton form `Σ_j dd_j Π_{i<j} (t - x_i)` into monomial
/// coefficients, lowest degree first.
pub fn newton_to_monomial(nodes: &[Complex64], dd: &[Complex64]) -> Vec<Complex64> {
    let n = dd.len();
    if n == 0 {
        return Vec::new();
    }
    // Horner on the Newton form, with polynomial-valued accumulator
    let mut poly = vec![dd[n - 1]];
    for k in (0..n - 1).rev() {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * nodes[k];
        }
        next[0] += dd[k];
        poly = next;
    }
    poly
}

/// Evaluates `Σ c_i t^i`.
pub fn horner(coeffs: &[Complex64], t: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
}

pub fn horner_real(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Monomial coefficients of the Lagrange interpolant through `(nodes, values)`.
pub fn lagrange(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(nodes.len(), values.len());
    let n = nodes.len();
    let mut out = vec![0.0; n];
    for (j, (&xj, &yj)) in nodes.iter().zip(values).enumerate() {
        if yj == 0.0 {
            continue;
        }
        let mut basis = vec![1.0];
        let mut denom = 1.0;
        for (i, &xi) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![0.0; basis.len() + 1];
            for (k, &b) in basis.iter().enumerate() {
                next[k + 1] += b;
                next[k] -= b * xi;
            }
            basis = next;
            denom *= xj - xi;
        }
        for (o, b) in out.iter_mut().zip(&basis) {
            *o += yj * b / denom;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn newton_reproduces_quadratic() {
        // 2 - 3t + t²
        let f = |t: Complex64| c(2.0, 0.0) - t * 3.0 + t * t;
        let nodes = [c(0.0, 0.0), c(1.0, 0.5), c(-2.0, 1.0)];
        let vals: Vec<_> = nodes.iter().map(|&t| f(t)).collect();
        let mono = newton_to_monomial(&nodes, &divided_differences(&nodes, &vals));
        let want = [c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)];
        for (a, b) in mono.iter().zip(&want) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!((horner(&mono, c(3.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn lagrange_hand_case() {
        let coeffs = lagrange(&[0.0, 0.5, 0.25], &[0.0, 1.0, 0.0]);
        assert!((coeffs[0]).abs() < 1e-15);
        assert!((coeffs[1] + 2.0).abs() < 1e-12);
        assert!((coeffs[2] - 8.0).abs() < 1e-12);
        assert_eq!(horner_real(&coeffs, 0.5), 1.0);
    }
}
