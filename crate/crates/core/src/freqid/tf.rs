//! Discrete-time rational transfer functions in the backward shift operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `G(q) = (b_0 + b_1 q^-1 + ... + b_nb q^-nb) / (1 + a_1 q^-1 + ... + a_na q^-na)`.
///
/// The denominator is normalized to `a_0 = 1` on construction, which resolves
/// the gain ambiguity of the parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    b: Vec<f64>,
    a: Vec<f64>,
}

impl RationalTf {
    /// Builds and checks stability (all poles strictly inside the unit circle).
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        let tf = Self::new_with_stability_override(b, a, false)?;
        Ok(tf)
    }

    /// Builds, optionally skipping the stability check.
    pub fn new_with_stability_override(
        mut b: Vec<f64>,
        mut a: Vec<f64>,
        allow_unstable: bool,
    ) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::invalid("transfer function needs coefficients"));
        }
        if a[0] == 0.0 || !a[0].is_finite() {
            return Err(Error::invalid("leading denominator coefficient must be nonzero"));
        }
        if a.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite transfer function coefficient"));
        }
        let a0 = a[0];
        for c in &mut a {
            *c /= a0;
        }
        for c in &mut b {
            *c /= a0;
        }
        let tf = Self { b, a };
        if !allow_unstable {
            let radius = tf.pole_radius();
            if radius >= 1.0 {
                return Err(Error::Unstable(format!(
                    "pole magnitude {radius:.6} outside the unit circle"
                )));
            }
        }
        Ok(tf)
    }

    /// Unit static gain pass-through, `G(q) = 1`.
    pub fn identity() -> Self {
        Self {
            b: vec![1.0],
            a: vec![1.0],
        }
    }

    pub fn numerator(&self) -> &[f64] {
        &self.b
    }

    pub fn denominator(&self) -> &[f64] {
        &self.a
    }

    /// Numerator order `n_b` (coefficient count minus one).
    pub fn nb(&self) -> usize {
        self.b.len() - 1
    }

    /// Denominator order `n_a`.
    pub fn na(&self) -> usize {
        self.a.len() - 1
    }

    /// Free real parameters under the `a_0 = 1` normalization.
    pub fn parameter_count(&self) -> usize {
        self.b.len() + self.a.len() - 1
    }

    /// Roots of the denominator in the `z` plane.
    pub fn poles(&self) -> Vec<Complex64> {
        polynomial_roots(&self.a)
    }

    /// Largest pole magnitude (0 for a static gain).
    pub fn pole_radius(&self) -> f64 {
        self.poles().iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn is_stable(&self) -> bool {
        self.pole_radius() < 1.0
    }

    /// Frequency response at normalized angular frequency `omega` (rad/sample).
    pub fn freq_response(&self, omega: f64) -> Complex64 {
        let z_inv = Complex64::new(0.0, -omega).exp();
        let eval = |coeffs: &[f64]| {
            // Horner in powers of z^-1.
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in coeffs.iter().rev() {
                acc = acc * z_inv + c;
            }
            acc
        };
        eval(&self.b) / eval(&self.a)
    }

    /// Static (DC) gain.
    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Filters `u` through the difference equation with zero initial state.
    pub fn filter(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0f64; u.len()];
        let nb = self.b.len();
        let na = self.a.len();
        for t in 0..u.len() {
            let mut acc = 0.0;
            for (j, &bj) in self.b.iter().enumerate() {
                if t >= j {
                    acc += bj * u[t - j];
                }
                if j + 1 >= nb {
                    break;
                }
            }
            for i in 1..na {
                if t >= i {
                    acc -= self.a[i] * y[t - i];
                }
            }
            y[t] = acc;
        }
        y
    }

    /// Numerator scaled by `c` (used by gain-exchange constructions).
    pub fn scaled_numerator(&self, c: f64) -> Self {
        Self {
            b: self.b.iter().map(|x| x * c).collect(),
            a: self.a.clone(),
        }
    }
}

/// Roots of `c_0 z^d + c_1 z^(d-1) + ... + c_d` for `c_0 != 0`, via the
/// companion matrix.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Vec::new();
    }
    let c0 = coeffs[0];
    let mut companion = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        companion[(0, j)] = -coeffs[j + 1] / c0;
    }
    for i in 1..d {
        companion[(i, i - 1)] = 1.0;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalizes_leading_denominator() {
        let tf = RationalTf::new(vec![2.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(tf.denominator()[0], 1.0);
        assert_abs_diff_eq!(tf.denominator()[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tf.numerator()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_unstable_without_override() {
        let res = RationalTf::new(vec![1.0], vec![1.0, -1.5]);
        assert!(res.is_err());
        let tf = RationalTf::new_with_stability_override(vec![1.0], vec![1.0, -1.5], true).unwrap();
        assert!(!tf.is_stable());
    }

    #[test]
    fn poles_of_first_order() {
        let tf = RationalTf::new(vec![1.0], vec![1.0, -0.5]).unwrap();
        let poles = tf.poles();
        assert_eq!(poles.len(), 1);
        assert_abs_diff_eq!(poles[0].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(poles[0].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn filter_matches_impulse_response_of_first_order() {
        let tf = RationalTf::new(vec![1.0], vec![1.0, -0.5]).unwrap();
        let mut impulse = vec![0.0; 8];
        impulse[0] = 1.0;
        let h = tf.filter(&impulse);
        for (t, v) in h.iter().enumerate() {
            assert_abs_diff_eq!(*v, 0.5f64.powi(t as i32), epsilon = 1e-14);
        }
    }

    #[test]
    fn frequency_response_dc_equals_static_gain() {
        let tf = RationalTf::new(vec![0.4, 0.2], vec![1.0, -0.3]).unwrap();
        let g0 = tf.freq_response(0.0);
        assert_abs_diff_eq!(g0.re, tf.dc_gain(), epsilon = 1e-14);
        assert_abs_diff_eq!(g0.im, 0.0, epsilon = 1e-14);
    }
}
