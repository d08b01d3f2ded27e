//! Linear state-space models and canonical realization of rational transfer
//! functions, used to initialize nonlinear state-space identification.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tf::RationalTf;
use crate::error::{Error, Result};

/// Single-input single-output quadruple `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSs {
    #[serde(with = "crate::ser::matrix_serde")]
    a: DMatrix<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: f64,
}

impl LinearSs {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, c: Vec<f64>, d: f64) -> Result<Self> {
        let ss = Self::new_with_stability_override(a, b, c, d, false)?;
        Ok(ss)
    }

    pub fn new_with_stability_override(
        a: DMatrix<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        d: f64,
        allow_unstable: bool,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::invalid("state matrix must be square"));
        }
        if b.len() != n || c.len() != n {
            return Err(Error::invalid("B/C dimension mismatch with state dimension"));
        }
        let ss = Self { a, b, c, d };
        if !allow_unstable {
            let radius = ss.spectral_radius();
            if radius >= 1.0 {
                return Err(Error::Unstable(format!(
                    "spectral radius {radius:.6} not inside the unit circle"
                )));
            }
        }
        Ok(ss)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn b_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.b)
    }

    pub fn c_row(&self) -> RowDVector<f64> {
        RowDVector::from_row_slice(&self.c)
    }

    pub fn spectral_radius(&self) -> f64 {
        if self.state_dim() == 0 {
            return 0.0;
        }
        self.a
            .complex_eigenvalues()
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    /// Frequency response `C (zI - A)^-1 B + D` at `z = exp(j omega)`.
    pub fn freq_response(&self, omega: f64) -> Complex64 {
        let n = self.state_dim();
        if n == 0 {
            return Complex64::new(self.d, 0.0);
        }
        let z = Complex64::new(0.0, omega).exp();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(-self.a[(i, j)], 0.0);
            }
            m[(i, i)] += z;
        }
        let rhs = DVector::<Complex64>::from_iterator(n, self.b.iter().map(|&v| Complex64::new(v, 0.0)));
        let x = m
            .lu()
            .solve(&rhs)
            .expect("zI - A is invertible off the spectrum");
        let mut acc = Complex64::new(self.d, 0.0);
        for i in 0..n {
            acc += Complex64::new(self.c[i], 0.0) * x[i];
        }
        acc
    }

    /// Forward simulation from `x0` (zero state when absent).
    pub fn simulate(&self, u: &[f64], x0: Option<&DVector<f64>>) -> Vec<f64> {
        let n = self.state_dim();
        let mut x = x0.cloned().unwrap_or_else(|| DVector::zeros(n));
        let mut y = Vec::with_capacity(u.len());
        for &ut in u {
            let mut yt = self.d * ut;
            for i in 0..n {
                yt += self.c[i] * x[i];
            }
            y.push(yt);
            let mut xn = DVector::zeros(n);
            for i in 0..n {
                let mut acc = self.b[i] * ut;
                for j in 0..n {
                    acc += self.a[(i, j)] * x[j];
                }
                xn[i] = acc;
            }
            x = xn;
        }
        y
    }
}

/// Controllable canonical realization with `n = n_a` states.
///
/// Requires a proper transfer function (`n_b <= n_a`); the numerator is
/// zero-padded up to the denominator order.
pub fn realize_state_space(tf: &RationalTf) -> Result<LinearSs> {
    if tf.nb() > tf.na() {
        return Err(Error::invalid(
            "realization requires a proper transfer function (n_b <= n_a)",
        ));
    }
    if !tf.is_stable() {
        return Err(Error::Unstable("cannot realize an unstable transfer function".into()));
    }
    let n = tf.na();
    let mut b_padded = tf.numerator().to_vec();
    b_padded.resize(n + 1, 0.0);
    let a = tf.denominator();
    let d = b_padded[0];

    let mut amat = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        amat[(0, j)] = -a[j + 1];
    }
    for i in 1..n {
        amat[(i, i - 1)] = 1.0;
    }
    let mut bvec = vec![0.0; n];
    if n > 0 {
        bvec[0] = 1.0;
    }
    let cvec: Vec<f64> = (1..=n).map(|i| b_padded[i] - d * a[i]).collect();
    LinearSs::new(amat, bvec, cvec, d)
}
