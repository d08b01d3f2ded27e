//! Exactly known synthetic generators used as recovery oracles for the
//! identification methods.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqid::RationalTf;
use crate::nlss::MonomialBasis;
use crate::signals::SampledRecord;

/// Magnitude bound beyond which a synthetic trajectory counts as diverged.
const DIVERGENCE_BOUND: f64 = 1e12;

/// A known Wiener system: stable LTI block followed by a polynomial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticWienerSpec {
    pub lti: RationalTf,
    /// Polynomial coefficients `beta_0..beta_d` applied to the filtered signal.
    pub nonlinearity: Vec<f64>,
}

impl SyntheticWienerSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.lti.is_stable() {
            return Err(Error::Unstable("synthetic Wiener LTI block must be stable".into()));
        }
        if self.nonlinearity.is_empty() {
            return Err(Error::invalid("polynomial needs at least one coefficient"));
        }
        Ok(())
    }
}

/// A known polynomial nonlinear state-space generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticPnlssSpec {
    #[serde(with = "crate::ser::matrix_serde")]
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
    /// State-equation coefficients, `n x len(basis)` (may be 0 x 0).
    #[serde(with = "crate::ser::matrix_serde")]
    pub e: DMatrix<f64>,
    /// Output-equation coefficients, length `len(basis)`.
    pub f: Vec<f64>,
    pub basis: MonomialBasis,
}

impl SyntheticPnlssSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        if self.a.ncols() != n || self.b.len() != n || self.c.len() != n {
            return Err(Error::invalid("inconsistent linear part dimensions"));
        }
        if self.basis.state_dim() != n {
            return Err(Error::invalid("basis state dimension mismatch"));
        }
        let m = self.basis.len();
        if self.f.len() != m {
            return Err(Error::invalid("F coefficient length mismatch"));
        }
        if m > 0 && (self.e.nrows() != n || self.e.ncols() != m) {
            return Err(Error::invalid("E coefficient shape mismatch"));
        }
        let radius = if n == 0 {
            0.0
        } else {
            self.a
                .complex_eigenvalues()
                .iter()
                .map(|e| e.norm())
                .fold(0.0, f64::max)
        };
        if radius >= 1.0 {
            return Err(Error::Unstable(format!(
                "linear part has spectral radius {radius:.4}"
            )));
        }
        Ok(())
    }
}

/// Either oracle family, simulatable on a record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SyntheticSpec {
    Wiener(SyntheticWienerSpec),
    Pnlss(SyntheticPnlssSpec),
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SyntheticSpec::Wiener(s) => s.validate(),
            SyntheticSpec::Pnlss(s) => s.validate(),
        }
    }
}

/// Exact discrete-time simulation of a synthetic generator.
///
/// Wiener: the input is filtered through the LTI block and the polynomial is
/// applied pointwise. PNLSS: the state recursion is iterated from zero state.
pub fn simulate_synthetic(spec: &SyntheticSpec, input: &SampledRecord) -> Result<SampledRecord> {
    spec.validate()?;
    let samples = match spec {
        SyntheticSpec::Wiener(s) => {
            let filtered = s.lti.filter(input.samples());
            let mut out = Vec::with_capacity(filtered.len());
            for (t, r) in filtered.iter().enumerate() {
                let mut acc = 0.0;
                for &beta in s.nonlinearity.iter().rev() {
                    acc = acc * r + beta;
                }
                if !acc.is_finite() || acc.abs() > DIVERGENCE_BOUND {
                    return Err(Error::Diverged {
                        index: t,
                        detail: "synthetic Wiener output left the divergence bound".into(),
                    });
                }
                out.push(acc);
            }
            out
        }
        SyntheticSpec::Pnlss(s) => {
            let n = s.a.nrows();
            let m = s.basis.len();
            let mut x = vec![0.0f64; n];
            let mut zeta = vec![0.0f64; m];
            let mut out = Vec::with_capacity(input.len());
            for (t, &u) in input.samples().iter().enumerate() {
                s.basis.eval_into(&x, u, &mut zeta);
                let mut y = s.d * u;
                for i in 0..n {
                    y += s.c[i] * x[i];
                }
                for j in 0..m {
                    y += s.f[j] * zeta[j];
                }
                if !y.is_finite() || y.abs() > DIVERGENCE_BOUND {
                    return Err(Error::Diverged {
                        index: t,
                        detail: "synthetic state-space output left the divergence bound".into(),
                    });
                }
                out.push(y);
                let mut xn = vec![0.0f64; n];
                for i in 0..n {
                    let mut acc = s.b[i] * u;
                    for j in 0..n {
                        acc += s.a[(i, j)] * x[j];
                    }
                    for j in 0..m {
                        acc += s.e[(i, j)] * zeta[j];
                    }
                    xn[i] = acc;
                }
                x = xn;
                if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
                    return Err(Error::Diverged {
                        index: t,
                        detail: "synthetic state recursion diverged".into(),
                    });
                }
            }
            out
        }
    };
    let mean = samples.iter().sum::<f64>() / samples.len().max(1) as f64;
    SampledRecord::new(
        samples,
        input.sampling_minutes(),
        input.period_length(),
        input.period_count(),
        mean,
    )
}
