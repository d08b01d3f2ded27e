//! DFT helpers and period-wise spectral preprocessing.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::record::SampledRecord;
use crate::error::{Error, Result};

/// Unnormalized forward DFT, `X(k) = sum_t x(t) exp(-j 2 pi k t / N)`.
pub fn dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// Inverse DFT scaled by `1/N`, returning the real part.
pub fn idft_real(spectrum: &[Complex64]) -> Vec<f64> {
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Period-averaged input/output spectra on the half grid `0..=N/2`, with the
/// per-line sample variance of the output spectrum across periods.
#[derive(Debug, Clone)]
pub struct RecordSpectra {
    pub input: Vec<Complex64>,
    pub output: Vec<Complex64>,
    /// Sample variance of the per-period output DFT at each line; all zeros
    /// when only one period is available (see [`RecordSpectra::variance_valid`]).
    pub output_variance: Vec<f64>,
    pub period_length: usize,
    pub period_count: usize,
    pub variance_valid: bool,
}

impl RecordSpectra {
    /// Number of half-spectrum lines, `N/2 + 1`.
    pub fn lines(&self) -> usize {
        self.input.len()
    }
}

/// DFT of each period, averaged across periods, plus the across-period sample
/// variance of the output spectrum per line.
pub fn record_spectra(input: &SampledRecord, output: &SampledRecord) -> Result<RecordSpectra> {
    if !input.same_grid(output) {
        return Err(Error::invalid(
            "input and output records must share sampling grid and periodic framing",
        ));
    }
    if input.len() != output.len() {
        return Err(Error::invalid("input/output length mismatch"));
    }
    let n = input.period_length();
    let p = input.period_count();
    let half = n / 2 + 1;

    let per_period =
        |rec: &SampledRecord| -> Vec<Vec<Complex64>> { (0..p).map(|i| dft(rec.period(i))).collect() };
    let in_spectra = per_period(input);
    let out_spectra = per_period(output);

    let average = |spectra: &[Vec<Complex64>]| -> Vec<Complex64> {
        (0..half)
            .map(|k| spectra.iter().map(|s| s[k]).sum::<Complex64>() / p as f64)
            .collect()
    };
    let input_avg = average(&in_spectra);
    let output_avg = average(&out_spectra);

    let mut output_variance = vec![0.0; half];
    if p >= 2 {
        for k in 0..half {
            let mean = output_avg[k];
            let ss: f64 = out_spectra.iter().map(|s| (s[k] - mean).norm_sqr()).sum();
            output_variance[k] = ss / (p as f64 - 1.0);
        }
    }

    Ok(RecordSpectra {
        input: input_avg,
        output: output_avg,
        output_variance,
        period_length: n,
        period_count: p,
        variance_valid: p >= 2,
    })
}
