//! Best linear approximation pipeline: spectra -> local polynomial FRF ->
//! weighted parametric fit.

use super::fit::{fit_parametric_tf, TfFitOptions};
use super::lpm::{estimate_frf_lpm, Frf, LpmOptions};
use super::tf::RationalTf;
use crate::error::{Error, Result};
use crate::optim::LmOutcome;
use crate::signals::{record_spectra, Dataset, SampledRecord};

/// Result of a per-operating-point BLA estimation: the nonparametric FRF,
/// the parametric fit, and the signal means removed before spectral analysis.
#[derive(Debug, Clone)]
pub struct BlaEstimate {
    pub frf: Frf,
    pub tf: RationalTf,
    pub input_mean: f64,
    pub output_mean: f64,
    pub lm: LmOutcome,
}

/// Infers the contiguous excited band `1..=F` from the input spectrum
/// magnitude (lines above `1e-8` of the peak count as excited).
pub fn infer_excited_lines(input_spectrum: &[num_complex::Complex64]) -> usize {
    let peak = input_spectrum
        .iter()
        .skip(1)
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return 0;
    }
    let mut f = 0;
    for (k, c) in input_spectrum.iter().enumerate().skip(1) {
        if c.norm() > 1e-8 * peak {
            f = k;
        } else if k > f + 2 {
            break;
        }
    }
    f.min(input_spectrum.len().saturating_sub(2))
}

/// Estimates the BLA at one operating point of a dataset. The per-point
/// signal means are removed before the spectral analysis and reported back,
/// so callers can reconstruct absolute-level simulations.
pub fn estimate_bla(
    dataset: &Dataset,
    operating_point: usize,
    na: usize,
    nb: usize,
    excited_lines: Option<usize>,
    lpm: &LpmOptions,
    fit: &TfFitOptions,
) -> Result<BlaEstimate> {
    let point = dataset.point(operating_point)?;
    estimate_bla_records(&point.input, &point.output, na, nb, excited_lines, lpm, fit)
}

/// Same pipeline on a raw input/output record pair.
pub fn estimate_bla_records(
    input: &SampledRecord,
    output: &SampledRecord,
    na: usize,
    nb: usize,
    excited_lines: Option<usize>,
    lpm: &LpmOptions,
    fit: &TfFitOptions,
) -> Result<BlaEstimate> {
    let input_mean = input.mean();
    let output_mean = output.mean();
    let u = input.clone().map_samples(|x| x - input_mean);
    let y = output.clone().map_samples(|x| x - output_mean);

    let spectra = record_spectra(&u, &y)?;
    let lines = match excited_lines {
        Some(f) => f,
        None => {
            let inferred = infer_excited_lines(&spectra.input);
            if inferred == 0 {
                return Err(Error::invalid("could not infer an excited band"));
            }
            inferred
        }
    };
    let frf = estimate_frf_lpm(&spectra, lines, lpm)?;
    let (tf, lm) = fit_parametric_tf(&frf, na, nb, fit)?;
    Ok(BlaEstimate {
        frf,
        tf,
        input_mean,
        output_mean,
        lm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{design_multisine, Dataset, DatasetRole, MultisineSpec, OperatingPoint};

    fn lti_operating_point(tf: &RationalTf, offset: f64, seed: u64) -> OperatingPoint {
        let n = 1024;
        let spec = MultisineSpec::flat_random(400, n, Some(1.0), seed).unwrap();
        let u = design_multisine(&spec).unwrap().tiled(4).unwrap().with_offset(offset);
        let y_full = tf.filter(u.samples());
        let u_ss = SampledRecord::new(u.samples()[2 * n..].to_vec(), 1.0, n, 2, offset).unwrap();
        let y_ss = SampledRecord::new(y_full[2 * n..].to_vec(), 1.0, n, 2, 0.0).unwrap();
        OperatingPoint {
            offset,
            input: u_ss,
            output: y_ss,
        }
    }

    #[test]
    fn bla_of_linear_system_is_the_system() {
        let truth =
            RationalTf::new(vec![0.4, -0.3, 0.12, 0.05], vec![1.0, -1.5, 0.8, -0.15]).unwrap();
        let dataset = Dataset::new(
            DatasetRole::Estimation,
            vec![lti_operating_point(&truth, 2.0, 3)],
        )
        .unwrap();
        let est = estimate_bla(
            &dataset,
            0,
            3,
            3,
            Some(400),
            &LpmOptions {
                poly_degree: 6,
                window_halfwidth: 7,
            },
            &TfFitOptions::default(),
        )
        .unwrap();
        for k in 0..est.frf.len() {
            let w = est.frf.omega[k];
            let rel = (est.tf.freq_response(w) - truth.freq_response(w)).norm()
                / truth.freq_response(w).norm();
            assert!(rel < 1e-6, "relative FRF error {rel} at line {k}");
        }
    }

    #[test]
    fn excited_band_is_inferred() {
        let truth = RationalTf::new(vec![0.5], vec![1.0, -0.5]).unwrap();
        let dataset = Dataset::new(
            DatasetRole::Estimation,
            vec![lti_operating_point(&truth, 0.5, 9)],
        )
        .unwrap();
        let est = estimate_bla(
            &dataset,
            0,
            1,
            1,
            None,
            &LpmOptions::default(),
            &TfFitOptions::default(),
        )
        .unwrap();
        assert_eq!(est.frf.len(), 400);
    }
}
