//! Excitation design: random phase multisines and band-limited pulse trains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::record::SampledRecord;
use super::spectra::{dft, idft_real};
use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// A periodic sum of cosines at lines `1..=F` with prescribed amplitudes and
/// phases. When `rms_target` is set, the synthesized signal is rescaled to
/// that rms.
#[derive(Debug, Clone)]
pub struct MultisineSpec {
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    period_length: usize,
    rms_target: Option<f64>,
    rng_seed: u64,
}

impl MultisineSpec {
    pub fn new(
        amplitudes: Vec<f64>,
        phases: Vec<f64>,
        period_length: usize,
        rms_target: Option<f64>,
        rng_seed: u64,
    ) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::invalid("amplitude/phase length mismatch"));
        }
        if amplitudes.is_empty() {
            return Err(Error::invalid("at least one excited line required"));
        }
        if 2 * amplitudes.len() >= period_length {
            return Err(Error::invalid(format!(
                "excited line count {} must satisfy F < N/2 (N = {})",
                amplitudes.len(),
                period_length
            )));
        }
        if amplitudes.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::invalid("amplitudes must be nonnegative"));
        }
        if phases.iter().any(|p| !(*p >= 0.0 && *p < TAU)) {
            return Err(Error::invalid("phases must lie in [0, 2*pi)"));
        }
        if let Some(r) = rms_target {
            if !(r > 0.0) {
                return Err(Error::invalid("rms target must be positive"));
            }
        }
        Ok(Self {
            amplitudes,
            phases,
            period_length,
            rms_target,
            rng_seed,
        })
    }

    /// Unit amplitudes on lines `1..=excited_lines`, phases i.i.d. uniform on
    /// `[0, 2*pi)` from a seeded stream cipher generator, so the same seed
    /// reproduces the same signal on every platform.
    pub fn flat_random(
        excited_lines: usize,
        period_length: usize,
        rms_target: Option<f64>,
        rng_seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let phases: Vec<f64> = (0..excited_lines).map(|_| rng.gen::<f64>() * TAU).collect();
        Self::new(
            vec![1.0; excited_lines],
            phases,
            period_length,
            rms_target,
            rng_seed,
        )
    }

    pub fn excited_lines(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn period_length(&self) -> usize {
        self.period_length
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn rms_target(&self) -> Option<f64> {
        self.rms_target
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
}

/// A train of single-sample pulses within one period, to be low-pass limited
/// to `bandwidth` (normalized frequency, cycles/sample).
#[derive(Debug, Clone)]
pub struct PulseTrainSpec {
    pulse_times: Vec<usize>,
    pulse_amplitudes: Vec<f64>,
    bandwidth: f64,
    period_length: usize,
}

impl PulseTrainSpec {
    pub fn new(
        pulse_times: Vec<usize>,
        pulse_amplitudes: Vec<f64>,
        bandwidth: f64,
        period_length: usize,
    ) -> Result<Self> {
        if pulse_times.len() != pulse_amplitudes.len() {
            return Err(Error::invalid("pulse time/amplitude length mismatch"));
        }
        if !(bandwidth > 0.0 && bandwidth <= 0.5) {
            return Err(Error::invalid("bandwidth must lie in (0, 0.5]"));
        }
        for w in pulse_times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("pulse times must be strictly increasing"));
            }
        }
        if pulse_times.iter().any(|&t| t >= period_length) {
            return Err(Error::invalid("pulse times must fall within one period"));
        }
        Ok(Self {
            pulse_times,
            pulse_amplitudes,
            bandwidth,
            period_length,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn period_length(&self) -> usize {
        self.period_length
    }

    pub fn is_emptyish(&self) -> bool {
        self.pulse_times.is_empty() || self.pulse_amplitudes.iter().all(|a| *a == 0.0)
    }
}

/// Synthesizes one period of the random phase multisine
/// `u(t) = sum_k A_k cos(2*pi*k*t/N + phi_k)`, rescaled to the rms target
/// when one is set. Sampling period defaults to 1; callers attach the real
/// grid with [`SampledRecord::with_sampling_minutes`].
pub fn design_multisine(spec: &MultisineSpec) -> Result<SampledRecord> {
    let n = spec.period_length;
    let mut samples = vec![0.0f64; n];
    for (idx, (&a, &phi)) in spec.amplitudes.iter().zip(&spec.phases).enumerate() {
        if a == 0.0 {
            continue;
        }
        let k = (idx + 1) as f64;
        let w = TAU * k / n as f64;
        for (t, s) in samples.iter_mut().enumerate() {
            *s += a * (w * t as f64 + phi).cos();
        }
    }
    if let Some(target) = spec.rms_target {
        let rms = (samples.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
        if rms == 0.0 {
            return Err(Error::invalid(
                "cannot rescale an all-zero multisine to a positive rms",
            ));
        }
        let scale = target / rms;
        for s in &mut samples {
            *s *= scale;
        }
    }
    SampledRecord::single_period(samples)
}

/// Band-limits the pulse train by zeroing all DFT lines above the normalized
/// bandwidth, then superimposes the multisine. The result is exactly
/// `N`-periodic by construction.
pub fn design_pulse_multisine(
    pspec: &PulseTrainSpec,
    mspec: &MultisineSpec,
) -> Result<SampledRecord> {
    let n = pspec.period_length;
    if mspec.period_length() != n {
        return Err(Error::invalid(format!(
            "pulse period {} does not match multisine period {}",
            n,
            mspec.period_length()
        )));
    }
    let top_line = mspec.excited_lines() as f64 / n as f64;
    if top_line > pspec.bandwidth + 1e-12 {
        return Err(Error::invalid(format!(
            "multisine excites up to normalized frequency {top_line:.4}, beyond the pulse bandwidth {:.4}",
            pspec.bandwidth
        )));
    }

    let multisine = design_multisine(mspec)?;
    if pspec.is_emptyish() {
        return Ok(multisine);
    }

    let mut pulses = vec![0.0f64; n];
    for (&t, &a) in pspec.pulse_times.iter().zip(&pspec.pulse_amplitudes) {
        pulses[t] += a;
    }
    let mut spectrum = dft(&pulses);
    let half = n / 2;
    for k in 1..=half {
        let freq = k as f64 / n as f64;
        if freq > pspec.bandwidth {
            spectrum[k] = num_complex::Complex64::new(0.0, 0.0);
            if k != n - k {
                spectrum[n - k] = num_complex::Complex64::new(0.0, 0.0);
            }
        }
    }
    let limited = idft_real(&spectrum);

    let samples: Vec<f64> = limited
        .iter()
        .zip(multisine.samples())
        .map(|(p, m)| p + m)
        .collect();
    SampledRecord::single_period(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_cosine_quarter_points() {
        let spec = MultisineSpec::new(vec![1.0], vec![0.0], 4, None, 0).unwrap();
        let rec = design_multisine(&spec).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0];
        for (got, want) in rec.samples().iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn phase_pi_negates() {
        let pi = std::f64::consts::PI;
        let zero = MultisineSpec::new(vec![1.0, 1.0], vec![0.0, 0.0], 8, None, 0).unwrap();
        let flipped = MultisineSpec::new(vec![1.0, 1.0], vec![pi, pi], 8, None, 0).unwrap();
        let a = design_multisine(&zero).unwrap();
        let b = design_multisine(&flipped).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_abs_diff_eq!(*x, -*y, epsilon = 1e-14);
        }
    }

    #[test]
    fn rms_normalization_and_unexcited_lines() {
        let spec = MultisineSpec::flat_random(50, 2000, Some(1.0), 7).unwrap();
        let rec = design_multisine(&spec).unwrap();
        assert_abs_diff_eq!(rec.rms(), 1.0, epsilon = 1e-12);

        let spectrum = dft(rec.samples());
        let peak = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(spectrum[51].norm() < 1e-10 * peak);
        assert!(spectrum[0].norm() < 1e-10 * peak);
        for k in 52..=1000 {
            assert!(spectrum[k].norm() < 1e-10 * peak, "energy leaked to line {k}");
        }
    }

    #[test]
    fn seed_reproducibility() {
        let a = design_multisine(&MultisineSpec::flat_random(20, 256, Some(1.0), 42).unwrap())
            .unwrap();
        let b = design_multisine(&MultisineSpec::flat_random(20, 256, Some(1.0), 42).unwrap())
            .unwrap();
        let c = design_multisine(&MultisineSpec::flat_random(20, 256, Some(1.0), 43).unwrap())
            .unwrap();
        assert_eq!(a.samples(), b.samples());
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn tiling_is_exactly_periodic() {
        let rec = design_multisine(&MultisineSpec::flat_random(10, 128, Some(1.0), 3).unwrap())
            .unwrap();
        let tiled = rec.tiled(2).unwrap();
        assert_eq!(&tiled.samples()[..128], &tiled.samples()[128..]);
    }

    #[test]
    fn rejects_too_many_lines() {
        assert!(MultisineSpec::flat_random(64, 128, None, 0).is_err());
        assert!(MultisineSpec::flat_random(63, 128, None, 0).is_ok());
    }

    #[test]
    fn pulse_free_train_reduces_to_multisine() {
        let mspec = MultisineSpec::flat_random(5, 256, Some(1.0), 1).unwrap();
        let pspec = PulseTrainSpec::new(vec![10, 20], vec![0.0, 0.0], 0.1, 256).unwrap();
        let pure = design_multisine(&mspec).unwrap();
        let combo = design_pulse_multisine(&pspec, &mspec).unwrap();
        assert_eq!(pure.samples(), combo.samples());
    }

    #[test]
    fn single_pulse_is_band_limited() {
        let mspec = MultisineSpec::new(vec![0.0], vec![0.0], 512, None, 0).unwrap();
        let pspec = PulseTrainSpec::new(vec![100], vec![3.0], 0.05, 512).unwrap();
        let rec = design_pulse_multisine(&pspec, &mspec).unwrap();
        let spectrum = dft(rec.samples());
        let peak = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(peak > 0.0);
        let cutoff = (0.05f64 * 512.0).floor() as usize;
        for k in cutoff + 1..=256 {
            assert!(spectrum[k].norm() < 1e-10 * peak, "line {k} above bandwidth");
        }
    }

    #[test]
    fn two_pulses_superpose() {
        let mspec = MultisineSpec::new(vec![0.0], vec![0.0], 256, None, 0).unwrap();
        let single = |t: usize| {
            let pspec = PulseTrainSpec::new(vec![t], vec![1.0], 0.1, 256).unwrap();
            design_pulse_multisine(&pspec, &mspec).unwrap()
        };
        let a = single(40);
        let b = single(90);
        let both = design_pulse_multisine(
            &PulseTrainSpec::new(vec![40, 90], vec![1.0, 1.0], 0.1, 256).unwrap(),
            &mspec,
        )
        .unwrap();
        for i in 0..256 {
            assert_abs_diff_eq!(
                both.samples()[i],
                a.samples()[i] + b.samples()[i],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn mismatched_periods_rejected() {
        let mspec = MultisineSpec::flat_random(5, 128, None, 0).unwrap();
        let pspec = PulseTrainSpec::new(vec![10], vec![1.0], 0.1, 256).unwrap();
        assert!(design_pulse_multisine(&pspec, &mspec).is_err());
    }
}
