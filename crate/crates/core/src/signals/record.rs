//! Uniformly sampled periodic records and multi-operating-point datasets.

use crate::error::{Error, Result};

/// A uniformly sampled signal holding `period_count` repetitions of a
/// `period_length`-sample period. `offset` records the operating-point level
/// that was added to the zero-mean excitation, in signal units.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRecord {
    samples: Vec<f64>,
    sampling_minutes: f64,
    period_length: usize,
    period_count: usize,
    offset: f64,
}

impl SampledRecord {
    pub fn new(
        samples: Vec<f64>,
        sampling_minutes: f64,
        period_length: usize,
        period_count: usize,
        offset: f64,
    ) -> Result<Self> {
        if period_length == 0 || period_count == 0 {
            return Err(Error::invalid("period length and count must be positive"));
        }
        if !(sampling_minutes > 0.0) {
            return Err(Error::invalid("sampling period must be positive"));
        }
        if samples.len() != period_length * period_count {
            return Err(Error::invalid(format!(
                "sample count {} does not equal period_length*period_count = {}",
                samples.len(),
                period_length * period_count
            )));
        }
        Ok(Self {
            samples,
            sampling_minutes,
            period_length,
            period_count,
            offset,
        })
    }

    /// One period, unit sampling time, zero offset.
    pub fn single_period(samples: Vec<f64>) -> Result<Self> {
        let n = samples.len();
        Self::new(samples, 1.0, n, 1, 0.0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sampling_minutes(&self) -> f64 {
        self.sampling_minutes
    }

    pub fn period_length(&self) -> usize {
        self.period_length
    }

    pub fn period_count(&self) -> usize {
        self.period_count
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// View of period `p` (0-based).
    pub fn period(&self, p: usize) -> &[f64] {
        let n = self.period_length;
        &self.samples[p * n..(p + 1) * n]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    /// Same samples with a different sampling period.
    pub fn with_sampling_minutes(mut self, ts: f64) -> Result<Self> {
        if !(ts > 0.0) {
            return Err(Error::invalid("sampling period must be positive"));
        }
        self.sampling_minutes = ts;
        Ok(self)
    }

    /// Adds a constant operating-point level to every sample and records it.
    pub fn with_offset(mut self, level: f64) -> Self {
        for x in &mut self.samples {
            *x += level;
        }
        self.offset += level;
        self
    }

    /// Replaces the samples, keeping the framing metadata.
    pub fn map_samples(mut self, f: impl Fn(f64) -> f64) -> Self {
        for x in &mut self.samples {
            *x = f(*x);
        }
        self
    }

    /// Repeats the declared period `count` times (the record must already be
    /// exactly periodic for this to be meaningful).
    pub fn tiled(&self, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("tile count must be positive"));
        }
        let first = self.period(0);
        let mut samples = Vec::with_capacity(first.len() * count);
        for _ in 0..count {
            samples.extend_from_slice(first);
        }
        Self::new(
            samples,
            self.sampling_minutes,
            self.period_length,
            count,
            self.offset,
        )
    }

    /// Element-wise average of the periods, returned as a single-period record.
    pub fn period_averaged(&self) -> Self {
        let n = self.period_length;
        let mut avg = vec![0.0; n];
        for p in 0..self.period_count {
            let per = self.period(p);
            for (a, x) in avg.iter_mut().zip(per) {
                *a += x;
            }
        }
        let scale = 1.0 / self.period_count as f64;
        for a in &mut avg {
            *a *= scale;
        }
        Self {
            samples: avg,
            sampling_minutes: self.sampling_minutes,
            period_length: n,
            period_count: 1,
            offset: self.offset,
        }
    }

    /// Checks that two records share the sampling grid and periodic framing.
    pub fn same_grid(&self, other: &Self) -> bool {
        self.sampling_minutes == other.sampling_minutes
            && self.period_length == other.period_length
            && self.period_count == other.period_count
    }
}

/// Drops the first `discard` periods of `rec` (transient removal).
pub fn steady_state_periods(rec: &SampledRecord, discard: usize) -> Result<SampledRecord> {
    if discard >= rec.period_count() {
        return Err(Error::invalid(format!(
            "cannot discard {} of {} periods",
            discard,
            rec.period_count()
        )));
    }
    let n = rec.period_length();
    let samples = rec.samples()[discard * n..].to_vec();
    SampledRecord::new(
        samples,
        rec.sampling_minutes(),
        n,
        rec.period_count() - discard,
        rec.offset(),
    )
}

/// Whether a dataset is used to build models or to score them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetRole {
    Estimation,
    Validation,
}

impl DatasetRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetRole::Estimation => "estimation",
            DatasetRole::Validation => "validation",
        }
    }
}

/// One operating point: the input offset level plus the excited input/output
/// records around it.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub offset: f64,
    pub input: SampledRecord,
    pub output: SampledRecord,
}

/// A set of operating points sharing sampling grid and periodic framing.
#[derive(Debug, Clone)]
pub struct Dataset {
    role: DatasetRole,
    points: Vec<OperatingPoint>,
}

impl Dataset {
    pub fn new(role: DatasetRole, points: Vec<OperatingPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("dataset needs at least one operating point"));
        }
        let first = &points[0].input;
        for (i, p) in points.iter().enumerate() {
            if !p.input.same_grid(first) || !p.output.same_grid(first) {
                return Err(Error::invalid(format!(
                    "operating point {i} does not share the dataset sampling grid"
                )));
            }
            if p.input.len() != p.output.len() {
                return Err(Error::invalid(format!(
                    "operating point {i} has mismatched input/output lengths"
                )));
            }
        }
        for w in points.windows(2) {
            if !(w[1].offset > w[0].offset) {
                return Err(Error::invalid(
                    "operating-point offsets must be strictly increasing",
                ));
            }
        }
        Ok(Self { role, points })
    }

    pub fn role(&self) -> DatasetRole {
        self.role
    }

    pub fn points(&self) -> &[OperatingPoint] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Result<&OperatingPoint> {
        self.points.get(index).ok_or_else(|| {
            Error::invalid(format!(
                "operating point {index} out of range ({} available)",
                self.points.len()
            ))
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sampling_minutes(&self) -> f64 {
        self.points[0].input.sampling_minutes()
    }

    pub fn period_length(&self) -> usize {
        self.points[0].input.period_length()
    }

    pub fn period_count(&self) -> usize {
        self.points[0].input.period_count()
    }
}
