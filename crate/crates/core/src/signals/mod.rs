//! Excitation design, periodic record handling and spectral preprocessing.

mod design;
mod record;
mod spectra;

pub use design::{design_multisine, design_pulse_multisine, MultisineSpec, PulseTrainSpec};
pub use record::{steady_state_periods, Dataset, DatasetRole, OperatingPoint, SampledRecord};
pub use spectra::{dft, idft_real, record_spectra, RecordSpectra};
