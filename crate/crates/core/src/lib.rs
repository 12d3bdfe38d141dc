//! Spatial degradation of high-resolution aerial imagery to emulate coarser
//! satellite or high-altitude sensors, and the detection-metric tooling used
//! to measure how object detectors cope with it.
//!
//! The degradation of one image is a diffraction blur followed by bicubic
//! decimation:
//!
//! ```text
//! I_coarse = (I_fine ⊛ PSF) ↓φ        with  GSD_coarse = φ · GSD_fine
//! ```
//!
//! where the PSF is simulated from a circular or Cassegrain pupil by FFT and
//! sized so its Airy ring matches the requested Q value at the output pixels.

pub mod dataset;
pub mod error;
pub mod metrics;
pub mod optics;
pub mod resample;
pub mod sweep;

pub use error::{Error, Result};
