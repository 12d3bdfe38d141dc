//! Imaging geometry, aperture functions and diffraction point spread functions.
//!
//! The far-field (Fraunhofer) intensity pattern of an aperture is the squared
//! magnitude of its Fourier transform. [`simulate_psf`] evaluates that with an
//! FFT over a zero-padded [`ApertureMask`]; [`analytic_circular_psf`] gives the
//! closed-form Airy pattern of a clear circular pupil and serves as the
//! reference the numerical route is checked against.
//!
//! Everything downstream is expressed through the dimensionless Q value
//! `λf / (D·p)`: in detector pixels the Airy first dark ring has diameter
//! `2.44·Q`, independent of the absolute scale of the optics.

mod aperture;
mod bessel;
pub mod profile;
mod psf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use aperture::{build_aperture, ApertureKind, ApertureMask, ApertureSpec};
pub use bessel::{airy_intensity, j1, J1_FIRST_ZERO};
pub use psf::{kernel_for_condition, simulate_psf, PsfGrid, PsfKernel, DEFAULT_KERNEL_SIZE};

pub(crate) use psf::kernel_at_q;

/// Wavelength used when none is given, in metres.
pub const DEFAULT_WAVELENGTH: f64 = 550e-9;

/// Ratio of the Airy first dark-ring diameter to `λf/D`.
pub const AIRY_DIAMETER_FACTOR: f64 = 2.44;

/// Physical parameters of a camera looking straight down from a fixed altitude.
///
/// All lengths are in metres; `pixel_pitch` is metres per detector pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    pub focal_length: f64,
    pub aperture_diameter: f64,
    pub pixel_pitch: f64,
    pub altitude: f64,
}

fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH
}

impl OpticalConfig {
    /// Builds a configuration at the default 550 nm wavelength.
    pub fn new(
        focal_length: f64,
        aperture_diameter: f64,
        pixel_pitch: f64,
        altitude: f64,
    ) -> Result<Self> {
        let config = Self {
            wavelength: DEFAULT_WAVELENGTH,
            focal_length,
            aperture_diameter,
            pixel_pitch,
            altitude,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_wavelength(mut self, wavelength: f64) -> Result<Self> {
        self.wavelength = wavelength;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("wavelength", self.wavelength),
            ("focal_length", self.focal_length),
            ("aperture_diameter", self.aperture_diameter),
            ("pixel_pitch", self.pixel_pitch),
            ("altitude", self.altitude),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        let q = self.q_unchecked();
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidConfig(format!("derived Q value {q} is not finite")));
        }
        Ok(())
    }

    fn q_unchecked(&self) -> f64 {
        self.wavelength * self.focal_length / (self.aperture_diameter * self.pixel_pitch)
    }
}

/// Ground sample distance `p·A/f` in metres per pixel.
///
/// A single altitude is used for the whole frame (flat ground).
pub fn gsd(config: &OpticalConfig) -> Result<f64> {
    config.validate()?;
    Ok(config.pixel_pitch * config.altitude / config.focal_length)
}

/// Q value `λf/(D·p)`: below 1 the system is detector limited, above 1
/// diffraction limited.
pub fn q_value(config: &OpticalConfig) -> Result<f64> {
    config.validate()?;
    Ok(config.q_unchecked())
}

/// Diameter of the Airy first dark ring at the focal plane, `2.44·λf/D`, in metres.
pub fn airy_first_zero(config: &OpticalConfig) -> Result<f64> {
    config.validate()?;
    Ok(AIRY_DIAMETER_FACTOR * config.wavelength * config.focal_length / config.aperture_diameter)
}

/// Airy intensity of a clear circular aperture at focal-plane `radius` (metres),
/// normalized to 1 on axis.
pub fn analytic_circular_psf(config: &OpticalConfig, radius: f64) -> Result<f64> {
    config.validate()?;
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "radius must be non-negative, got {radius}"
        )));
    }
    let x = std::f64::consts::PI * config.aperture_diameter * radius
        / (config.wavelength * config.focal_length);
    Ok(airy_intensity(x))
}
