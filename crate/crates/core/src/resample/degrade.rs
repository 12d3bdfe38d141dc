use serde::{Deserialize, Serialize};

use super::{bicubic_resample, convolve, Image};
use crate::error::{Error, Result};
use crate::optics::{kernel_at_q, ApertureSpec, PsfGrid, PsfKernel, AIRY_DIAMETER_FACTOR, DEFAULT_KERNEL_SIZE, DEFAULT_WAVELENGTH};

/// Smallest output side accepted from a degradation.
pub const MIN_OUTPUT_SIDE: usize = 8;

/// Kernel support, in multiples of the first-dark-ring diameter, that must fit
/// inside the intermediate kernel.
const SUPPORT_RINGS: f64 = 4.0;

/// One degradation condition: resolution change plus optical blur.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradeSpec {
    pub source_gsd: f64,
    pub target_gsd: f64,
    pub q: f64,
    pub aperture: ApertureSpec,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    #[serde(default = "default_kernel_size")]
    pub intermediate_kernel_size: usize,
}

fn default_wavelength() -> f64 {
    DEFAULT_WAVELENGTH
}

fn default_kernel_size() -> usize {
    DEFAULT_KERNEL_SIZE
}

impl DegradeSpec {
    pub fn new(source_gsd: f64, target_gsd: f64, q: f64, aperture: ApertureSpec) -> Self {
        Self {
            source_gsd,
            target_gsd,
            q,
            aperture,
            wavelength: DEFAULT_WAVELENGTH,
            intermediate_kernel_size: DEFAULT_KERNEL_SIZE,
        }
    }

    /// Decimation factor `φ = target / source`.
    pub fn factor(&self) -> f64 {
        self.target_gsd / self.source_gsd
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.source_gsd > 0.0 && self.target_gsd.is_finite()) {
            return Err(Error::InvalidConfig("GSD values must be positive".into()));
        }
        if self.target_gsd <= self.source_gsd {
            return Err(Error::NotDegradation {
                source_gsd: self.source_gsd,
                target_gsd: self.target_gsd,
            });
        }
        if !(self.q > 0.0 && self.q <= 4.0) {
            return Err(Error::InvalidConfig(format!("q must lie in (0, 4], got {}", self.q)));
        }
        if self.intermediate_kernel_size < 3 || self.intermediate_kernel_size % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "intermediate kernel size must be odd and at least 3, got {}",
                self.intermediate_kernel_size
            )));
        }
        self.aperture.validate()
    }
}

/// Image sizes and blur kernel for degrading one input size under one spec.
///
/// Plans depend only on the input dimensions and the [`DegradeSpec`], so a batch of
/// same-sized images can share one.
#[derive(Debug, Clone)]
pub struct DegradePlan {
    pub input: (usize, usize),
    pub intermediate: (usize, usize),
    pub output: (usize, usize),
    pub kernel: PsfKernel,
    pub target_gsd: f64,
    source_gsd: f64,
}

/// Output dimensions `round(w/φ) × round(h/φ)`.
pub fn output_dimensions(width: usize, height: usize, spec: &DegradeSpec) -> Result<(usize, usize)> {
    spec.validate()?;
    let phi = spec.factor();
    let out = (
        (width as f64 / phi).round() as usize,
        (height as f64 / phi).round() as usize,
    );
    if out.0 < MIN_OUTPUT_SIDE || out.1 < MIN_OUTPUT_SIDE {
        return Err(Error::ImageTooSmall {
            width: out.0,
            height: out.1,
        });
    }
    Ok(out)
}

pub fn plan_degradation(width: usize, height: usize, spec: &DegradeSpec) -> Result<DegradePlan> {
    let (out_w, out_h) = output_dimensions(width, height, spec)?;
    let k = spec.intermediate_kernel_size;

    // Largest intermediate width whose kernel support, 4 ring diameters at
    // 2.44·q·(int_w/out_w) px each, stays within k.
    let ring_per_width = SUPPORT_RINGS * AIRY_DIAMETER_FACTOR * spec.q / out_w as f64;
    let int_w = ((k as f64 / ring_per_width).floor() as usize).clamp(out_w, width);
    let int_h = if int_w == width {
        height
    } else {
        ((height as f64 * int_w as f64 / width as f64).round() as usize).max(out_h)
    };

    // The kernel must also fit inside the intermediate image.
    let max_side = int_w.min(int_h);
    let side = if k <= max_side { k } else if max_side % 2 == 1 { max_side } else { max_side - 1 };
    let q_intermediate = spec.q * int_w as f64 / out_w as f64;
    let kernel = kernel_at_q(&spec.aperture, q_intermediate, side, &PsfGrid::default())?;

    Ok(DegradePlan {
        input: (width, height),
        intermediate: (int_w, int_h),
        output: (out_w, out_h),
        kernel,
        target_gsd: spec.target_gsd,
        source_gsd: spec.source_gsd,
    })
}

impl DegradePlan {
    /// Resample to the intermediate grid, blur, then resample to the target grid.
    pub fn apply(&self, image: &Image) -> Result<Image> {
        if (image.width(), image.height()) != self.input {
            return Err(Error::Size(format!(
                "plan built for {}x{}, image is {}x{}",
                self.input.0,
                self.input.1,
                image.width(),
                image.height()
            )));
        }
        if let Some(g) = image.gsd() {
            if (g - self.source_gsd).abs() > 1e-9 * self.source_gsd {
                return Err(Error::Validation(format!(
                    "image GSD {g} differs from source GSD {}",
                    self.source_gsd
                )));
            }
        }
        let image = image.clone().with_gsd(self.source_gsd);
        let intermediate = if self.intermediate == self.input {
            image
        } else {
            bicubic_resample(&image, self.intermediate.0, self.intermediate.1)
        };
        let blurred = convolve(&intermediate, &self.kernel)?;
        let out = bicubic_resample(&blurred, self.output.0, self.output.1);
        Ok(out.with_gsd(self.target_gsd))
    }
}

/// Simulates a coarser, diffraction-blurred sensor viewing the same scene.
pub fn degrade(image: &Image, spec: &DegradeSpec) -> Result<Image> {
    plan_degradation(image.width(), image.height(), spec)?.apply(image)
}
