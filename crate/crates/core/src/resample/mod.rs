//! Resampling, convolution and the blur-then-decimate degradation pipeline.
//!
//! All geometry uses the pixel-is-area convention: pixel `i` covers
//! `[i, i + 1)` and its sample sits at `i + ½`, so resampling maps image
//! extents onto each other exactly and normalized box coordinates stay valid
//! at any output size.

pub mod convolve;
pub mod cubic;
mod degrade;
mod image;

pub use self::convolve::{convolve, convolve_plane};
pub use self::cubic::{bicubic_resample, bicubic_resample_with, Border, CATMULL_ROM};
pub use self::degrade::{degrade, output_dimensions, plan_degradation, DegradePlan, DegradeSpec, MIN_OUTPUT_SIDE};
pub use self::image::{read_meta, sidecar_path, write_meta, Image, ImageMeta};
