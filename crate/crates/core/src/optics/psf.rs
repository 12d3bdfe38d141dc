use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use image::{ImageBuffer, Luma};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::aperture::{build_aperture, ApertureMask, ApertureSpec};
use super::AIRY_DIAMETER_FACTOR;
use crate::error::{Error, Result};
use crate::resample::cubic::{sample_point, Border, CATMULL_ROM};

/// Odd kernel side used for both target-plane and intermediate kernels.
pub const DEFAULT_KERNEL_SIZE: usize = 63;

/// Discrete, unit-sum point spread function on an odd square grid.
///
/// `q` is the Q value the grid realizes: one cell spans `(1/q)·λf/D` in the
/// focal plane, so the Airy first dark ring of a clear circular pupil has a
/// diameter of `2.44·q` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PsfKernel {
    weights: Vec<f64>,
    side: usize,
    q: f64,
}

impl PsfKernel {
    /// Normalizes `weights` to unit sum. The grid side must be odd and the
    /// weights non-negative.
    pub fn from_weights(mut weights: Vec<f64>, side: usize, q: f64) -> Result<Self> {
        if side % 2 == 0 || weights.len() != side * side {
            return Err(Error::Size(format!(
                "kernel needs an odd square grid, got {} weights for side {side}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation("kernel weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Validation("kernel weights sum to zero".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { weights, side, q })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Index of the central cell on either axis.
    pub fn centre(&self) -> usize {
        self.side / 2
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.weights[y * self.side + x]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Focal-plane size of one kernel cell for the given optics, in metres.
    pub fn pixel_pitch_at_plane(&self, wavelength: f64, focal_length: f64, aperture_diameter: f64) -> f64 {
        wavelength * focal_length / (aperture_diameter * self.q)
    }

    /// Row-major matrix, one row per line, space-separated decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.weights.len() * 24);
        for row in self.weights.chunks_exact(self.side) {
            for (i, w) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "{w}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format. `q` is not stored in the
    /// matrix and must be supplied.
    pub fn from_text(text: &str, q: f64) -> Result<Self> {
        let mut weights = Vec::new();
        let mut rows = 0;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            for token in line.split_whitespace() {
                let w: f64 = token.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("invalid kernel weight '{token}'"),
                })?;
                weights.push(w);
            }
            rows += 1;
        }
        Self::from_weights(weights, rows, q)
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// 16-bit grayscale visualization scaled so the peak is white.
    pub fn save_preview(&self, path: &Path) -> Result<()> {
        let peak = self.weights.iter().cloned().fold(0.0, f64::max);
        let side = self.side as u32;
        let buffer: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(side, side, |x, y| {
            let v = self.get(x as usize, y as usize) / peak;
            Luma([(v * u16::MAX as f64).round() as u16])
        });
        buffer.save(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn fft_2d(data: &mut [Complex<f64>], n: usize, fft: &Arc<dyn Fft<f64>>) {
    fft.process(data);
    transpose(data, n);
    fft.process(data);
    transpose(data, n);
}

fn transpose(data: &mut [Complex<f64>], n: usize) {
    for y in 0..n {
        for x in (y + 1)..n {
            data.swap(y * n + x, x * n + y);
        }
    }
}

/// Far-field intensity of `mask`: `|FFT(mask)|²`, shifted so the zero
/// frequency sits at the centre and normalized to unit sum.
///
/// Even grids lose their unpaired Nyquist row and column, which leaves an odd,
/// centrally symmetric kernel of side `grid_size - 1`.
pub fn simulate_psf(mask: &ApertureMask) -> Result<PsfKernel> {
    if mask.sum() <= 0.0 {
        return Err(Error::DegenerateAperture);
    }
    let n = mask.grid_size();
    let mut data: Vec<Complex<f64>> = mask.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft_2d(&mut data, n, &fft);

    let shift = n - n / 2;
    let skip = if n % 2 == 0 { 1 } else { 0 };
    let side = n - skip;
    let mut weights = Vec::with_capacity(side * side);
    for y in skip..n {
        let fy = (y + shift) % n;
        for x in skip..n {
            let fx = (x + shift) % n;
            weights.push(data[fy * n + fx].norm_sqr());
        }
    }
    PsfKernel::from_weights(weights, side, n as f64 / mask.diameter_cells())
}

/// Aperture grid used to simulate PSFs before resampling to a pixel plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfGrid {
    pub size: usize,
    /// Largest fraction of the grid the pupil may span.
    pub fill_fraction: f64,
}

impl Default for PsfGrid {
    fn default() -> Self {
        Self {
            size: 1024,
            fill_fraction: 0.25,
        }
    }
}

/// PSF of `spec` resampled so one kernel cell is one detector pixel of a
/// system with the given Q value; the circular first dark ring spans `2.44·q`
/// cells. Truncated to `kernel_size` and renormalized.
pub fn kernel_for_condition(spec: &ApertureSpec, q: f64, kernel_size: usize) -> Result<PsfKernel> {
    kernel_for_condition_with_grid(spec, q, kernel_size, &PsfGrid::default())
}

pub fn kernel_for_condition_with_grid(
    spec: &ApertureSpec,
    q: f64,
    kernel_size: usize,
    grid: &PsfGrid,
) -> Result<PsfKernel> {
    if !(q > 0.0 && q <= 4.0) {
        return Err(Error::InvalidConfig(format!("q must lie in (0, 4], got {q}")));
    }
    kernel_at_q(spec, q, kernel_size, grid)
}

/// [`kernel_for_condition`] without the upper bound on `q`, for kernels on
/// intermediate pixel grids finer than the target plane.
pub(crate) fn kernel_at_q(spec: &ApertureSpec, q: f64, kernel_size: usize, grid: &PsfGrid) -> Result<PsfKernel> {
    if kernel_size < 3 || kernel_size % 2 == 0 {
        return Err(Error::InvalidConfig(format!(
            "kernel size must be odd and at least 3, got {kernel_size}"
        )));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::InvalidConfig(format!("q must be positive, got {q}")));
    }
    if 4.0 * AIRY_DIAMETER_FACTOR * q < 3.0 {
        return Err(Error::DegenerateKernel { q });
    }

    // Keep at least two PSF samples per output pixel.
    let fill = grid.fill_fraction.min(0.5 / q);
    let mask = build_aperture(spec, grid.size, fill)?;
    let psf = simulate_psf(&mask)?;

    let bins_per_pixel = psf.q() / q;
    let psf_centre = psf.centre() as f64;
    let half = (kernel_size / 2) as f64;
    let mut weights = Vec::with_capacity(kernel_size * kernel_size);
    for y in 0..kernel_size {
        let sy = psf_centre + (y as f64 - half) * bins_per_pixel;
        for x in 0..kernel_size {
            let sx = psf_centre + (x as f64 - half) * bins_per_pixel;
            let v = sample_point(psf.weights(), psf.side(), psf.side(), sx, sy, CATMULL_ROM, Border::Zero);
            weights.push(v.max(0.0));
        }
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateKernel { q });
    }
    PsfKernel::from_weights(weights, kernel_size, q)
}
