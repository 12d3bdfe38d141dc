//! Radial profile measurements on sampled point spread functions.
//!
//! Densely sampled radial profiles (for instance pooled from many blobs at
//! different sub-pixel phases) can expose the Airy first dark ring as the
//! first local minimum of a binned profile. A single centred kernel only
//! samples the radii `√(i² + j²)`, which is too sparse for that, and the image
//! of an extended source has its ring filled in; [`fit_first_zero_diameter`]
//! and [`fit_disc_first_zero_diameter`] instead fit the scale of an Airy
//! pattern to all samples at once.

use super::bessel::{airy_intensity, J1_FIRST_ZERO};
use super::PsfKernel;

/// A sample of a 2-D intensity at a known distance from the pattern centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub radius: f64,
    pub value: f64,
}

/// All kernel cells as (distance from centre, weight) pairs.
pub fn kernel_samples(kernel: &PsfKernel) -> Vec<RadialSample> {
    let c = kernel.centre() as f64;
    let side = kernel.side();
    kernel
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let dx = (i % side) as f64 - c;
            let dy = (i / side) as f64 - c;
            RadialSample {
                radius: (dx * dx + dy * dy).sqrt(),
                value,
            }
        })
        .collect()
}

/// Mean value per radial bin of width `bin_width`; empty bins are `None`.
pub fn binned_profile(samples: &[RadialSample], bin_width: f64, max_radius: f64) -> Vec<Option<f64>> {
    let bins = (max_radius / bin_width).ceil() as usize;
    let mut sums = vec![(0.0, 0usize); bins];
    for s in samples {
        let b = (s.radius / bin_width) as usize;
        if b < bins {
            sums[b].0 += s.value;
            sums[b].1 += 1;
        }
    }
    sums.into_iter()
        .map(|(sum, n)| (n > 0).then(|| sum / n as f64))
        .collect()
}

/// Radius (bin centre) of the first local minimum of the binned profile,
/// skipping empty bins.
pub fn first_radial_minimum(samples: &[RadialSample], bin_width: f64, max_radius: f64) -> Option<f64> {
    let profile: Vec<(f64, f64)> = binned_profile(samples, bin_width, max_radius)
        .into_iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| ((i as f64 + 0.5) * bin_width, v)))
        .collect();
    profile
        .windows(3)
        .find(|w| w[1].1 < w[0].1 && w[1].1 <= w[2].1)
        .map(|w| w[1].0)
}

/// Samples inside `max_radius`, with equal radii merged into weighted means;
/// this leaves every least-squares fit against a radial model unchanged.
fn grouped(samples: &[RadialSample], max_radius: f64) -> Vec<(f64, f64, f64)> {
    let mut inside: Vec<RadialSample> = samples.iter().copied().filter(|s| s.radius <= max_radius).collect();
    inside.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for s in inside {
        match out.last_mut() {
            Some((r, sum, n)) if *r == s.radius => {
                *sum += s.value;
                *n += 1.0;
            }
            _ => out.push((s.radius, s.value, 1.0)),
        }
    }
    out.into_iter().map(|(r, sum, n)| (r, sum / n, n)).collect()
}

/// Residual of the best amplitude-scaled fit of `model` to weighted samples:
/// `min_A Σ n(v − A·m)² = Σ n·v² − (Σ n·v·m)² / Σ n·m²`, dropping the
/// within-group variance, which does not depend on the model.
fn residual(groups: &[(f64, f64, f64)], model: &[f64]) -> f64 {
    let (mut vm, mut mm, mut vv) = (0.0, 0.0, 0.0);
    for (&(_, v, n), &m) in groups.iter().zip(model) {
        vm += n * v * m;
        mm += n * m * m;
        vv += n * v * v;
    }
    if mm == 0.0 {
        return vv;
    }
    vv - vm * vm / mm
}

/// Minimizes `cost` over `[lo, hi]`: a grid of `steps` intervals, then
/// golden-section refinement around the best grid point.
fn minimize(lo: f64, hi: f64, steps: usize, cost: impl Fn(f64) -> f64) -> f64 {
    let step = (hi - lo) / steps as f64;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=steps {
        let x = lo + i as f64 * step;
        let c = cost(x);
        if c < best.1 {
            best = (x, c);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = cost(d);
        }
    }
    (a + b) / 2.0
}

/// Diameter of the first dark ring of the Airy pattern that best fits
/// `samples` in the least-squares sense, searched over ring diameters in
/// `[min_diameter, max_diameter]`. Samples beyond `max_diameter` from the
/// centre are ignored.
pub fn fit_first_zero_diameter(samples: &[RadialSample], min_diameter: f64, max_diameter: f64) -> f64 {
    let groups = grouped(samples, max_diameter);
    // Sparse samples make the residual oscillate in the scale, so the grid is fine.
    let zero_radius = minimize(min_diameter / 2.0, max_diameter / 2.0, 2000, |z| {
        let scale = J1_FIRST_ZERO / z;
        let model: Vec<f64> = groups.iter().map(|g| airy_intensity(scale * g.0)).collect();
        residual(&groups, &model)
    });
    2.0 * zero_radius
}

/// Like [`fit_first_zero_diameter`] for the image of a uniform disc of
/// `disc_diameter` rather than a point: the model is the Airy pattern
/// averaged over the disc. Small discs fill in the dark ring, leaving no
/// local minimum to find, but the fitted Airy scale still locates it.
pub fn fit_disc_first_zero_diameter(
    samples: &[RadialSample],
    disc_diameter: f64,
    min_diameter: f64,
    max_diameter: f64,
) -> f64 {
    let groups = grouped(samples, max_diameter);
    let rho = disc_diameter / 2.0;
    // Midpoints of an 8×8 grid over the disc's bounding square.
    let points: Vec<(f64, f64)> = (0..64)
        .map(|i| (((i % 8) as f64 + 0.5) / 4.0 - 1.0, ((i / 8) as f64 + 0.5) / 4.0 - 1.0))
        .filter(|(x, y)| x * x + y * y <= 1.0)
        .map(|(x, y)| (x * rho, y * rho))
        .collect();
    let step = 0.05;
    let max_r = groups.last().map_or(0.0, |g| g.0);
    let table_len = (max_r / step).ceil() as usize + 2;
    let zero_radius = minimize(min_diameter / 2.0, max_diameter / 2.0, 100, |z| {
        let scale = J1_FIRST_ZERO / z;
        let table: Vec<f64> = (0..table_len)
            .map(|k| {
                let r = k as f64 * step;
                let sum: f64 = points.iter().map(|&(px, py)| airy_intensity(scale * (r - px).hypot(py))).sum();
                sum / points.len() as f64
            })
            .collect();
        let model: Vec<f64> = groups
            .iter()
            .map(|g| {
                let t = g.0 / step;
                let k = (t as usize).min(table_len - 2);
                let f = t - k as f64;
                table[k] * (1.0 - f) + table[k + 1] * f
            })
            .collect();
        residual(&groups, &model)
    });
    2.0 * zero_radius
}

/// Fraction of the kernel's weight within `radius` cells of the centre.
pub fn encircled_energy(kernel: &PsfKernel, radius: f64) -> f64 {
    kernel_samples(kernel)
        .iter()
        .filter(|s| s.radius <= radius)
        .map(|s| s.value)
        .sum()
}
