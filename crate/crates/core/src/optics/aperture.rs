use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApertureKind {
    Circular,
    /// Annular pupil with a central secondary mirror held by spider vanes.
    Cassegrain,
}

impl ApertureKind {
    pub fn name(self) -> &'static str {
        match self {
            ApertureKind::Circular => "circular",
            ApertureKind::Cassegrain => "cassegrain",
        }
    }
}

impl std::str::FromStr for ApertureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circular" => Ok(ApertureKind::Circular),
            "cassegrain" => Ok(ApertureKind::Cassegrain),
            other => Err(Error::Usage(format!(
                "unknown aperture '{other}' (expected circular or cassegrain)"
            ))),
        }
    }
}

/// Parametric pupil geometry.
///
/// Obscuration and vane widths are fractions of `diameter`; they are ignored
/// for circular pupils.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureSpec {
    pub kind: ApertureKind,
    #[serde(default = "default_diameter")]
    pub diameter: f64,
    #[serde(default = "default_obscuration")]
    pub obscuration_ratio: f64,
    #[serde(default = "default_spiders")]
    pub spider_count: u32,
    #[serde(default = "default_spider_width")]
    pub spider_width_ratio: f64,
}

fn default_diameter() -> f64 {
    0.1
}
fn default_obscuration() -> f64 {
    0.3
}
fn default_spiders() -> u32 {
    4
}
fn default_spider_width() -> f64 {
    0.02
}

impl ApertureSpec {
    pub fn circular(diameter: f64) -> Self {
        Self {
            kind: ApertureKind::Circular,
            diameter,
            obscuration_ratio: default_obscuration(),
            spider_count: 0,
            spider_width_ratio: default_spider_width(),
        }
    }

    /// Cassegrain pupil with 30% central obscuration and four 2%-wide vanes.
    pub fn cassegrain(diameter: f64) -> Self {
        Self {
            kind: ApertureKind::Cassegrain,
            diameter,
            obscuration_ratio: default_obscuration(),
            spider_count: default_spiders(),
            spider_width_ratio: default_spider_width(),
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diameter.is_finite() && self.diameter > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "aperture diameter must be positive, got {}",
                self.diameter
            )));
        }
        if self.kind == ApertureKind::Cassegrain {
            if !(self.obscuration_ratio > 0.0 && self.obscuration_ratio < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "obscuration ratio must lie in (0, 1), got {}",
                    self.obscuration_ratio
                )));
            }
            if self.spider_count > 0
                && !(self.spider_width_ratio.is_finite() && self.spider_width_ratio > 0.0)
            {
                return Err(Error::InvalidConfig(format!(
                    "spider width ratio must be positive, got {}",
                    self.spider_width_ratio
                )));
            }
        }
        Ok(())
    }
}

/// Discrete square pupil transmission map.
///
/// Cell `(x, y)` is stored at `values[y * grid_size + x]`; the pupil centre is
/// the cell at index `grid_size / 2` on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureMask {
    values: Vec<f64>,
    grid_size: usize,
    meters_per_cell: f64,
    diameter_cells: f64,
}

impl ApertureMask {
    /// Wraps an explicit transmission grid. `diameter_cells` is the pupil
    /// diameter in cells and fixes the sampling of the resulting PSF.
    pub fn from_values(
        values: Vec<f64>,
        grid_size: usize,
        meters_per_cell: f64,
        diameter_cells: f64,
    ) -> Result<Self> {
        if values.len() != grid_size * grid_size {
            return Err(Error::Size(format!(
                "{} values for a {grid_size}x{grid_size} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v != 0.0 && v != 0.5 && v != 1.0) {
            return Err(Error::Validation(format!(
                "aperture transmission must be 0, 0.5 or 1, got {v}"
            )));
        }
        if !(diameter_cells > 0.0 && meters_per_cell > 0.0) {
            return Err(Error::InvalidConfig("mask scale must be positive".into()));
        }
        Ok(Self {
            values,
            grid_size,
            meters_per_cell,
            diameter_cells,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn meters_per_cell(&self) -> f64 {
        self.meters_per_cell
    }

    pub fn diameter_cells(&self) -> f64 {
        self.diameter_cells
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.grid_size + x]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Three-valued circle function: 1 inside, ½ exactly on the rim, 0 outside.
fn circ(r: f64, radius: f64) -> f64 {
    if (r - radius).abs() <= 1e-12 * radius.max(1.0) {
        0.5
    } else if r < radius {
        1.0
    } else {
        0.0
    }
}

// cos/sin of multiples of π/2 are not exact in floating point; snapping keeps
// the rasterized vanes exactly symmetric under quarter turns.
fn snap(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else if (v.abs() - 1.0).abs() < 1e-12 {
        v.signum()
    } else {
        v
    }
}

/// Rasterizes `spec` onto a `grid_size`² grid. The pupil diameter spans
/// `fill_fraction` of the grid side; the rest is zero padding, which sets
/// how finely the PSF is sampled.
pub fn build_aperture(spec: &ApertureSpec, grid_size: usize, fill_fraction: f64) -> Result<ApertureMask> {
    spec.validate()?;
    if grid_size < 32 {
        return Err(Error::Resolution(format!(
            "grid of {grid_size} cells is below the 32-cell minimum"
        )));
    }
    if !(fill_fraction > 0.0 && fill_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "fill fraction must lie in (0, 1], got {fill_fraction}"
        )));
    }

    let diameter_cells = fill_fraction * grid_size as f64;
    let radius = diameter_cells / 2.0;
    let meters_per_cell = spec.diameter / diameter_cells;

    let cassegrain = spec.kind == ApertureKind::Cassegrain;
    let inner_radius = spec.obscuration_ratio * radius;
    let half_vane = spec.spider_width_ratio * diameter_cells / 2.0;
    if cassegrain {
        if 2.0 * inner_radius < 2.0 {
            return Err(Error::Resolution(format!(
                "central obscuration spans {:.2} cells; at least 2 are needed",
                2.0 * inner_radius
            )));
        }
        if spec.spider_count > 0 && 2.0 * half_vane < 1.0 {
            return Err(Error::Resolution(format!(
                "spider vanes span {:.2} cells; at least 1 is needed",
                2.0 * half_vane
            )));
        }
    }
    let vanes: Vec<(f64, f64)> = (0..if cassegrain { spec.spider_count } else { 0 })
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / spec.spider_count as f64;
            (snap(angle.cos()), snap(angle.sin()))
        })
        .collect();

    let centre = (grid_size / 2) as f64;
    let mut values = vec![0.0; grid_size * grid_size];
    for (y, row) in values.chunks_exact_mut(grid_size).enumerate() {
        let dy = y as f64 - centre;
        for (x, cell) in row.iter_mut().enumerate() {
            let dx = x as f64 - centre;
            let r = (dx * dx + dy * dy).sqrt();
            let mut v = circ(r, radius);
            if cassegrain && v > 0.0 {
                v -= circ(r, inner_radius);
                if v > 0.0 {
                    let on_vane = vanes.iter().any(|&(c, s)| {
                        let along = dx * c + dy * s;
                        let across = -dx * s + dy * c;
                        along > 0.0 && across.abs() < half_vane
                    });
                    if on_vane {
                        v = 0.0;
                    }
                }
            }
            *cell = v;
        }
    }

    Ok(ApertureMask {
        values,
        grid_size,
        meters_per_cell,
        diameter_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_area_matches_disc() {
        let mask = build_aperture(&ApertureSpec::circular(0.1), 512, 0.25).unwrap();
        let open = mask.values().iter().filter(|&&v| v == 1.0).count() as f64;
        let expected = std::f64::consts::FRAC_PI_4 * 0.25 * 0.25 * 512.0 * 512.0;
        assert!((open - expected).abs() / expected < 0.01, "{open} vs {expected}");
        assert_eq!(mask.get(256, 256), 1.0);
    }

    #[test]
    fn rim_cells_take_half_transmission() {
        // Diameter 128 cells: the cell 64 cells right of centre lies on the rim.
        let mask = build_aperture(&ApertureSpec::circular(0.1), 512, 0.25).unwrap();
        assert_eq!(mask.get(256 + 64, 256), 0.5);
        assert_eq!(mask.get(256, 256 - 64), 0.5);
        assert_eq!(mask.get(256 + 63, 256), 1.0);
        assert_eq!(mask.get(256 + 65, 256), 0.0);
        assert!(mask.values().iter().all(|&v| v == 0.0 || v == 0.5 || v == 1.0));
    }

    #[test]
    fn cassegrain_is_subset_of_circle() {
        let circle = build_aperture(&ApertureSpec::circular(0.1), 512, 0.25).unwrap();
        let cass = build_aperture(&ApertureSpec::cassegrain(0.1), 512, 0.25).unwrap();
        assert!(cass.sum() < circle.sum());
        for (c, k) in circle.values().iter().zip(cass.values()) {
            assert!(k <= c);
        }
        assert_eq!(cass.get(256, 256), 0.0);
        // A vane runs along +x from the obscuration to the rim.
        assert_eq!(cass.get(256 + 40, 256), 0.0);
        assert_eq!(cass.get(256 + 40, 256 + 20), 1.0);
    }

    #[test]
    fn cassegrain_quarter_turn_symmetric() {
        let mask = build_aperture(&ApertureSpec::cassegrain(0.1), 256, 0.5).unwrap();
        let n = mask.grid_size();
        let c = n / 2;
        for y in 1..n {
            for x in 1..n {
                // (dx, dy) -> (-dy, dx)
                let rx = c + c - y;
                let ry = x;
                assert_eq!(mask.get(x, y), mask.get(rx, ry), "({x}, {y})");
            }
        }
    }

    #[test]
    fn coarse_grids_rejected() {
        assert!(matches!(
            build_aperture(&ApertureSpec::circular(0.1), 16, 0.5),
            Err(Error::Resolution(_))
        ));
        // Obscuration of 0.3 * 0.1 * 32 = 0.96 cells.
        assert!(matches!(
            build_aperture(&ApertureSpec::cassegrain(0.1), 32, 0.1),
            Err(Error::Resolution(_))
        ));
        assert!(build_aperture(&ApertureSpec::circular(0.1), 64, 0.0).is_err());
        assert!(build_aperture(&ApertureSpec::circular(0.1), 64, 1.5).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = ApertureSpec::cassegrain(0.1);
        spec.obscuration_ratio = 1.0;
        assert!(spec.validate().is_err());
        spec.obscuration_ratio = 0.3;
        spec.spider_width_ratio = 0.0;
        assert!(spec.validate().is_err());
        spec.spider_count = 0;
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn from_values_checks_levels() {
        assert!(ApertureMask::from_values(vec![1.0; 4], 2, 1.0, 2.0).is_ok());
        assert!(ApertureMask::from_values(vec![0.3; 4], 2, 1.0, 2.0).is_err());
        assert!(ApertureMask::from_values(vec![1.0; 3], 2, 1.0, 2.0).is_err());
    }
}
