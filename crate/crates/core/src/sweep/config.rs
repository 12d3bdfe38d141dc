use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{ApertureSpec, DEFAULT_KERNEL_SIZE};
use crate::resample::DegradeSpec;

/// Target GSDs of the reference experiments, m/px.
pub const DEFAULT_GSD_TARGETS: [f64; 15] = [
    0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 1.00, 1.50, 2.00, 2.50, 3.00,
];
pub const DEFAULT_Q_VALUES: [f64; 3] = [0.5, 1.0, 1.5];
pub const DEFAULT_INPUT_SIZES: [u32; 2] = [640, 1280];

/// Grid of degradation conditions and evaluation settings, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gsd_targets: Vec<f64>,
    pub q_values: Vec<f64>,
    pub apertures: Vec<ApertureSpec>,
    /// Detector input sizes; only used to tell prediction sets apart.
    pub input_sizes: Vec<u32>,
    /// GSD assumed for source images that have no sidecar.
    pub source_gsd: Option<f64>,
    /// Root holding one prediction directory per condition and input size.
    pub predictions: Option<PathBuf>,
    pub iou_threshold: f64,
    pub intermediate_kernel_size: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gsd_targets: DEFAULT_GSD_TARGETS.to_vec(),
            q_values: DEFAULT_Q_VALUES.to_vec(),
            apertures: vec![ApertureSpec::circular(0.1), ApertureSpec::cassegrain(0.1)],
            input_sizes: DEFAULT_INPUT_SIZES.to_vec(),
            source_gsd: None,
            predictions: None,
            iou_threshold: 0.5,
            intermediate_kernel_size: DEFAULT_KERNEL_SIZE,
        }
    }
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.gsd_targets.is_empty() || self.q_values.is_empty() || self.apertures.is_empty() || self.input_sizes.is_empty() {
            return bad("gsd_targets, q_values, apertures and input_sizes must be non-empty".into());
        }
        if self.gsd_targets.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return bad("GSD targets must be positive".into());
        }
        if self.gsd_targets.windows(2).any(|w| w[1] <= w[0]) {
            return bad("gsd_targets must be strictly increasing".into());
        }
        if let Some(q) = self.q_values.iter().find(|q| !(**q > 0.0 && **q <= 4.0)) {
            return bad(format!("q must lie in (0, 4], got {q}"));
        }
        for (i, a) in self.apertures.iter().enumerate() {
            a.validate()?;
            if self.apertures[..i].iter().any(|b| b.name() == a.name()) {
                return bad(format!("aperture '{}' listed twice", a.name()));
            }
        }
        if let Some(g) = self.source_gsd {
            if !(g.is_finite() && g > 0.0) {
                return bad(format!("source_gsd must be positive, got {g}"));
            }
        }
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return bad(format!("iou_threshold must lie in (0, 1), got {}", self.iou_threshold));
        }
        if self.intermediate_kernel_size < 3 || self.intermediate_kernel_size % 2 == 0 {
            return bad(format!(
                "intermediate_kernel_size must be odd and at least 3, got {}",
                self.intermediate_kernel_size
            ));
        }
        Ok(())
    }

    /// Every (gsd, q, aperture) combination, ordered by gsd, q, aperture name.
    pub fn conditions(&self) -> Vec<Condition> {
        let mut out = Vec::new();
        for &gsd in &self.gsd_targets {
            for &q in &self.q_values {
                for &aperture in &self.apertures {
                    out.push(Condition { gsd, q, aperture });
                }
            }
        }
        out.sort_by(|a, b| a.sort_key(b));
        out
    }
}

/// One cell of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub gsd: f64,
    pub q: f64,
    pub aperture: ApertureSpec,
}

impl Condition {
    /// `g0.50_q1.00_circular`
    pub fn dir_name(&self) -> String {
        format!("g{:.2}_q{:.2}_{}", self.gsd, self.q, self.aperture.name())
    }

    /// `g0.50_q1.00_circular_i640`
    pub fn prediction_dir_name(&self, input_size: u32) -> String {
        format!("{}_i{input_size}", self.dir_name())
    }

    pub fn degrade_spec(&self, source_gsd: f64, kernel_size: usize) -> DegradeSpec {
        DegradeSpec {
            intermediate_kernel_size: kernel_size,
            ..DegradeSpec::new(source_gsd, self.gsd, self.q, self.aperture)
        }
    }

    fn sort_key(&self, other: &Self) -> std::cmp::Ordering {
        self.gsd
            .total_cmp(&other.gsd)
            .then(self.q.total_cmp(&other.q))
            .then(self.aperture.name().cmp(other.aperture.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_reference_grid() {
        let cfg = SweepConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.conditions().len(), 15 * 3 * 2);
        let c = cfg.conditions()[0];
        assert_eq!(c.dir_name(), "g0.05_q0.50_cassegrain");
        assert_eq!(c.prediction_dir_name(1280), "g0.05_q0.50_cassegrain_i1280");
    }

    #[test]
    fn json_fields_default() {
        let cfg: SweepConfig =
            serde_json::from_str(r#"{"gsd_targets": [0.2, 0.4], "apertures": [{"kind": "circular"}]}"#).unwrap();
        assert_eq!(cfg.q_values, DEFAULT_Q_VALUES.to_vec());
        assert_eq!(cfg.conditions().len(), 6);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"gsd": [1]}"#).is_err());
    }

    #[test]
    fn invalid_grids_rejected() {
        let mut cfg = SweepConfig {
            gsd_targets: vec![0.5, 0.2],
            ..SweepConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.gsd_targets = vec![];
        assert!(cfg.validate().is_err());
        cfg.gsd_targets = vec![0.5];
        cfg.apertures = vec![ApertureSpec::circular(0.1), ApertureSpec::circular(0.2)];
        assert!(cfg.validate().is_err());
        cfg.apertures = vec![ApertureSpec::circular(0.1)];
        cfg.q_values = vec![5.0];
        assert!(cfg.validate().is_err());
    }
}
