use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::{Condition, SweepConfig};
use crate::dataset::{parse_labels, transform_labels, write_labels, DatasetManifest, Record, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::metrics::FileIssue;
use crate::resample::{output_dimensions, plan_degradation, read_meta, sidecar_path, write_meta, DegradePlan, Image, ImageMeta};

/// A source image left out of one condition, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkipRecord {
    pub condition: String,
    pub image: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub condition: String,
    /// Images degraded in this run.
    pub processed: usize,
    /// Images already present from an earlier run.
    pub reused: usize,
    pub skipped: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DegradationSummary {
    pub conditions: Vec<ConditionSummary>,
    pub skips: Vec<SkipRecord>,
    pub issues: Vec<FileIssue>,
}

impl DegradationSummary {
    pub fn processed(&self) -> usize {
        self.conditions.iter().map(|c| c.processed).sum()
    }

    pub fn reused(&self) -> usize {
        self.conditions.iter().map(|c| c.reused).sum()
    }
}

enum Outcome {
    Processed,
    Reused,
    Skipped(String),
}

fn image_dimensions(path: &Path) -> Result<(usize, usize)> {
    let (w, h) = image::image_dimensions(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((w as usize, h as usize))
}

struct ConditionJob<'a> {
    root: &'a Path,
    out: PathBuf,
    condition: Condition,
    cfg: &'a SweepConfig,
    plans: HashMap<(usize, usize, u64), Arc<DegradePlan>>,
}

impl ConditionJob<'_> {
    fn source_gsd(&self, image: &Path) -> Result<f64> {
        let sidecar = sidecar_path(image);
        if sidecar.exists() {
            return Ok(read_meta(&sidecar)?.gsd_m_per_px);
        }
        self.cfg.source_gsd.ok_or_else(|| {
            Error::Validation(format!(
                "{} has no GSD sidecar and no source_gsd is configured",
                image.display()
            ))
        })
    }

    fn run_record(&mut self, record: &Record) -> Result<Outcome> {
        let src_image = self.root.join(&record.image);
        let source_gsd = self.source_gsd(&src_image)?;
        let spec = self.condition.degrade_spec(source_gsd, self.cfg.intermediate_kernel_size);
        let dims = image_dimensions(&src_image)?;
        let out_dims = match output_dimensions(dims.0, dims.1, &spec) {
            Ok(d) => d,
            Err(e @ (Error::NotDegradation { .. } | Error::ImageTooSmall { .. })) => {
                return Ok(Outcome::Skipped(e.to_string()));
            }
            Err(e) => return Err(e),
        };

        let out_image = self.out.join(&record.image);
        let out_label = self.out.join(&record.label);
        let out_meta = sidecar_path(&out_image);
        if out_meta.exists() && out_label.exists() && image_dimensions(&out_image).ok() == Some(out_dims) {
            return Ok(Outcome::Reused);
        }

        let src_label = self.root.join(&record.label);
        let text = std::fs::read_to_string(&src_label).map_err(|e| Error::io(&src_label, e))?;
        let boxes = parse_labels(&text).map_err(|e| Error::Validation(format!("{}: {e}", src_label.display())))?;

        let key = (dims.0, dims.1, source_gsd.to_bits());
        let plan = match self.plans.get(&key) {
            Some(p) => p.clone(),
            None => {
                let p = Arc::new(plan_degradation(dims.0, dims.1, &spec)?);
                self.plans.insert(key, p.clone());
                p
            }
        };
        let image = Image::load_png(&src_image)?.with_gsd(source_gsd);
        let degraded = plan.apply(&image)?;

        for dir in [out_image.parent(), out_label.parent()].into_iter().flatten() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(&out_label, write_labels(&transform_labels(&boxes, dims, out_dims)))
            .map_err(|e| Error::io(&out_label, e))?;
        // The sidecar goes last: its presence marks a finished image.
        let partial = out_image.with_extension("partial.png");
        degraded.without_gsd().save_png(&partial)?;
        std::fs::rename(&partial, &out_image).map_err(|e| Error::io(&out_image, e))?;
        write_meta(&out_meta, &ImageMeta { gsd_m_per_px: spec.target_gsd })?;
        Ok(Outcome::Processed)
    }

    fn run(mut self, manifest: &DatasetManifest) -> (ConditionSummary, Vec<SkipRecord>, Vec<FileIssue>, Vec<Record>) {
        let name = self.condition.dir_name();
        let mut summary = ConditionSummary {
            condition: name.clone(),
            ..ConditionSummary::default()
        };
        let (mut skips, mut issues, mut kept) = (Vec::new(), Vec::new(), Vec::new());
        for record in &manifest.records {
            match self.run_record(record) {
                Ok(Outcome::Processed) => {
                    summary.processed += 1;
                    kept.push(record.clone());
                }
                Ok(Outcome::Reused) => {
                    summary.reused += 1;
                    kept.push(record.clone());
                }
                Ok(Outcome::Skipped(reason)) => {
                    warn!("{name}: skipping {}: {reason}", record.image.display());
                    summary.skipped += 1;
                    skips.push(SkipRecord {
                        condition: name.clone(),
                        image: record.image.clone(),
                        reason,
                    });
                }
                Err(e) => {
                    warn!("{name}: {}: {e}", record.image.display());
                    summary.failed += 1;
                    issues.push(FileIssue {
                        path: self.root.join(&record.image),
                        message: e.to_string(),
                    });
                }
            }
        }
        info!(
            "{name}: {} degraded, {} reused, {} skipped, {} failed",
            summary.processed, summary.reused, summary.skipped, summary.failed
        );
        (summary, skips, issues, kept)
    }
}

/// Degrades every manifest record under every condition of `cfg`.
///
/// Each condition gets `out_root/<condition>/` holding `images/`, `labels/`
/// and a `manifest.json` listing the records it contains. Images whose
/// output, label and sidecar already exist with the expected size are not
/// recomputed, so an interrupted sweep can be rerun. Conditions that would
/// upsample an image, or shrink it below the minimum size, skip that image
/// and record why.
pub fn run_degradation_sweep(dataset_root: &Path, cfg: &SweepConfig, out_root: &Path) -> Result<DegradationSummary> {
    cfg.validate()?;
    let manifest = DatasetManifest::load(&dataset_root.join(MANIFEST_FILE))?;
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;

    let results: Vec<_> = cfg
        .conditions()
        .into_par_iter()
        .map(|condition| {
            let out = out_root.join(condition.dir_name());
            let job = ConditionJob {
                root: dataset_root,
                out: out.clone(),
                condition,
                cfg,
                plans: HashMap::new(),
            };
            let (summary, skips, issues, kept) = job.run(&manifest);
            let written = if kept.is_empty() {
                Ok(())
            } else {
                let m = DatasetManifest {
                    records: kept,
                    ..manifest.clone()
                };
                std::fs::create_dir_all(&out)
                    .map_err(|e| Error::io(&out, e))
                    .and_then(|_| m.save(&out.join(MANIFEST_FILE)))
            };
            written.map(|_| (summary, skips, issues))
        })
        .collect();

    let mut total = DegradationSummary::default();
    for r in results {
        let (summary, skips, issues) = r?;
        total.conditions.push(summary);
        total.skips.extend(skips);
        total.issues.extend(issues);
    }
    Ok(total)
}
