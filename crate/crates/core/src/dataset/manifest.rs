use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const IMAGES_DIR: &str = "images";
pub const LABELS_DIR: &str = "labels";

/// Ordered class names; a box's `class_id` indexes this list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ClassList(Vec<String>);

impl ClassList {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Validation("class list is empty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.trim().is_empty() {
                return Err(Error::Validation(format!("class {i} has an empty name")));
            }
            if names[..i].contains(n) {
                return Err(Error::Validation(format!("class name '{n}' repeated")));
            }
        }
        Ok(Self(names))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, class_id: u32) -> Option<&str> {
        self.0.get(class_id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for ClassList {
    fn default() -> Self {
        Self(vec!["cow".into(), "sheep".into(), "dog".into()])
    }
}

impl TryFrom<Vec<String>> for ClassList {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<ClassList> for Vec<String> {
    fn from(c: ClassList) -> Self {
        c.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// Image/label pair; paths are relative to the dataset root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub image: PathBuf,
    pub label: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub image: PathBuf,
    pub label: PathBuf,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub records: Vec<Record>,
    pub class_list: ClassList,
    pub seed: u64,
}

/// Fractions of the dataset assigned to each split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let f = Self { train, val, test };
        if [train, val, test].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation("split fractions must be non-negative".into()));
        }
        if (train + val + test - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "split fractions sum to {}, not 1",
                train + val + test
            )));
        }
        Ok(f)
    }
}

impl DatasetManifest {
    pub fn records_in(&self, split: Split) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.records_in(split).count()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Seeded random partition into train/val/test.
///
/// Records are sorted by image path, shuffled with a ChaCha8 stream seeded by
/// `seed`, and dealt out in train, val, test order. Validation and test sizes
/// are `round(fraction·N)`; train takes the remainder.
pub fn split_dataset(records: &[SourceRecord], fractions: SplitFractions, seed: u64) -> Result<DatasetManifest> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = records.len();
    let n_val = ((fractions.val * n as f64).round() as usize).min(n);
    let n_test = ((fractions.test * n as f64).round() as usize).min(n - n_val);
    let n_train = n - n_val - n_test;

    let mut order: Vec<&SourceRecord> = records.iter().collect();
    order.sort_by(|a, b| a.image.cmp(&b.image));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut out: Vec<Record> = order
        .into_iter()
        .enumerate()
        .map(|(i, r)| Record {
            image: r.image.clone(),
            label: r.label.clone(),
            split: if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            },
        })
        .collect();
    out.sort_by(|a, b| a.image.cmp(&b.image));
    Ok(DatasetManifest {
        records: out,
        class_list: ClassList::default(),
        seed,
    })
}

/// Pairs every `images/*.png` under `root` with `labels/<stem>.txt`.
pub fn scan_dataset(root: &Path) -> Result<Vec<SourceRecord>> {
    let images = root.join(IMAGES_DIR);
    let entries = std::fs::read_dir(&images).map_err(|e| Error::io(&images, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&images, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let label = Path::new(LABELS_DIR).join(format!("{stem}.txt"));
        if !root.join(&label).is_file() {
            return Err(Error::Validation(format!(
                "image {} has no label file {}",
                path.display(),
                label.display()
            )));
        }
        out.push(SourceRecord {
            image: Path::new(IMAGES_DIR).join(path.file_name().expect("file name")),
            label,
        });
    }
    out.sort_by(|a, b| a.image.cmp(&b.image));
    Ok(out)
}
