//! Annotated image sets: normalized box labels, seeded splits and manifests.
//!
//! On disk a dataset is `images/*.png` with `labels/<stem>.txt` beside it and
//! a `manifest.json` recording each image's split, the class list and the
//! split seed.

mod labels;
mod manifest;

pub use labels::{
    parse_labels, transform_labels, write_labels, BoundingBox, BOX_TOLERANCE, PARSE_TOLERANCE,
};
pub use manifest::{
    scan_dataset, split_dataset, ClassList, DatasetManifest, Record, SourceRecord, Split, SplitFractions,
    IMAGES_DIR, LABELS_DIR, MANIFEST_FILE,
};

pub(crate) use labels::parse_box_line;
