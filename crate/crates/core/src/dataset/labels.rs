use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the in-frame invariant for boxes built in code.
pub const BOX_TOLERANCE: f64 = 1e-9;

/// Tolerance applied when reading text files: half a unit in the sixth
/// decimal, the precision labels are written with.
pub const PARSE_TOLERANCE: f64 = 5e-7 + BOX_TOLERANCE;

/// Axis-aligned box in normalized centre/size form; all coordinates are
/// fractions of the image width or height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub class_id: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(class_id: u32, cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { class_id, cx, cy, w, h };
        b.validate(BOX_TOLERANCE)?;
        Ok(b)
    }

    /// Checks that the box has positive size and lies inside the unit frame.
    pub fn validate(&self, tolerance: f64) -> Result<()> {
        let coords = [self.cx, self.cy, self.w, self.h];
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("box coordinates must be finite".into()));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::Validation(format!(
                "box size must be positive, got {}x{}",
                self.w, self.h
            )));
        }
        let edges = [self.left(), self.right(), self.top(), self.bottom()];
        if edges.iter().any(|&e| e < -tolerance || e > 1.0 + tolerance) {
            return Err(Error::Validation(format!(
                "box [{:.6}, {:.6}] x [{:.6}, {:.6}] extends outside the image",
                self.left(),
                self.right(),
                self.top(),
                self.bottom()
            )));
        }
        Ok(())
    }

    pub fn left(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Splits a `class cx cy w h [extra…]` line into a box and the trailing numbers.
pub(crate) fn parse_box_line(line: &str, line_no: usize, extra: usize) -> Result<(BoundingBox, Vec<f64>)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 5 + extra {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected {} fields, found {}", 5 + extra, fields.len()),
        });
    }
    let class_id: u32 = fields[0].parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("invalid class id '{}'", fields[0]),
    })?;
    let numbers = fields[1..]
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("invalid number '{f}'"),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    let b = BoundingBox {
        class_id,
        cx: numbers[0],
        cy: numbers[1],
        w: numbers[2],
        h: numbers[3],
    };
    b.validate(PARSE_TOLERANCE)
        .map_err(|e| Error::Validation(format!("line {line_no}: {e}")))?;
    Ok((b, numbers[4..].to_vec()))
}

/// Parses normalized `class cx cy w h` lines; blank lines are skipped.
pub fn parse_labels(text: &str) -> Result<Vec<BoundingBox>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_box_line(l, i + 1, 0).map(|(b, _)| b))
        .collect()
}

/// One `class cx cy w h` line per box, six decimals.
pub fn write_labels(boxes: &[BoundingBox]) -> String {
    boxes
        .iter()
        .map(|b| format!("{} {:.6} {:.6} {:.6} {:.6}\n", b.class_id, b.cx, b.cy, b.w, b.h))
        .collect()
}

/// Maps boxes from an image of `src` pixels to one of `dst` pixels.
///
/// Resampling maps the full frame onto the full frame, so normalized boxes are
/// unchanged whenever `dst` is a uniform rescale of `src` up to one pixel of
/// rounding. Otherwise the height axis is rescaled about the image centre by
/// the ratio between the uniformly scaled and the actual height, and boxes are
/// clipped to the frame; boxes left with no area are dropped.
pub fn transform_labels(boxes: &[BoundingBox], src: (usize, usize), dst: (usize, usize)) -> Vec<BoundingBox> {
    let scale = dst.0 as f64 / src.0 as f64;
    let uniform_height = src.1 as f64 * scale;
    if (dst.1 as f64 - uniform_height).abs() <= 1.0 {
        return boxes.to_vec();
    }
    let ratio = uniform_height / dst.1 as f64;
    boxes
        .iter()
        .filter_map(|b| {
            let top = (0.5 + (b.top() - 0.5) * ratio).clamp(0.0, 1.0);
            let bottom = (0.5 + (b.bottom() - 0.5) * ratio).clamp(0.0, 1.0);
            (bottom > top).then(|| BoundingBox {
                cy: (top + bottom) / 2.0,
                h: bottom - top,
                ..*b
            })
        })
        .collect()
}
