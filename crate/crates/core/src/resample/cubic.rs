//! Cubic convolution interpolation (Keys family).

use rayon::prelude::*;

use super::Image;

/// Keys parameter of the Catmull-Rom spline.
pub const CATMULL_ROM: f64 = -0.5;

/// How samples outside the source grid are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    /// Repeat the nearest edge sample.
    Clamp,
    /// Treat everything outside the grid as zero.
    Zero,
}

/// Keys cubic convolution weight at offset `t` with parameter `a`.
pub fn cubic_weight(t: f64, a: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a
    } else {
        0.0
    }
}

/// The four taps around continuous index coordinate `x` (sample `i` sits at
/// coordinate `i`): the index of the first tap and the four weights.
fn taps(x: f64, a: f64) -> (isize, [f64; 4]) {
    let base = x.floor();
    let t = x - base;
    (
        base as isize - 1,
        [
            cubic_weight(t + 1.0, a),
            cubic_weight(t, a),
            cubic_weight(1.0 - t, a),
            cubic_weight(2.0 - t, a),
        ],
    )
}

/// Interpolates a single-channel row-major plane at index coordinates `(x, y)`.
pub fn sample_point(plane: &[f64], width: usize, height: usize, x: f64, y: f64, a: f64, border: Border) -> f64 {
    let (x0, wx) = taps(x, a);
    let (y0, wy) = taps(y, a);
    let fetch = |ix: isize, iy: isize| -> f64 {
        match border {
            Border::Clamp => {
                let cx = ix.clamp(0, width as isize - 1) as usize;
                let cy = iy.clamp(0, height as isize - 1) as usize;
                plane[cy * width + cx]
            }
            Border::Zero => {
                if ix < 0 || iy < 0 || ix >= width as isize || iy >= height as isize {
                    0.0
                } else {
                    plane[iy as usize * width + ix as usize]
                }
            }
        }
    };
    let mut acc = 0.0;
    for (j, wyj) in wy.iter().enumerate() {
        let mut row = 0.0;
        for (i, wxi) in wx.iter().enumerate() {
            row += wxi * fetch(x0 + i as isize, y0 + j as isize);
        }
        acc += wyj * row;
    }
    acc
}

/// Precomputed clamp-to-edge taps for every output coordinate along one axis.
struct AxisTaps {
    index: Vec<[usize; 4]>,
    weight: Vec<[f64; 4]>,
}

impl AxisTaps {
    /// Half-pixel-centred mapping: output centre `o + ½` lands on source
    /// coordinate `(o + ½)·src/out`.
    fn new(src: usize, out: usize, a: f64) -> Self {
        let scale = src as f64 / out as f64;
        let mut index = Vec::with_capacity(out);
        let mut weight = Vec::with_capacity(out);
        for o in 0..out {
            let x = (o as f64 + 0.5) * scale - 0.5;
            let (x0, w) = taps(x, a);
            let idx = std::array::from_fn(|i| (x0 + i as isize).clamp(0, src as isize - 1) as usize);
            index.push(idx);
            weight.push(w);
        }
        Self { index, weight }
    }
}

/// Catmull-Rom resampling to `out_width × out_height`.
///
/// Every output sample is the separable 4×4 cubic-weighted sum of its source
/// neighbourhood with clamp-to-edge borders, clipped to `[0, 1]`. GSD metadata
/// is rescaled by the width ratio.
///
/// Sums are taken as offsets from the tap nearest below each sample point,
/// which keeps flat regions bit-exact.
pub fn bicubic_resample(image: &Image, out_width: usize, out_height: usize) -> Image {
    bicubic_resample_with(image, out_width, out_height, CATMULL_ROM)
}

/// [`bicubic_resample`] with an arbitrary Keys parameter `a`.
pub fn bicubic_resample_with(image: &Image, out_width: usize, out_height: usize, a: f64) -> Image {
    assert!(out_width >= 1 && out_height >= 1, "output dimensions must be positive");
    let (w, h, ch) = (image.width(), image.height(), image.channels());
    let xt = AxisTaps::new(w, out_width, a);
    let yt = AxisTaps::new(h, out_height, a);
    let src = image.data();

    // Horizontal pass: h rows of out_width pixels.
    let mut horizontal = vec![0.0; h * out_width * ch];
    horizontal
        .par_chunks_mut(out_width * ch)
        .enumerate()
        .for_each(|(y, row)| {
            let src_row = &src[y * w * ch..(y + 1) * w * ch];
            for ox in 0..out_width {
                let (idx, wt) = (&xt.index[ox], &xt.weight[ox]);
                for c in 0..ch {
                    let base = src_row[idx[1] * ch + c];
                    let mut acc = 0.0;
                    for k in 0..4 {
                        acc += wt[k] * (src_row[idx[k] * ch + c] - base);
                    }
                    row[ox * ch + c] = base + acc;
                }
            }
        });

    let stride = out_width * ch;
    let mut out = vec![0.0; out_height * stride];
    out.par_chunks_mut(stride).enumerate().for_each(|(oy, row)| {
        let (idx, wt) = (&yt.index[oy], &yt.weight[oy]);
        for (i, v) in row.iter_mut().enumerate() {
            let base = horizontal[idx[1] * stride + i];
            let mut acc = 0.0;
            for k in 0..4 {
                acc += wt[k] * (horizontal[idx[k] * stride + i] - base);
            }
            *v = (base + acc).clamp(0.0, 1.0);
        }
    });

    let gsd = image.gsd().map(|g| g * w as f64 / out_width as f64);
    Image::from_parts(out_width, out_height, ch, out, gsd)
}
