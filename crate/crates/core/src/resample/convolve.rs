use rayon::prelude::*;

use super::Image;
use crate::error::{Error, Result};
use crate::optics::PsfKernel;

/// Direct 2-D convolution of one row-major plane with clamp-to-edge borders.
///
/// No clipping is applied. Output rows are independent and the summation
/// order within a pixel is fixed, so results do not depend on thread count.
pub fn convolve_plane(plane: &[f64], width: usize, height: usize, kernel: &PsfKernel) -> Result<Vec<f64>> {
    let k = kernel.side();
    if k > width.min(height) {
        return Err(Error::Size(format!(
            "kernel side {k} exceeds image {width}x{height}"
        )));
    }
    assert_eq!(plane.len(), width * height);
    let r = k / 2;

    // Clamp-padded copy so the inner loops run over contiguous memory.
    let pw = width + 2 * r;
    let ph = height + 2 * r;
    let mut padded = vec![0.0; pw * ph];
    for py in 0..ph {
        let sy = (py as isize - r as isize).clamp(0, height as isize - 1) as usize;
        let src = &plane[sy * width..(sy + 1) * width];
        let dst = &mut padded[py * pw..(py + 1) * pw];
        dst[..r].fill(src[0]);
        dst[r..r + width].copy_from_slice(src);
        dst[r + width..].fill(src[width - 1]);
    }

    // out(x, y) = Σ k(i, j) · in(x + r − i, y + r − j): walk the flipped kernel.
    let weights = kernel.weights();
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for j in 0..k {
            let src_row = &padded[(y + k - 1 - j) * pw..];
            for i in 0..k {
                let w = weights[j * k + i];
                let src = &src_row[k - 1 - i..k - 1 - i + width];
                for (o, s) in row.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    });
    Ok(out)
}

/// Convolves every channel with `kernel` (clamp-to-edge), clipping to `[0, 1]`.
pub fn convolve(image: &Image, kernel: &PsfKernel) -> Result<Image> {
    let (w, h) = (image.width(), image.height());
    let planes = (0..image.channels())
        .map(|c| {
            let mut p = convolve_plane(&image.plane(c), w, h, kernel)?;
            p.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Image::from_planes(w, h, &planes, image.gsd())
}
