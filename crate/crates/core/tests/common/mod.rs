//! Independent reference implementations and generators shared by the
//! integration tests.

#![allow(dead_code)]

use std::path::Path;

use optigrade::dataset::{write_labels, BoundingBox};
use optigrade::metrics::{Detection, ImageEval};
use optigrade::resample::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Direct convolution with clamp-to-edge borders, one output pixel at a time.
pub fn brute_force_convolve(plane: &[f64], w: usize, h: usize, kernel: &[f64], k: usize) -> Vec<f64> {
    let r = (k / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut acc = 0.0;
            for j in 0..k as isize {
                for i in 0..k as isize {
                    let sx = (x - (i - r)).clamp(0, w as isize - 1) as usize;
                    let sy = (y - (j - r)).clamp(0, h as isize - 1) as usize;
                    acc += kernel[(j * k as isize + i) as usize] * plane[sy * w + sx];
                }
            }
            out[y as usize * w + x as usize] = acc;
        }
    }
    out
}

/// Catmull-Rom kernel written out piecewise.
fn catmull_rom(d: f64) -> f64 {
    let d = d.abs();
    if d <= 1.0 {
        1.5 * d.powi(3) - 2.5 * d.powi(2) + 1.0
    } else if d < 2.0 {
        -0.5 * d.powi(3) + 2.5 * d.powi(2) - 4.0 * d + 2.0
    } else {
        0.0
    }
}

/// One output pixel of a Catmull-Rom resize with centre-aligned pixel grids
/// and edge clamping, clipped to `[0, 1]`.
pub fn catmull_rom_pixel(img: &Image, out_w: usize, out_h: usize, ox: usize, oy: usize, c: usize) -> f64 {
    let sx = (ox as f64 + 0.5) * img.width() as f64 / out_w as f64 - 0.5;
    let sy = (oy as f64 + 0.5) * img.height() as f64 / out_h as f64 - 0.5;
    let mut acc = 0.0;
    for yy in (sy.floor() as i64 - 1)..=(sy.floor() as i64 + 2) {
        for xx in (sx.floor() as i64 - 1)..=(sx.floor() as i64 + 2) {
            let wgt = catmull_rom(sx - xx as f64) * catmull_rom(sy - yy as f64);
            let cx = xx.clamp(0, img.width() as i64 - 1) as usize;
            let cy = yy.clamp(0, img.height() as i64 - 1) as usize;
            acc += wgt * img.get(cx, cy, c);
        }
    }
    acc.clamp(0.0, 1.0)
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize, channels: usize) -> Image {
    let data = (0..w * h * channels).map(|_| rng.random::<f64>()).collect();
    Image::from_vec(w, h, channels, data).unwrap()
}

/// Gray image with a 1/f amplitude spectrum, scaled to mean 0.5 and standard
/// deviation 0.12, then clipped to `[0, 1]`.
pub fn pink_noise(rng: &mut impl Rng, n: usize) -> Image {
    let mut spec = vec![Complex::new(0.0, 0.0); n * n];
    for v in 0..n {
        for u in 0..n {
            let fu = if u <= n / 2 { u as f64 } else { u as f64 - n as f64 };
            let fv = if v <= n / 2 { v as f64 } else { v as f64 - n as f64 };
            let f = (fu * fu + fv * fv).sqrt();
            if f > 0.0 {
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                spec[v * n + u] = Complex::from_polar(1.0 / f, phase);
            }
        }
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    for row in spec.chunks_mut(n) {
        fft.process(row);
    }
    let mut t = vec![Complex::new(0.0, 0.0); n * n];
    for y in 0..n {
        for x in 0..n {
            t[x * n + y] = spec[y * n + x];
        }
    }
    for row in t.chunks_mut(n) {
        fft.process(row);
    }
    let re: Vec<f64> = t.iter().map(|c| c.re).collect();
    let mean = re.iter().sum::<f64>() / re.len() as f64;
    let sd = (re.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / re.len() as f64).sqrt();
    let data = re.iter().map(|v| (0.5 + 0.12 * (v - mean) / sd).clamp(0.0, 1.0)).collect();
    Image::from_vec(n, n, 1, data).unwrap()
}

/// Mean of channel 0 with `margin` pixels dropped on every side.
pub fn central_mean(img: &Image, margin: usize) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for y in margin..img.height() - margin {
        for x in margin..img.width() - margin {
            sum += img.get(x, y, 0);
            n += 1;
        }
    }
    sum / n as f64
}

/// Intersection over union from corner coordinates.
pub fn oracle_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax0, ax1, ay0, ay1) = (a.cx - a.w / 2.0, a.cx + a.w / 2.0, a.cy - a.h / 2.0, a.cy + a.h / 2.0);
    let (bx0, bx1, by0, by1) = (b.cx - b.w / 2.0, b.cx + b.w / 2.0, b.cy - b.h / 2.0, b.cy + b.h / 2.0);
    let ix = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let iy = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = ix * iy;
    if inter == 0.0 {
        0.0
    } else {
        inter / (a.w * a.h + b.w * b.h - inter)
    }
}

/// Exhaustive search over all one-to-one assignments of detections to ground
/// truth boxes of their class (IoU at least `thr`), picking the one whose
/// per-detection IoU sequence, taken in confidence order, is lexicographically
/// largest; unmatched counts as −1 and equal IoUs prefer the lower box index.
/// Returns true-positive flags in input order.
pub fn oracle_match(dets: &[Detection], gts: &[BoundingBox], thr: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.partial_cmp(&dets[a].confidence).unwrap().then(a.cmp(&b)));

    type Key = Vec<(f64, i64)>;
    fn search(
        pos: usize,
        order: &[usize],
        dets: &[Detection],
        gts: &[BoundingBox],
        thr: f64,
        used: &mut Vec<bool>,
        key: &mut Key,
        choice: &mut Vec<Option<usize>>,
        best: &mut Option<(Key, Vec<Option<usize>>)>,
    ) {
        if pos == order.len() {
            let better = match best {
                None => true,
                Some((bk, _)) => key
                    .iter()
                    .zip(bk.iter())
                    .find(|(a, b)| a != b)
                    .is_some_and(|(a, b)| a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)),
            };
            if better {
                *best = Some((key.clone(), choice.clone()));
            }
            return;
        }
        let d = &dets[order[pos]];
        for g in 0..gts.len() {
            if used[g] || gts[g].class_id != d.bbox.class_id {
                continue;
            }
            let v = oracle_iou(&d.bbox, &gts[g]);
            if v < thr {
                continue;
            }
            used[g] = true;
            key.push((v, -(g as i64)));
            choice.push(Some(g));
            search(pos + 1, order, dets, gts, thr, used, key, choice, best);
            choice.pop();
            key.pop();
            used[g] = false;
        }
        key.push((-1.0, 0));
        choice.push(None);
        search(pos + 1, order, dets, gts, thr, used, key, choice, best);
        choice.pop();
        key.pop();
    }

    let mut best = None;
    search(
        0,
        &order,
        dets,
        gts,
        thr,
        &mut vec![false; gts.len()],
        &mut Vec::new(),
        &mut Vec::new(),
        &mut best,
    );
    let (_, choice) = best.unwrap();
    let mut flags = vec![false; dets.len()];
    for (pos, c) in choice.iter().enumerate() {
        flags[order[pos]] = c.is_some();
    }
    flags
}

/// AP of one class: rank detections (confidence, then image, then input
/// order), build the precision/recall curve with sentinels, take the
/// right-to-left running maximum of precision and sum it over recall steps.
pub fn oracle_ap(images: &[ImageEval], class_id: u32, thr: f64) -> Option<f64> {
    let mut ranked: Vec<(f64, usize, usize, bool)> = Vec::new();
    let mut num_gt = 0;
    for (n, img) in images.iter().enumerate() {
        let dets: Vec<Detection> = img.detections.iter().filter(|d| d.bbox.class_id == class_id).copied().collect();
        let gts: Vec<BoundingBox> = img.ground_truth.iter().filter(|b| b.class_id == class_id).copied().collect();
        num_gt += gts.len();
        for (i, tp) in oracle_match(&dets, &gts, thr).into_iter().enumerate() {
            ranked.push((dets[i].confidence, n, i, tp));
        }
    }
    if num_gt == 0 {
        return None;
    }
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut rec = vec![0.0];
    let mut prec = vec![0.0];
    let (mut tp, mut fp) = (0.0, 0.0);
    for r in &ranked {
        if r.3 {
            tp += 1.0;
        } else {
            fp += 1.0;
        }
        rec.push(tp / num_gt as f64);
        prec.push(tp / (tp + fp));
    }
    rec.push(1.0);
    prec.push(0.0);
    for i in (0..prec.len() - 1).rev() {
        prec[i] = prec[i].max(prec[i + 1]);
    }
    let mut ap = 0.0;
    for i in 1..rec.len() {
        if rec[i] != rec[i - 1] {
            ap += (rec[i] - rec[i - 1]) * prec[i];
        }
    }
    Some(ap)
}

/// Best F1 by re-running the matching oracle on the detections kept at every
/// candidate threshold. Returns (f1, precision, recall, threshold).
pub fn oracle_f1(images: &[ImageEval], thr: f64) -> (f64, f64, f64, f64) {
    let mut candidates: Vec<f64> = images.iter().flat_map(|i| i.detections.iter().map(|d| d.confidence)).collect();
    if candidates.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    candidates.push(0.0);
    candidates.sort_by(|a, b| b.partial_cmp(a).unwrap());
    candidates.dedup();
    let num_gt: usize = images.iter().map(|i| i.ground_truth.len()).sum();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for t in candidates {
        let (mut tp, mut kept) = (0usize, 0usize);
        for img in images {
            let dets: Vec<Detection> = img.detections.iter().filter(|d| d.confidence >= t).copied().collect();
            kept += dets.len();
            tp += oracle_match(&dets, &img.ground_truth, thr).iter().filter(|&&f| f).count();
        }
        let p = if kept == 0 { 0.0 } else { tp as f64 / kept as f64 };
        let r = if num_gt == 0 { 0.0 } else { tp as f64 / num_gt as f64 };
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        if best.is_none_or(|b| f1 > b.0) {
            best = Some((f1, p, r, t));
        }
    }
    best.unwrap()
}

/// Mean absolute per-image difference between kept detections and labels.
pub fn oracle_count_error(images: &[ImageEval], threshold: f64) -> f64 {
    let total: f64 = images
        .iter()
        .map(|i| {
            let d = i.detections.iter().filter(|d| d.confidence >= threshold).count() as f64;
            (d - i.ground_truth.len() as f64).abs()
        })
        .sum();
    total / images.len() as f64
}

/// Random evaluation instance: up to `max_images` images with up to
/// `max_boxes` labels each; detections are jittered copies of labels, stray
/// boxes and relabelled copies, with confidences on a coarse grid so that
/// ties occur.
pub fn random_instance(rng: &mut impl Rng, max_images: usize, max_boxes: usize, classes: u32) -> Vec<ImageEval> {
    let n_images = rng.random_range(1..=max_images);
    let random_box = |rng: &mut dyn rand::RngCore, class_id: u32| {
        let w = 0.05 + 0.25 * rng.random::<f64>();
        let h = 0.05 + 0.25 * rng.random::<f64>();
        let cx = w / 2.0 + rng.random::<f64>() * (1.0 - w);
        let cy = h / 2.0 + rng.random::<f64>() * (1.0 - h);
        BoundingBox::new(class_id, cx, cy, w, h).unwrap()
    };
    (0..n_images)
        .map(|_| {
            let n_gt = rng.random_range(0..=max_boxes);
            let gts: Vec<BoundingBox> = (0..n_gt)
                .map(|_| {
                    let c = rng.random_range(0..classes);
                    random_box(rng, c)
                })
                .collect();
            let n_det = rng.random_range(0..=max_boxes);
            let dets = (0..n_det)
                .map(|_| {
                    let conf = rng.random_range(1..=20) as f64 / 20.0;
                    let bbox = if !gts.is_empty() && rng.random::<f64>() < 0.7 {
                        let g = gts[rng.random_range(0..gts.len())];
                        let jitter = |v: f64, s: f64, rng: &mut dyn rand::RngCore| v + (rng.random::<f64>() - 0.5) * 0.4 * s;
                        let w = (g.w * (0.8 + 0.4 * rng.random::<f64>())).min(1.0);
                        let h = (g.h * (0.8 + 0.4 * rng.random::<f64>())).min(1.0);
                        let cx = jitter(g.cx, g.w, rng).clamp(w / 2.0, 1.0 - w / 2.0);
                        let cy = jitter(g.cy, g.h, rng).clamp(h / 2.0, 1.0 - h / 2.0);
                        let class_id = if rng.random::<f64>() < 0.15 { rng.random_range(0..classes) } else { g.class_id };
                        BoundingBox::new(class_id, cx, cy, w, h).unwrap()
                    } else {
                        let c = rng.random_range(0..classes);
                        random_box(rng, c)
                    };
                    Detection::new(bbox, conf).unwrap()
                })
                .collect();
            ImageEval::new(dets, gts)
        })
        .collect()
}

/// Writes a gray PNG scene of bright discs on a dim background with matching
/// labels, returning the label boxes.
pub struct DiscScene {
    pub image: Image,
    pub boxes: Vec<BoundingBox>,
    /// Disc centres in pixel index coordinates.
    pub centres: Vec<(f64, f64)>,
}

pub fn disc_scene(rng: &mut impl Rng, side: usize, discs: usize, diameter: f64, gsd: f64) -> DiscScene {
    let background = 0.1;
    let mut data = vec![background; side * side];
    let mut centres: Vec<(f64, f64)> = Vec::new();
    let margin = 0.1 * side as f64;
    while centres.len() < discs {
        let c = (
            margin + rng.random::<f64>() * (side as f64 - 2.0 * margin),
            margin + rng.random::<f64>() * (side as f64 - 2.0 * margin),
        );
        // Keep the rings of neighbouring discs apart.
        if centres.iter().all(|o| ((o.0 - c.0).powi(2) + (o.1 - c.1).powi(2)).sqrt() > 0.08 * side as f64) {
            centres.push(c);
        }
    }
    let r = diameter / 2.0;
    // 4×4 supersampling of the disc edge.
    for &(cx, cy) in &centres {
        let (x0, x1) = ((cx - r - 1.0).floor() as usize, (cx + r + 1.0).ceil() as usize);
        let (y0, y1) = ((cy - r - 1.0).floor() as usize, (cy + r + 1.0).ceil() as usize);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let mut cover = 0.0;
                for sy in 0..4 {
                    for sx in 0..4 {
                        let px = x as f64 + (sx as f64 + 0.5) / 4.0 - 0.5;
                        let py = y as f64 + (sy as f64 + 0.5) / 4.0 - 0.5;
                        if (px - cx).powi(2) + (py - cy).powi(2) <= r * r {
                            cover += 1.0 / 16.0;
                        }
                    }
                }
                let v = &mut data[y * side + x];
                *v = *v * (1.0 - cover) + cover;
            }
        }
    }
    let boxes = centres
        .iter()
        .map(|&(cx, cy)| {
            let s = side as f64;
            BoundingBox::new(0, (cx + 0.5) / s, (cy + 0.5) / s, diameter / s, diameter / s).unwrap()
        })
        .collect();
    DiscScene {
        image: Image::from_vec(side, side, 1, data).unwrap().with_gsd(gsd),
        boxes,
        centres,
    }
}

pub fn write_dataset_image(root: &Path, stem: &str, image: &Image, boxes: &[BoundingBox]) {
    std::fs::create_dir_all(root.join("images")).unwrap();
    std::fs::create_dir_all(root.join("labels")).unwrap();
    image.save_png(&root.join("images").join(format!("{stem}.png"))).unwrap();
    std::fs::write(root.join("labels").join(format!("{stem}.txt")), write_labels(boxes)).unwrap();
}
