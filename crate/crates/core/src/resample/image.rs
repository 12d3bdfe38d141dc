use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interleaved floating-point raster with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
    gsd: Option<f64>,
}

/// Contents of the `<stem>.meta.json` sidecar written next to every PNG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub gsd_m_per_px: f64,
}

impl Image {
    /// Black image.
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, 0.0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be positive");
        assert!(channels == 1 || channels == 3, "images have 1 or 3 channels");
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
            gsd: None,
        }
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Size("image dimensions must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Size(format!("{channels} channels; expected 1 or 3")));
        }
        if data.len() != width * height * channels {
            return Err(Error::Size(format!(
                "{} samples for a {width}x{height}x{channels} image",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("image samples must be finite".into()));
        }
        Ok(Self::from_parts(width, height, channels, data, None))
    }

    pub(crate) fn from_parts(width: usize, height: usize, channels: usize, data: Vec<f64>, gsd: Option<f64>) -> Self {
        Self {
            width,
            height,
            channels,
            data,
            gsd,
        }
    }

    pub fn with_gsd(mut self, gsd: f64) -> Self {
        assert!(gsd > 0.0, "gsd must be positive");
        self.gsd = Some(gsd);
        self
    }

    pub fn without_gsd(mut self) -> Self {
        self.gsd = None;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn gsd(&self) -> Option<f64> {
        self.gsd
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// One channel as a row-major plane.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.channels).copied().collect()
    }

    /// Builds an image from per-channel planes of equal size.
    pub fn from_planes(width: usize, height: usize, planes: &[Vec<f64>], gsd: Option<f64>) -> Result<Self> {
        let channels = planes.len();
        let mut data = vec![0.0; width * height * channels];
        for (c, plane) in planes.iter().enumerate() {
            if plane.len() != width * height {
                return Err(Error::Size("plane size mismatch".into()));
            }
            for (i, &v) in plane.iter().enumerate() {
                data[i * channels + c] = v;
            }
        }
        let mut image = Self::from_vec(width, height, channels, data)?;
        image.gsd = gsd;
        Ok(image)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Reads an 8-bit PNG (grayscale stays single-channel, everything else
    /// becomes RGB) and its GSD sidecar when one exists.
    pub fn load_png(path: &Path) -> Result<Self> {
        let decoded = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let (width, height) = (decoded.width() as usize, decoded.height() as usize);
        let (channels, bytes) = match decoded {
            DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) => {
                (1, decoded.into_luma8().into_raw())
            }
            other => (3, other.into_rgb8().into_raw()),
        };
        let data = bytes.iter().map(|&b| b as f64 / 255.0).collect();
        let mut image = Self::from_parts(width, height, channels, data, None);
        let sidecar = sidecar_path(path);
        if sidecar.exists() {
            image.gsd = Some(read_meta(&sidecar)?.gsd_m_per_px);
        }
        Ok(image)
    }

    /// Writes an 8-bit PNG, plus the GSD sidecar when the image carries one.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.data.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        let (w, h) = (self.width as u32, self.height as u32);
        let saved = if self.channels == 1 {
            GrayImage::from_raw(w, h, bytes).expect("buffer size").save(path)
        } else {
            RgbImage::from_raw(w, h, bytes).expect("buffer size").save(path)
        };
        saved.map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(gsd) = self.gsd {
            write_meta(&sidecar_path(path), &ImageMeta { gsd_m_per_px: gsd })?;
        }
        Ok(())
    }
}

/// `images/foo.png` → `images/foo.meta.json`.
pub fn sidecar_path(image_path: &Path) -> PathBuf {
    image_path.with_extension("meta.json")
}

pub fn read_meta(path: &Path) -> Result<ImageMeta> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let meta: ImageMeta = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if !(meta.gsd_m_per_px.is_finite() && meta.gsd_m_per_px > 0.0) {
        return Err(Error::Validation(format!(
            "{}: gsd_m_per_px must be positive",
            path.display()
        )));
    }
    Ok(meta)
}

pub fn write_meta(path: &Path, meta: &ImageMeta) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).expect("meta serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
