use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Side length images are reduced to on load.
pub const IMAGE_SIZE: usize = 32;

/// Sound samples kept on load.
pub const SOUND_SAMPLES: usize = 1000;

/// How stored values relate to the source: `stored = lo + (raw − raw_min)
/// · (hi − lo) / (raw_max − raw_min)`, or `lo + raw / raw_max` style maps
/// for images (`raw_min = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub raw_min: f64,
    pub raw_max: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Coordinates in `[−1, 1]^{d_in}` paired with signal values.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalDataset {
    pub coords: Array2<f64>,
    pub values: Array2<f64>,
    /// `[n]` for sound, `[rows, cols]` for images.
    pub grid_shape: Vec<usize>,
    pub normalization: Normalization,
}

impl SignalDataset {
    pub fn new(coords: Array2<f64>, values: Array2<f64>, grid_shape: Vec<usize>, normalization: Normalization) -> Result<Self> {
        let n: usize = grid_shape.iter().product();
        if coords.nrows() != n || values.nrows() != n {
            return Err(Error::Shape(format!(
                "grid {grid_shape:?} has {n} points but coords/values have {}/{} rows",
                coords.nrows(),
                values.nrows()
            )));
        }
        if coords.iter().any(|c| !(-1.0..=1.0).contains(c)) {
            return Err(Error::Invalid("coordinates must lie in [-1, 1]".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("signal value".into()));
        }
        Ok(Self {
            coords,
            values,
            grid_shape,
            normalization,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d_in(&self) -> usize {
        self.coords.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.values.ncols()
    }

    /// A 1-D signal sampled at `linspace(−1, 1, n)`, values stored as given.
    pub fn from_signal(values: &[f64]) -> Result<Self> {
        let (lo, hi) = min_max(values);
        Self::new(
            linspace_coords(values.len())?,
            Array2::from_shape_vec((values.len(), 1), values.to_vec()).expect("column"),
            vec![values.len()],
            Normalization {
                raw_min: lo,
                raw_max: hi,
                lo,
                hi,
            },
        )
    }

    /// Image values as a row-major grid.
    pub fn to_image(&self) -> Result<Image> {
        match self.grid_shape[..] {
            [rows, cols] if self.d_out() == 1 => Image::new(rows, cols, self.values.column(0).to_vec()),
            _ => Err(Error::Shape(format!(
                "dataset with grid {:?} and {} outputs is not a grayscale image",
                self.grid_shape,
                self.d_out()
            ))),
        }
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)))
}

/// `n` evenly spaced points on `[−1, 1]`, endpoints included.
pub fn linspace_coords(n: usize) -> Result<Array2<f64>> {
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 samples, got {n}")));
    }
    Ok(Array2::from_shape_fn((n, 1), |(i, _)| {
        if i == n - 1 {
            1.0
        } else {
            -1.0 + 2.0 * i as f64 / (n - 1) as f64
        }
    }))
}

/// Centre of pixel `k` of `size` along one axis: `−1 + (2k + 1)/size`.
pub fn pixel_center(k: usize, size: usize) -> f64 {
    -1.0 + (2 * k + 1) as f64 / size as f64
}

/// `(row, col)` pixel-centre coordinates of a `rows × cols` grid, row-major.
pub fn pixel_grid(rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows * cols, 2), |(i, axis)| {
        if axis == 0 {
            pixel_center(i / cols, rows)
        } else {
            pixel_center(i % cols, cols)
        }
    })
}

/// Affine map of `raw` onto `[−1, 1]`; a constant signal maps to 0.
pub fn normalize_symmetric(raw: &[f64]) -> (Vec<f64>, Normalization) {
    let (lo, hi) = min_max(raw);
    let values = if hi > lo {
        raw.iter().map(|v| 2.0 * (v - lo) / (hi - lo) - 1.0).collect()
    } else {
        vec![0.0; raw.len()]
    };
    (
        values,
        Normalization {
            raw_min: lo,
            raw_max: hi,
            lo: -1.0,
            hi: 1.0,
        },
    )
}

/// `n` samples at indices `⌊i·(len−1)/(n−1)⌋`.
pub fn subsample(raw: &[f64], n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Invalid(format!("need at least 2 samples, got {n}")));
    }
    if raw.len() < n {
        return Err(Error::Format(format!(
            "signal has {} samples, fewer than the {n} requested",
            raw.len()
        )));
    }
    Ok((0..n).map(|i| raw[i * (raw.len() - 1) / (n - 1)]).collect())
}

fn sound_dataset(raw: &[f64], n: usize) -> Result<SignalDataset> {
    let (values, normalization) = normalize_symmetric(&subsample(raw, n)?);
    SignalDataset::new(
        linspace_coords(n)?,
        Array2::from_shape_vec((n, 1), values).expect("column"),
        vec![n],
        normalization,
    )
}

/// Mono 8- or 16-bit PCM WAV, or a CSV with one value per line (chosen by
/// the `.csv` extension). `n` samples are kept.
pub fn load_sound(path: impl AsRef<Path>, n: usize) -> Result<SignalDataset> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let raw = if is_csv { read_csv_column(path)? } else { read_wav(path)? };
    sound_dataset(&raw, n)
}

/// Raw integer samples of a mono 8/16-bit PCM WAV.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Format(format!("expected mono audio, got {} channels", spec.channels)));
    }
    if spec.sample_format != hound::SampleFormat::Int || !matches!(spec.bits_per_sample, 8 | 16) {
        return Err(Error::Format(format!(
            "unsupported encoding: {:?} {}-bit (need 8/16-bit PCM)",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    reader
        .samples::<i32>()
        .map(|s| s.map(f64::from).map_err(Error::from))
        .collect()
}

/// Writes 16-bit mono PCM.
pub fn write_wav(path: impl AsRef<Path>, samples: &[i16], sample_rate: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &s in samples {
        w.write_sample(s)?;
    }
    w.finalize()?;
    Ok(())
}

/// One number per non-empty line.
pub fn read_csv_column(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let file = fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Format(format!("line {}: '{t}' is not a number", i + 1)))?;
        if !v.is_finite() {
            return Err(Error::Format(format!("line {}: non-finite value", i + 1)));
        }
        out.push(v);
    }
    Ok(out)
}

/// Row-major grayscale image.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || pixels.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} pixels for a {rows}×{cols} image",
                pixels.len()
            )));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let pixels = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Self { rows, cols, pixels }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.cols + c]
    }

    /// Largest centred square.
    pub fn center_crop(&self) -> Image {
        let s = self.rows.min(self.cols);
        let (r0, c0) = ((self.rows - s) / 2, (self.cols - s) / 2);
        Image::from_fn(s, s, |r, c| self.get(r0 + r, c0 + c))
    }

    /// Area-average resampling to `rows × cols` (each output pixel is the
    /// mean of the source area it covers, fractional pixels weighted).
    pub fn box_downsample(&self, rows: usize, cols: usize) -> Result<Image> {
        if rows == 0 || cols == 0 || rows > self.rows || cols > self.cols {
            return Err(Error::Invalid(format!(
                "cannot box-filter {}×{} to {rows}×{cols}",
                self.rows, self.cols
            )));
        }
        let wr = area_weights(self.rows, rows);
        let wc = area_weights(self.cols, cols);
        Ok(Image::from_fn(rows, cols, |r, c| {
            let mut acc = 0.0;
            for &(sr, a) in &wr[r] {
                for &(sc, b) in &wc[c] {
                    acc += a * b * self.get(sr, sc);
                }
            }
            acc
        }))
    }

    pub fn to_dataset(&self, normalization: Normalization) -> Result<SignalDataset> {
        SignalDataset::new(
            pixel_grid(self.rows, self.cols),
            Array2::from_shape_vec((self.pixels.len(), 1), self.pixels.clone()).expect("column"),
            vec![self.rows, self.cols],
            normalization,
        )
    }
}

/// For each of `dst` output cells, the source cells it overlaps and their
/// normalized overlap weights.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|k| {
            let (a, b) = (k as f64 * scale, (k + 1) as f64 * scale);
            let mut w = Vec::new();
            let mut s = a.floor() as usize;
            while (s as f64) < b && s < src {
                let overlap = (b.min(s as f64 + 1.0) - a.max(s as f64)).max(0.0);
                if overlap > 0.0 {
                    w.push((s, overlap / scale));
                }
                s += 1;
            }
            w
        })
        .collect()
}

/// Grayscale PGM (P2 or P5); values are returned as `v / maxval`.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    parse_pgm(&fs::read(path)?)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::Format("unexpected end of PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    match magic.as_str() {
        "P2" | "P5" => {}
        "P3" | "P6" => return Err(Error::Format("colour PNM images are not supported; convert to grayscale".into())),
        m => return Err(Error::Format(format!("not a PGM file (magic '{m}')"))),
    }
    let num = |pos: &mut usize, what: &str| -> Result<usize> {
        let t = token(pos)?;
        t.parse()
            .map_err(|_| Error::Format(format!("bad PGM {what} '{t}'")))
    };
    let cols = num(&mut pos, "width")?;
    let rows = num(&mut pos, "height")?;
    let maxval = num(&mut pos, "maxval")?;
    if cols == 0 || rows == 0 || maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("bad PGM dimensions {cols}×{rows}, maxval {maxval}")));
    }
    let n = rows * cols;
    let raw: Vec<usize> = if magic == "P2" {
        (0..n).map(|_| num(&mut pos, "sample")).collect::<Result<_>>()?
    } else {
        pos += 1;
        let width = if maxval < 256 { 1 } else { 2 };
        let data = bytes
            .get(pos..pos + n * width)
            .ok_or_else(|| Error::Format("truncated PGM pixel data".into()))?;
        if width == 1 {
            data.iter().map(|&b| b as usize).collect()
        } else {
            data.chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize)
                .collect()
        }
    };
    if let Some(v) = raw.iter().find(|&&v| v > maxval) {
        return Err(Error::Format(format!("PGM sample {v} exceeds maxval {maxval}")));
    }
    Image::new(rows, cols, raw.iter().map(|&v| v as f64 / maxval as f64).collect())
}

/// Binary 8-bit PGM; values are clamped to `[0, 1]` and scaled to 0..=255.
pub fn write_pgm(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    let mut out = Vec::with_capacity(image.pixels.len() + 20);
    write!(out, "P5\n{} {}\n255\n", image.cols, image.rows)?;
    out.extend(
        image
            .pixels
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    fs::write(path, out)?;
    Ok(())
}

/// Grayscale PGM as a dataset: centre-cropped to a square, box-filtered to
/// `size × size` when larger, values in `[0, 1]`.
pub fn load_image_sized(path: impl AsRef<Path>, size: usize) -> Result<SignalDataset> {
    let mut img = read_pgm(path)?.center_crop();
    if img.rows > size {
        img = img.box_downsample(size, size)?;
    }
    img.to_dataset(Normalization {
        raw_min: 0.0,
        raw_max: 1.0,
        lo: 0.0,
        hi: 1.0,
    })
}

pub fn load_image(path: impl AsRef<Path>) -> Result<SignalDataset> {
    load_image_sized(path, IMAGE_SIZE)
}

/// `0.5·sin(2π·3i/n) + 0.5·sin(2π·17i/n)` for `i < n`, rescaled to
/// `[−1, 1]`, at `linspace(−1, 1, n)`.
pub fn two_tone(n: usize) -> Result<SignalDataset> {
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            0.5 * (2.0 * PI * 3.0 * t).sin() + 0.5 * (2.0 * PI * 17.0 * t).sin()
        })
        .collect();
    let (values, normalization) = normalize_symmetric(&raw);
    SignalDataset::new(
        linspace_coords(n)?,
        Array2::from_shape_vec((n, 1), values).expect("column"),
        vec![n],
        normalization,
    )
}

/// A smooth seeded function on `[−1, 1]²` with values in `[0, 1]`: a sum of
/// three low-frequency plane waves.
pub fn smooth_field(seed: u64) -> impl Fn(f64, f64) -> f64 {
    let mut r = rng::stream(seed, 0);
    let waves: Vec<[f64; 4]> = (0..3)
        .map(|_| {
            [
                r.random_range(-1.5..1.5),
                r.random_range(-1.5..1.5),
                r.random_range(0.0..2.0 * PI),
                r.random_range(0.5..1.0),
            ]
        })
        .collect();
    let norm: f64 = waves.iter().map(|w| w[3]).sum();
    move |y, x| {
        let s: f64 = waves
            .iter()
            .map(|[a, b, ph, amp]| amp * (PI * (a * x + b * y) + ph).sin())
            .sum();
        0.5 + 0.5 * s / norm
    }
}

/// [`smooth_field`] sampled at the pixel centres of a `size × size` grid.
pub fn smooth_image(size: usize, seed: u64) -> Image {
    let f = smooth_field(seed);
    Image::from_fn(size, size, |r, c| f(pixel_center(r, size), pixel_center(c, size)))
}

/// Named synthetic sources accepted wherever a data path is: `synthetic:two-tone`
/// (256 points) and `synthetic:smooth-image` (32×32).
pub fn load_named(source: &str) -> Result<SignalDataset> {
    match source.strip_prefix("synthetic:") {
        Some("two-tone") => two_tone(256),
        Some("smooth-image") => smooth_image(IMAGE_SIZE, 0).to_dataset(Normalization {
            raw_min: 0.0,
            raw_max: 1.0,
            lo: 0.0,
            hi: 1.0,
        }),
        Some(other) => Err(Error::Invalid(format!("unknown synthetic source '{other}'"))),
        None => {
            let path = Path::new(source);
            if !path.exists() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("{source}: no such file"),
                )));
            }
            let ext = path
                .extension()
                .map(|e| e.to_string_lossy().to_ascii_lowercase())
                .unwrap_or_default();
            match ext.as_str() {
                "pgm" => load_image(path),
                "wav" | "csv" => load_sound(path, SOUND_SAMPLES),
                _ => Err(Error::Format(format!(
                    "{source}: unrecognised extension (expected .wav, .csv or .pgm)"
                ))),
            }
        }
    }
}
