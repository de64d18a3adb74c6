use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{TensorFile, TensorHeader, TensorKind};

/// Interleaved `(height, width, channels)` image with samples in `[0, max_value]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrame {
    pixels: Vec<f64>,
    height: usize,
    width: usize,
    channels: usize,
    max_value: f64,
}

impl ImageFrame {
    pub fn new(pixels: Vec<f64>, height: usize, width: usize, channels: usize, max_value: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Shape("image must be at least 1x1".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Shape(format!("{channels} channels; expected 1 or 3")));
        }
        if pixels.len() != height * width * channels {
            return Err(Error::Shape(format!(
                "{} samples cannot form a {height}x{width}x{channels} image",
                pixels.len()
            )));
        }
        if !(max_value.is_finite() && max_value > 0.0) {
            return Err(Error::Contract(format!("invalid max value {max_value}")));
        }
        if let Some(v) = pixels.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > max_value) {
            return Err(Error::Contract(format!("pixel value {v} outside [0, {max_value}]")));
        }
        Ok(Self {
            pixels,
            height,
            width,
            channels,
            max_value,
        })
    }

    pub fn from_u8(pixels: &[u8], height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(
            pixels.iter().map(|&p| p as f64).collect(),
            height,
            width,
            channels,
            255.0,
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn same_geometry(&self, other: &Self) -> Result<()> {
        if (self.height, self.width, self.channels) != (other.height, other.width, other.channels) {
            return Err(Error::Shape(format!(
                "image shapes differ: {}x{}x{} vs {}x{}x{}",
                self.height, self.width, self.channels, other.height, other.width, other.channels
            )));
        }
        if self.max_value != other.max_value {
            return Err(Error::Shape(format!(
                "max values differ: {} vs {}",
                self.max_value, other.max_value
            )));
        }
        Ok(())
    }

    /// Single-plane intensities; RGB is reduced with BT.601 luma weights.
    pub fn luma(&self) -> Vec<f64> {
        if self.channels == 1 {
            return self.pixels.clone();
        }
        self.pixels
            .chunks_exact(3)
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect()
    }

    /// Reads binary PGM (`P5`) or PPM (`P6`), 8- or 16-bit.
    pub fn read_pnm<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let magic = pnm_token(&mut reader)?;
        let channels = match magic.as_str() {
            "P5" => 1,
            "P6" => 3,
            other => return Err(Error::Unsupported(format!("pnm magic '{other}'"))),
        };
        let width = pnm_number(&mut reader)?;
        let height = pnm_number(&mut reader)?;
        let maxval = pnm_number(&mut reader)?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Format(format!("pnm maxval {maxval}")));
        }
        let n = width * height * channels;
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        let mut raw = vec![0u8; n * bytes_per];
        reader
            .read_exact(&mut raw)
            .map_err(|_| Error::Format("pnm raster is truncated".into()))?;
        let pixels = if bytes_per == 1 {
            raw.iter().map(|&b| b as f64).collect()
        } else {
            raw.chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
                .collect()
        };
        Self::new(pixels, height, width, channels, maxval as f64)
    }

    /// Writes binary PGM/PPM; samples are rounded to integers.
    pub fn write_pnm<W: Write>(&self, mut w: W) -> Result<()> {
        let maxval = self.max_value.round() as u32;
        if !(1..=65535).contains(&maxval) {
            return Err(Error::Unsupported(format!(
                "pnm cannot store max value {}",
                self.max_value
            )));
        }
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        write!(w, "{magic}\n{} {}\n{maxval}\n", self.width, self.height)?;
        let mut raw = Vec::new();
        for &p in &self.pixels {
            let v = p.round() as u32;
            if maxval < 256 {
                raw.push(v as u8);
            } else {
                raw.extend_from_slice(&(v as u16).to_be_bytes());
            }
        }
        w.write_all(&raw)?;
        Ok(())
    }

    pub fn to_tensor(&self) -> TensorFile {
        let mut header = TensorHeader::new(TensorKind::Img, vec![self.height, self.width, self.channels]);
        header.max_value = Some(self.max_value);
        TensorFile {
            header,
            data: self.pixels.iter().map(|&p| p as f32).collect(),
        }
    }

    pub fn from_tensor(t: TensorFile) -> Result<Self> {
        if t.header.kind != TensorKind::Img {
            return Err(Error::Format(format!(
                "expected an img tensor, got {:?}",
                t.header.kind
            )));
        }
        let (h, w, c) = match t.header.shape[..] {
            [h, w] => (h, w, 1),
            [h, w, c] => (h, w, c),
            _ => return Err(Error::Shape(format!("img tensor shape {:?}", t.header.shape))),
        };
        let max = t
            .header
            .max_value
            .ok_or_else(|| Error::Format("img header lacks 'max_value'".into()))?;
        Self::new(t.data.iter().map(|&v| v as f64).collect(), h, w, c, max)
    }

    /// Loads by extension: `.pgm`/`.ppm` as PNM, anything else as a tensor file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if ext.eq_ignore_ascii_case("pgm") || ext.eq_ignore_ascii_case("ppm") {
            Self::read_pnm(std::fs::File::open(path)?)
        } else {
            Self::from_tensor(TensorFile::load(path)?)
        }
    }
}

fn pnm_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = String::new();
    loop {
        let mut b = [0u8; 1];
        if r.read(&mut b)? == 0 {
            break;
        }
        let c = b[0] as char;
        if c == '#' && tok.is_empty() {
            let mut skip = Vec::new();
            r.read_until(b'\n', &mut skip)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(c);
    }
    if tok.is_empty() {
        return Err(Error::Format("pnm header is truncated".into()));
    }
    Ok(tok)
}

fn pnm_number<R: BufRead>(r: &mut R) -> Result<usize> {
    let tok = pnm_token(r)?;
    tok.parse()
        .map_err(|_| Error::Format(format!("pnm header field '{tok}' is not a number")))
}
