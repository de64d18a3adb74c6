//! Tensor interchange files.
//!
//! Layout: one line of JSON (the header) terminated by `\n`, followed by the
//! payload as little-endian `f32` in row-major order. The header always
//! carries `shape`, `dtype` (`"f32"`) and `kind`; some kinds add fields:
//!
//! | kind      | extra header fields     |
//! |-----------|-------------------------|
//! | `mel`     | -                       |
//! | `emb`     | `rate_hz`, `dim`        |
//! | `aligned` | `fps`                   |
//! | `img`     | `max_value`             |
//! | `feat`    | -                       |

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_HEADER_BYTES: u64 = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorKind {
    Mel,
    Emb,
    Aligned,
    Img,
    /// Generic feature matrix (metric side data).
    Feat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorHeader {
    pub shape: Vec<usize>,
    pub dtype: String,
    pub kind: TensorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_value: Option<f64>,
}

impl TensorHeader {
    pub fn new(kind: TensorKind, shape: Vec<usize>) -> Self {
        Self {
            shape,
            dtype: "f32".to_string(),
            kind,
            rate_hz: None,
            dim: None,
            fps: None,
            max_value: None,
        }
    }

    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub header: TensorHeader,
    pub data: Vec<f32>,
}

impl TensorFile {
    pub fn new(header: TensorHeader, data: Vec<f32>) -> Result<Self> {
        if header.element_count() != data.len() {
            return Err(Error::Shape(format!(
                "header shape {:?} holds {} elements, payload has {}",
                header.shape,
                header.element_count(),
                data.len()
            )));
        }
        Ok(Self { header, data })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let line = serde_json::to_string(&self.header)?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        let mut buf = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut line = Vec::new();
        (&mut reader).take(MAX_HEADER_BYTES).read_until(b'\n', &mut line)?;
        if line.last() != Some(&b'\n') {
            return Err(Error::Format("missing tensor header line".into()));
        }
        line.pop();
        let header: TensorHeader = serde_json::from_slice(&line)?;
        if header.dtype != "f32" {
            return Err(Error::Unsupported(format!("tensor dtype '{}'", header.dtype)));
        }
        let n = header.element_count();
        let mut payload = vec![0u8; n * 4];
        reader.read_exact(&mut payload).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::Format(format!("payload shorter than shape {:?}", header.shape))
            } else {
                Error::Io(e)
            }
        })?;
        let mut extra = [0u8; 1];
        if reader.read(&mut extra)? != 0 {
            return Err(Error::Format(format!(
                "trailing bytes after payload of shape {:?}",
                header.shape
            )));
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(Self { header, data })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = File::create(path)?;
        self.write_to(BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }

    /// Returns the header's `(rows, cols)` or a shape error if it is not 2-D.
    pub fn matrix_dims(&self) -> Result<(usize, usize)> {
        match self.header.shape.as_slice() {
            [r, c] => Ok((*r, *c)),
            other => Err(Error::Shape(format!("expected a 2-D tensor, got shape {other:?}"))),
        }
    }
}
