//! NPY 1.0 reader/writer for 2-D, C-order, little-endian float32/float64 matrices.
//!
//! Anything else (other versions, dtypes, byte orders, Fortran order, ranks, or a
//! payload whose length disagrees with the shape) is rejected.
//!
//! Format reference: <https://numpy.org/doc/stable/reference/generated/numpy.lib.format.html>

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::estimator::{estimate_id, EstimatorConfig, IdEstimate};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const PREAMBLE_LEN: usize = 10;
const ALIGN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn item_size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NpyHeader {
    pub dtype: Dtype,
    pub rows: usize,
    pub cols: usize,
    /// Offset of the first data byte.
    pub data_offset: usize,
}

/// A matrix loaded from disk in its stored precision.
#[derive(Debug, Clone, PartialEq)]
pub enum DynPointCloud {
    F32(PointCloud<f32>),
    F64(PointCloud<f64>),
}

impl DynPointCloud {
    pub fn n_points(&self) -> usize {
        match self {
            DynPointCloud::F32(c) => c.n_points(),
            DynPointCloud::F64(c) => c.n_points(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DynPointCloud::F32(c) => c.dim(),
            DynPointCloud::F64(c) => c.dim(),
        }
    }

    pub fn estimate_id(&self, config: &EstimatorConfig) -> Result<IdEstimate> {
        match self {
            DynPointCloud::F32(c) => estimate_id(c, config),
            DynPointCloud::F64(c) => estimate_id(c, config),
        }
    }
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

/// Parse and validate the preamble and header dictionary.
pub fn parse_header(bytes: &[u8]) -> Result<NpyHeader> {
    if bytes.len() < PREAMBLE_LEN {
        return Err(format_err("file shorter than the NPY preamble"));
    }
    if &bytes[..6] != MAGIC {
        return Err(format_err("bad magic string"));
    }
    if bytes[6] != 1 || bytes[7] != 0 {
        return Err(format_err(format!(
            "unsupported version {}.{} (only 1.0)",
            bytes[6], bytes[7]
        )));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_offset = PREAMBLE_LEN + header_len;
    if bytes.len() < data_offset {
        return Err(format_err("truncated header"));
    }
    let text = std::str::from_utf8(&bytes[PREAMBLE_LEN..data_offset])
        .map_err(|_| format_err("header is not ASCII"))?;
    if !text.is_ascii() {
        return Err(format_err("header is not ASCII"));
    }
    let text = text
        .strip_suffix('\n')
        .ok_or_else(|| format_err("header does not end with a newline"))?;

    let dict = HeaderParser::new(text).parse()?;
    let dtype = match dict.descr.as_str() {
        "<f4" => Dtype::F32,
        "<f8" => Dtype::F64,
        other => {
            return Err(format_err(format!(
                "unsupported dtype {other:?} (expected '<f4' or '<f8')"
            )))
        }
    };
    if dict.fortran_order {
        return Err(format_err("Fortran order is not supported"));
    }
    let [rows, cols] = dict.shape[..] else {
        return Err(format_err(format!(
            "expected a 2-D shape, got rank {}",
            dict.shape.len()
        )));
    };
    Ok(NpyHeader {
        dtype,
        rows,
        cols,
        data_offset,
    })
}

/// Read only as much of a file as needed to validate its header.
pub fn read_header(path: &Path) -> Result<NpyHeader> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pre = [0u8; PREAMBLE_LEN];
    file.read_exact(&mut pre)
        .map_err(|_| format_err("file shorter than the NPY preamble"))?;
    let header_len = u16::from_le_bytes([pre[8], pre[9]]) as usize;
    let mut buf = pre.to_vec();
    buf.resize(PREAMBLE_LEN + header_len, 0);
    file.read_exact(&mut buf[PREAMBLE_LEN..])
        .map_err(|_| format_err("truncated header"))?;
    parse_header(&buf)
}

pub fn decode(bytes: &[u8]) -> Result<DynPointCloud> {
    let header = parse_header(bytes)?;
    let payload = &bytes[header.data_offset..];
    let expected = header
        .rows
        .checked_mul(header.cols)
        .and_then(|n| n.checked_mul(header.dtype.item_size()))
        .ok_or_else(|| format_err("shape overflows"))?;
    if payload.len() != expected {
        return Err(format_err(format!(
            "payload is {} bytes, shape ({}, {}) needs {expected}",
            payload.len(),
            header.rows,
            header.cols
        )));
    }
    Ok(match header.dtype {
        Dtype::F32 => {
            let data = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            DynPointCloud::F32(PointCloud::new(data, header.rows, header.cols)?)
        }
        Dtype::F64 => {
            let data = payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            DynPointCloud::F64(PointCloud::new(data, header.rows, header.cols)?)
        }
    })
}

pub fn read_npy(path: &Path) -> Result<DynPointCloud> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn encode<T: Scalar>(cloud: &PointCloud<T>) -> Vec<u8> {
    let mut dict = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': ({}, {}), }}",
        T::DESCR,
        cloud.n_points(),
        cloud.dim()
    );
    let unpadded = PREAMBLE_LEN + dict.len() + 1;
    let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
    dict.extend(std::iter::repeat_n(' ', padding));
    dict.push('\n');

    let mut out =
        Vec::with_capacity(PREAMBLE_LEN + dict.len() + std::mem::size_of_val(cloud.as_slice()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    for v in cloud.as_slice() {
        out.extend_from_slice(&v.to_le_bytes_vec());
    }
    out
}

pub fn write_npy<T: Scalar>(path: &Path, cloud: &PointCloud<T>) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode(cloud))
        .map_err(|e| Error::io(path, e))
}

struct HeaderDict {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

enum Value {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

/// Parser for the Python dict literal found in NPY headers.
struct HeaderParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> HeaderParser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos] == b' ' {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format_err(format!(
                "expected '{}' at header offset {}",
                c as char, self.pos
            )))
        }
    }

    fn parse(mut self) -> Result<HeaderDict> {
        let mut descr = None;
        let mut fortran_order = None;
        let mut shape = None;

        self.expect(b'{')?;
        loop {
            if self.peek() == Some(b'}') {
                self.pos += 1;
                break;
            }
            let key = self.string()?;
            self.expect(b':')?;
            let value = self.value()?;
            let slot_taken = match (key.as_str(), value) {
                ("descr", Value::Str(s)) => descr.replace(s).is_some(),
                ("fortran_order", Value::Bool(b)) => fortran_order.replace(b).is_some(),
                ("shape", Value::Tuple(t)) => shape.replace(t).is_some(),
                (k, _) => {
                    return Err(format_err(format!(
                        "unexpected header key or value for {k:?}"
                    )))
                }
            };
            if slot_taken {
                return Err(format_err(format!("duplicate header key {key:?}")));
            }
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {}
                _ => return Err(format_err("expected ',' or '}' in header")),
            }
        }
        if self.peek().is_some() {
            return Err(format_err("trailing characters after header dict"));
        }
        Ok(HeaderDict {
            descr: descr.ok_or_else(|| format_err("header lacks 'descr'"))?,
            fortran_order: fortran_order
                .ok_or_else(|| format_err("header lacks 'fortran_order'"))?,
            shape: shape.ok_or_else(|| format_err("header lacks 'shape'"))?,
        })
    }

    fn string(&mut self) -> Result<String> {
        let quote = match self.peek() {
            Some(q @ (b'\'' | b'"')) => q,
            _ => return Err(format_err("expected a quoted string in header")),
        };
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos == self.src.len() {
            return Err(format_err("unterminated string in header"));
        }
        let s = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(s)
    }

    fn value(&mut self) -> Result<Value> {
        match self.peek() {
            Some(b'\'' | b'"') => Ok(Value::Str(self.string()?)),
            Some(b'(') => self.tuple().map(Value::Tuple),
            _ => {
                let rest = &self.src[self.pos..];
                if rest.starts_with(b"True") {
                    self.pos += 4;
                    Ok(Value::Bool(true))
                } else if rest.starts_with(b"False") {
                    self.pos += 5;
                    Ok(Value::Bool(false))
                } else {
                    Err(format_err("unrecognized header value"))
                }
            }
        }
    }

    fn tuple(&mut self) -> Result<Vec<usize>> {
        self.expect(b'(')?;
        let mut dims = Vec::new();
        loop {
            match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    return Ok(dims);
                }
                Some(c) if c.is_ascii_digit() => {
                    let start = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    dims.push(
                        digits
                            .parse()
                            .map_err(|_| format_err("shape entry overflows"))?,
                    );
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {}
                        _ => return Err(format_err("malformed shape tuple")),
                    }
                }
                _ => return Err(format_err("malformed shape tuple")),
            }
        }
    }
}
