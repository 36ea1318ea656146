//! On-disk formats.
//!
//! EMB1 embedding files are little-endian:
//!
//! ```text
//! "EMB1" | u32 version = 1 | u32 n | u32 d | n*d f32, row-major | u8 has_labels | [n i32 labels]
//! ```
//!
//! Labels are CSV with header `index,label[,l1..lh]`, mixture parameters are
//! JSON (`k`, `dim`, `weights`, `means`, `variances`) with 17 significant
//! digits, and dendrograms are CSV with header `left,right,height,size`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::dataset::{LevelLabels, Matrix};
use crate::dendrogram::{Dendrogram, Merge};
use crate::embed::GmmParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"EMB1";
const VERSION: u32 = 1;
const HEADER_LEN: u64 = 16;

/// Points read from an EMB1 file, widened to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: Matrix,
    pub labels: Option<Vec<i32>>,
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_embedding(points: &Matrix, labels: Option<&[i32]>) -> Result<Vec<u8>> {
    let (n, d) = (points.rows(), points.cols());
    let too_big = |what: &str| Error::Validation(format!("{what} does not fit in 32 bits"));
    let n32 = u32::try_from(n).map_err(|_| too_big("row count"))?;
    let d32 = u32::try_from(d).map_err(|_| too_big("column count"))?;
    if let Some(l) = labels {
        if l.len() != n {
            return Err(Error::Validation(format!("{} labels for {n} rows", l.len())));
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN as usize + 4 * n * d + 1 + labels.map_or(0, |_| 4 * n));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&n32.to_le_bytes());
    out.extend_from_slice(&d32.to_le_bytes());
    for (idx, &v) in points.as_slice().iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::Validation(format!(
                "value {v} at row {}, column {} is not a finite 32-bit float",
                idx / d.max(1),
                idx % d.max(1)
            )));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    match labels {
        Some(l) => {
            out.push(1);
            for &x in l {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        None => out.push(0),
    }
    Ok(out)
}

/// Values are narrowed to `f32`; reading back gives the narrowed values.
pub fn write_embedding(path: &Path, points: &Matrix, labels: Option<&[i32]>) -> Result<()> {
    write_file(path, &encode_embedding(points, labels)?)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let left = self.bytes.len() - self.pos;
        if left < len {
            return Err(Error::Truncated {
                offset: self.bytes.len() as u64,
                missing: (len - left) as u64,
            });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

pub fn decode_embedding(bytes: &[u8]) -> Result<Embedding> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4)?;
    if magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {magic:?}, expected \"EMB1\""),
        });
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported version {version}"),
        });
    }
    let n = cur.u32()? as usize;
    let d = cur.u32()? as usize;
    if n == 0 || d == 0 {
        return Err(Error::Format {
            offset: 8,
            message: format!("empty embedding {n}x{d}"),
        });
    }
    let len = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::Format {
            offset: 8,
            message: format!("embedding size {n}x{d} overflows"),
        })?;
    // report the full shortfall, including the label flag byte
    let needed = len as u64 + 1;
    let available = (bytes.len() - cur.pos) as u64;
    if available < needed {
        return Err(Error::Truncated {
            offset: bytes.len() as u64,
            missing: needed - available,
        });
    }
    let payload = cur.take(len)?;
    let mut data = Vec::with_capacity(n * d);
    for (idx, chunk) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        if !v.is_finite() {
            return Err(Error::Format {
                offset: HEADER_LEN + 4 * idx as u64,
                message: format!("non-finite value {v} at row {}, column {}", idx / d, idx % d),
            });
        }
        data.push(v as f64);
    }
    let flag_offset = cur.pos as u64;
    let labels = match cur.take(1)?[0] {
        0 => None,
        1 => {
            let raw = cur.take(4 * n)?;
            Some(
                raw.chunks_exact(4)
                    .map(|c| i32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            )
        }
        other => {
            return Err(Error::Format {
                offset: flag_offset,
                message: format!("label flag must be 0 or 1, got {other}"),
            })
        }
    };
    if cur.pos != bytes.len() {
        return Err(Error::Format {
            offset: cur.pos as u64,
            message: format!("{} trailing bytes", bytes.len() - cur.pos),
        });
    }
    Ok(Embedding {
        points: Matrix::new(n, d, data)?,
        labels,
    })
}

pub fn read_embedding(path: &Path) -> Result<Embedding> {
    decode_embedding(&read_file(path)?)
}

fn csv_error(e: csv::Error) -> Error {
    let offset = e.position().map_or(0, |p| p.byte());
    Error::Format {
        offset,
        message: e.to_string(),
    }
}

/// Flat labels plus optional per-level labels (coarsest first).
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    pub labels: Vec<i64>,
    pub levels: Option<LevelLabels>,
}

pub fn encode_labels(labels: &[i64], levels: Option<&LevelLabels>) -> Result<Vec<u8>> {
    if let Some(lv) = levels {
        if lv.n() != labels.len() {
            return Err(Error::Validation(format!(
                "{} level rows for {} labels",
                lv.n(),
                labels.len()
            )));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string(), "label".to_string()];
    if let Some(lv) = levels {
        header.extend((1..=lv.depth()).map(|l| format!("l{l}")));
    }
    w.write_record(&header).map_err(csv_error)?;
    for (i, l) in labels.iter().enumerate() {
        let mut rec = vec![i.to_string(), l.to_string()];
        if let Some(lv) = levels {
            rec.extend(lv.row(i).iter().map(|v| v.to_string()));
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.into_inner()
        .map_err(|e| Error::Validation(format!("csv buffer: {e}")))
}

pub fn write_labels(path: &Path, labels: &[i64], levels: Option<&LevelLabels>) -> Result<()> {
    write_file(path, &encode_labels(labels, levels)?)
}

pub fn decode_labels(bytes: &[u8]) -> Result<LabelTable> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.len() < 2 || &header[0] != "index" || &header[1] != "label" {
        return Err(Error::Format {
            offset: 0,
            message: "label header must start with index,label".into(),
        });
    }
    for (l, name) in header.iter().skip(2).enumerate() {
        if name != format!("l{}", l + 1) {
            return Err(Error::Format {
                offset: 0,
                message: format!("unexpected label column {name:?}"),
            });
        }
    }
    let h = header.len() - 2;
    let mut labels = Vec::new();
    let mut level_data = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let offset = rec.position().map_or(0, |p| p.byte());
        let field = |j: usize| -> Result<i64> {
            rec[j].trim().parse::<i64>().map_err(|e| Error::Format {
                offset,
                message: format!("column {}: {e}", &header[j]),
            })
        };
        let idx = field(0)?;
        if idx != labels.len() as i64 {
            return Err(Error::Format {
                offset,
                message: format!("index {idx} out of sequence, expected {}", labels.len()),
            });
        }
        labels.push(field(1)?);
        for j in 0..h {
            level_data.push(field(2 + j)?);
        }
    }
    if labels.is_empty() {
        return Err(Error::Validation("label file has no rows".into()));
    }
    let levels = if h > 0 {
        Some(LevelLabels::new(labels.len(), h, level_data).map_err(|e| Error::Validation(e.to_string()))?)
    } else {
        None
    };
    Ok(LabelTable { labels, levels })
}

pub fn read_labels(path: &Path) -> Result<LabelTable> {
    decode_labels(&read_file(path)?)
}

fn push_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write!(out, "{v:.16e}").expect("string write");
    }
    out.push(']');
}

fn push_rows(out: &mut String, m: &Matrix) {
    out.push_str("[\n");
    for (i, row) in m.iter_rows().enumerate() {
        out.push_str("    ");
        push_array(out, row);
        out.push_str(if i + 1 < m.rows() { ",\n" } else { "\n" });
    }
    out.push_str("  ]");
}

pub fn encode_gmm(gmm: &GmmParams) -> String {
    let mut out = String::new();
    write!(
        out,
        "{{\n  \"k\": {},\n  \"dim\": {},\n  \"weights\": ",
        gmm.k(),
        gmm.dim()
    )
    .expect("string write");
    push_array(&mut out, gmm.weights());
    out.push_str(",\n  \"means\": ");
    push_rows(&mut out, gmm.means());
    out.push_str(",\n  \"variances\": ");
    push_rows(&mut out, gmm.variances());
    out.push_str("\n}\n");
    out
}

pub fn write_gmm(path: &Path, gmm: &GmmParams) -> Result<()> {
    write_file(path, encode_gmm(gmm).as_bytes())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGmm {
    k: usize,
    dim: usize,
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], cols: usize, what: &str) -> Result<Matrix> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::Validation(format!(
            "{what} row {i} has {} entries, expected {cols}",
            r.len()
        )));
    }
    Matrix::new(rows.len(), cols, rows.concat()).map_err(|e| Error::Validation(e.to_string()))
}

pub fn decode_gmm(text: &str) -> Result<GmmParams> {
    let raw: RawGmm = serde_json::from_str(text).map_err(|e| Error::Format {
        offset: text
            .lines()
            .take(e.line().saturating_sub(1))
            .map(|l| l.len() as u64 + 1)
            .sum::<u64>()
            + e.column().saturating_sub(1) as u64,
        message: e.to_string(),
    })?;
    if raw.weights.len() != raw.k || raw.means.len() != raw.k || raw.variances.len() != raw.k {
        return Err(Error::Validation(format!(
            "k = {} but {} weights, {} means, {} variance rows",
            raw.k,
            raw.weights.len(),
            raw.means.len(),
            raw.variances.len()
        )));
    }
    let means = rows_to_matrix(&raw.means, raw.dim, "means")?;
    let var_cols = raw.variances.first().map_or(1, Vec::len);
    let variances = rows_to_matrix(&raw.variances, var_cols, "variances")?;
    GmmParams::new(raw.weights, means, variances)
}

pub fn read_gmm(path: &Path) -> Result<GmmParams> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Format {
        offset: e.utf8_error().valid_up_to() as u64,
        message: "mixture file is not UTF-8".into(),
    })?;
    decode_gmm(&text)
}

pub fn encode_dendrogram(tree: &Dendrogram) -> Vec<u8> {
    let mut out = String::from("left,right,height,size\n");
    for m in tree.merges() {
        writeln!(out, "{},{},{:?},{}", m.left, m.right, m.height, m.size).expect("string write");
    }
    out.into_bytes()
}

pub fn write_dendrogram(path: &Path, tree: &Dendrogram) -> Result<()> {
    write_file(path, &encode_dendrogram(tree))
}

pub fn decode_dendrogram(bytes: &[u8]) -> Result<Dendrogram> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().collect::<Vec<_>>() != ["left", "right", "height", "size"] {
        return Err(Error::Format {
            offset: 0,
            message: "dendrogram header must be left,right,height,size".into(),
        });
    }
    let mut merges = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let offset = rec.position().map_or(0, |p| p.byte());
        let bad = |what: &str| Error::Format {
            offset,
            message: format!("unparsable {what}"),
        };
        merges.push(Merge {
            left: rec[0].trim().parse().map_err(|_| bad("left"))?,
            right: rec[1].trim().parse().map_err(|_| bad("right"))?,
            height: rec[2].trim().parse().map_err(|_| bad("height"))?,
            size: rec[3].trim().parse().map_err(|_| bad("size"))?,
        });
    }
    Dendrogram::new(merges.len() + 1, merges).map_err(|e| Error::Validation(e.to_string()))
}

pub fn read_dendrogram(path: &Path) -> Result<Dendrogram> {
    decode_dendrogram(&read_file(path)?)
}
