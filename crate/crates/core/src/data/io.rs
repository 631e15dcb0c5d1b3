//! Dataset files.
//!
//! CSV: a `dim=<d>` header line, then one `f1,...,fd,class,domain` row per
//! record. FVEC: magic `FVGZ`, then little-endian `u32` version (1), `u32` n,
//! `u32` d, then n records of d `f32` features, a `u16` class and a `u8`
//! domain. Both store features as 32-bit floats; loading widens to 64 bits.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Domain, FeatureDataset};
use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const FVEC_MAGIC: &[u8; 4] = b"FVGZ";
pub const FVEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Fvec,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Fvec => "fvec",
        }
    }

    /// Guess from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "fvec" => Some(Format::Fvec),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "fvec" => Ok(Format::Fvec),
            other => Err(Error::Config(format!("unknown format `{other}` (csv|fvec)"))),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: Format) -> Result<FeatureDataset> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Fvec => fvec_from_bytes(&bytes),
        Format::Csv => {
            let text = String::from_utf8(bytes).map_err(|e| Error::Parse {
                location: path.display().to_string(),
                msg: format!("not UTF-8: {e}"),
            })?;
            csv_from_str(&text, &path.display().to_string())
        }
    }
}

pub fn save_dataset(ds: &FeatureDataset, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        Format::Fvec => fvec_to_bytes(ds)?,
        Format::Csv => csv_to_string(ds)?.into_bytes(),
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn check_class(label: usize, location: impl FnOnce() -> String) -> Result<u16> {
    u16::try_from(label).map_err(|_| Error::BadLabel {
        location: location(),
        msg: format!("class {label} does not fit in u16"),
    })
}

pub fn csv_to_string(ds: &FeatureDataset) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "dim={}", ds.feature_dim()).unwrap();
    for i in 0..ds.len() {
        let class = check_class(ds.labels()[i], || format!("record {i}"))?;
        for v in ds.features().row(i) {
            write!(out, "{},", *v as f32).unwrap();
        }
        writeln!(out, "{},{}", class, ds.domains()[i].index()).unwrap();
    }
    Ok(out)
}

pub fn csv_from_str(text: &str, origin: &str) -> Result<FeatureDataset> {
    let mut lines = text.lines().enumerate();
    let dim = loop {
        match lines.next() {
            None => return Err(Error::Header(format!("{origin}: missing `dim=<d>` header"))),
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => {
                let d = l
                    .trim()
                    .strip_prefix("dim=")
                    .and_then(|d| d.trim().parse::<usize>().ok())
                    .filter(|&d| d > 0)
                    .ok_or_else(|| Error::Header(format!("{origin}: expected `dim=<d>`, got `{l}`")))?;
                break d;
            }
        }
    };

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut domains = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let location = format!("{origin}:{}", i + 1);
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim + 2 {
            return Err(Error::InconsistentDim {
                location,
                expected: dim + 2,
                found: fields.len(),
            });
        }
        for f in &fields[..dim] {
            let v: f32 = f.parse().map_err(|_| Error::Parse {
                location: location.clone(),
                msg: format!("bad feature value `{f}`"),
            })?;
            data.push(v as f64);
        }
        let class: u16 = fields[dim].parse().map_err(|_| Error::BadLabel {
            location: location.clone(),
            msg: format!("class `{}` out of range", fields[dim]),
        })?;
        let domain = fields[dim + 1]
            .parse::<u64>()
            .ok()
            .and_then(Domain::from_index)
            .ok_or_else(|| Error::BadLabel {
                location: location.clone(),
                msg: format!("domain `{}` is not 0 or 1", fields[dim + 1]),
            })?;
        labels.push(class as usize);
        domains.push(domain);
    }
    let features = Matrix::from_vec(labels.len(), dim, data)?;
    FeatureDataset::new(features, labels, domains)
}

pub fn fvec_to_bytes(ds: &FeatureDataset) -> Result<Vec<u8>> {
    let n = u32::try_from(ds.len()).map_err(|_| Error::Config("too many records for FVEC".into()))?;
    let d = u32::try_from(ds.feature_dim())
        .map_err(|_| Error::Config("feature_dim too large for FVEC".into()))?;
    let mut out = Vec::with_capacity(16 + ds.len() * (ds.feature_dim() * 4 + 3));
    out.extend_from_slice(FVEC_MAGIC);
    out.extend_from_slice(&FVEC_VERSION.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&d.to_le_bytes());
    for i in 0..ds.len() {
        for v in ds.features().row(i) {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        let class = check_class(ds.labels()[i], || format!("record {i}"))?;
        out.extend_from_slice(&class.to_le_bytes());
        out.push(ds.domains()[i].index() as u8);
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated {
                offset: self.pos,
                msg: format!("need {n} bytes for {what}, {} left", self.bytes.len() - self.pos),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn fvec_from_bytes(bytes: &[u8]) -> Result<FeatureDataset> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic").map_err(|_| Error::Header("file shorter than magic".into()))? != FVEC_MAGIC {
        return Err(Error::Header("bad magic, expected FVGZ".into()));
    }
    let version = r.u32("version")?;
    if version != FVEC_VERSION {
        return Err(Error::Header(format!("unsupported FVEC version {version}")));
    }
    let n = r.u32("record count")? as usize;
    let d = r.u32("feature dim")? as usize;
    if d == 0 {
        return Err(Error::Header("feature dim 0".into()));
    }
    let record = d * 4 + 3;
    let need = n.checked_mul(record).ok_or_else(|| Error::Header("record count overflows".into()))?;
    if bytes.len() - r.pos < need {
        return Err(Error::Truncated {
            offset: bytes.len(),
            msg: format!(
                "header declares {n} records of {record} bytes, only {} full records present",
                (bytes.len() - r.pos) / record
            ),
        });
    }
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut domains = Vec::with_capacity(n);
    for _ in 0..n {
        for chunk in r.take(d * 4, "features")?.chunks_exact(4) {
            data.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
        }
        let class = u16::from_le_bytes(r.take(2, "class")?.try_into().unwrap());
        let at = r.pos;
        let dom = r.take(1, "domain")?[0];
        let domain = Domain::from_index(dom as u64).ok_or_else(|| Error::BadLabel {
            location: format!("byte offset {at}"),
            msg: format!("domain {dom} is not 0 or 1"),
        })?;
        labels.push(class as usize);
        domains.push(domain);
    }
    if r.pos != bytes.len() {
        return Err(Error::Header(format!(
            "{} trailing bytes after {n} records",
            bytes.len() - r.pos
        )));
    }
    FeatureDataset::new(Matrix::from_vec(n, d, data)?, labels, domains)
}
