//! Dataset encodings: CSV grids, JSON documents and the raw density dump.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::lattice::LatticeSpec;
use crate::pair::{CorrelationMatrix, ExtendedBasis};
use crate::{Error, Result, C64};

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Complex matrix with a `re`/`im` column pair per matrix column.
pub fn complex_matrix_csv(m: &Array2<C64>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (0..m.ncols())
        .flat_map(|c| [format!("c{c}_re"), format!("c{c}_im")])
        .collect();
    w.write_record(&header).map_err(csv_error)?;
    for row in m.rows() {
        let rec: Vec<String> = row.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
        w.write_record(&rec).map_err(csv_error)?;
    }
    finish(w)
}

/// Headerless grid of reals.
pub fn real_grid_csv(m: &Array2<f64>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    finish(w)
}

/// Named columns of equal length.
pub fn columns_csv(names: &[&str], columns: &[Vec<f64>]) -> Result<String> {
    if names.len() != columns.len() {
        return Err(Error::Domain("column names and data differ in count".into()));
    }
    let rows = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::Domain("columns differ in length".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(names).map_err(csv_error)?;
    for r in 0..rows {
        w.write_record(columns.iter().map(|c| c[r].to_string())).map_err(csv_error)?;
    }
    finish(w)
}

/// Complex points as `re,im` rows.
pub fn complex_points_csv(points: &[C64]) -> Result<String> {
    columns_csv(
        &["re", "im"],
        &[points.iter().map(|z| z.re).collect(), points.iter().map(|z| z.im).collect()],
    )
}

/// Parse a headerless square grid of non-negative reals into a
/// correlation matrix. Lines starting with `#` are ignored.
pub fn parse_correlation_csv(text: &str) -> Result<CorrelationMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("invalid number `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty correlation grid".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Parse(format!(
            "row {bad} has {} entries, expected {n}",
            rows[bad].len()
        )));
    }
    let gamma = Array2::from_shape_fn((n, n), |(r, c)| rows[r][c]);
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse("non-finite entry in correlation grid".into()));
    }
    CorrelationMatrix::new(gamma)
}

/// JSON document wrapping a payload with its run id and resolved spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument<T> {
    pub run_id: String,
    pub spec: LatticeSpec,
    pub spec_hash: String,
    pub geometry: String,
    pub payload: T,
}

impl<T: Serialize> RunDocument<T> {
    pub fn new(run_id: impl Into<String>, spec: &LatticeSpec, payload: T) -> Result<Self> {
        Ok(Self {
            run_id: run_id.into(),
            spec: spec.clone(),
            spec_hash: spec.spec_hash(),
            geometry: "left gap a + R sin(Ωz+φ), right gap a − R sin(Ωz+φ); straight-to-aux rest distance a".into(),
            payload,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Description written next to a raw density dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySidecar {
    pub dimension: usize,
    pub sites: usize,
    pub layout: String,
    pub encoding: String,
}

pub const DENSITY_LAYOUT: &str = "pairs n*M+m, then singles M*M+l, then vacuum M*M+M";
pub const DENSITY_ENCODING: &str = "f64 little-endian, re/im interleaved, row-major";

pub fn encode_density(entries: &Array2<C64>, basis: &ExtendedBasis) -> Result<(Vec<u8>, DensitySidecar)> {
    let d = basis.dimension();
    if entries.dim() != (d, d) {
        return Err(Error::Domain("density matrix does not match basis".into()));
    }
    let mut bytes = Vec::with_capacity(d * d * 16);
    for z in entries.iter() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    Ok((
        bytes,
        DensitySidecar {
            dimension: d,
            sites: basis.sites(),
            layout: DENSITY_LAYOUT.into(),
            encoding: DENSITY_ENCODING.into(),
        },
    ))
}

pub fn parse_sidecar(text: &str) -> Result<DensitySidecar> {
    let s: DensitySidecar = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let basis = ExtendedBasis::new(s.sites).map_err(|_| Error::Parse("sidecar has zero sites".into()))?;
    if basis.dimension() != s.dimension {
        return Err(Error::Parse(format!(
            "sidecar dimension {} does not match {} sites",
            s.dimension, s.sites
        )));
    }
    if s.encoding != DENSITY_ENCODING || s.layout != DENSITY_LAYOUT {
        return Err(Error::Parse("unsupported density layout or encoding".into()));
    }
    Ok(s)
}

/// Decode a raw dump; only shape and finiteness are checked here.
pub fn decode_density(bytes: &[u8], sidecar: &DensitySidecar) -> Result<Array2<C64>> {
    let d = sidecar.dimension;
    let expected = d
        .checked_mul(d)
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| Error::Parse("dimension overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Parse(format!("expected {expected} bytes, got {}", bytes.len())));
    }
    let values: Vec<C64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parse("non-finite entry in density dump".into()));
    }
    Array2::from_shape_vec((d, d), values).map_err(|e| Error::Parse(e.to_string()))
}
