//! File formats: trajectory CSV with a JSON metadata sidecar, planar fixture
//! CSV, and model documents.
//!
//! Numbers are written in Rust's shortest round-trip notation, so reading a
//! file back yields bit-identical values.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::datasets::{PlanarSample, PlanarTrajectory};
use crate::dmp::{BasisSet, DmpGains, GaDmpModel, ManifoldTrajectory};
use crate::error::{Error, Result};
use crate::manifold::{project, validate, ManifoldDescriptor, ManifoldPoint, VALIDATION_TOL};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Sidecar describing the columns of a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<Vec<TrajectoryMeta>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
}

impl TrajectoryMeta {
    pub fn for_descriptor(d: &ManifoldDescriptor) -> Self {
        let mut meta = Self::shape(d);
        meta.columns = d.column_names();
        meta
    }

    fn shape(d: &ManifoldDescriptor) -> Self {
        TrajectoryMeta {
            kind: d.kind_name().to_string(),
            m: d.size_param(),
            parts: match d {
                ManifoldDescriptor::Product(parts) => Some(parts.iter().map(Self::shape).collect()),
                _ => None,
            },
            columns: Vec::new(),
        }
    }

    pub fn descriptor(&self) -> Result<ManifoldDescriptor> {
        if self.kind == "product" {
            let parts = self
                .parts
                .as_ref()
                .ok_or_else(|| Error::Format("product metadata without parts".into()))?;
            return ManifoldDescriptor::product(parts.iter().map(|p| p.descriptor()).collect::<Result<_>>()?);
        }
        let spec = match (self.kind.as_str(), self.m) {
            ("quat", _) => "quat".to_string(),
            (kind, Some(m)) => format!("{kind}:{m}"),
            (kind, None) => return Err(Error::Format(format!("metadata kind '{kind}' needs m"))),
        };
        spec.parse()
    }
}

/// `<dir>/<stem>.meta.json` for `<dir>/<stem>.csv`.
pub fn meta_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv.with_file_name(format!("{stem}.meta.json"))
}

fn read_text(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile(path.display().to_string()));
    }
    Ok(text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_f64(field: &str, row: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("row {row}: '{field}' is not a number")))
}

/// A parsed numeric table: header and rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_table(reader: impl std::io::Read) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header == [""] {
        return Err(Error::Format("missing header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != header.len() {
            return Err(Error::DimensionMismatch { expected: header.len(), found: rec.len() });
        }
        rows.push(rec.iter().map(|f| parse_f64(f, i + 1)).collect::<Result<Vec<_>>>()?);
    }
    Ok(Table { header, rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    parse_table(read_text(path)?.as_bytes())
}

pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &format_table(header, rows)?)
}

pub fn format_table(header: &[String], rows: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Format(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|x| format!("{x}"))).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Fixture format: `t,x,y` with optional `vx,vy` and `ax,ay` columns.
pub fn parse_planar_csv(reader: impl std::io::Read) -> Result<PlanarTrajectory> {
    let table = parse_table(reader)?;
    let col = |name: &str| table.header.iter().position(|h| h == name);
    let (t, x, y) = match (col("t"), col("x"), col("y")) {
        (Some(t), Some(x), Some(y)) => (t, x, y),
        _ => return Err(Error::Format("planar CSV needs t, x and y columns".into())),
    };
    let pair = |a: &str, b: &str| col(a).zip(col(b));
    let (v, a) = (pair("vx", "vy"), pair("ax", "ay"));
    if table.rows.is_empty() {
        return Err(Error::TooShort { len: 0, min: 1 });
    }
    PlanarTrajectory::new(
        table
            .rows
            .iter()
            .map(|r| PlanarSample {
                t: r[t],
                p: [r[x], r[y]],
                v: v.map(|(i, j)| [r[i], r[j]]),
                a: a.map(|(i, j)| [r[i], r[j]]),
            })
            .collect(),
    )
}

pub fn read_planar_csv(path: &Path) -> Result<PlanarTrajectory> {
    parse_planar_csv(read_text(path)?.as_bytes())
}

/// Writes `t,<columns>` plus the metadata sidecar. Refuses invalid points.
pub fn write_trajectory(path: &Path, traj: &ManifoldTrajectory) -> Result<()> {
    let d = traj.descriptor();
    for (i, p) in traj.points().iter().enumerate() {
        let report = validate(d, p.data(), VALIDATION_TOL);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidPoint {
                invariant: format!("{} at sample {i}", v.invariant),
                residual: v.residual,
            });
        }
    }
    let meta = TrajectoryMeta::for_descriptor(d);
    let mut header = vec!["t".to_string()];
    header.extend(meta.columns.iter().cloned());
    let rows: Vec<Vec<f64>> = traj
        .times()
        .iter()
        .zip(traj.points())
        .map(|(t, p)| std::iter::once(*t).chain(p.data().iter().copied()).collect())
        .collect();
    write_table(path, &header, &rows)?;
    write_meta(&meta_path(path), &meta)
}

pub fn write_meta(path: &Path, meta: &TrajectoryMeta) -> Result<()> {
    let json = serde_json::to_string_pretty(meta).map_err(|e| Error::Format(e.to_string()))?;
    write_text(path, &(json + "\n"))
}

pub fn read_meta(path: &Path) -> Result<TrajectoryMeta> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Reads a trajectory CSV. The descriptor comes from `descriptor` when given,
/// otherwise from the sidecar; when both exist they must agree.
pub fn read_trajectory(path: &Path, descriptor: Option<&ManifoldDescriptor>) -> Result<ManifoldTrajectory> {
    let table = read_table(path)?;
    let sidecar = meta_path(path);
    let from_meta = if sidecar.exists() { Some(read_meta(&sidecar)?.descriptor()?) } else { None };
    let d = match (descriptor, from_meta) {
        (Some(d), Some(m)) if *d != m => {
            return Err(Error::DescriptorMismatch { expected: d.to_string(), found: m.to_string() })
        }
        (Some(d), _) => d.clone(),
        (None, Some(m)) => m,
        (None, None) => {
            return Err(Error::InvalidArgument(format!(
                "{} has no metadata sidecar; pass the manifold explicitly",
                path.display()
            )))
        }
    };
    trajectory_from_table(&table, &d)
}

pub fn trajectory_from_table(table: &Table, d: &ManifoldDescriptor) -> Result<ManifoldTrajectory> {
    if table.header.first().map(String::as_str) != Some("t") {
        return Err(Error::Format("first column must be t".into()));
    }
    let width = d.ambient_dim() + 1;
    if table.header.len() != width {
        return Err(Error::DimensionMismatch { expected: width, found: table.header.len() });
    }
    if table.rows.is_empty() {
        return Err(Error::TooShort { len: 0, min: 1 });
    }
    let times = table.rows.iter().map(|r| r[0]).collect();
    let rows = table.rows.iter().map(|r| r[1..].to_vec()).collect();
    ManifoldTrajectory::from_raw(d.clone(), times, rows)
}

/// Reads a single point from a CSV file: either a bare row of values or a
/// trajectory file, whose last sample is taken.
pub fn read_point(path: &Path, d: &ManifoldDescriptor) -> Result<ManifoldPoint> {
    read_point_near(path, d, VALIDATION_TOL)
}

/// Like [`read_point`], but a bare row that misses the manifold by at most
/// `tol` is projected onto it instead of rejected. Useful for points typed
/// with a few decimals, such as a unit quaternion rounded to 4 places.
pub fn read_point_near(path: &Path, d: &ManifoldDescriptor, tol: f64) -> Result<ManifoldPoint> {
    let text = read_text(path)?;
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.len() == 1 {
        let values = lines[0].split(',').map(|f| parse_f64(f, 1)).collect::<Result<Vec<_>>>()?;
        if values.len() != d.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: d.ambient_dim(), found: values.len() });
        }
        if tol > VALIDATION_TOL && validate(d, &values, tol).is_valid() {
            return project(&values, d);
        }
        return ManifoldPoint::new(d.clone(), values);
    }
    let traj = trajectory_from_table(&parse_table(text.as_bytes())?, d)?;
    Ok(traj.last().expect("non-empty").clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BasisDoc {
    #[serde(rename = "N")]
    n: usize,
    centers: Vec<f64>,
    widths: Vec<f64>,
}

/// On-disk form of a [`GaDmpModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelDoc {
    format_version: u32,
    descriptor: ManifoldDescriptor,
    gains: DmpGains,
    basis: BasisDoc,
    /// Row-major, `tangent_dim` rows of `N`.
    weights: Vec<f64>,
    start: Vec<f64>,
    goal: Vec<f64>,
    scaling: Vec<f64>,
    scaling_mask: Vec<bool>,
}

pub fn model_to_json(model: &GaDmpModel) -> Result<String> {
    let (k, n) = model.weights.shape();
    let doc = ModelDoc {
        format_version: MODEL_FORMAT_VERSION,
        descriptor: model.descriptor.clone(),
        gains: model.gains,
        basis: BasisDoc { n, centers: model.basis.centers.clone(), widths: model.basis.widths.clone() },
        weights: (0..k).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| model.weights[(r, c)]).collect(),
        start: model.start.data().to_vec(),
        goal: model.goal.data().to_vec(),
        scaling: model.scaling.clone(),
        scaling_mask: model.scaling_mask.clone(),
    };
    serde_json::to_string_pretty(&doc)
        .map(|s| s + "\n")
        .map_err(|e| Error::Format(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<GaDmpModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Format(format!("model document: {e}")))?;
    if doc.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported model format_version {}", doc.format_version)));
    }
    let k = doc.descriptor.tangent_dim();
    let n = doc.basis.n;
    if doc.basis.centers.len() != n || doc.weights.len() != k * n {
        return Err(Error::Format("basis or weight sizes disagree with N and the descriptor".into()));
    }
    let model = GaDmpModel {
        start: ManifoldPoint::new(doc.descriptor.clone(), doc.start)?,
        goal: ManifoldPoint::new(doc.descriptor.clone(), doc.goal)?,
        descriptor: doc.descriptor,
        gains: doc.gains,
        basis: BasisSet { centers: doc.basis.centers, widths: doc.basis.widths },
        weights: DMatrix::from_row_slice(k, n, &doc.weights),
        scaling: doc.scaling,
        scaling_mask: doc.scaling_mask,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(path: &Path, model: &GaDmpModel) -> Result<()> {
    write_text(path, &model_to_json(model)?)
}

pub fn load_model(path: &Path) -> Result<GaDmpModel> {
    model_from_json(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_round_trip() {
        for spec in ["euclidean:2", "quat", "so:3", "spd:2", "sphere:3", "product(euclidean:3,quat,spd:3)"] {
            let d: ManifoldDescriptor = spec.parse().unwrap();
            let meta = TrajectoryMeta::for_descriptor(&d);
            assert_eq!(meta.columns.len(), d.ambient_dim());
            let json = serde_json::to_string(&meta).unwrap();
            let back: TrajectoryMeta = serde_json::from_str(&json).unwrap();
            assert_eq!(back.descriptor().unwrap(), d);
        }
    }

    #[test]
    fn table_shortest_round_trip() {
        let rows = vec![vec![0.1, 1.0 / 3.0, -2.5e-17], vec![1e300, f64::MIN_POSITIVE, 7.0]];
        let text = format_table(&["a".into(), "b".into(), "c".into()], &rows).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(parse_table(text.as_bytes()).unwrap().rows, rows);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse_table("t,x\n0,1\n1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }) || matches!(err, Error::Format(_)));
        assert!(parse_table("t,x\n0,abc\n".as_bytes()).is_err());
    }

    #[test]
    fn planar_parse() {
        let p = parse_planar_csv("t,x,y\n0,1,2\n0.5,3,4\n".as_bytes()).unwrap();
        assert_eq!(p.positions(), vec![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(p.samples()[0].v, None);
        assert!(parse_planar_csv("t,a,b\n0,1,2\n".as_bytes()).is_err());
    }
}
