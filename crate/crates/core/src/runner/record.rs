//! Result records and their JSON and CSV forms.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{exponent_fit, Curve};

pub const TOOL: &str = "dehnlab";

/// Version string baked in at build time, `git describe` when available.
pub fn version() -> &'static str {
    option_env!("DEHNLAB_GIT_DESCRIBE")
        .filter(|v| !v.is_empty())
        .unwrap_or(env!("CARGO_PKG_VERSION"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub scale: u64,
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub used: Vec<u64>,
    pub dropped: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
    /// Log-log exponent fit; absent when the series is too short or has
    /// zero values.
    pub fit: Option<Fit>,
}

impl Series {
    /// Converts a curve and fits it when possible.
    pub fn from_curve(name: impl Into<String>, curve: &Curve) -> Self {
        let points = curve
            .points
            .iter()
            .map(|p| Point { scale: p.scale, value: p.value, stderr: p.stderr, samples: p.samples })
            .collect();
        let fit = exponent_fit(curve).ok().map(|f| Fit {
            slope: f.slope,
            intercept: f.intercept,
            slope_stderr: f.slope_stderr,
            used: f.used,
            dropped: f.dropped,
        });
        Series { name: name.into(), points, fit }
    }

    /// A series without a fit.
    pub fn plain(name: impl Into<String>, points: Vec<Point>) -> Self {
        Series { name: name.into(), points, fit: None }
    }
}

/// Lower and upper proxy for the averaged Dehn function at one length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub scale: u64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub group: String,
    pub kind: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub series: Vec<Series>,
    pub brackets: Vec<Bracket>,
    /// Kind-specific results.
    pub extra: serde_json::Value,
    pub lost_mass: f64,
    pub warnings: Vec<String>,
    pub partial: bool,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    config_hash: &'a str,
    seed: u64,
    group: &'a str,
    kind: &'a str,
    series: &'a str,
    scale: u64,
    value: f64,
    stderr: f64,
    samples: u64,
}

impl ResultRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    /// One row per series point.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.series {
            for p in &s.points {
                w.serialize(CsvRow {
                    config_hash: &self.config_hash,
                    seed: self.seed,
                    group: &self.group,
                    kind: &self.kind,
                    series: &s.name,
                    scale: p.scale,
                    value: p.value,
                    stderr: p.stderr,
                    samples: p.samples,
                })
                .map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        if self.series.iter().all(|s| s.points.is_empty()) {
            w.write_record(CSV_COLUMNS).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

pub const CSV_COLUMNS: [&str; 9] =
    ["config_hash", "seed", "group", "kind", "series", "scale", "value", "stderr", "samples"];

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::CurvePoint;

    fn record() -> ResultRecord {
        let curve = Curve::new(
            [8u64, 16, 32, 64]
                .iter()
                .map(|&n| CurvePoint { scale: n, value: n as f64, stderr: 0.1, samples: 10 })
                .collect(),
        )
        .unwrap();
        ResultRecord {
            tool: TOOL.into(),
            version: version().into(),
            config_hash: "ab".into(),
            seed: 7,
            group: "z2".into(),
            kind: "avg-area".into(),
            started_unix: 1,
            finished_unix: 2,
            series: vec![Series::from_curve("winding", &curve)],
            brackets: vec![],
            extra: serde_json::Value::Null,
            lost_mass: 0.0,
            warnings: vec![],
            partial: false,
        }
    }

    #[test]
    fn series_fit_and_csv_columns() {
        let r = record();
        let fit = r.series[0].fit.as_ref().unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);
        let csv = r.to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.next().unwrap(), "ab,7,z2,avg-area,winding,8,8.0,0.1,10");
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn json_round_trip_and_atomic_write() {
        let r = record();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.json");
        write_atomic(&path, &r.to_json()).unwrap();
        let back: ResultRecord =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn empty_csv_still_has_header() {
        let mut r = record();
        r.series.clear();
        assert_eq!(r.to_csv().unwrap().trim_end(), CSV_COLUMNS.join(","));
    }
}
