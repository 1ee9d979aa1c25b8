//! Report records and their CSV/JSON writers. Column order is the field
//! order of each record and is part of the stable output contract.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Format;

/// A report row type with a fixed header.
pub trait Record: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

macro_rules! record {
    ($(#[$m:meta])* $name:ident { $($field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct $name { $(pub $field: $ty),* }
        impl Record for $name {
            const HEADER: &'static [&'static str] = &[$(stringify!($field)),*];
        }
    };
}

record!(
    /// One region of one `(θ, n)`.
    RegionRow {
        scenario: String,
        theta: f64,
        n: f64,
        region_id: String,
        integral: f64,
        sqrt_integral: f64,
        target: Option<f64>,
        ratio: Option<f64>,
    }
);

record!(
    /// A scaling fit; `theta_or_n` is the parameter held fixed and `points`
    /// lists `x:y` pairs in the fitted log coordinates, `;`-separated.
    FitRow {
        scenario: String,
        theta_or_n: f64,
        exponent: f64,
        stderr: f64,
        points: String,
    }
);

record!(
    /// A sum-space decomposition with its certificate bounds.
    SolverRow {
        scenario: String,
        theta: f64,
        n: f64,
        objective: f64,
        lower_bound: f64,
        upper_bound: f64,
        iterations: usize,
        converged: bool,
    }
);

record!(
    /// The total min-integral, with an optional oracle estimate and its
    /// interval `[oracle_lo, oracle_hi]`.
    IntegrateRow {
        scenario: String,
        theta: f64,
        n: f64,
        integral: f64,
        sqrt_integral: f64,
        oracle: String,
        oracle_value: Option<f64>,
        oracle_lo: Option<f64>,
        oracle_hi: Option<f64>,
    }
);

record!(
    /// One cylindrical cell of a region; `bounds` are `;`-separated.
    RegionBoundsRow {
        scenario: String,
        theta: f64,
        n: f64,
        region_id: String,
        active_term: usize,
        cell: usize,
        bounds: String,
    }
);

record!(
    /// A Ψ sample and the convex minorant at the same abscissa.
    PsiRow {
        theta: f64,
        x: f64,
        psi: f64,
        psi_tilde: f64,
    }
);

record!(
    /// Norms of one matrix tuple at one `p`.
    MatnormRow {
        instance: usize,
        m: usize,
        k: usize,
        p: f64,
        oh_norm: f64,
        cp_norm: f64,
        cp_converged: bool,
    }
);

record!(
    /// One machine-checkable criterion of a verification suite.
    CheckRow {
        suite: String,
        check: String,
        measured: f64,
        target: f64,
        tolerance: f64,
        passed: bool,
    }
);

record!(
    /// A Maurey-ratio sample.
    RatioRow {
        theta: f64,
        kind: String,
        n: usize,
        instance: usize,
        ratio: f64,
    }
);

/// `x:y;x:y;…` with round-trip float formatting.
pub fn format_points(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{x:?}:{y:?}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV text of `rows`, header first (header only when `rows` is empty).
pub fn to_csv<T: Record>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn from_csv<T: Record>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|x| x.map_err(Into::into)).collect()
}

pub fn to_json<T: Record>(rows: &[T]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)? + "\n")
}

pub fn from_json<T: Record>(text: &str) -> Result<Vec<T>> {
    Ok(serde_json::from_str(text)?)
}

/// A named report ready to be written; `stem` becomes the file name.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub stem: String,
    pub csv: String,
    pub json: String,
}

impl Report {
    pub fn new<T: Record>(stem: impl Into<String>, rows: &[T]) -> Result<Self> {
        Ok(Self {
            stem: stem.into(),
            csv: to_csv(rows)?,
            json: to_json(rows)?,
        })
    }
}

/// Writes every report into `dir`; returns the paths written.
pub fn emit(dir: &Path, reports: &[Report], format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut paths = Vec::new();
    for r in reports {
        let mut put = |ext: &str, text: &str| -> Result<()> {
            let p = dir.join(format!("{}.{ext}", r.stem));
            fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            paths.push(p);
            Ok(())
        };
        if matches!(format, Format::Csv | Format::Both) {
            put("csv", &r.csv)?;
        }
        if matches!(format, Format::Json | Format::Both) {
            put("json", &r.json)?;
        }
    }
    Ok(paths)
}
