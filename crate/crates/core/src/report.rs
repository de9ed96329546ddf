//! Serializable result documents and CSV grid output.
//!
//! Floating-point values are rounded to 12 significant digits before they
//! are written, so reruns produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::chain::{betti_numbers, ChainComplexRep};
use crate::graph::H1Rank;
use crate::persistence::FeatureGrid;
use crate::spectral::{Feature, FeatureSet, Spectrum};

pub const SCHEMA_VERSION: &str = "1";

/// Rounds to 12 significant digits; `-0.0` becomes `0.0`.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexSummary {
    pub kind: String,
    pub top_degree: usize,
    pub omega_dims: Vec<usize>,
    pub boundary_ranks: Vec<usize>,
    pub betti: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1_formula: Option<H1Rank>,
}

impl ComplexSummary {
    pub fn new(kind: &str, c: &ChainComplexRep) -> Self {
        ComplexSummary {
            kind: kind.to_string(),
            top_degree: c.top_degree(),
            omega_dims: c.dims(),
            boundary_ranks: c.degrees().iter().map(|d| d.boundary_rank()).collect(),
            betti: betti_numbers(c).0,
            h1_formula: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundedFeatures {
    pub nullity: usize,
    pub mean_pos: f64,
    pub gen_mean: f64,
    pub min_pos: f64,
    pub max: f64,
    pub sum_pos: f64,
    pub std_pos: f64,
}

impl From<&FeatureSet> for RoundedFeatures {
    fn from(f: &FeatureSet) -> Self {
        RoundedFeatures {
            nullity: f.nullity,
            mean_pos: round_sig(f.mean_pos),
            gen_mean: round_sig(f.gen_mean),
            min_pos: round_sig(f.min_pos),
            max: round_sig(f.max),
            sum_pos: round_sig(f.sum_pos),
            std_pos: round_sig(f.std_pos),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorRecord {
    pub name: String,
    pub kind: &'static str,
    pub degree: usize,
    pub size: usize,
    pub exact_nullity: usize,
    pub zero_tolerance: f64,
    pub spectrum: Vec<f64>,
    pub features: RoundedFeatures,
}

impl OperatorRecord {
    pub fn new(kind: &'static str, degree: usize, s: &Spectrum, f: &FeatureSet) -> Self {
        let prefix = if kind == "dirac" { "D" } else { "L" };
        OperatorRecord {
            name: format!("{prefix}{degree}"),
            kind,
            degree,
            size: s.eigenvalues.len(),
            exact_nullity: s.exact_nullity,
            zero_tolerance: s.zero_tolerance,
            spectrum: s.eigenvalues.iter().copied().map(round_sig).collect(),
            features: f.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridCellRecord {
    pub n: usize,
    pub m: usize,
    pub features: BTreeMap<&'static str, serde_json::Value>,
    pub spectrum: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRecord {
    pub p: usize,
    pub stages: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    pub features: Vec<&'static str>,
    pub cells: Vec<GridCellRecord>,
}

impl GridRecord {
    pub fn new(grid: &FeatureGrid, features: &[Feature]) -> Self {
        GridRecord {
            p: grid.p,
            stages: grid.stages,
            thresholds: grid.thresholds.clone(),
            features: features.iter().map(|f| f.name()).collect(),
            cells: grid
                .cells
                .values()
                .map(|c| GridCellRecord {
                    n: c.n,
                    m: c.m,
                    features: features
                        .iter()
                        .map(|&f| (f.name(), feature_value(&c.features, f)))
                        .collect(),
                    spectrum: c.spectrum.iter().copied().map(round_sig).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub schema_version: &'static str,
    pub command: String,
    pub input_digest: String,
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex: Option<ComplexSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub operators: Vec<OperatorRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grids: Vec<GridRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl ResultDocument {
    pub fn new(command: &str, input_digest: String, config: serde_json::Value) -> Self {
        ResultDocument {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            input_digest,
            config,
            complex: None,
            operators: Vec::new(),
            grids: Vec::new(),
            checks: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

fn feature_value(fs: &FeatureSet, f: Feature) -> serde_json::Value {
    match f {
        Feature::Nullity => fs.nullity.into(),
        _ => round_sig(fs.get(f)).into(),
    }
}

/// Grid as CSV: header `n,m,<feature>…`, one row per cell in `(n, m)` order.
pub fn grid_csv(grid: &FeatureGrid, features: &[Feature]) -> String {
    let mut out = String::from("n,m");
    for f in features {
        out.push(',');
        out.push_str(f.name());
    }
    out.push('\n');
    for c in grid.cells.values() {
        let _ = write!(out, "{},{}", c.n, c.m);
        for &f in features {
            match f {
                Feature::Nullity => {
                    let _ = write!(out, ",{}", c.features.nullity);
                }
                _ => {
                    let _ = write!(out, ",{}", round_sig(c.features.get(f)));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Dense matrix as CSV rows of rounded values.
pub fn matrix_csv(m: &nalgebra::DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&x| round_sig(x).to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
