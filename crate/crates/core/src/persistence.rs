//! Filtrations, auxiliary complexes and persistent Laplacian/Dirac operators.
//!
//! For stages `a ≤ b` with complexes `A = Ω(G^a)` and `B = Ω(G^b)`, the
//! auxiliary complex is `C_k = {x ∈ B_k : ∂x ∈ A_{k-1}}` (with `C_0 = B_0`).
//! The persistent Laplacian lives on `A_n`; the persistent Dirac operator is
//! the Dirac operator of `C_•`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{
    orthonormalize, preimage_coords, span_contains, ChainComplexRep, PathBasis, Subspace,
};
use crate::error::{Error, Result};
use crate::graph::{AnchorPaths, Digraph, Hypergraph, VertexId};
use crate::rational::RationalMatrix;
use crate::spectral::{
    dirac_from_blocks, dirac_spectrum, features, laplacian_from_blocks, DiracMatrix, FeatureSet,
    LaplacianMatrix, DEFAULT_MATRIX_CAP, DEFAULT_ZERO_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Digraph,
    Hypergraph,
}

/// Nested sequence of graphs, stages indexed from 1.
///
/// Hypergraph stages are stored as the digraphs with the same anchor
/// sequences, so nesting is checked on those.
#[derive(Debug, Clone)]
pub struct Filtration {
    stages: Vec<Digraph>,
    thresholds: Option<Vec<f64>>,
    kind: StageKind,
}

impl Filtration {
    pub fn new(stages: Vec<Digraph>, thresholds: Option<Vec<f64>>) -> Result<Self> {
        Self::with_kind(stages, thresholds, StageKind::Digraph)
    }

    pub fn from_hypergraphs(stages: &[Hypergraph], thresholds: Option<Vec<f64>>) -> Result<Self> {
        let digraphs = stages.iter().map(AnchorPaths::as_digraph).collect();
        Self::with_kind(digraphs, thresholds, StageKind::Hypergraph)
    }

    fn with_kind(
        stages: Vec<Digraph>,
        thresholds: Option<Vec<f64>>,
        kind: StageKind,
    ) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidInput(
                "a filtration needs at least one stage".into(),
            ));
        }
        for (i, pair) in stages.windows(2).enumerate() {
            if !pair[0].is_subgraph_of(&pair[1]) {
                return Err(Error::Structural(format!(
                    "stage {} is not contained in stage {}",
                    i + 1,
                    i + 2
                )));
            }
        }
        if let Some(t) = &thresholds {
            check_thresholds(t)?;
            if t.len() != stages.len() {
                return Err(Error::InvalidInput(format!(
                    "{} thresholds for {} stages",
                    t.len(),
                    stages.len()
                )));
            }
        }
        Ok(Filtration {
            stages,
            thresholds,
            kind,
        })
    }

    /// Stage `i` keeps the edges of weight `≤ thresholds[i]`; every stage has
    /// all of `vertices`.
    pub fn from_weighted_edges(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: &[(VertexId, VertexId, f64)],
        thresholds: &[f64],
    ) -> Result<Self> {
        Self::from_weighted_edges_with_slack(vertices, edges, thresholds, 0.0)
    }

    /// As [`Filtration::from_weighted_edges`], keeping edges of weight `≤ t + slack`.
    pub fn from_weighted_edges_with_slack(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: &[(VertexId, VertexId, f64)],
        thresholds: &[f64],
        slack: f64,
    ) -> Result<Self> {
        check_thresholds(thresholds)?;
        if let Some(&(u, v, w)) = edges.iter().find(|e| !e.2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "edge {u} -> {v} has weight {w}"
            )));
        }
        let vertices: Vec<VertexId> = vertices.into_iter().collect();
        let stages = thresholds
            .iter()
            .map(|&t| {
                Digraph::new(
                    vertices.iter().copied(),
                    edges
                        .iter()
                        .filter(|e| e.2 <= t + slack)
                        .map(|e| (e.0, e.1)),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(stages, Some(thresholds.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Stage `i`, 1-based.
    pub fn stage(&self, i: usize) -> Result<&Digraph> {
        i.checked_sub(1)
            .and_then(|j| self.stages.get(j))
            .ok_or_else(|| Error::InvalidInput(format!("no stage {i}")))
    }

    pub fn stages(&self) -> &[Digraph] {
        &self.stages
    }

    pub fn thresholds(&self) -> Option<&[f64]> {
        self.thresholds.as_deref()
    }

    pub fn kind(&self) -> StageKind {
        self.kind
    }

    /// Chain complexes of every stage up to degree `top`.
    pub fn build_complexes(&self, top: usize, cap: usize) -> Result<Vec<ChainComplexRep>> {
        self.stages
            .iter()
            .map(|g| ChainComplexRep::from_source(g, top, cap))
            .collect()
    }
}

pub fn check_thresholds(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::InvalidInput("no thresholds given".into()));
    }
    if let Some(x) = t.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("threshold {x} is not finite")));
    }
    if let Some(w) = t.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!(
            "thresholds must increase strictly ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// One degree of the auxiliary complex.
#[derive(Debug, Clone)]
pub struct AuxDegree {
    /// `C_k` in the allowed-path coordinates of stage `b`.
    pub space: Subspace,
    /// `d^C_k: C_k -> C_{k-1}` in the exact bases.
    pub dc_exact: RationalMatrix,
    /// `d^{B,A}_k: C_k -> Ω_{k-1}(G^a)` in the exact bases.
    pub dba_exact: RationalMatrix,
    /// Common rank of `d^C_k` and `d^{B,A}_k`.
    pub rank: usize,
    pub ortho: DMatrix<f64>,
    pub dc_real: DMatrix<f64>,
    pub dba_real: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct AuxComplex {
    pub a: usize,
    pub b: usize,
    degrees: Vec<AuxDegree>,
    a_dims: Vec<usize>,
    a_ranks: Vec<usize>,
    a_boundaries: Vec<DMatrix<f64>>,
}

/// Builds `C_•` for stages `a ≤ b` (1-based labels, used for reporting only).
pub fn auxiliary_complex(
    stage_a: &ChainComplexRep,
    stage_b: &ChainComplexRep,
    a: usize,
    b: usize,
) -> Result<AuxComplex> {
    if a > b {
        return Err(Error::InvalidInput(format!(
            "stage pair ({a},{b}) is not ordered"
        )));
    }
    if stage_a.top_degree() != stage_b.top_degree() {
        return Err(Error::Structural(
            "stages built to different degrees".into(),
        ));
    }
    let top = stage_b.top_degree();
    // Ω_k(G^a) and its orthonormal basis, re-expressed over the paths of G^b.
    let mut a_in_b: Vec<(RationalMatrix, DMatrix<f64>)> = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let (da, db) = (stage_a.degree(k)?, stage_b.degree(k)?);
        let emb = da.paths().embedding_into(db.paths()).map_err(|_| {
            Error::Structural(format!(
                "stage {a} is not contained in stage {b} (degree {k})"
            ))
        })?;
        let coords = emb.mul(da.omega().coords());
        let ortho = emb.to_f64() * da.ortho();
        a_in_b.push((coords, ortho));
    }

    let mut degrees: Vec<AuxDegree> = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let db = stage_b.degree(k)?;
        let omega_b = db.omega().coords();
        let ambient: Arc<PathBasis> = db.paths().clone();
        if k == 0 {
            let dim = db.dim();
            degrees.push(AuxDegree {
                space: db.omega().clone(),
                dc_exact: RationalMatrix::zeros(0, dim),
                dba_exact: RationalMatrix::zeros(0, dim),
                rank: 0,
                ortho: db.ortho().clone(),
                dc_real: DMatrix::zeros(0, dim),
                dba_real: DMatrix::zeros(0, dim),
            });
            continue;
        }
        let boundary = db.boundary_allowed();
        let (a_lower, a_lower_ortho) = &a_in_b[k - 1];
        let image_of_omega = boundary.mul(omega_b);
        let y = preimage_coords(&image_of_omega, a_lower);
        let (space, ortho) = if y.ncols() == db.dim() {
            (db.omega().clone(), db.ortho().clone())
        } else {
            let coords = omega_b.mul(&y);
            let ortho = orthonormalize(&coords)?;
            (Subspace::new(ambient, coords)?, ortho)
        };
        if !span_contains(space.coords(), &a_in_b[k].0) {
            return Err(Error::Structural(format!(
                "Ω_{k} of stage {a} is not inside C_{k} for the pair ({a},{b})"
            )));
        }
        let image = boundary.mul(space.coords());
        let lower = &degrees[k - 1];
        let dc_exact = lower.space.coords().solve(&image)?;
        let dba_exact = a_lower.solve(&image)?;
        let rank = dba_exact.rank();
        let b_real = boundary.to_f64();
        let dc_real = lower.ortho.transpose() * &b_real * &ortho;
        let dba_real = a_lower_ortho.transpose() * &b_real * &ortho;
        degrees.push(AuxDegree {
            space,
            dc_exact,
            dba_exact,
            rank,
            ortho,
            dc_real,
            dba_real,
        });
    }
    Ok(AuxComplex {
        a,
        b,
        degrees,
        a_dims: stage_a.dims(),
        a_ranks: stage_a
            .degrees()
            .iter()
            .map(|d| d.boundary_rank())
            .collect(),
        a_boundaries: stage_a
            .degrees()
            .iter()
            .map(|d| d.boundary_real().clone())
            .collect(),
    })
}

impl AuxComplex {
    pub fn top_degree(&self) -> usize {
        self.degrees.len().saturating_sub(1)
    }

    pub fn degree(&self, k: usize) -> Result<&AuxDegree> {
        self.degrees.get(k).ok_or(Error::DegreeOutOfRange {
            requested: k,
            available: self.top_degree(),
        })
    }

    pub fn dims(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.space.dim()).collect()
    }

    /// Betti numbers of `C_•` itself, degrees `0..top`.
    pub fn betti(&self) -> Vec<usize> {
        let d = &self.degrees;
        (0..d.len().saturating_sub(1))
            .map(|k| d[k].space.dim() - d[k].rank - d[k + 1].rank)
            .collect()
    }

    /// Checks `d^C ∘ d^C = 0` exactly.
    pub fn verify_chain_condition(&self) -> Result<()> {
        for k in 2..self.degrees.len() {
            if !self.degrees[k - 1]
                .dc_exact
                .mul(&self.degrees[k].dc_exact)
                .is_zero()
            {
                return Err(Error::Identity(format!(
                    "d^C_{} d^C_{k} is nonzero for the pair ({},{})",
                    k - 1,
                    self.a,
                    self.b
                )));
            }
        }
        Ok(())
    }
}

/// `Δ^{B,A}_n = (d^A_n)ᵀ d^A_n + d^{B,A}_{n+1} (d^{B,A}_{n+1})ᵀ` on `Ω_n(G^a)`.
pub fn persistent_laplacian(aux: &AuxComplex, n: usize) -> Result<LaplacianMatrix> {
    if n + 1 > aux.top_degree() {
        return Err(Error::DegreeOutOfRange {
            requested: n,
            available: aux.top_degree().saturating_sub(1),
        });
    }
    let up = &aux.degrees[n + 1];
    let down = (n > 0).then(|| &aux.a_boundaries[n]);
    let nullity = aux.a_dims[n] - aux.a_ranks[n] - up.rank;
    Ok(laplacian_from_blocks(
        n,
        down,
        Some(&up.dba_real),
        aux.a_dims[n],
        nullity,
    ))
}

/// Dirac operator of `C_0 ← C_1 ← … ← C_{p+1}`.
pub fn persistent_dirac(aux: &AuxComplex, p: usize, cap: usize) -> Result<DiracMatrix> {
    if p + 1 > aux.top_degree() {
        return Err(Error::DegreeOutOfRange {
            requested: p,
            available: aux.top_degree().saturating_sub(1),
        });
    }
    let degs = &aux.degrees[..=p + 1];
    let dims: Vec<usize> = degs.iter().map(|d| d.space.dim()).collect();
    let blocks: Vec<&DMatrix<f64>> = degs[1..].iter().map(|d| &d.dc_real).collect();
    let ranks: Vec<usize> = degs[1..].iter().map(|d| d.rank).collect();
    dirac_from_blocks(p, &dims, &blocks, &ranks, cap)
}

#[derive(Debug, Clone, Serialize)]
pub struct NullityReport {
    pub pair: (usize, usize),
    pub degree: usize,
    /// Zero eigenvalues of the persistent Dirac matrix at the default threshold.
    pub numeric_nullity: usize,
    pub aux_betti: Vec<usize>,
    /// `dim C_{p+1} − rank d^C_{p+1}`.
    pub top_kernel: usize,
}

/// `η(D_p^{(a,b)}) = Σ_{i≤p} β_i(C) + η(d^C_{p+1})`, the left side counted from
/// the spectrum and the right side from exact ranks.
pub fn persistent_nullity_identity(aux: &AuxComplex, p: usize) -> Result<NullityReport> {
    let d = persistent_dirac(aux, p, usize::MAX)?;
    let numeric_nullity = if d.size() == 0 {
        0
    } else {
        let values = nalgebra::SymmetricEigen::new(d.matrix.clone()).eigenvalues;
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        values
            .iter()
            .filter(|v| v.abs() <= DEFAULT_ZERO_TOL * scale)
            .count()
    };
    let betti = aux.betti();
    let top = &aux.degrees[p + 1];
    let report = NullityReport {
        pair: (aux.a, aux.b),
        degree: p,
        numeric_nullity,
        aux_betti: betti[..=p].to_vec(),
        top_kernel: top.space.dim() - top.rank,
    };
    let rhs = report.aux_betti.iter().sum::<usize>() + report.top_kernel;
    if rhs != numeric_nullity {
        return Err(Error::Identity(format!(
            "persistent Dirac nullity {numeric_nullity} differs from {rhs}: {report:?}\n{:?}",
            d.matrix
        )));
    }
    Ok(report)
}

/// `dim Im(H_n(G^a) -> H_n(G^b)) = rank [Z_a | B_b] − rank B_b`.
pub fn persistent_betti(
    stage_a: &ChainComplexRep,
    stage_b: &ChainComplexRep,
    n: usize,
) -> Result<usize> {
    let emb = stage_a
        .degree(n)?
        .paths()
        .embedding_into(stage_b.degree(n)?.paths())?;
    let cycles = emb.mul(&stage_a.cycles(n)?);
    let boundaries = stage_b.boundaries(n)?;
    Ok(cycles.hstack(&boundaries).rank() - boundaries.rank())
}

#[derive(Debug, Clone, Copy)]
pub struct GridOptions {
    pub p: usize,
    pub tol: f64,
    pub jobs: usize,
    pub path_cap: usize,
    pub matrix_cap: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            p: 1,
            tol: DEFAULT_ZERO_TOL,
            jobs: 1,
            path_cap: crate::graph::DEFAULT_PATH_CAP,
            matrix_cap: DEFAULT_MATRIX_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridCell {
    pub n: usize,
    pub m: usize,
    pub features: FeatureSet,
    pub spectrum: Vec<f64>,
}

/// Persistent Dirac features for every stage pair `n ≤ m` (1-based).
#[derive(Debug, Clone, Serialize)]
pub struct FeatureGrid {
    pub p: usize,
    pub stages: usize,
    pub thresholds: Option<Vec<f64>>,
    #[serde(serialize_with = "cells_as_list")]
    pub cells: BTreeMap<(usize, usize), GridCell>,
}

fn cells_as_list<S: serde::Serializer>(
    cells: &BTreeMap<(usize, usize), GridCell>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(cells.values())
}

impl FeatureGrid {
    pub fn cell(&self, n: usize, m: usize) -> Option<&GridCell> {
        self.cells.get(&(n, m))
    }
}

pub fn feature_grid(f: &Filtration, opts: &GridOptions) -> Result<FeatureGrid> {
    let complexes = f.build_complexes(opts.p + 1, opts.path_cap)?;
    let pairs: Vec<(usize, usize)> = (1..=f.len())
        .flat_map(|n| (n..=f.len()).map(move |m| (n, m)))
        .collect();
    let cell = |&(n, m): &(usize, usize)| -> Result<GridCell> {
        let aux = auxiliary_complex(&complexes[n - 1], &complexes[m - 1], n, m)?;
        let d = persistent_dirac(&aux, opts.p, opts.matrix_cap)?;
        let s = dirac_spectrum(&d, opts.tol)?;
        Ok(GridCell {
            n,
            m,
            features: features(&s),
            spectrum: s.eigenvalues,
        })
    };
    let results: Vec<Result<GridCell>> = if opts.jobs <= 1 {
        pairs.iter().map(cell).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
        pool.install(|| pairs.par_iter().map(cell).collect())
    };
    let cells = results
        .into_iter()
        .map(|r| r.map(|c| ((c.n, c.m), c)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(FeatureGrid {
        p: opts.p,
        stages: f.len(),
        thresholds: f.thresholds().map(<[f64]>::to_vec),
        cells,
    })
}
