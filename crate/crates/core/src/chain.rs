//! Exact chain-complex machinery for path complexes.
//!
//! The elementary `p`-paths span the ambient space `C_p`; a path complex
//! picks the allowed paths `P_p` spanning `Λ_p ⊆ C_p`, and the ∂-invariant
//! subspace `Ω_p = {v ∈ Λ_p : ∂v ∈ Λ_{p-1}}` is the degree-`p` part of the
//! chain complex whose Laplacians and Dirac operators we study.
//!
//! All subspaces are carried as exact rational coordinate matrices over the
//! elementary-path basis. An orthonormal real basis is derived once per
//! degree for the spectral side.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{AnchorPaths, Digraph, ElementaryPath};
use crate::rational::{int, RationalMatrix};

/// Ordered list of elementary paths with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathBasis {
    paths: Vec<ElementaryPath>,
    index: HashMap<ElementaryPath, usize>,
}

impl PathBasis {
    /// Sorts and deduplicates `paths`.
    pub fn new(paths: impl IntoIterator<Item = ElementaryPath>) -> Self {
        let paths: Vec<_> = paths
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = paths
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        PathBasis { paths, index }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[ElementaryPath] {
        &self.paths
    }

    pub fn index_of(&self, p: &ElementaryPath) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Coordinate embedding of `self` into `larger` (|larger| x |self| 0/1 matrix).
    pub fn embedding_into(&self, larger: &PathBasis) -> Result<RationalMatrix> {
        let mut m = RationalMatrix::zeros(larger.len(), self.len());
        for (j, p) in self.paths.iter().enumerate() {
            let i = larger.index_of(p).ok_or_else(|| {
                Error::Structural(format!("path {p} missing from the larger basis"))
            })?;
            m.set(i, j, int(1));
        }
        Ok(m)
    }
}

/// A subspace of the span of `ambient`, given by independent coordinate columns.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: Arc<PathBasis>,
    coords: RationalMatrix,
}

impl Subspace {
    pub fn new(ambient: Arc<PathBasis>, coords: RationalMatrix) -> Result<Self> {
        if coords.nrows() != ambient.len() {
            return Err(Error::Structural(format!(
                "coordinate matrix has {} rows for an ambient of dimension {}",
                coords.nrows(),
                ambient.len()
            )));
        }
        if coords.rank() != coords.ncols() {
            return Err(Error::Structural(
                "subspace columns are linearly dependent".into(),
            ));
        }
        Ok(Subspace { ambient, coords })
    }

    /// Spanned by the given columns, which may be dependent; reduced to a basis.
    pub fn spanned_by(ambient: Arc<PathBasis>, columns: &RationalMatrix) -> Self {
        Subspace {
            ambient,
            coords: canonical_basis(columns),
        }
    }

    pub fn full(ambient: Arc<PathBasis>) -> Self {
        let n = ambient.len();
        Subspace {
            ambient,
            coords: RationalMatrix::identity(n),
        }
    }

    pub fn zero(ambient: Arc<PathBasis>) -> Self {
        let n = ambient.len();
        Subspace {
            ambient,
            coords: RationalMatrix::zeros(n, 0),
        }
    }

    /// Span of the listed elementary paths, all of which must lie in `ambient`.
    pub fn from_paths(ambient: Arc<PathBasis>, paths: &[ElementaryPath]) -> Result<Self> {
        let own = PathBasis::new(paths.iter().cloned());
        let coords = own.embedding_into(&ambient)?;
        Ok(Subspace { ambient, coords })
    }

    pub fn ambient(&self) -> &Arc<PathBasis> {
        &self.ambient
    }

    pub fn coords(&self) -> &RationalMatrix {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    /// Exact span containment `other ⊆ self`.
    pub fn contains(&self, other: &Subspace) -> bool {
        span_contains(&self.coords, &other.coords)
    }

    pub fn same_span(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.contains(other)
    }
}

/// True when every column of `inner` lies in the column span of `outer`.
pub fn span_contains(outer: &RationalMatrix, inner: &RationalMatrix) -> bool {
    if inner.ncols() == 0 {
        return true;
    }
    outer.hstack(inner).rank() == outer.rank()
}

/// Reduced column-echelon basis of the column span: unique for a given span.
pub fn canonical_basis(columns: &RationalMatrix) -> RationalMatrix {
    let r = columns.transpose().rref();
    let rank = r.pivots.len();
    let rows: Vec<usize> = (0..rank).collect();
    r.matrix.select_rows(&rows).transpose()
}

/// Formal boundary `Σ (-1)^i v^(i)` before like terms are combined.
pub fn boundary_of_path(v: &ElementaryPath) -> Vec<(ElementaryPath, i64)> {
    if v.degree() == 0 {
        return Vec::new();
    }
    (0..=v.degree())
        .map(|i| (v.face(i), if i % 2 == 0 { 1 } else { -1 }))
        .collect()
}

/// Boundary of `upper` paths, split into coordinates on the allowed lower paths
/// and on the elementary paths outside `lower`.
#[derive(Debug, Clone)]
pub struct BoundarySplit {
    pub allowed: RationalMatrix,
    pub disallowed: RationalMatrix,
    pub disallowed_paths: Vec<ElementaryPath>,
}

pub fn split_boundary(upper: &PathBasis, lower: &PathBasis) -> BoundarySplit {
    let faces: BTreeSet<ElementaryPath> = upper
        .paths()
        .iter()
        .flat_map(|v| boundary_of_path(v).into_iter().map(|(f, _)| f))
        .filter(|f| lower.index_of(f).is_none())
        .collect();
    let outside = PathBasis::new(faces);
    let mut allowed = RationalMatrix::zeros(lower.len(), upper.len());
    let mut disallowed = RationalMatrix::zeros(outside.len(), upper.len());
    for (j, v) in upper.paths().iter().enumerate() {
        for (face, sign) in boundary_of_path(v) {
            let (target, i) = match lower.index_of(&face) {
                Some(i) => (&mut allowed, i),
                None => (
                    &mut disallowed,
                    outside.index_of(&face).expect("collected above"),
                ),
            };
            let value = target.get(i, j) + int(sign);
            target.set(i, j, value);
        }
    }
    BoundarySplit {
        allowed,
        disallowed,
        disallowed_paths: outside.paths().to_vec(),
    }
}

/// Solutions `x` of `m x ∈ span(target)`, as independent columns.
pub fn preimage_coords(m: &RationalMatrix, target: &RationalMatrix) -> RationalMatrix {
    assert_eq!(m.nrows(), target.nrows(), "codomain mismatch in preimage");
    let annihilator = target.transpose().kernel_basis().transpose();
    annihilator.mul(m).kernel_basis()
}

/// `{x ∈ span(domain) : m x ∈ target}` where `m` maps `domain` coordinates into
/// `target`'s ambient coordinates.
pub fn preimage_subspace(
    m: &RationalMatrix,
    domain: Arc<PathBasis>,
    target: &Subspace,
) -> Result<Subspace> {
    if m.ncols() != domain.len() {
        return Err(Error::Structural("map domain does not match basis".into()));
    }
    let coords = preimage_coords(m, target.coords());
    Ok(Subspace {
        ambient: domain,
        coords,
    })
}

/// Orthonormal real basis (columns) of the span of an exact subspace.
pub fn orthonormalize(coords: &RationalMatrix) -> Result<DMatrix<f64>> {
    let n = coords.nrows();
    let d = coords.ncols();
    if d == 0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    if d > n {
        return Err(Error::Structural(
            "more basis vectors than ambient dimension".into(),
        ));
    }
    let m = coords.to_f64();
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let qr = m.qr();
    let r = qr.r();
    for i in 0..d {
        if r[(i, i)].abs() <= 1e-10 * scale.max(1.0) {
            return Err(Error::Structural(format!(
                "rank deficiency while orthonormalizing column {i}"
            )));
        }
    }
    // flip columns so R has a positive diagonal, which makes the basis unique
    let mut q = qr.q();
    for i in 0..d {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    Ok(q)
}

/// One degree of an assembled complex.
#[derive(Debug, Clone)]
pub struct DegreeComponent {
    paths: Arc<PathBasis>,
    omega: Subspace,
    boundary_allowed: RationalMatrix,
    boundary_exact: RationalMatrix,
    boundary_rank: usize,
    ortho: DMatrix<f64>,
    boundary_real: DMatrix<f64>,
}

impl DegreeComponent {
    /// Allowed paths `P_k`.
    pub fn paths(&self) -> &Arc<PathBasis> {
        &self.paths
    }

    /// `Ω_k` in `P_k` coordinates.
    pub fn omega(&self) -> &Subspace {
        &self.omega
    }

    /// ∂ restricted to `Λ_k`, in `P_k -> P_{k-1}` coordinates.
    pub fn boundary_allowed(&self) -> &RationalMatrix {
        &self.boundary_allowed
    }

    /// ∂: `Ω_k -> Ω_{k-1}` in the exact bases.
    pub fn boundary_exact(&self) -> &RationalMatrix {
        &self.boundary_exact
    }

    pub fn boundary_rank(&self) -> usize {
        self.boundary_rank
    }

    /// Orthonormal basis of `Ω_k`, columns in `P_k` coordinates.
    pub fn ortho(&self) -> &DMatrix<f64> {
        &self.ortho
    }

    /// ∂: `Ω_k -> Ω_{k-1}` in the orthonormal bases.
    pub fn boundary_real(&self) -> &DMatrix<f64> {
        &self.boundary_real
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }
}

/// The complex `(Ω_•, ∂_•)` for degrees `0..=top`.
#[derive(Debug, Clone)]
pub struct ChainComplexRep {
    degrees: Vec<DegreeComponent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct BettiVector(pub Vec<usize>);

impl ChainComplexRep {
    /// Builds `Ω_•` of a digraph or hypergraph up to degree `top`.
    pub fn from_source<S: AnchorPaths + ?Sized>(src: &S, top: usize, cap: usize) -> Result<Self> {
        compute_omega(&src.allowed_paths(top, cap)?)
    }

    /// Degree ≤ 2 constructor using the triangle and square generators of
    /// `Ω_2` instead of a kernel computation.
    pub fn accelerated(g: &Digraph, top: usize, cap: usize) -> Result<Self> {
        if top > 2 {
            return Err(Error::InvalidInput(
                "accelerated construction covers degrees up to 2".into(),
            ));
        }
        let allowed = g.allowed_paths(top, cap)?;
        let bases: Vec<Arc<PathBasis>> = allowed
            .iter()
            .map(|p| Arc::new(PathBasis::new(p.iter().cloned())))
            .collect();
        let omegas = bases
            .iter()
            .enumerate()
            .map(|(k, b)| {
                if k < 2 {
                    RationalMatrix::identity(b.len())
                } else {
                    canonical_basis(&omega2_generators(g, b))
                }
            })
            .collect();
        Self::assemble(bases, omegas)
    }

    /// Assembles boundaries and orthonormal bases from exact `Ω_k` bases given
    /// in allowed-path coordinates.
    pub fn assemble(bases: Vec<Arc<PathBasis>>, omegas: Vec<RationalMatrix>) -> Result<Self> {
        assert_eq!(bases.len(), omegas.len());
        let mut degrees: Vec<DegreeComponent> = Vec::with_capacity(bases.len());
        for (k, (paths, coords)) in bases.into_iter().zip(omegas).enumerate() {
            let omega = Subspace::new(paths.clone(), coords)?;
            let ortho = orthonormalize(omega.coords())?;
            let (boundary_allowed, boundary_exact, boundary_real) = if k == 0 {
                (
                    RationalMatrix::zeros(0, paths.len()),
                    RationalMatrix::zeros(0, omega.dim()),
                    DMatrix::zeros(0, omega.dim()),
                )
            } else {
                let lower = &degrees[k - 1];
                let allowed = split_boundary(&paths, &lower.paths).allowed;
                let image = allowed.mul(omega.coords());
                let exact = lower.omega.coords().solve(&image).map_err(|_| {
                    Error::Structural(format!("boundary of Ω_{k} leaves Ω_{}", k - 1))
                })?;
                let real = lower.ortho.transpose() * allowed.to_f64() * &ortho;
                (allowed, exact, real)
            };
            let boundary_rank = boundary_exact.rank();
            degrees.push(DegreeComponent {
                paths,
                omega,
                boundary_allowed,
                boundary_exact,
                boundary_rank,
                ortho,
                boundary_real,
            });
        }
        Ok(ChainComplexRep { degrees })
    }

    pub fn top_degree(&self) -> usize {
        self.degrees.len().saturating_sub(1)
    }

    pub fn degree(&self, k: usize) -> Result<&DegreeComponent> {
        self.degrees.get(k).ok_or(Error::DegreeOutOfRange {
            requested: k,
            available: self.top_degree(),
        })
    }

    pub fn degrees(&self) -> &[DegreeComponent] {
        &self.degrees
    }

    /// `dim Ω_k`, zero above the top degree is not assumed: errors instead.
    pub fn dim(&self, k: usize) -> Result<usize> {
        Ok(self.degree(k)?.dim())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.degrees.iter().map(DegreeComponent::dim).collect()
    }

    /// Exact rank of ∂_k (0 for k = 0).
    pub fn boundary_rank(&self, k: usize) -> Result<usize> {
        Ok(self.degree(k)?.boundary_rank)
    }

    /// Cycle space `ker ∂_k`, columns in `P_k` coordinates.
    pub fn cycles(&self, k: usize) -> Result<RationalMatrix> {
        let d = self.degree(k)?;
        Ok(d.omega.coords().mul(&d.boundary_exact.kernel_basis()))
    }

    /// Boundary space `∂_{k+1}(Ω_{k+1})`, columns in `P_k` coordinates.
    pub fn boundaries(&self, k: usize) -> Result<RationalMatrix> {
        let up = self.degree(k + 1)?;
        Ok(up.boundary_allowed.mul(up.omega.coords()))
    }

    /// Replaces each orthonormal basis `Q_k` by `Q_k R_k` for orthogonal `R_k`.
    pub fn rotate_bases(&self, rotations: &[DMatrix<f64>]) -> Result<Self> {
        if rotations.len() != self.degrees.len() {
            return Err(Error::Structural("one rotation per degree required".into()));
        }
        let mut out = self.clone();
        for (k, r) in rotations.iter().enumerate() {
            let dim = out.degrees[k].dim();
            if r.nrows() != dim || r.ncols() != dim {
                return Err(Error::Structural(format!(
                    "rotation {k} has the wrong shape"
                )));
            }
            out.degrees[k].ortho = &out.degrees[k].ortho * r;
        }
        for k in 1..out.degrees.len() {
            let real = out.degrees[k - 1].ortho.transpose()
                * out.degrees[k].boundary_allowed.to_f64()
                * &out.degrees[k].ortho;
            out.degrees[k].boundary_real = real;
        }
        Ok(out)
    }

    /// Checks `∂_{k-1} ∂_k = 0` exactly for every degree.
    pub fn verify_boundary_squares_zero(&self) -> Result<()> {
        for k in 2..self.degrees.len() {
            let prod = self.degrees[k - 1]
                .boundary_exact
                .mul(&self.degrees[k].boundary_exact);
            if !prod.is_zero() {
                return Err(Error::Identity(format!("∂_{} ∂_{k} is nonzero", k - 1)));
            }
        }
        Ok(())
    }

    /// JSON dump of the exact data: paths, `Ω` bases and boundary matrices.
    pub fn debug_dump(&self) -> serde_json::Value {
        let degrees: Vec<_> = self
            .degrees
            .iter()
            .enumerate()
            .map(|(k, d)| {
                json!({
                    "degree": k,
                    "allowed_paths": d.paths.paths().iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "omega_dim": d.dim(),
                    "omega_basis": d.omega.coords().to_string_rows(),
                    "boundary_exact": d.boundary_exact.to_string_rows(),
                    "boundary_rank": d.boundary_rank,
                })
            })
            .collect();
        json!({ "top_degree": self.top_degree(), "degrees": degrees })
    }
}

/// `Ω_p` as the kernel of the disallowed boundary block, for every degree.
pub fn compute_omega(allowed: &[Vec<ElementaryPath>]) -> Result<ChainComplexRep> {
    let mut bases: Vec<Arc<PathBasis>> = Vec::with_capacity(allowed.len());
    for (k, list) in allowed.iter().enumerate() {
        if let Some(p) = list.iter().find(|p| p.degree() != k) {
            return Err(Error::Structural(format!("path {p} listed in degree {k}")));
        }
        let basis = PathBasis::new(list.iter().cloned());
        if basis.len() != list.len() {
            return Err(Error::Structural(format!("duplicate paths in degree {k}")));
        }
        if k > 0 {
            let lower = &bases[k - 1];
            for p in basis.paths() {
                let (first, last) = (p.face(0), p.face(k));
                if lower.index_of(&first).is_none() || lower.index_of(&last).is_none() {
                    return Err(Error::Structural(format!(
                        "path {p} has a truncation outside the allowed paths of degree {}",
                        k - 1
                    )));
                }
            }
        }
        bases.push(Arc::new(basis));
    }
    let omegas = bases
        .iter()
        .enumerate()
        .map(|(k, b)| {
            if k == 0 {
                RationalMatrix::identity(b.len())
            } else {
                split_boundary(b, &bases[k - 1]).disallowed.kernel_basis()
            }
        })
        .collect();
    ChainComplexRep::assemble(bases, omegas)
}

/// Triangles `(v0,v1,v2)` with `v0 -> v2`, and differences
/// `(v0,v1,v2) - (v0,v1',v2)` of paths with common ends otherwise.
/// Columns are in `p2` coordinates; the set is generally dependent.
pub fn omega2_generators(g: &Digraph, p2: &PathBasis) -> RationalMatrix {
    let mut columns: Vec<Vec<(usize, i64)>> = Vec::new();
    let mut by_ends: std::collections::BTreeMap<_, Vec<usize>> = Default::default();
    for (i, p) in p2.paths().iter().enumerate() {
        let v = p.vertices();
        if v[0] != v[2] && g.has_edge(v[0], v[2]) {
            columns.push(vec![(i, 1)]);
        } else {
            by_ends.entry((v[0], v[2])).or_default().push(i);
        }
    }
    for members in by_ends.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                columns.push(vec![(i, 1), (j, -1)]);
            }
        }
    }
    let mut m = RationalMatrix::zeros(p2.len(), columns.len());
    for (c, entries) in columns.iter().enumerate() {
        for &(i, v) in entries {
            m.set(i, c, int(v));
        }
    }
    m
}

/// `β_k = dim Ω_k − rank ∂_k − rank ∂_{k+1}` for `k < top`.
pub fn betti_numbers(c: &ChainComplexRep) -> BettiVector {
    let d = &c.degrees;
    BettiVector(
        (0..d.len().saturating_sub(1))
            .map(|k| d[k].dim() - d[k].boundary_rank - d[k + 1].boundary_rank)
            .collect(),
    )
}

/// A face-closed piece of the elementary-path complex `(C_•, ∂_•)`.
///
/// Degree `k` holds the given paths together with every iterated face of the
/// paths above it, so the boundary never leaves the ambient.
#[derive(Debug, Clone)]
pub struct ElementaryComplex {
    bases: Vec<Arc<PathBasis>>,
    boundaries: Vec<RationalMatrix>,
}

impl ElementaryComplex {
    pub fn face_closure(paths: &[Vec<ElementaryPath>]) -> Self {
        let top = paths.len();
        let mut sets: Vec<BTreeSet<ElementaryPath>> = vec![BTreeSet::new(); top];
        for k in (0..top).rev() {
            let mut set: BTreeSet<ElementaryPath> = paths[k].iter().cloned().collect();
            if k + 1 < top {
                for v in &sets[k + 1] {
                    set.extend(boundary_of_path(v).into_iter().map(|(f, _)| f));
                }
            }
            sets[k] = set;
        }
        let bases: Vec<Arc<PathBasis>> = sets
            .into_iter()
            .map(|s| Arc::new(PathBasis::new(s)))
            .collect();
        let boundaries = (0..bases.len())
            .map(|k| {
                if k == 0 {
                    RationalMatrix::zeros(0, bases[0].len())
                } else {
                    let s = split_boundary(&bases[k], &bases[k - 1]);
                    debug_assert!(s.disallowed_paths.is_empty());
                    s.allowed
                }
            })
            .collect();
        ElementaryComplex { bases, boundaries }
    }

    pub fn top_degree(&self) -> usize {
        self.bases.len().saturating_sub(1)
    }

    pub fn basis(&self, k: usize) -> &Arc<PathBasis> {
        &self.bases[k]
    }

    pub fn boundary(&self, k: usize) -> &RationalMatrix {
        &self.boundaries[k]
    }

    /// `Λ_k` for each degree as subspaces of this ambient.
    pub fn subspaces_from_paths(&self, paths: &[Vec<ElementaryPath>]) -> Result<Vec<Subspace>> {
        paths
            .iter()
            .enumerate()
            .map(|(k, p)| Subspace::from_paths(self.bases[k].clone(), p))
            .collect()
    }
}

fn check_graded(ambient: &ElementaryComplex, subs: &[Subspace]) -> Result<()> {
    if subs.len() != ambient.bases.len() {
        return Err(Error::Structural(
            "one submodule per ambient degree required".into(),
        ));
    }
    for (k, s) in subs.iter().enumerate() {
        if !Arc::ptr_eq(s.ambient(), &ambient.bases[k]) && **s.ambient() != *ambient.bases[k] {
            return Err(Error::Structural(format!(
                "submodule {k} has a foreign ambient"
            )));
        }
    }
    Ok(())
}

/// Largest subcomplex inside the graded family: `A_n ∩ ∂^{-1}(A_{n-1})`.
pub fn infimum_complex(ambient: &ElementaryComplex, subs: &[Subspace]) -> Result<Vec<Subspace>> {
    check_graded(ambient, subs)?;
    let out: Vec<Subspace> = subs
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let coords = if k == 0 {
                a.coords().clone()
            } else {
                let image = ambient.boundaries[k].mul(a.coords());
                a.coords()
                    .mul(&preimage_coords(&image, subs[k - 1].coords()))
            };
            Subspace {
                ambient: ambient.bases[k].clone(),
                coords,
            }
        })
        .collect();
    verify_closed(ambient, &out)?;
    Ok(out)
}

/// Smallest subcomplex containing the graded family: `A_n + ∂(A_{n+1})`.
///
/// The top degree has nothing above it and is returned as `A_top`.
pub fn supremum_complex(ambient: &ElementaryComplex, subs: &[Subspace]) -> Result<Vec<Subspace>> {
    check_graded(ambient, subs)?;
    let out: Vec<Subspace> = subs
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let columns = match subs.get(k + 1) {
                Some(up) => a
                    .coords()
                    .hstack(&ambient.boundaries[k + 1].mul(up.coords())),
                None => a.coords().clone(),
            };
            Subspace::spanned_by(ambient.bases[k].clone(), &columns)
        })
        .collect();
    verify_closed(ambient, &out)?;
    Ok(out)
}

fn verify_closed(ambient: &ElementaryComplex, subs: &[Subspace]) -> Result<()> {
    for k in 1..subs.len() {
        let image = ambient.boundaries[k].mul(subs[k].coords());
        if !span_contains(subs[k - 1].coords(), &image) {
            return Err(Error::Identity(format!(
                "subcomplex is not closed under the boundary at degree {k}"
            )));
        }
    }
    Ok(())
}

/// Betti numbers `0..top` of a boundary-closed graded family of subspaces.
pub fn subcomplex_betti(ambient: &ElementaryComplex, subs: &[Subspace]) -> Result<BettiVector> {
    check_graded(ambient, subs)?;
    verify_closed(ambient, subs)?;
    let ranks: Vec<usize> = subs
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k == 0 {
                0
            } else {
                ambient.boundaries[k].mul(s.coords()).rank()
            }
        })
        .collect();
    Ok(BettiVector(
        (0..subs.len().saturating_sub(1))
            .map(|k| subs[k].dim() - ranks[k] - ranks[k + 1])
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Digraph, DEFAULT_PATH_CAP};

    fn path(ids: &[u32]) -> ElementaryPath {
        ElementaryPath::from_ids(ids)
    }

    fn cyclic() -> Digraph {
        Digraph::on_range(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn transitive() -> Digraph {
        Digraph::on_range(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn square() -> Digraph {
        Digraph::on_range(4, &[(0, 1), (0, 3), (1, 2), (3, 2)]).unwrap()
    }

    #[test]
    fn boundary_formula() {
        assert_eq!(
            boundary_of_path(&path(&[0, 1])),
            vec![(path(&[1]), 1), (path(&[0]), -1)]
        );
        assert_eq!(
            boundary_of_path(&path(&[0, 1, 2])),
            vec![(path(&[1, 2]), 1), (path(&[0, 2]), -1), (path(&[0, 1]), 1)]
        );
        assert!(boundary_of_path(&path(&[3])).is_empty());
    }

    #[test]
    fn boundary_squared_vanishes_formally() {
        let mut total: HashMap<ElementaryPath, i64> = HashMap::new();
        for (face, s) in boundary_of_path(&path(&[0, 1, 2])) {
            for (ff, t) in boundary_of_path(&face) {
                *total.entry(ff).or_default() += s * t;
            }
        }
        assert!(total.values().all(|&c| c == 0));
    }

    #[test]
    fn split_boundary_examples() {
        let g = cyclic();
        let p = g.allowed_paths(2, DEFAULT_PATH_CAP).unwrap();
        let b: Vec<PathBasis> = p
            .iter()
            .map(|l| PathBasis::new(l.iter().cloned()))
            .collect();
        assert_eq!(split_boundary(&b[1], &b[0]).disallowed.nrows(), 0);
        let s = split_boundary(&b[2], &b[1]);
        let j = b[2].index_of(&path(&[0, 1, 2])).unwrap();
        let r = s
            .disallowed_paths
            .iter()
            .position(|f| *f == path(&[0, 2]))
            .unwrap();
        assert_eq!(s.disallowed.get(r, j), &int(-1));

        let t = transitive().allowed_paths(2, DEFAULT_PATH_CAP).unwrap();
        let tb: Vec<PathBasis> = t
            .iter()
            .map(|l| PathBasis::new(l.iter().cloned()))
            .collect();
        let s = split_boundary(&tb[2], &tb[1]);
        assert!(s.disallowed.is_zero());
        assert_eq!(s.allowed.column(0), vec![int(1), int(-1), int(1)]);
    }

    #[test]
    fn omega_of_the_two_triangles() {
        let c = ChainComplexRep::from_source(&cyclic(), 3, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(c.dims(), vec![3, 3, 0, 0]);
        let t = ChainComplexRep::from_source(&transitive(), 3, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(t.dims(), vec![3, 3, 1, 0]);
        let omega2 = t.degree(2).unwrap().omega();
        assert_eq!(omega2.coords(), &RationalMatrix::identity(1));
    }

    #[test]
    fn omega_of_the_square() {
        let c = ChainComplexRep::from_source(&square(), 2, DEFAULT_PATH_CAP).unwrap();
        let d2 = c.degree(2).unwrap();
        assert_eq!(d2.dim(), 1);
        let p012 = d2.paths().index_of(&path(&[0, 1, 2])).unwrap();
        let p032 = d2.paths().index_of(&path(&[0, 3, 2])).unwrap();
        let col = d2.omega().coords().column(0);
        assert_eq!(col[p012], -col[p032].clone());
        let q = d2.ortho();
        assert!((q[(p012, 0)].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((q[(p012, 0)] + q[(p032, 0)]).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_allowed_lists_are_rejected() {
        let bad = vec![vec![path(&[0]), path(&[1])], vec![path(&[0, 2])]];
        assert!(matches!(compute_omega(&bad), Err(Error::Structural(_))));
        let wrong_degree = vec![vec![path(&[0, 1])]];
        assert!(compute_omega(&wrong_degree).is_err());
    }

    #[test]
    fn betti_of_small_cases() {
        let c = ChainComplexRep::from_source(&cyclic(), 2, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(betti_numbers(&c), BettiVector(vec![1, 1]));
        let t = ChainComplexRep::from_source(&transitive(), 2, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(betti_numbers(&t), BettiVector(vec![1, 0]));
        let iso = Digraph::on_range(5, &[]).unwrap();
        let c = ChainComplexRep::from_source(&iso, 2, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(betti_numbers(&c), BettiVector(vec![5, 0]));
        c.verify_boundary_squares_zero().unwrap();
    }

    #[test]
    fn infimum_reproduces_omega() {
        for g in [cyclic(), transitive(), square()] {
            let allowed = g.allowed_paths(3, DEFAULT_PATH_CAP).unwrap();
            let amb = ElementaryComplex::face_closure(&allowed);
            let lambda = amb.subspaces_from_paths(&allowed).unwrap();
            let inf = infimum_complex(&amb, &lambda).unwrap();
            let omega = compute_omega(&allowed).unwrap();
            for k in 0..=3 {
                let emb = omega
                    .degree(k)
                    .unwrap()
                    .paths()
                    .embedding_into(amb.basis(k))
                    .unwrap();
                let as_sub = Subspace::new(
                    amb.basis(k).clone(),
                    emb.mul(omega.degree(k).unwrap().omega().coords()),
                )
                .unwrap();
                assert!(as_sub.same_span(&inf[k]), "degree {k}");
            }
        }
    }

    #[test]
    fn trivial_infimum_and_supremum() {
        let allowed = transitive().allowed_paths(2, DEFAULT_PATH_CAP).unwrap();
        let amb = ElementaryComplex::face_closure(&allowed);
        let full: Vec<Subspace> = (0..=2)
            .map(|k| Subspace::full(amb.basis(k).clone()))
            .collect();
        let zero: Vec<Subspace> = (0..=2)
            .map(|k| Subspace::zero(amb.basis(k).clone()))
            .collect();
        for f in [infimum_complex, supremum_complex] {
            let r = f(&amb, &full).unwrap();
            assert!(r.iter().zip(&full).all(|(a, b)| a.same_span(b)));
            let r = f(&amb, &zero).unwrap();
            assert!(r.iter().all(|s| s.dim() == 0));
        }
    }

    #[test]
    fn embedded_homology_on_transitive_triangle() {
        let allowed = transitive().allowed_paths(3, DEFAULT_PATH_CAP).unwrap();
        let amb = ElementaryComplex::face_closure(&allowed);
        let lambda = amb.subspaces_from_paths(&allowed).unwrap();
        let inf = infimum_complex(&amb, &lambda).unwrap();
        let sup = supremum_complex(&amb, &lambda).unwrap();
        assert!(sup.iter().zip(&lambda).all(|(s, a)| s.contains(a)));
        assert_eq!(
            subcomplex_betti(&amb, &inf).unwrap(),
            subcomplex_betti(&amb, &sup).unwrap()
        );
    }

    #[test]
    fn preimage_examples() {
        let g = Digraph::on_range(3, &[(0, 1), (1, 2)]).unwrap();
        let c = ChainComplexRep::from_source(&g, 1, DEFAULT_PATH_CAP).unwrap();
        let d1 = c.degree(1).unwrap().boundary_allowed().clone();
        let verts = c.degree(0).unwrap().paths().clone();
        let edges = c.degree(1).unwrap().paths().clone();
        let full = Subspace::full(verts.clone());
        assert_eq!(
            preimage_subspace(&d1, edges.clone(), &full).unwrap().dim(),
            2
        );
        let zero_map = RationalMatrix::zeros(3, 2);
        let none = Subspace::zero(verts.clone());
        assert_eq!(
            preimage_subspace(&zero_map, edges.clone(), &none)
                .unwrap()
                .dim(),
            2
        );
        // ∂(0,1) = (1) - (0) lies in span{(0),(1)}; ∂(1,2) does not.
        let two = Subspace::from_paths(verts, &[path(&[0]), path(&[1])]).unwrap();
        let pre = preimage_subspace(&d1, edges, &two).unwrap();
        assert_eq!(pre.dim(), 1);
        assert_eq!(pre.coords().column(0), vec![int(1), int(0)]);
    }

    #[test]
    fn orthonormalize_rejects_dependent_columns() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 2], &[1, 2], &[0, 0]]);
        assert!(orthonormalize(&m).is_err());
        let q = orthonormalize(&RationalMatrix::identity(3)).unwrap();
        assert!((q.transpose() * &q - DMatrix::identity(3, 3)).abs().max() < 1e-12);
    }

    #[test]
    fn accelerated_matches_generic_on_fixed_cases() {
        for g in [cyclic(), transitive(), square()] {
            let fast = ChainComplexRep::accelerated(&g, 2, DEFAULT_PATH_CAP).unwrap();
            let slow = ChainComplexRep::from_source(&g, 2, DEFAULT_PATH_CAP).unwrap();
            assert!(fast
                .degree(2)
                .unwrap()
                .omega()
                .same_span(slow.degree(2).unwrap().omega()));
        }
    }

    #[test]
    fn debug_dump_lists_paths() {
        let c = ChainComplexRep::from_source(&transitive(), 2, DEFAULT_PATH_CAP).unwrap();
        let v = c.debug_dump();
        assert_eq!(v["degrees"][2]["allowed_paths"][0], "(0,1,2)");
        assert_eq!(v["degrees"][1]["boundary_rank"], 2);
    }
}
