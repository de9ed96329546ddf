//! Laplacian and Dirac operators of a chain complex, their spectra and
//! scalar spectral features.
//!
//! Operators are assembled from the real boundary blocks `B_k` of
//! [`ChainComplexRep`]. Each spectrum carries the exact nullity obtained
//! from rational ranks, and the numerical zero threshold is reconciled
//! against it rather than trusted on its own.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::chain::ChainComplexRep;
use crate::error::{Error, Result};

/// Default relative threshold below which an eigenvalue counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
/// Range the zero threshold may be moved within to match the exact nullity.
pub const ZERO_TOL_RANGE: (f64, f64) = (1e-12, 1e-6);
/// Largest operator dimension assembled densely.
pub const DEFAULT_MATRIX_CAP: usize = 4000;

#[derive(Debug, Clone)]
pub struct LaplacianMatrix {
    pub degree: usize,
    pub up: DMatrix<f64>,
    pub down: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
    pub exact_nullity: usize,
}

#[derive(Debug, Clone)]
pub struct DiracMatrix {
    pub degree: usize,
    pub matrix: DMatrix<f64>,
    /// Start of each degree block `0..=p+1`, followed by the total size.
    pub block_offsets: Vec<usize>,
    pub exact_nullity: usize,
}

impl DiracMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// The `(i, j)` degree block.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        let o = &self.block_offsets;
        self.matrix
            .view((o[i], o[j]), (o[i + 1] - o[i], o[j + 1] - o[j]))
            .into_owned()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub zero_tolerance: f64,
    pub exact_nullity: usize,
}

impl Spectrum {
    pub fn positive(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues.iter().copied().filter(|&x| x > 0.0)
    }

    pub fn numeric_nullity(&self) -> usize {
        self.eigenvalues.iter().filter(|&&x| x == 0.0).count()
    }
}

/// Scalar summaries of the strictly positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureSet {
    pub nullity: usize,
    pub mean_pos: f64,
    pub gen_mean: f64,
    pub min_pos: f64,
    pub max: f64,
    pub sum_pos: f64,
    pub std_pos: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Nullity,
    MeanPos,
    GenMean,
    MinPos,
    Max,
    SumPos,
    StdPos,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::Nullity,
        Feature::MeanPos,
        Feature::GenMean,
        Feature::MinPos,
        Feature::Max,
        Feature::SumPos,
        Feature::StdPos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Nullity => "nullity",
            Feature::MeanPos => "mean_pos",
            Feature::GenMean => "gen_mean",
            Feature::MinPos => "min_pos",
            Feature::Max => "max",
            Feature::SumPos => "sum_pos",
            Feature::StdPos => "std_pos",
        }
    }

    pub fn parse(name: &str) -> Result<Feature> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown feature '{name}'")))
    }

    /// Comma-separated list such as `nullity,mean_pos`.
    pub fn parse_list(list: &str) -> Result<Vec<Feature>> {
        let out: Vec<Feature> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Feature::parse)
            .collect::<Result<_>>()?;
        if out.is_empty() {
            return Err(Error::InvalidInput("empty feature list".into()));
        }
        Ok(out)
    }
}

impl FeatureSet {
    pub fn get(&self, f: Feature) -> f64 {
        match f {
            Feature::Nullity => self.nullity as f64,
            Feature::MeanPos => self.mean_pos,
            Feature::GenMean => self.gen_mean,
            Feature::MinPos => self.min_pos,
            Feature::Max => self.max,
            Feature::SumPos => self.sum_pos,
            Feature::StdPos => self.std_pos,
        }
    }
}

/// `Δ_n = B_{n+1} B_{n+1}ᵀ + B_nᵀ B_n` from the two adjacent blocks.
///
/// `down` is `B_n` (absent for `n = 0`), `up` is `B_{n+1}`.
pub fn laplacian_from_blocks(
    degree: usize,
    down: Option<&DMatrix<f64>>,
    up: Option<&DMatrix<f64>>,
    dim: usize,
    exact_nullity: usize,
) -> LaplacianMatrix {
    let down = down.map_or_else(|| DMatrix::zeros(dim, dim), |b| b.transpose() * b);
    let up = up.map_or_else(|| DMatrix::zeros(dim, dim), |b| b * b.transpose());
    let matrix = &up + &down;
    LaplacianMatrix {
        degree,
        up,
        down,
        matrix,
        exact_nullity,
    }
}

/// The `n`-th Laplacian; needs the complex built to degree `n + 1`.
pub fn laplacian(c: &ChainComplexRep, n: usize) -> Result<LaplacianMatrix> {
    if n + 1 > c.top_degree() {
        return Err(Error::DegreeOutOfRange {
            requested: n,
            available: c.top_degree().saturating_sub(1),
        });
    }
    let here = c.degree(n)?;
    let above = c.degree(n + 1)?;
    let down = (n > 0).then(|| here.boundary_real());
    let nullity = here.dim() - here.boundary_rank() - above.boundary_rank();
    Ok(laplacian_from_blocks(
        n,
        down,
        Some(above.boundary_real()),
        here.dim(),
        nullity,
    ))
}

/// `Δ_n^Down = B_nᵀ B_n` alone; defined up to the top degree.
pub fn laplacian_down(c: &ChainComplexRep, n: usize) -> Result<LaplacianMatrix> {
    let here = c.degree(n)?;
    let down = (n > 0).then(|| here.boundary_real());
    Ok(laplacian_from_blocks(
        n,
        down,
        None,
        here.dim(),
        here.dim() - here.boundary_rank(),
    ))
}

/// Block-tridiagonal Dirac operator with `blocks[k-1] = B_k` in position
/// `(k-1, k)` and its transpose in `(k, k-1)`.
///
/// `dims` lists `dim_0..=dim_{p+1}`, `ranks` the exact ranks of `B_1..=B_{p+1}`.
pub fn dirac_from_blocks(
    degree: usize,
    dims: &[usize],
    blocks: &[&DMatrix<f64>],
    ranks: &[usize],
    cap: usize,
) -> Result<DiracMatrix> {
    assert_eq!(dims.len(), degree + 2);
    assert_eq!(blocks.len(), degree + 1);
    assert_eq!(ranks.len(), degree + 1);
    let mut block_offsets = Vec::with_capacity(dims.len() + 1);
    let mut total = 0;
    for &d in dims {
        block_offsets.push(total);
        total += d;
    }
    block_offsets.push(total);
    if total > cap {
        return Err(Error::Resource(format!(
            "Dirac operator of size {total} exceeds the matrix cap {cap}"
        )));
    }
    let mut matrix = DMatrix::zeros(total, total);
    for (i, b) in blocks.iter().enumerate() {
        let (r, c) = (block_offsets[i], block_offsets[i + 1]);
        if b.nrows() != dims[i] || b.ncols() != dims[i + 1] {
            return Err(Error::Structural(format!(
                "block B_{} has shape {}x{}, expected {}x{}",
                i + 1,
                b.nrows(),
                b.ncols(),
                dims[i],
                dims[i + 1]
            )));
        }
        matrix.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        matrix
            .view_mut((c, r), (b.ncols(), b.nrows()))
            .copy_from(&b.transpose());
    }
    let exact_nullity = total - 2 * ranks.iter().sum::<usize>();
    Ok(DiracMatrix {
        degree,
        matrix,
        block_offsets,
        exact_nullity,
    })
}

/// The `p`-th Dirac operator; needs the complex built to degree `p + 1`.
pub fn dirac(c: &ChainComplexRep, p: usize) -> Result<DiracMatrix> {
    dirac_with_cap(c, p, DEFAULT_MATRIX_CAP)
}

pub fn dirac_with_cap(c: &ChainComplexRep, p: usize, cap: usize) -> Result<DiracMatrix> {
    if p + 1 > c.top_degree() {
        return Err(Error::DegreeOutOfRange {
            requested: p,
            available: c.top_degree().saturating_sub(1),
        });
    }
    let degs = &c.degrees()[..=p + 1];
    let dims: Vec<usize> = degs.iter().map(|d| d.dim()).collect();
    let blocks: Vec<&DMatrix<f64>> = degs[1..].iter().map(|d| d.boundary_real()).collect();
    let ranks: Vec<usize> = degs[1..].iter().map(|d| d.boundary_rank()).collect();
    dirac_from_blocks(p, &dims, &blocks, &ranks, cap)
}

/// Sorted eigenvalues with zeros classified against `exact_nullity`.
pub fn eigen_spectrum(m: &DMatrix<f64>, exact_nullity: usize) -> Result<Spectrum> {
    eigen_spectrum_with_tol(m, exact_nullity, DEFAULT_ZERO_TOL)
}

/// As [`eigen_spectrum`] with a caller-chosen starting threshold.
///
/// The threshold is relative to `max(1, max |λ|)`. If the number of
/// eigenvalues under it disagrees with the exact nullity, the threshold is
/// moved (staying inside [`ZERO_TOL_RANGE`]) to the value closest to the
/// requested one that separates exactly `exact_nullity` eigenvalues.
/// Zero-classified eigenvalues are reported as exactly `0.0`.
pub fn eigen_spectrum_with_tol(
    m: &DMatrix<f64>,
    exact_nullity: usize,
    tol: f64,
) -> Result<Spectrum> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Structural(
            "eigenvalues of a non-square matrix".into(),
        ));
    }
    if exact_nullity > n {
        return Err(Error::Structural(format!(
            "exact nullity {exact_nullity} exceeds the matrix size {n}"
        )));
    }
    let asym = (m - m.transpose()).abs().max();
    let size = m.abs().max().max(1.0);
    if asym > 1e-10 * size {
        return Err(Error::Numerical(format!(
            "matrix is not symmetric (deviation {asym:e})"
        )));
    }
    let mut values: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    };
    values.sort_by(f64::total_cmp);
    let scale = values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));

    let mut rel: Vec<f64> = values.iter().map(|v| v.abs() / scale).collect();
    rel.sort_by(f64::total_cmp);
    // A threshold t yields exactly k zeros iff rel[k-1] <= t < rel[k].
    let k = exact_nullity;
    let lo = if k == 0 { 0.0 } else { rel[k - 1] };
    let hi = rel.get(k).copied().unwrap_or(f64::INFINITY);
    let (min_tol, max_tol) = ZERO_TOL_RANGE;
    let lo = lo.max(min_tol);
    let hi_incl = hi.min(max_tol * (1.0 + f64::EPSILON));
    let chosen = if lo <= tol && tol < hi {
        tol
    } else if lo < hi && lo <= max_tol {
        if tol < lo {
            lo
        } else {
            // Requested threshold swallows a nonzero eigenvalue: go just below it.
            let candidate = (lo * hi_incl.min(hi)).sqrt();
            if candidate >= lo && candidate < hi {
                candidate
            } else {
                lo
            }
        }
    } else {
        return Err(Error::Numerical(format!(
            "no zero threshold in [{min_tol:e}, {max_tol:e}] matches the exact nullity {k} \
             (relative magnitudes around the cut: {:e}, {:e})",
            if k == 0 { 0.0 } else { rel[k - 1] },
            hi
        )));
    };
    let cutoff = chosen * scale;
    for v in &mut values {
        if v.abs() <= cutoff {
            *v = 0.0;
        }
    }
    Ok(Spectrum {
        eigenvalues: values,
        zero_tolerance: chosen,
        exact_nullity,
    })
}

pub fn laplacian_spectrum(l: &LaplacianMatrix, tol: f64) -> Result<Spectrum> {
    eigen_spectrum_with_tol(&l.matrix, l.exact_nullity, tol)
}

pub fn dirac_spectrum(d: &DiracMatrix, tol: f64) -> Result<Spectrum> {
    eigen_spectrum_with_tol(&d.matrix, d.exact_nullity, tol)
}

pub fn features(s: &Spectrum) -> FeatureSet {
    let pos: Vec<f64> = s.positive().collect();
    let nullity = s.exact_nullity;
    if pos.is_empty() {
        return FeatureSet {
            nullity,
            mean_pos: 0.0,
            gen_mean: 0.0,
            min_pos: 0.0,
            max: 0.0,
            sum_pos: 0.0,
            std_pos: 0.0,
        };
    }
    let count = pos.len() as f64;
    let sum_pos: f64 = pos.iter().sum();
    let mean = sum_pos / count;
    let gen_mean = pos.iter().map(|x| (x - mean).abs()).sum::<f64>() / count;
    let var = pos.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count;
    FeatureSet {
        nullity,
        mean_pos: mean,
        gen_mean,
        min_pos: pos.iter().copied().fold(f64::INFINITY, f64::min),
        max: pos.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        sum_pos,
        std_pos: var.sqrt(),
    }
}

/// Evidence from [`verify_dirac_square`].
#[derive(Debug, Clone, Serialize)]
pub struct DiracSquareReport {
    pub degree: usize,
    /// Largest entry of `|D_p² − blockdiag(L_0, …, L_p, L_{p+1}^Down)|`.
    pub max_abs_diff: f64,
    pub dirac_nullity: usize,
    pub numeric_dirac_nullity: usize,
    pub laplacian_nullities: Vec<usize>,
    pub down_nullity: usize,
}

/// Checks `D_p² = blockdiag(L_0, …, L_p, L_{p+1}^Down)` entrywise and
/// `η(D_p) = Σ_{i≤p} η(L_i) + η(L_{p+1}^Down)`.
pub fn verify_dirac_square(c: &ChainComplexRep, p: usize) -> Result<DiracSquareReport> {
    verify_dirac_square_of(c, &dirac(c, p)?)
}

/// As [`verify_dirac_square`] for a given, possibly tampered, Dirac matrix.
pub fn verify_dirac_square_of(c: &ChainComplexRep, d: &DiracMatrix) -> Result<DiracSquareReport> {
    let p = d.degree;
    let mut expected = DMatrix::zeros(d.size(), d.size());
    let mut laplacian_nullities = Vec::with_capacity(p + 1);
    for i in 0..=p {
        let l = laplacian(c, i)?;
        let o = d.block_offsets[i];
        expected
            .view_mut((o, o), (l.matrix.nrows(), l.matrix.ncols()))
            .copy_from(&l.matrix);
        laplacian_nullities.push(l.exact_nullity);
    }
    let down = laplacian_down(c, p + 1)?;
    let o = d.block_offsets[p + 1];
    expected
        .view_mut((o, o), (down.matrix.nrows(), down.matrix.ncols()))
        .copy_from(&down.matrix);

    let diff = &d.matrix * &d.matrix - &expected;
    let max_abs_diff = if diff.is_empty() {
        0.0
    } else {
        diff.abs().max()
    };
    let spectrum = eigen_spectrum_with_tol(&d.matrix, d.exact_nullity, DEFAULT_ZERO_TOL);
    let numeric_dirac_nullity = spectrum
        .as_ref()
        .map_or(usize::MAX, |s| s.numeric_nullity());
    let report = DiracSquareReport {
        degree: p,
        max_abs_diff,
        dirac_nullity: d.exact_nullity,
        numeric_dirac_nullity,
        laplacian_nullities,
        down_nullity: down.exact_nullity,
    };
    if max_abs_diff > 1e-10 {
        return Err(Error::Identity(format!(
            "D_{p}² differs from the Laplacian block diagonal by {max_abs_diff:e}: {report:?}"
        )));
    }
    let rhs: usize = report.laplacian_nullities.iter().sum::<usize>() + report.down_nullity;
    if report.dirac_nullity != rhs || spectrum.is_err() {
        return Err(Error::Identity(format!(
            "η(D_{p}) = {} but the Laplacian nullities sum to {rhs}: {report:?}",
            report.dirac_nullity
        )));
    }
    Ok(report)
}
