//! Brute-force path homology used as a test oracle.
//!
//! Nothing here touches the library's linear algebra: paths are enumerated as
//! all vertex sequences filtered by the step relation, chains are sparse maps,
//! and ranks come from a plain Gaussian elimination over `BigRational`.
//!
//! With `F_k` the full boundary on allowed `k`-paths, `Z_k = ker F_k` sits
//! inside `Ω_k` automatically, so Betti numbers reduce to kernels and ranks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;
pub type Seq = Vec<u32>;
pub type Chain = BTreeMap<Seq, Q>;

/// Which vertex may follow which in an anchor sequence.
#[derive(Clone, Debug)]
pub struct Steps {
    pub vertices: Vec<u32>,
    pub next: BTreeSet<(u32, u32)>,
}

impl Steps {
    pub fn digraph(n: u32, edges: &[(u32, u32)]) -> Self {
        Steps {
            vertices: (0..n).collect(),
            next: edges.iter().copied().filter(|(u, v)| u != v).collect(),
        }
    }

    /// Consecutive vertices must be distinct and share a hyperedge.
    pub fn hypergraph(n: u32, hyperedges: &[Vec<u32>]) -> Self {
        let mut next = BTreeSet::new();
        for e in hyperedges {
            for &u in e {
                for &v in e {
                    if u != v {
                        next.insert((u, v));
                    }
                }
            }
        }
        let mut vertices: BTreeSet<u32> = (0..n).collect();
        vertices.extend(hyperedges.iter().flatten().copied());
        Steps {
            vertices: vertices.into_iter().collect(),
            next,
        }
    }

    /// Every sequence of `k + 1` vertices whose steps are allowed.
    pub fn allowed(&self, k: usize) -> Vec<Seq> {
        let mut seqs: Vec<Seq> = self.vertices.iter().map(|&v| vec![v]).collect();
        for _ in 0..k {
            let mut longer = Vec::new();
            for s in &seqs {
                for &v in &self.vertices {
                    let mut t = s.clone();
                    t.push(v);
                    longer.push(t);
                }
            }
            seqs = longer;
        }
        seqs.retain(|s| s.windows(2).all(|w| self.next.contains(&(w[0], w[1]))));
        seqs
    }
}

fn q(i: i64) -> Q {
    BigRational::from_integer(BigInt::from(i))
}

pub fn boundary(s: &[u32]) -> Chain {
    let mut out = Chain::new();
    if s.len() <= 1 {
        return out;
    }
    for i in 0..s.len() {
        let mut face = s.to_vec();
        face.remove(i);
        let sign = if i % 2 == 0 { q(1) } else { q(-1) };
        *out.entry(face).or_insert_with(Q::zero) += sign;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn boundary_of(c: &Chain) -> Chain {
    let mut out = Chain::new();
    for (s, coef) in c {
        for (f, v) in boundary(s) {
            *out.entry(f).or_insert_with(Q::zero) += v * coef;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Rank of a family of sparse vectors.
pub fn rank_of(vectors: &[Chain]) -> usize {
    let keys: BTreeSet<&Seq> = vectors.iter().flat_map(|v| v.keys()).collect();
    let index: BTreeMap<&Seq, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    let rows: Vec<Vec<Q>> = vectors
        .iter()
        .map(|v| {
            let mut row = vec![Q::zero(); index.len()];
            for (k, c) in v {
                row[index[k]] = c.clone();
            }
            row
        })
        .collect();
    echelon(rows).len()
}

/// Nonzero rows after forward elimination.
fn echelon(mut rows: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let width = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            if rows[i][col].is_zero() {
                continue;
            }
            let f = &rows[i][col] / &rows[r][col];
            for j in col..width {
                let d = &f * &rows[r][j];
                rows[i][j] -= d;
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

/// Coefficient vectors `c` with `Σ c_j cols_j = 0`, as chains over `paths`.
pub fn kernel_chains(paths: &[Seq], cols: &[Chain]) -> Vec<Chain> {
    let n = paths.len();
    let keys: BTreeSet<&Seq> = cols.iter().flat_map(|v| v.keys()).collect();
    let index: BTreeMap<&Seq, usize> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
    // reduced row echelon form of the matrix whose columns are `cols`
    let mut m = vec![vec![Q::zero(); n]; index.len()];
    for (j, c) in cols.iter().enumerate() {
        for (k, v) in c {
            m[index[k]][j] = v.clone();
        }
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][col];
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in 0..n {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut chain = Chain::new();
            chain.insert(paths[f].clone(), Q::one());
            for (row, &pc) in pivots.iter().enumerate() {
                let v = -m[row][f].clone();
                if !v.is_zero() {
                    chain.insert(paths[pc].clone(), v);
                }
            }
            chain
        })
        .collect()
}

/// Exact invariants of the path complex up to degree `top`.
#[derive(Clone, Debug)]
pub struct OracleComplex {
    pub allowed: Vec<Vec<Seq>>,
    pub omega: Vec<Vec<Chain>>,
    pub cycles: Vec<Vec<Chain>>,
    /// `rank ∂_k` on `Ω_k`.
    pub ranks: Vec<usize>,
}

impl OracleComplex {
    pub fn new(steps: &Steps, top: usize) -> Self {
        let mut allowed: Vec<Vec<Seq>> = Vec::new();
        let mut omega = Vec::new();
        let mut cycles = Vec::new();
        let mut ranks = Vec::new();
        for k in 0..=top {
            let a = steps.allowed(k);
            let lower: BTreeSet<Seq> = if k == 0 {
                BTreeSet::new()
            } else {
                allowed[k - 1].iter().cloned().collect::<BTreeSet<Seq>>()
            };
            let full: Vec<Chain> = a.iter().map(|s| boundary(s)).collect();
            let outside: Vec<Chain> = full
                .iter()
                .map(|c| {
                    c.iter()
                        .filter(|(f, _)| !lower.contains(*f))
                        .map(|(f, v)| (f.clone(), v.clone()))
                        .collect()
                })
                .collect();
            let om = kernel_chains(&a, &outside);
            let z = kernel_chains(&a, &full);
            ranks.push(om.len() - z.len());
            allowed.push(a);
            omega.push(om);
            cycles.push(z);
        }
        OracleComplex {
            allowed,
            omega,
            cycles,
            ranks,
        }
    }

    pub fn top(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn dims(&self) -> Vec<usize> {
        self.omega.iter().map(Vec::len).collect()
    }

    /// `β_k` for `k < top`.
    pub fn betti(&self) -> Vec<usize> {
        (0..self.top())
            .map(|k| self.cycles[k].len() - self.ranks[k + 1])
            .collect()
    }

    pub fn boundaries(&self, k: usize) -> Vec<Chain> {
        self.omega[k + 1].iter().map(boundary_of).collect()
    }

    /// `η(D_p) = Σ_{i≤p} β_i + dim Z_{p+1}`.
    pub fn dirac_nullity(&self, p: usize) -> usize {
        self.betti()[..=p].iter().sum::<usize>() + self.cycles[p + 1].len()
    }
}

/// `dim Im(H_n(a) → H_n(b))`.
pub fn persistent_betti(a: &OracleComplex, b: &OracleComplex, n: usize) -> usize {
    let bb = b.boundaries(n);
    let mut joined = a.cycles[n].clone();
    joined.extend(bb.iter().cloned());
    rank_of(&joined) - rank_of(&bb)
}

/// Betti numbers of the auxiliary complex between `a ⊆ b`, degrees `0..top`.
pub fn aux_betti(a: &OracleComplex, b: &OracleComplex) -> Vec<usize> {
    (0..a.top())
        .map(|i| persistent_betti(a, b, i) + b.cycles[i].len() - a.cycles[i].len())
        .collect()
}

/// Exact nullity of the persistent Dirac operator of degree `p`.
pub fn persistent_dirac_nullity(a: &OracleComplex, b: &OracleComplex, p: usize) -> usize {
    aux_betti(a, b)[..=p].iter().sum::<usize>() + b.cycles[p + 1].len()
}

/// Eigenvalues within `tol · max(1, max |λ|)` of zero.
pub fn count_zero(values: &[f64], tol: f64) -> usize {
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    values.iter().filter(|v| v.abs() <= tol * scale).count()
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra of different sizes");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `dim C_k` for `k ≤ top`, with `C_k = {x ∈ Ω_k(b) : ∂x ∈ Ω_{k-1}(a)}`.
pub fn aux_dims(a: &OracleComplex, b: &OracleComplex) -> Vec<usize> {
    (0..=a.top())
        .map(|k| {
            if k == 0 {
                return b.omega[0].len();
            }
            let image: Vec<Chain> = b.omega[k].iter().map(boundary_of).collect();
            let mut joined = image.clone();
            joined.extend(a.omega[k - 1].iter().cloned());
            let meet = rank_of(&image) + a.omega[k - 1].len() - rank_of(&joined);
            b.cycles[k].len() + meet
        })
        .collect()
}

pub mod instances;
