//! The invariant suite run by the `check` command.
//!
//! Every identity is evaluated independently and reported as pass/fail with
//! its evidence; a failing identity never stops the others from running.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{
    betti_numbers, infimum_complex, span_contains, subcomplex_betti, supremum_complex,
    ChainComplexRep, ElementaryComplex,
};
use crate::error::Result;
use crate::graph::{h1_rank_digraph, h1_rank_hypergraph, AnchorPaths, Digraph, Hypergraph};
use crate::persistence::{
    auxiliary_complex, persistent_betti, persistent_dirac, persistent_laplacian,
    persistent_nullity_identity, Filtration,
};
use crate::report::CheckRecord;
use crate::spectral::{
    dirac, eigen_spectrum_with_tol, laplacian, laplacian_down, verify_dirac_square_of, DiracMatrix,
    DEFAULT_MATRIX_CAP, DEFAULT_ZERO_TOL,
};

/// Deliberate corruption used to confirm that the suite notices it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Adds 0.5 to a symmetric pair of off-block entries of the top Dirac matrix.
    PerturbDirac,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub p: usize,
    pub tol: f64,
    pub seed: u64,
    pub fault: Fault,
    pub path_cap: usize,
    pub matrix_cap: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            p: 1,
            tol: DEFAULT_ZERO_TOL,
            seed: 42,
            fault: Fault::None,
            path_cap: crate::graph::DEFAULT_PATH_CAP,
            matrix_cap: DEFAULT_MATRIX_CAP,
        }
    }
}

pub enum Source<'a> {
    Digraph(&'a Digraph),
    Hypergraph(&'a Hypergraph),
}

/// Collects outcomes by name; a name fails if any instance fails.
#[derive(Default)]
struct Recorder {
    order: Vec<String>,
    results: BTreeMap<String, (bool, String, usize)>,
}

impl Recorder {
    fn record(&mut self, name: &str, outcome: std::result::Result<String, String>) {
        if !self.results.contains_key(name) {
            self.order.push(name.to_string());
        }
        let entry = self
            .results
            .entry(name.to_string())
            .or_insert((true, String::new(), 0));
        entry.2 += 1;
        match outcome {
            Ok(detail) => {
                if entry.0 {
                    entry.1 = detail;
                }
            }
            Err(detail) => {
                if entry.0 {
                    entry.0 = false;
                    entry.1 = detail;
                }
            }
        }
    }

    fn finish(self) -> Vec<CheckRecord> {
        self.order
            .into_iter()
            .map(|name| {
                let (passed, detail, count) = self.results[&name].clone();
                let detail = if count > 1 && passed {
                    format!("{count} instances; last: {detail}")
                } else {
                    detail
                };
                CheckRecord {
                    name,
                    passed,
                    detail,
                }
            })
            .collect()
    }
}

fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Largest gap between the sorted spectrum and its negation.
pub fn spectrum_asymmetry(values: &[f64]) -> f64 {
    values
        .iter()
        .zip(values.iter().rev())
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max)
}

/// Largest distance from some `λ²` to the nearest value in `targets`.
pub fn squared_mismatch(dirac_values: &[f64], targets: &[f64]) -> f64 {
    dirac_values
        .iter()
        .map(|l| {
            let sq = l * l;
            targets
                .iter()
                .map(|t| (t - sq).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

pub fn max_spectral_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Random orthogonal matrix (QR of a uniform random matrix).
pub fn random_rotation(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

fn tampered(mut d: DiracMatrix, fault: Fault) -> DiracMatrix {
    if fault == Fault::PerturbDirac {
        let n = d.size();
        if n >= 2 {
            d.matrix[(0, n - 1)] += 0.5;
            d.matrix[(n - 1, 0)] += 0.5;
        } else if n == 1 {
            d.matrix[(0, 0)] += 0.5;
        }
    }
    d
}

fn nullity_agreement(
    m: &DMatrix<f64>,
    exact: usize,
    tol: f64,
) -> std::result::Result<String, String> {
    match eigen_spectrum_with_tol(m, exact, tol) {
        Ok(s) if s.numeric_nullity() == exact => Ok(format!("nullity {exact}")),
        Ok(s) => Err(format!("numeric {} vs exact {exact}", s.numeric_nullity())),
        Err(e) => Err(e.to_string()),
    }
}

/// Runs the full single-complex suite on a digraph or hypergraph.
pub fn check_source(src: Source<'_>, cfg: &CheckConfig) -> Result<Vec<CheckRecord>> {
    let top = (cfg.p + 1).max(2);
    let (c, allowed) = match &src {
        Source::Digraph(g) => (
            ChainComplexRep::from_source(*g, top, cfg.path_cap)?,
            g.allowed_paths(top, cfg.path_cap)?,
        ),
        Source::Hypergraph(h) => (
            ChainComplexRep::from_source(*h, top, cfg.path_cap)?,
            h.allowed_paths(top, cfg.path_cap)?,
        ),
    };
    let mut rec = Recorder::default();

    rec.record(
        "boundary_squared_zero",
        c.verify_boundary_squares_zero()
            .map(|_| "exact".to_string())
            .map_err(|e| e.to_string()),
    );

    let mut dirac_spectra = Vec::new();
    for q in 0..=cfg.p {
        let d = dirac(&c, q)?;
        if d.size() > cfg.matrix_cap {
            return Err(crate::Error::Resource(format!(
                "D_{q} has size {} above the cap {}",
                d.size(),
                cfg.matrix_cap
            )));
        }
        let d = if q == cfg.p {
            tampered(d, cfg.fault)
        } else {
            d
        };
        rec.record(
            &format!("dirac_square_D{q}"),
            verify_dirac_square_of(&c, &d)
                .map(|r| format!("max |D²−blockdiag| = {:.3e}", r.max_abs_diff))
                .map_err(|e| e.to_string()),
        );
        let values = eigenvalues(&d.matrix);
        let asym = spectrum_asymmetry(&values);
        rec.record(
            &format!("dirac_spectrum_symmetric_D{q}"),
            if asym <= 1e-8 {
                Ok(format!("asymmetry {asym:.3e}"))
            } else {
                Err(format!("asymmetry {asym:.3e} exceeds 1e-8"))
            },
        );
        let mut targets = Vec::new();
        for i in 0..=q {
            targets.extend(eigenvalues(&laplacian(&c, i)?.matrix));
        }
        targets.extend(eigenvalues(&laplacian_down(&c, q + 1)?.matrix));
        let miss = squared_mismatch(&values, &targets);
        rec.record(
            &format!("dirac_squared_eigenvalues_D{q}"),
            if miss <= 1e-6 {
                Ok(format!("max mismatch {miss:.3e}"))
            } else {
                Err(format!(
                    "some λ² is {miss:.3e} away from every Laplacian eigenvalue"
                ))
            },
        );
        rec.record(
            &format!("nullity_agreement_D{q}"),
            nullity_agreement(&d.matrix, d.exact_nullity, cfg.tol),
        );
        dirac_spectra.push(values);
    }

    let mut laplacian_spectra = Vec::new();
    for n in 0..=cfg.p {
        let l = laplacian(&c, n)?;
        let asym = max_abs(&(&l.matrix - l.matrix.transpose()));
        let values = eigenvalues(&l.matrix);
        let min = values.first().copied().unwrap_or(0.0);
        rec.record(
            &format!("laplacian_psd_L{n}"),
            if asym <= 1e-12 && min >= -1e-9 {
                Ok(format!("min eigenvalue {min:.3e}"))
            } else {
                Err(format!("asymmetry {asym:.3e}, min eigenvalue {min:.3e}"))
            },
        );
        rec.record(
            &format!("nullity_agreement_L{n}"),
            nullity_agreement(&l.matrix, l.exact_nullity, cfg.tol),
        );
        laplacian_spectra.push(values);
    }

    let betti = betti_numbers(&c).0;
    let rank_d2 = c.boundary_rank(2)?;
    let h1 = match src {
        Source::Digraph(g) => h1_rank_digraph(g, rank_d2),
        Source::Hypergraph(h) => h1_rank_hypergraph(h, rank_d2),
    };
    rec.record(
        "h1_rank_formula",
        match h1 {
            Ok(r) if r.rank == betti[1] => Ok(format!("β1 = {} (bound {})", r.rank, r.upper_bound)),
            Ok(r) => Err(format!("formula gives {} but β1 = {}", r.rank, betti[1])),
            Err(e) => Err(e.to_string()),
        },
    );

    let ambient = ElementaryComplex::face_closure(&allowed);
    let embedded = ambient.subspaces_from_paths(&allowed).and_then(|lambda| {
        let inf = subcomplex_betti(&ambient, &infimum_complex(&ambient, &lambda)?)?;
        let sup = subcomplex_betti(&ambient, &supremum_complex(&ambient, &lambda)?)?;
        Ok((inf, sup))
    });
    rec.record(
        "embedded_homology",
        match embedded {
            Ok((inf, sup)) if inf == sup && inf.0 == betti => Ok(format!("Betti {:?}", inf.0)),
            Ok((inf, sup)) => Err(format!(
                "inf {:?}, sup {:?}, path homology {betti:?}",
                inf.0, sup.0
            )),
            Err(e) => Err(e.to_string()),
        },
    );

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rotations: Vec<DMatrix<f64>> = c
        .dims()
        .iter()
        .map(|&n| random_rotation(n, &mut rng))
        .collect();
    let rotated = c.rotate_bases(&rotations)?;
    let mut worst = 0.0_f64;
    for n in 0..=cfg.p {
        let values = eigenvalues(&laplacian(&rotated, n)?.matrix);
        worst = worst.max(max_spectral_gap(&values, &laplacian_spectra[n]));
        let values = eigenvalues(&dirac(&rotated, n)?.matrix);
        worst = worst.max(max_spectral_gap(&values, &dirac_spectra[n]));
    }
    rec.record(
        "basis_invariance",
        if worst <= 1e-8 {
            Ok(format!(
                "max spectral change {worst:.3e} (seed {})",
                cfg.seed
            ))
        } else {
            Err(format!("spectra moved by {worst:.3e} under rotation"))
        },
    );
    Ok(rec.finish())
}

/// Runs the persistence suite over every stage pair of a filtration.
pub fn check_filtration(f: &Filtration, cfg: &CheckConfig) -> Result<Vec<CheckRecord>> {
    let p = cfg.p;
    let complexes = f.build_complexes(p + 1, cfg.path_cap)?;
    let mut rec = Recorder::default();
    for a in 1..=f.len() {
        for b in a..=f.len() {
            let (ca, cb) = (&complexes[a - 1], &complexes[b - 1]);
            let aux = match auxiliary_complex(ca, cb, a, b) {
                Ok(aux) => aux,
                Err(e) => {
                    rec.record("auxiliary_complex", Err(format!("({a},{b}): {e}")));
                    continue;
                }
            };
            rec.record(
                "auxiliary_complex",
                Ok(format!("({a},{b}) dims {:?}", aux.dims())),
            );

            let mut inside = true;
            for k in 0..=aux.top_degree() {
                let c_k = aux.degree(k)?.space.coords();
                inside &= span_contains(cb.degree(k)?.omega().coords(), c_k);
            }
            rec.record(
                "sandwich_containment",
                if inside {
                    Ok(format!("({a},{b})"))
                } else {
                    Err(format!("C not inside Ω of stage {b} for ({a},{b})"))
                },
            );
            rec.record(
                "aux_chain_condition",
                aux.verify_chain_condition()
                    .map(|_| format!("({a},{b})"))
                    .map_err(|e| e.to_string()),
            );

            let d = tampered(persistent_dirac(&aux, p, cfg.matrix_cap)?, cfg.fault);
            rec.record(
                "persistent_nullity_identity",
                persistent_nullity_identity(&aux, p)
                    .map(|r| format!("({a},{b}) η = {}", r.numeric_nullity))
                    .map_err(|e| e.to_string()),
            );
            let values = eigenvalues(&d.matrix);
            let asym = spectrum_asymmetry(&values);
            rec.record(
                "persistent_dirac_symmetric",
                if asym <= 1e-8 {
                    Ok(format!("({a},{b}) asymmetry {asym:.3e}"))
                } else {
                    Err(format!("({a},{b}) asymmetry {asym:.3e}"))
                },
            );
            rec.record(
                "persistent_nullity_agreement",
                nullity_agreement(&d.matrix, d.exact_nullity, cfg.tol)
                    .map_err(|e| format!("D_{p}^({a},{b}): {e}")),
            );

            let aux_betti = aux.betti();
            for n in 0..=p {
                let pl = persistent_laplacian(&aux, n)?;
                let eta_a = laplacian(ca, n)?.exact_nullity;
                let eta_c = aux_betti[n];
                rec.record(
                    "persistent_laplacian_monotone",
                    if eta_a >= pl.exact_nullity && eta_c >= pl.exact_nullity {
                        Ok(format!("({a},{b}) n={n}"))
                    } else {
                        Err(format!(
                            "({a},{b}) n={n}: η(Δ^A)={eta_a}, η(Δ^BA)={}, η(Δ^C)={eta_c}",
                            pl.exact_nullity
                        ))
                    },
                );
                let pb = persistent_betti(ca, cb, n)?;
                rec.record(
                    "persistent_laplacian_kernel_is_persistent_betti",
                    if pb == pl.exact_nullity {
                        Ok(format!("({a},{b}) n={n}"))
                    } else {
                        Err(format!(
                            "({a},{b}) n={n}: kernel {} vs rank {pb}",
                            pl.exact_nullity
                        ))
                    },
                );
                rec.record(
                    "persistent_laplacian_nullity_agreement",
                    nullity_agreement(&pl.matrix, pl.exact_nullity, cfg.tol)
                        .map_err(|e| format!("L_{n}^({a},{b}): {e}")),
                );
                if a == b {
                    let l = laplacian(cb, n)?;
                    let diff = max_abs(&(&pl.matrix - &l.matrix));
                    rec.record(
                        "equal_stage_laplacian",
                        if diff <= 1e-12 {
                            Ok(format!("stage {a}"))
                        } else {
                            Err(format!("stage {a} n={n}: entries differ by {diff:.3e}"))
                        },
                    );
                }
            }
            if a == b {
                let ordinary = eigenvalues(&dirac(cb, p)?.matrix);
                let gap = max_spectral_gap(&values, &ordinary);
                rec.record(
                    "equal_stage_dirac",
                    if gap <= 1e-8 {
                        Ok(format!("stage {a}"))
                    } else {
                        Err(format!("stage {a}: spectra differ by {gap:.3e}"))
                    },
                );
            }
            if f.stage(a)?.vertices() == f.stage(b)?.vertices() {
                let beta0_b = betti_numbers(cb).0[0];
                rec.record(
                    "aux_beta0_matches_later_stage",
                    if aux_betti[0] == beta0_b {
                        Ok(format!("({a},{b})"))
                    } else {
                        Err(format!(
                            "({a},{b}): β0(C)={} vs β0(stage {b})={beta0_b}",
                            aux_betti[0]
                        ))
                    },
                );
            }
        }
    }
    Ok(rec.finish())
}
