//! Per-instance property checks shared by the property suite and the
//! acceptance runner. Each check returns the label of the property and an
//! error message on failure.

use nalgebra::{DMatrix, SymmetricEigen};
use pathdirac::chain::{
    betti_numbers, infimum_complex, subcomplex_betti, supremum_complex, ChainComplexRep,
    ElementaryComplex,
};
use pathdirac::checks::{check_filtration, CheckConfig};
use pathdirac::graph::{h1_rank_digraph, h1_rank_hypergraph, AnchorPaths, VertexId};
use pathdirac::persistence::{
    auxiliary_complex, persistent_dirac, persistent_laplacian, Filtration,
};
use pathdirac::spectral::{dirac, dirac_spectrum, laplacian, laplacian_spectrum, DEFAULT_ZERO_TOL};
use pathdirac::{Digraph, Hypergraph};

use super::{
    aux_betti, aux_dims, count_zero, max_diff, persistent_betti, persistent_dirac_nullity, sorted,
    OracleComplex, Steps,
};

pub const SYMMETRY_TOL: f64 = 1e-8;
pub const REDUCTION_TOL: f64 = 1e-8;
pub const ZERO_TOL: f64 = DEFAULT_ZERO_TOL;
const CAP: usize = 200_000;

pub type Outcome = (&'static str, Result<(), String>);

fn check(label: &'static str, ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    (label, if ok { Ok(()) } else { Err(msg()) })
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    sorted(
        SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect(),
    )
}

fn asymmetry(v: &[f64]) -> f64 {
    let neg: Vec<f64> = v.iter().rev().map(|x| -x).collect();
    max_diff(v, &neg)
}

/// Properties a, b, c, d and f on one graph, degrees `p ∈ {0, 1}`.
fn complex_properties(
    c: &ChainComplexRep,
    o: &OracleComplex,
    h1_formula: Option<usize>,
    tag: &str,
) -> Vec<Outcome> {
    let mut out = Vec::new();
    let betti = betti_numbers(c).0;
    out.push(check(
        "c",
        betti == o.betti() && c.dims() == o.dims(),
        || {
            format!(
                "{tag}: library Betti {betti:?} dims {:?}, oracle {:?} {:?}",
                c.dims(),
                o.betti(),
                o.dims()
            )
        },
    ));
    out.push(check("c", h1_formula == Some(o.betti()[1]), || {
        format!(
            "{tag}: rank formula gives {h1_formula:?}, oracle β1 = {}",
            o.betti()[1]
        )
    }));

    let allowed: Vec<Vec<_>> = c
        .degrees()
        .iter()
        .map(|d| d.paths().paths().to_vec())
        .collect();
    let ambient = ElementaryComplex::face_closure(&allowed);
    let embedded = ambient.subspaces_from_paths(&allowed).and_then(|lambda| {
        let inf = subcomplex_betti(&ambient, &infimum_complex(&ambient, &lambda)?)?;
        let sup = subcomplex_betti(&ambient, &supremum_complex(&ambient, &lambda)?)?;
        Ok((inf.0, sup.0))
    });
    out.push(match embedded {
        Ok((inf, sup)) => check("d", inf == sup && inf == o.betti(), || {
            format!(
                "{tag}: H(Inf) {inf:?}, H(Sup) {sup:?}, oracle {:?}",
                o.betti()
            )
        }),
        Err(e) => ("d", Err(format!("{tag}: {e}"))),
    });

    for n in 0..=1 {
        match laplacian(c, n) {
            Ok(l) => {
                let raw = eigenvalues(&l.matrix);
                let spectrum_ok = laplacian_spectrum(&l, ZERO_TOL).is_ok();
                out.push(check(
                    "f",
                    spectrum_ok
                        && l.exact_nullity == o.betti()[n]
                        && count_zero(&raw, ZERO_TOL) == o.betti()[n],
                    || {
                        format!(
                            "{tag}: L{n} exact {} numeric {} oracle {}",
                            l.exact_nullity,
                            count_zero(&raw, ZERO_TOL),
                            o.betti()[n]
                        )
                    },
                ));
            }
            Err(e) => out.push(("f", Err(format!("{tag}: L{n}: {e}")))),
        }
    }
    for p in 0..=1 {
        let d = match dirac(c, p) {
            Ok(d) => d,
            Err(e) => {
                out.push(("b", Err(format!("{tag}: D{p}: {e}"))));
                continue;
            }
        };
        let raw = eigenvalues(&d.matrix);
        out.push(check("a", asymmetry(&raw) <= SYMMETRY_TOL, || {
            format!("{tag}: D{p} spectrum asymmetric by {:e}", asymmetry(&raw))
        }));
        let expected = o.dirac_nullity(p);
        out.push(check(
            "b",
            d.exact_nullity == expected && count_zero(&raw, ZERO_TOL) == expected,
            || {
                format!(
                    "{tag}: η(D{p}) exact {} numeric {} oracle {expected}",
                    d.exact_nullity,
                    count_zero(&raw, ZERO_TOL)
                )
            },
        ));
        out.push(check(
            "f",
            dirac_spectrum(&d, ZERO_TOL)
                .map(|s| s.numeric_nullity())
                .ok()
                == Some(expected),
            || format!("{tag}: reconciled D{p} nullity disagrees with {expected}"),
        ));
    }
    out
}

pub fn digraph_instance(n: u32, edges: &[(u32, u32)]) -> Vec<Outcome> {
    let g = Digraph::on_range(n, edges).expect("valid digraph");
    let o = OracleComplex::new(&Steps::digraph(n, edges), 2);
    let tag = format!("digraph n={n} {edges:?}");
    let c = match ChainComplexRep::from_source(&g, 2, CAP) {
        Ok(c) => c,
        Err(e) => return vec![("c", Err(format!("{tag}: {e}")))],
    };
    let mut out = Vec::new();
    match ChainComplexRep::accelerated(&g, 2, CAP) {
        Ok(fast) => out.push(check("c", fast.dims() == c.dims(), || {
            format!("{tag}: fast Ω dims differ")
        })),
        Err(e) => out.push(("c", Err(format!("{tag}: {e}")))),
    }
    let h1 = h1_rank_digraph(&g, o.ranks[2]).ok().map(|r| r.rank);
    out.extend(complex_properties(&c, &o, h1, &tag));
    out
}

pub fn hypergraph_instance(hyperedges: &[Vec<u32>]) -> Vec<Outcome> {
    let refs: Vec<&[u32]> = hyperedges.iter().map(Vec::as_slice).collect();
    let h = Hypergraph::from_hyperedges(&refs).expect("valid hypergraph");
    let o = OracleComplex::new(&Steps::hypergraph(0, hyperedges), 2);
    let tag = format!("hypergraph {hyperedges:?}");
    let c = match ChainComplexRep::from_source(&h, 2, CAP) {
        Ok(c) => c,
        Err(e) => return vec![("c", Err(format!("{tag}: {e}")))],
    };
    let mut out = Vec::new();
    // the hypergraph complex is the digraph complex of the symmetric closure
    match ChainComplexRep::from_source(&h.as_digraph(), 2, CAP) {
        Ok(sym) => out.push(check("c", sym.dims() == c.dims(), || {
            format!("{tag}: closure dims differ")
        })),
        Err(e) => out.push(("c", Err(format!("{tag}: {e}")))),
    }
    let h1 = h1_rank_hypergraph(&h, o.ranks[2]).ok().map(|r| r.rank);
    out.extend(complex_properties(&c, &o, h1, &tag));
    out
}

/// Weighted edges on `0..n`; stage `i` keeps edges of weight `≤ thresholds[i]`.
#[derive(Clone, Debug)]
pub struct WeightedInstance {
    pub n: u32,
    pub edges: Vec<(u32, u32, f64)>,
    pub thresholds: Vec<f64>,
}

impl WeightedInstance {
    pub fn filtration(&self) -> Filtration {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v, w)| (VertexId(u), VertexId(v), w))
            .collect();
        Filtration::from_weighted_edges((0..self.n).map(VertexId), &edges, &self.thresholds)
            .expect("valid filtration")
    }

    pub fn stage_steps(&self, i: usize) -> Steps {
        let t = self.thresholds[i];
        let edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .filter(|e| e.2 <= t)
            .map(|e| (e.0, e.1))
            .collect();
        Steps::digraph(self.n, &edges)
    }
}

/// Property e, plus f on every persistent operator.
pub fn filtration_instance(inst: &WeightedInstance) -> Vec<Outcome> {
    let tag = format!(
        "filtration n={} {:?} t={:?}",
        inst.n, inst.edges, inst.thresholds
    );
    let f = inst.filtration();
    let complexes = match f.build_complexes(2, CAP) {
        Ok(c) => c,
        Err(e) => return vec![("e", Err(format!("{tag}: {e}")))],
    };
    let oracles: Vec<OracleComplex> = (0..f.len())
        .map(|i| OracleComplex::new(&inst.stage_steps(i), 2))
        .collect();
    let mut out = Vec::new();

    let cfg = CheckConfig::default();
    match check_filtration(&f, &cfg) {
        Ok(records) => {
            for r in records {
                out.push(check("e", r.passed, || {
                    format!("{tag}: {} failed: {}", r.name, r.detail)
                }));
            }
        }
        Err(e) => out.push(("e", Err(format!("{tag}: {e}")))),
    }

    for a in 1..=f.len() {
        for b in a..=f.len() {
            let (oa, ob) = (&oracles[a - 1], &oracles[b - 1]);
            let ptag = format!("{tag} pair ({a},{b})");
            let aux = match auxiliary_complex(&complexes[a - 1], &complexes[b - 1], a, b) {
                Ok(x) => x,
                Err(e) => {
                    out.push(("e", Err(format!("{ptag}: {e}"))));
                    continue;
                }
            };
            let dims = aux.dims();
            let odims = aux_dims(oa, ob);
            let sandwich = (0..=2).all(|k| oa.dims()[k] <= dims[k] && dims[k] <= ob.dims()[k]);
            out.push(check("e", dims == odims && sandwich, || {
                format!(
                    "{ptag}: C dims {dims:?}, oracle {odims:?}, Ω(a) {:?}, Ω(b) {:?}",
                    oa.dims(),
                    ob.dims()
                )
            }));
            let cb = aux_betti(oa, ob);
            out.push(check("e", aux.betti() == cb, || {
                format!("{ptag}: β(C) {:?} vs oracle {cb:?}", aux.betti())
            }));
            out.push(check("e", cb[0] == ob.betti()[0], || {
                format!(
                    "{ptag}: β0(C) = {} but β0(stage {b}) = {}",
                    cb[0],
                    ob.betti()[0]
                )
            }));

            for n in 0..=1 {
                let pb = persistent_betti(oa, ob, n);
                out.push(check("e", oa.betti()[n] >= pb && pb <= cb[n], || {
                    format!(
                        "{ptag}: β_{n}(a) = {}, persistent {pb}, β_{n}(C) = {}",
                        oa.betti()[n],
                        cb[n]
                    )
                }));
                match persistent_laplacian(&aux, n) {
                    Ok(l) => {
                        let raw = eigenvalues(&l.matrix);
                        out.push(check(
                            "f",
                            l.exact_nullity == pb && count_zero(&raw, ZERO_TOL) == pb,
                            || {
                                format!(
                                    "{ptag}: η(Δ^BA_{n}) exact {} numeric {} oracle {pb}",
                                    l.exact_nullity,
                                    count_zero(&raw, ZERO_TOL)
                                )
                            },
                        ));
                        if a == b {
                            let plain =
                                laplacian(&complexes[a - 1], n).map(|l| eigenvalues(&l.matrix));
                            out.push(check(
                                "e",
                                plain.as_ref().is_ok_and(|v| {
                                    v.len() == raw.len() && max_diff(v, &raw) <= REDUCTION_TOL
                                }),
                                || format!("{ptag}: persistent L{n} differs from L{n}"),
                            ));
                        }
                    }
                    Err(e) => out.push(("f", Err(format!("{ptag}: Δ{n}: {e}")))),
                }
            }
            for p in 0..=1 {
                match persistent_dirac(&aux, p, usize::MAX) {
                    Ok(d) => {
                        let raw = eigenvalues(&d.matrix);
                        let expected = persistent_dirac_nullity(oa, ob, p);
                        out.push(check("a", asymmetry(&raw) <= SYMMETRY_TOL, || {
                            format!(
                                "{ptag}: persistent D{p} asymmetric by {:e}",
                                asymmetry(&raw)
                            )
                        }));
                        out.push(check(
                            "b",
                            d.exact_nullity == expected && count_zero(&raw, ZERO_TOL) == expected,
                            || {
                                format!(
                                    "{ptag}: η(D{p}) exact {} numeric {} oracle {expected}",
                                    d.exact_nullity,
                                    count_zero(&raw, ZERO_TOL)
                                )
                            },
                        ));
                        if a == b {
                            let plain = dirac(&complexes[a - 1], p).map(|d| eigenvalues(&d.matrix));
                            out.push(check(
                                "e",
                                plain.as_ref().is_ok_and(|v| {
                                    v.len() == raw.len() && max_diff(v, &raw) <= REDUCTION_TOL
                                }),
                                || format!("{ptag}: persistent D{p} differs from D{p}"),
                            ));
                        }
                    }
                    Err(e) => out.push(("b", Err(format!("{ptag}: D{p}: {e}")))),
                }
            }
        }
    }
    out
}

/// A persistent Laplacian eigenvalue `μ > 0` with no `±√μ` in the persistent
/// Dirac spectrum of the same pair and degree, if the filtration has one.
pub fn laplacian_without_dirac_partner(inst: &WeightedInstance, tol: f64) -> Option<String> {
    let f = inst.filtration();
    let complexes = f.build_complexes(2, CAP).ok()?;
    for a in 1..=f.len() {
        for b in a + 1..=f.len() {
            let aux = auxiliary_complex(&complexes[a - 1], &complexes[b - 1], a, b).ok()?;
            for n in 0..=1 {
                let mu = eigenvalues(&persistent_laplacian(&aux, n).ok()?.matrix);
                let dv = eigenvalues(&persistent_dirac(&aux, n, usize::MAX).ok()?.matrix);
                for &m in mu.iter().filter(|&&m| m > tol) {
                    let root = m.sqrt();
                    if !dv.iter().any(|&x| (x.abs() - root).abs() <= tol) {
                        return Some(format!(
                            "{} pair ({a},{b}) degree {n}: μ = {m:.6} has no ±{root:.6} among {dv:.4?}",
                            inst_tag(inst)
                        ));
                    }
                }
            }
        }
    }
    None
}

fn inst_tag(inst: &WeightedInstance) -> String {
    format!(
        "n={} edges={:?} t={:?}",
        inst.n, inst.edges, inst.thresholds
    )
}
