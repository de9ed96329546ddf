//! Molecules as bond digraphs directed by Pauling electronegativity, and the
//! distance filtrations built on them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Digraph, VertexId};
use crate::persistence::{feature_grid, FeatureGrid, Filtration, GridOptions};

/// Slack applied when comparing measured distances against thresholds (Å).
pub const DISTANCE_SLACK: f64 = 1e-6;
/// Bonds are inferred up to this multiple of the covalent-radius sum.
pub const BOND_TOLERANCE_FACTOR: f64 = 1.2;

// symbol, Pauling electronegativity, covalent radius (Å)
const ELEMENTS: &[(&str, f64, f64)] = &[
    ("H", 2.20, 0.31),
    ("Li", 0.98, 1.28),
    ("Be", 1.57, 0.96),
    ("B", 2.04, 0.84),
    ("C", 2.55, 0.76),
    ("N", 3.04, 0.71),
    ("O", 3.44, 0.66),
    ("F", 3.98, 0.57),
    ("Na", 0.93, 1.66),
    ("Mg", 1.31, 1.41),
    ("Al", 1.61, 1.21),
    ("Si", 1.90, 1.11),
    ("P", 2.19, 1.07),
    ("S", 2.58, 1.05),
    ("Cl", 3.16, 1.02),
    ("K", 0.82, 2.03),
    ("Ca", 1.00, 1.76),
    ("Sc", 1.36, 1.70),
    ("Ti", 1.54, 1.60),
    ("V", 1.63, 1.53),
    ("Cr", 1.66, 1.39),
    ("Mn", 1.55, 1.39),
    ("Fe", 1.83, 1.32),
    ("Co", 1.88, 1.26),
    ("Ni", 1.91, 1.24),
    ("Cu", 1.90, 1.32),
    ("Zn", 1.65, 1.22),
    ("Ga", 1.81, 1.22),
    ("Ge", 2.01, 1.20),
    ("As", 2.18, 1.19),
    ("Se", 2.55, 1.20),
    ("Br", 2.96, 1.20),
    ("Kr", 3.00, 1.16),
    ("Rb", 0.82, 2.20),
    ("Sr", 0.95, 1.95),
    ("Y", 1.22, 1.90),
    ("Zr", 1.33, 1.75),
    ("Nb", 1.60, 1.64),
    ("Mo", 2.16, 1.54),
    ("Ru", 2.20, 1.46),
    ("Rh", 2.28, 1.42),
    ("Pd", 2.20, 1.39),
    ("Ag", 1.93, 1.45),
    ("Cd", 1.69, 1.44),
    ("In", 1.78, 1.42),
    ("Sn", 1.96, 1.39),
    ("Sb", 2.05, 1.39),
    ("Te", 2.10, 1.38),
    ("I", 2.66, 1.39),
    ("Xe", 2.60, 1.40),
    ("Cs", 0.79, 2.44),
    ("Ba", 0.89, 2.15),
    ("Pt", 2.28, 1.36),
    ("Au", 2.54, 1.36),
    ("Hg", 2.00, 1.32),
    ("Pb", 2.33, 1.46),
    ("Bi", 2.02, 1.48),
];

fn element(symbol: &str) -> Option<&'static (&'static str, f64, f64)> {
    ELEMENTS.iter().find(|e| e.0 == symbol)
}

pub fn covalent_radius(symbol: &str) -> Option<f64> {
    element(symbol).map(|e| e.2)
}

/// `Fe`, `fe` and `FE` all name iron.
pub fn normalize_symbol(raw: &str) -> String {
    let mut chars = raw.chars();
    match chars.next() {
        Some(first) => {
            first.to_ascii_uppercase().to_string() + &chars.as_str().to_ascii_lowercase()
        }
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectronegativityTable(BTreeMap<String, f64>);

impl ElectronegativityTable {
    pub fn pauling() -> Self {
        ElectronegativityTable(ELEMENTS.iter().map(|e| (e.0.to_string(), e.1)).collect())
    }

    pub fn new(values: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((el, v)) = values.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "electronegativity of {el} must be positive, got {v}"
            )));
        }
        Ok(ElectronegativityTable(values))
    }

    pub fn get(&self, symbol: &str) -> Option<f64> {
        self.0.get(symbol).copied()
    }
}

impl Default for ElectronegativityTable {
    fn default() -> Self {
        Self::pauling()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub element: String,
    pub position: [f64; 3],
}

impl Atom {
    pub fn distance(&self, other: &Atom) -> f64 {
        (Vector3::from(self.position) - Vector3::from(other.position)).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    /// Unordered bonds stored as `(i, j)` with `i < j`.
    pub bonds: BTreeSet<(usize, usize)>,
    pub bonds_inferred: bool,
}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, bonds: Option<BTreeSet<(usize, usize)>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("molecule has no atoms".into()));
        }
        for a in &atoms {
            if element(&a.element).is_none() {
                return Err(Error::InvalidInput(format!(
                    "unknown element '{}'",
                    a.element
                )));
            }
            if a.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite coordinate for {}",
                    a.element
                )));
            }
        }
        let (bonds, bonds_inferred) = match bonds {
            Some(b) => {
                for &(i, j) in &b {
                    if i >= j || j >= atoms.len() {
                        return Err(Error::InvalidInput(format!("invalid bond ({i}, {j})")));
                    }
                }
                (b, false)
            }
            None => (infer_bonds(&atoms), true),
        };
        Ok(Molecule {
            atoms,
            bonds,
            bonds_inferred,
        })
    }
}

/// Bond `{i, j}` when the distance is at most 1.2 times the covalent-radius sum.
pub fn infer_bonds(atoms: &[Atom]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let (Some(ri), Some(rj)) = (
                covalent_radius(&atoms[i].element),
                covalent_radius(&atoms[j].element),
            ) else {
                continue;
            };
            if atoms[i].distance(&atoms[j]) <= BOND_TOLERANCE_FACTOR * (ri + rj) + DISTANCE_SLACK {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Parses XYZ text with optional trailing `BOND i j` lines (0-based indices).
pub fn parse_molecule_str(text: &str) -> Result<Molecule> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, count_line) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file, expected an atom count"))?;
    let count: usize = count_line.trim().parse().map_err(|_| {
        Error::parse(
            ln,
            format!("expected an atom count, found '{}'", count_line.trim()),
        )
    })?;
    if count == 0 {
        return Err(Error::parse(ln, "atom count must be positive"));
    }
    lines
        .next()
        .ok_or_else(|| Error::parse(2, "missing comment line"))?;

    let mut atoms = Vec::with_capacity(count);
    while atoms.len() < count {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(atoms.len() + 3, format!("expected {count} atom lines")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(ln, "atom lines read 'El x y z'"));
        }
        let symbol = normalize_symbol(fields[0]);
        if element(&symbol).is_none() {
            return Err(Error::parse(ln, format!("unknown element '{}'", fields[0])));
        }
        let mut position = [0.0; 3];
        for (slot, raw) in position.iter_mut().zip(&fields[1..]) {
            *slot = raw
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(ln, format!("bad coordinate '{raw}'")))?;
        }
        atoms.push(Atom {
            element: symbol,
            position,
        });
    }

    let mut bonds = BTreeSet::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [kw, i, j] if kw.eq_ignore_ascii_case("BOND") => {
                let parse_idx = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| Error::parse(ln, format!("bad atom index '{s}'")))
                };
                let (i, j) = (parse_idx(i)?, parse_idx(j)?);
                if i >= count || j >= count {
                    return Err(Error::parse(
                        ln,
                        format!("bond index out of range 0..{count}"),
                    ));
                }
                if i == j {
                    return Err(Error::parse(ln, "an atom cannot bond to itself"));
                }
                bonds.insert((i.min(j), i.max(j)));
            }
            _ => return Err(Error::parse(ln, "expected 'BOND i j' after the atom lines")),
        }
    }
    Molecule::new(atoms, (!bonds.is_empty()).then_some(bonds))
}

pub fn parse_molecule(path: &Path) -> Result<Molecule> {
    parse_molecule_str(&std::fs::read_to_string(path)?)
}

/// Bond digraph with the interatomic distance on every edge.
#[derive(Debug, Clone)]
pub struct WeightedDigraph {
    pub graph: Digraph,
    pub weights: BTreeMap<(VertexId, VertexId), f64>,
}

impl WeightedDigraph {
    pub fn weighted_edges(&self) -> Vec<(VertexId, VertexId, f64)> {
        self.weights.iter().map(|(&(u, v), &w)| (u, v, w)).collect()
    }
}

/// Each bond points from lower to higher electronegativity; equal values
/// give edges both ways. Vertex `i` is atom `i`.
pub fn build_bond_digraph(m: &Molecule, table: &ElectronegativityTable) -> Result<WeightedDigraph> {
    let chi = |i: usize| {
        table.get(&m.atoms[i].element).ok_or_else(|| {
            Error::InvalidInput(format!("no electronegativity for {}", m.atoms[i].element))
        })
    };
    let mut weights = BTreeMap::new();
    for &(i, j) in &m.bonds {
        let w = m.atoms[i].distance(&m.atoms[j]);
        if w <= 0.0 {
            return Err(Error::InvalidInput(format!("atoms {i} and {j} coincide")));
        }
        let (u, v) = (VertexId(i as u32), VertexId(j as u32));
        let (ci, cj) = (chi(i)?, chi(j)?);
        if ci <= cj {
            weights.insert((u, v), w);
        }
        if cj <= ci {
            weights.insert((v, u), w);
        }
    }
    let graph = Digraph::new(
        (0..m.atoms.len() as u32).map(VertexId),
        weights.keys().copied(),
    )?;
    Ok(WeightedDigraph { graph, weights })
}

/// Stage `i` holds every atom and the bonds of length `≤ thresholds[i]`.
pub fn distance_filtration(g: &WeightedDigraph, thresholds: &[f64]) -> Result<Filtration> {
    Filtration::from_weighted_edges_with_slack(
        g.graph.vertices().iter().copied(),
        &g.weighted_edges(),
        thresholds,
        DISTANCE_SLACK,
    )
}

#[derive(Debug, Clone)]
pub struct MoleculeRun {
    pub molecule: Molecule,
    pub digraph: WeightedDigraph,
    pub filtration: Filtration,
    pub grid: FeatureGrid,
}

pub fn molecule_pipeline(
    path: &Path,
    thresholds: &[f64],
    opts: &GridOptions,
) -> Result<MoleculeRun> {
    run_molecule(parse_molecule(path)?, thresholds, opts)
}

pub fn run_molecule(
    molecule: Molecule,
    thresholds: &[f64],
    opts: &GridOptions,
) -> Result<MoleculeRun> {
    let digraph = build_bond_digraph(&molecule, &ElectronegativityTable::pauling())?;
    let filtration = distance_filtration(&digraph, thresholds)?;
    let grid = feature_grid(&filtration, opts)?;
    Ok(MoleculeRun {
        molecule,
        digraph,
        filtration,
        grid,
    })
}
