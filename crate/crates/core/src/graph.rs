//! Digraphs, hypergraphs and their anchor sequences.
//!
//! An anchor sequence of degree `p` is the vertex sequence `(v_0, ..., v_p)` of
//! a walk: consecutive vertices are distinct and joined by a directed edge
//! (digraphs) or contained together in some hyperedge (hypergraphs). The
//! anchor sequences of every degree form the allowed paths from which the
//! path chain complex is built.
//!
//! Every enumeration returns paths sorted lexicographically by vertex id so
//! that all downstream matrices are reproducible bit for bit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default upper bound on the number of anchor sequences of a single degree.
pub const DEFAULT_PATH_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// A vertex sequence `(v_0, ..., v_p)` of degree `p`.
///
/// Ordering is lexicographic on the vertex ids, which is the basis order used
/// for every matrix in the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementaryPath(Vec<VertexId>);

impl ElementaryPath {
    /// Panics on an empty sequence; degree-0 paths have one vertex.
    pub fn new(seq: Vec<VertexId>) -> Self {
        assert!(!seq.is_empty(), "elementary path must contain a vertex");
        ElementaryPath(seq)
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        Self::new(ids.iter().copied().map(VertexId).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// The path with the `i`-th vertex removed.
    pub fn face(&self, i: usize) -> ElementaryPath {
        let mut seq = self.0.clone();
        seq.remove(i);
        ElementaryPath(seq)
    }

    /// True when no two consecutive vertices coincide.
    pub fn is_regular(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }
}

impl fmt::Display for ElementaryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Simple digraph without loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl Digraph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let vertices: BTreeSet<_> = vertices.into_iter().collect();
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidInput(format!(
                    "loop at vertex {u} is not permitted"
                )));
            }
            if !vertices.contains(&u) || !vertices.contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "edge ({u},{v}) uses an undeclared vertex"
                )));
            }
            set.insert((u, v));
        }
        Ok(Digraph {
            vertices,
            edges: set,
        })
    }

    /// Digraph on vertices `0..n` with the given edges.
    pub fn on_range(n: u32, edges: &[(u32, u32)]) -> Result<Self> {
        Self::new(
            (0..n).map(VertexId),
            edges.iter().map(|&(u, v)| (VertexId(u), VertexId(v))),
        )
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edges.contains(&(u, v))
    }

    pub fn out_neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.edges
            .range((v, VertexId(0))..=(v, VertexId(u32::MAX)))
            .map(|&(_, w)| w)
    }

    /// Underlying undirected graph obtained by forgetting orientation.
    pub fn underlying(&self) -> UndirectedGraph {
        UndirectedGraph {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
                .collect(),
        }
    }

    /// Number of unordered pairs `{u, v}` with both `u -> v` and `v -> u` present.
    pub fn reciprocal_pair_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| u < v && self.edges.contains(&(v, u)))
            .count()
    }

    /// Vertex and edge inclusion into `other`.
    pub fn is_subgraph_of(&self, other: &Digraph) -> bool {
        self.vertices.is_subset(&other.vertices) && self.edges.is_subset(&other.edges)
    }
}

/// Simple undirected graph; edges stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl UndirectedGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let vertices: BTreeSet<_> = vertices.into_iter().collect();
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidInput(format!(
                    "loop at vertex {u} is not permitted"
                )));
            }
            if !vertices.contains(&u) || !vertices.contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "edge {{{u},{v}}} uses an undeclared vertex"
                )));
            }
            set.insert(if u < v { (u, v) } else { (v, u) });
        }
        Ok(UndirectedGraph {
            vertices,
            edges: set,
        })
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    pub fn component_count(&self) -> usize {
        let index: BTreeMap<VertexId, usize> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let mut parent: Vec<usize> = (0..index.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = index.len();
        for (u, v) in &self.edges {
            let (ru, rv) = (find(&mut parent, index[u]), find(&mut parent, index[v]));
            if ru != rv {
                parent[ru] = rv;
                components -= 1;
            }
        }
        components
    }
}

/// Hypergraph: a vertex set and a set of nonempty hyperedges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    vertices: BTreeSet<VertexId>,
    hyperedges: BTreeSet<BTreeSet<VertexId>>,
}

impl Hypergraph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        hyperedges: impl IntoIterator<Item = BTreeSet<VertexId>>,
    ) -> Result<Self> {
        let vertices: BTreeSet<_> = vertices.into_iter().collect();
        let mut set = BTreeSet::new();
        for e in hyperedges {
            if e.is_empty() {
                return Err(Error::InvalidInput("empty hyperedge".into()));
            }
            if !e.is_subset(&vertices) {
                return Err(Error::InvalidInput(format!(
                    "hyperedge {e:?} uses an undeclared vertex"
                )));
            }
            set.insert(e);
        }
        Ok(Hypergraph {
            vertices,
            hyperedges: set,
        })
    }

    /// Hypergraph whose vertex set is the union of the given hyperedges.
    pub fn from_hyperedges(edges: &[&[u32]]) -> Result<Self> {
        let hyperedges: Vec<BTreeSet<VertexId>> = edges
            .iter()
            .map(|e| e.iter().copied().map(VertexId).collect())
            .collect();
        let vertices: BTreeSet<VertexId> = hyperedges.iter().flatten().copied().collect();
        Self::new(vertices, hyperedges)
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn hyperedges(&self) -> &BTreeSet<BTreeSet<VertexId>> {
        &self.hyperedges
    }

    /// Vertices sharing at least one hyperedge with `v`, excluding `v`.
    fn covered_neighbors(&self, v: VertexId) -> BTreeSet<VertexId> {
        self.hyperedges
            .iter()
            .filter(|e| e.contains(&v))
            .flat_map(|e| e.iter().copied())
            .filter(|&w| w != v)
            .collect()
    }
}

/// Undirected graph on the same vertices, `{u, v}` an edge iff some hyperedge holds both.
pub fn essential_graph(h: &Hypergraph) -> UndirectedGraph {
    let mut edges = BTreeSet::new();
    for e in &h.hyperedges {
        let members: Vec<_> = e.iter().copied().collect();
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                edges.insert((u, v));
            }
        }
    }
    UndirectedGraph {
        vertices: h.vertices.clone(),
        edges,
    }
}

/// Keeps only hyperedges not strictly contained in another hyperedge.
pub fn maximal_hyperedges(h: &Hypergraph) -> Hypergraph {
    let hyperedges = h
        .hyperedges
        .iter()
        .filter(|e| {
            !h.hyperedges
                .iter()
                .any(|f| f.len() > e.len() && e.is_subset(f))
        })
        .cloned()
        .collect();
    Hypergraph {
        vertices: h.vertices.clone(),
        hyperedges,
    }
}

/// Replaces each undirected edge `{u, v}` by the directed pair `u -> v`, `v -> u`.
pub fn symmetric_closure(ug: &UndirectedGraph) -> Digraph {
    Digraph {
        vertices: ug.vertices.clone(),
        edges: ug
            .edges
            .iter()
            .flat_map(|&(u, v)| [(u, v), (v, u)])
            .collect(),
    }
}

/// Sources of anchor sequences: anything that defines which vertex may follow another in a walk.
pub trait AnchorPaths {
    fn vertex_set(&self) -> &BTreeSet<VertexId>;

    /// All anchor sequences of degree `p`, sorted lexicographically.
    fn anchor_paths(&self, p: usize, cap: usize) -> Result<Vec<ElementaryPath>>;

    /// Anchor sequences for each degree `0..=top`.
    fn allowed_paths(&self, top: usize, cap: usize) -> Result<Vec<Vec<ElementaryPath>>> {
        (0..=top).map(|p| self.anchor_paths(p, cap)).collect()
    }

    /// The digraph whose anchor sequences coincide with those of `self`.
    fn as_digraph(&self) -> Digraph;
}

impl AnchorPaths for Digraph {
    fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    fn anchor_paths(&self, p: usize, cap: usize) -> Result<Vec<ElementaryPath>> {
        enumerate_anchor_paths_digraph(self, p, cap)
    }

    fn as_digraph(&self) -> Digraph {
        self.clone()
    }
}

impl AnchorPaths for Hypergraph {
    fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    fn anchor_paths(&self, p: usize, cap: usize) -> Result<Vec<ElementaryPath>> {
        enumerate_anchor_paths_hypergraph(self, p, cap)
    }

    fn as_digraph(&self) -> Digraph {
        symmetric_closure(&essential_graph(self))
    }
}

pub fn enumerate_anchor_paths_digraph(
    g: &Digraph,
    p: usize,
    cap: usize,
) -> Result<Vec<ElementaryPath>> {
    let successors: BTreeMap<VertexId, Vec<VertexId>> = g
        .vertices
        .iter()
        .map(|&v| (v, g.out_neighbors(v).collect()))
        .collect();
    enumerate_walks(&successors, p, cap)
}

pub fn enumerate_anchor_paths_hypergraph(
    h: &Hypergraph,
    p: usize,
    cap: usize,
) -> Result<Vec<ElementaryPath>> {
    let successors: BTreeMap<VertexId, Vec<VertexId>> = h
        .vertices
        .iter()
        .map(|&v| (v, h.covered_neighbors(v).into_iter().collect()))
        .collect();
    enumerate_walks(&successors, p, cap)
}

/// Depth-first walk enumeration. Successor lists are sorted, so the output
/// comes out in lexicographic order without a final sort.
fn enumerate_walks(
    successors: &BTreeMap<VertexId, Vec<VertexId>>,
    p: usize,
    cap: usize,
) -> Result<Vec<ElementaryPath>> {
    let mut out = Vec::new();
    let mut stack: Vec<(VertexId, usize)> = Vec::with_capacity(p + 1);
    let mut seq: Vec<VertexId> = Vec::with_capacity(p + 1);
    for &start in successors.keys() {
        seq.clear();
        seq.push(start);
        stack.clear();
        stack.push((start, 0));
        while let Some(&(v, next)) = stack.last() {
            if seq.len() == p + 1 {
                if out.len() == cap {
                    return Err(Error::Resource(format!(
                        "more than {cap} anchor sequences of degree {p}"
                    )));
                }
                out.push(ElementaryPath(seq.clone()));
                stack.pop();
                seq.pop();
                continue;
            }
            let succ = &successors[&v];
            if next < succ.len() {
                if let Some(top) = stack.last_mut() {
                    top.1 += 1;
                }
                seq.push(succ[next]);
                stack.push((succ[next], 0));
            } else {
                stack.pop();
                seq.pop();
            }
        }
    }
    Ok(out)
}

/// First Betti number from the closed-form count and its upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct H1Rank {
    pub rank: usize,
    pub upper_bound: usize,
}

fn h1_from_bound(bound: i64, rank_d2: usize) -> Result<H1Rank> {
    let rank = bound - rank_d2 as i64;
    if bound < 0 || rank < 0 {
        return Err(Error::Structural(format!(
            "first Betti formula gives {rank} (bound {bound}, rank d2 {rank_d2})"
        )));
    }
    Ok(H1Rank {
        rank: rank as usize,
        upper_bound: bound as usize,
    })
}

/// `|E'| - |V'| + |C'| + |S| - rank d2` over the underlying graph `G'`,
/// where `S` is the set of reciprocal edge pairs.
pub fn h1_rank_digraph(g: &Digraph, rank_d2: usize) -> Result<H1Rank> {
    let ug = g.underlying();
    let bound = ug.edges.len() as i64 - ug.vertices.len() as i64
        + ug.component_count() as i64
        + g.reciprocal_pair_count() as i64;
    h1_from_bound(bound, rank_d2)
}

/// `2|E| - |V| + |C| - rank d2` over the essential graph.
pub fn h1_rank_hypergraph(h: &Hypergraph, rank_d2: usize) -> Result<H1Rank> {
    let eg = essential_graph(h);
    let bound = 2 * eg.edges.len() as i64 - h.vertices.len() as i64 + eg.component_count() as i64;
    h1_from_bound(bound, rank_d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths(list: &[&[u32]]) -> Vec<ElementaryPath> {
        list.iter().map(|p| ElementaryPath::from_ids(p)).collect()
    }

    fn cyclic() -> Digraph {
        Digraph::on_range(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn transitive() -> Digraph {
        Digraph::on_range(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn cyclic_triangle_degree_two() {
        let got = enumerate_anchor_paths_digraph(&cyclic(), 2, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(got, paths(&[&[0, 1, 2], &[1, 2, 0], &[2, 0, 1]]));
    }

    #[test]
    fn transitive_triangle_degree_two() {
        let got = enumerate_anchor_paths_digraph(&transitive(), 2, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(got, paths(&[&[0, 1, 2]]));
    }

    #[test]
    fn degree_zero_includes_isolated_vertices() {
        let g = Digraph::on_range(4, &[(0, 1)]).unwrap();
        let got = enumerate_anchor_paths_digraph(&g, 0, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(got, paths(&[&[0], &[1], &[2], &[3]]));
        assert!(
            enumerate_anchor_paths_digraph(&Digraph::on_range(4, &[]).unwrap(), 1, 10)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn loops_and_undeclared_vertices_rejected() {
        assert!(matches!(
            Digraph::on_range(2, &[(1, 1)]),
            Err(Error::InvalidInput(_))
        ));
        assert!(Digraph::on_range(2, &[(0, 5)]).is_err());
        assert!(Hypergraph::new([VertexId(0)], [BTreeSet::new()]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let g = Digraph::on_range(3, &[(0, 1), (1, 0), (1, 2), (2, 1)]).unwrap();
        let err = enumerate_anchor_paths_digraph(&g, 3, 5).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        assert_eq!(enumerate_anchor_paths_digraph(&g, 1, 4).unwrap().len(), 4);
    }

    #[test]
    fn single_hyperedge_covers_all_ordered_pairs() {
        let h = Hypergraph::from_hyperedges(&[&[0, 1, 2]]).unwrap();
        let got = enumerate_anchor_paths_hypergraph(&h, 1, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(
            got,
            paths(&[&[0, 1], &[0, 2], &[1, 0], &[1, 2], &[2, 0], &[2, 1]])
        );
    }

    #[test]
    fn singleton_hyperedges_give_no_walks() {
        let h = Hypergraph::from_hyperedges(&[&[0], &[1]]).unwrap();
        assert!(enumerate_anchor_paths_hypergraph(&h, 1, 10)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn two_hyperedge_chain_degree_two() {
        let h = Hypergraph::from_hyperedges(&[&[0, 1], &[1, 2]]).unwrap();
        let got = enumerate_anchor_paths_hypergraph(&h, 2, DEFAULT_PATH_CAP).unwrap();
        let mut want = paths(&[
            &[0, 1, 0],
            &[0, 1, 2],
            &[1, 0, 1],
            &[2, 1, 0],
            &[2, 1, 2],
            &[1, 2, 1],
        ]);
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn essential_graph_examples() {
        let h = Hypergraph::from_hyperedges(&[&[0, 1, 2]]).unwrap();
        assert_eq!(essential_graph(&h).edges().len(), 3);
        let nested = Hypergraph::from_hyperedges(&[&[0, 1], &[0, 1, 2]]).unwrap();
        assert_eq!(essential_graph(&nested), essential_graph(&h));
        let two = Hypergraph::from_hyperedges(&[&[0, 1, 2], &[3, 4, 5]]).unwrap();
        let eg = essential_graph(&two);
        assert_eq!(eg.vertices().len(), 6);
        assert_eq!(eg.edges().len(), 6);
        assert_eq!(eg.component_count(), 2);
    }

    #[test]
    fn maximal_hyperedge_reduction() {
        let h = Hypergraph::from_hyperedges(&[&[0, 1], &[0, 1, 2]]).unwrap();
        let want = Hypergraph::from_hyperedges(&[&[0, 1, 2]]).unwrap();
        assert_eq!(maximal_hyperedges(&h), want);
        let h = Hypergraph::from_hyperedges(&[&[0], &[0, 1], &[1, 2], &[0, 1, 2]]).unwrap();
        assert_eq!(maximal_hyperedges(&h), want);
        let incomparable = Hypergraph::from_hyperedges(&[&[0, 1], &[1, 2], &[2, 3]]).unwrap();
        assert_eq!(maximal_hyperedges(&incomparable), incomparable);
    }

    #[test]
    fn symmetric_closure_examples() {
        let edge =
            UndirectedGraph::new([VertexId(0), VertexId(1)], [(VertexId(0), VertexId(1))]).unwrap();
        let d = symmetric_closure(&edge);
        assert!(d.has_edge(VertexId(0), VertexId(1)) && d.has_edge(VertexId(1), VertexId(0)));
        assert_eq!(d.edges().len(), 2);
        let empty = UndirectedGraph::new([], []).unwrap();
        assert!(symmetric_closure(&empty).edges().is_empty());
        let tri = essential_graph(&Hypergraph::from_hyperedges(&[&[0, 1, 2]]).unwrap());
        assert_eq!(symmetric_closure(&tri).edges().len(), 6);
    }

    #[test]
    fn h1_formulas_small_cases() {
        assert_eq!(h1_rank_digraph(&cyclic(), 0).unwrap().rank, 1);
        assert_eq!(h1_rank_digraph(&transitive(), 1).unwrap().rank, 0);
        let recip = Digraph::on_range(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(recip.reciprocal_pair_count(), 1);
        assert_eq!(h1_rank_digraph(&recip, 0).unwrap().upper_bound, 1);
        assert!(matches!(
            h1_rank_digraph(&transitive(), 2),
            Err(Error::Structural(_))
        ));

        let two = Hypergraph::from_hyperedges(&[&[0, 1, 2], &[3, 4, 5]]).unwrap();
        let r = h1_rank_hypergraph(&two, 8).unwrap();
        assert_eq!((r.upper_bound, r.rank), (8, 0));
    }

    #[test]
    fn display_formats() {
        assert_eq!(ElementaryPath::from_ids(&[0, 1, 2]).to_string(), "(0,1,2)");
        assert_eq!(ElementaryPath::from_ids(&[4]).degree(), 0);
        assert!(!ElementaryPath::from_ids(&[0, 0, 1]).is_regular());
    }
}
