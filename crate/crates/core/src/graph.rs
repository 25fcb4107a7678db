//! Bidirected graphs over the variables of a table.
//!
//! Vertices are addressed by position, matching the variable order of the
//! table the graph describes, so vertex sets are [`VarSet`]s.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::varset::{VarSet, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidirectedGraph {
    vertices: Vec<String>,
    // (a, b) with a < b
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Independence,
    Edge,
    Gamma,
    Saturated,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GraphKind::Independence => "independence",
            GraphKind::Edge => "edge",
            GraphKind::Gamma => "gamma",
            GraphKind::Saturated => "saturated",
        };
        f.write_str(s)
    }
}

/// Shape of a three-vertex graph. `corner` is the degree-2 vertex of a gamma
/// graph and `None` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphClass {
    pub kind: GraphKind,
    pub corner: Option<usize>,
}

/// `left ⫫ right | given`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndependenceStatement {
    pub left: VarSet,
    pub right: VarSet,
    pub given: VarSet,
}

impl IndependenceStatement {
    fn normalized(a: VarSet, b: VarSet, given: VarSet) -> Self {
        let (left, right) = if a.canonical_cmp(&b).is_le() { (a, b) } else { (b, a) };
        IndependenceStatement { left, right, given }
    }

    pub fn render<S: AsRef<str>>(&self, names: &[S]) -> String {
        let mut s = format!("{} _||_ {}", self.left.render(names), self.right.render(names));
        if !self.given.is_empty() {
            s.push_str(" | ");
            s.push_str(&self.given.render(names));
        }
        s
    }
}

impl BidirectedGraph {
    /// Build a graph from vertex names and edges given by name.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(&str, &str)]) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|s| s.as_ref().to_string()).collect();
        let find = |n: &str| {
            vertices
                .iter()
                .position(|v| v == n)
                .ok_or_else(|| Error::UnknownVertex(n.to_string()))
        };
        let pairs = edges
            .iter()
            .map(|(a, b)| Ok((find(a)?, find(b)?)))
            .collect::<Result<Vec<_>>>()?;
        BidirectedGraph::from_indices(vertices, &pairs)
    }

    pub fn from_indices(vertices: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        if vertices.len() > MAX_VARS {
            return Err(Error::InvalidGraph(format!(
                "at most {MAX_VARS} vertices are supported"
            )));
        }
        let distinct: BTreeSet<&String> = vertices.iter().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::InvalidGraph("duplicate vertex name".into()));
        }
        let n = vertices.len();
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!(
                    "self-loop on `{}`",
                    vertices[a]
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(BidirectedGraph {
            vertices,
            edges: set,
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn all(&self) -> VarSet {
        VarSet::full(self.vertices.len())
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    /// `sp(v)` as a set of positions.
    pub fn spouse_set(&self, v: usize) -> VarSet {
        self.edges.iter().fold(VarSet::EMPTY, |s, &(a, b)| {
            if a == v {
                s.with(b)
            } else if b == v {
                s.with(a)
            } else {
                s
            }
        })
    }

    /// `sp(A) = ∪ sp(v), v ∈ A`.
    pub fn spouses_of_set(&self, set: VarSet) -> VarSet {
        set.iter()
            .fold(VarSet::EMPTY, |s, v| s.union(self.spouse_set(v)))
    }

    /// Names of the vertices adjacent to `v`.
    pub fn spouses(&self, v: &str) -> Result<Vec<String>> {
        let i = self.vertex_index(v)?;
        Ok(self
            .spouse_set(i)
            .iter()
            .map(|j| self.vertices[j].clone())
            .collect())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.spouse_set(v).len()
    }

    /// True if the subgraph induced by `set` is connected. The empty set is
    /// not connected.
    pub fn is_connected(&self, set: VarSet) -> bool {
        match set.iter().next() {
            None => false,
            Some(start) => self.reach(start, set) == set,
        }
    }

    fn reach(&self, start: usize, within: VarSet) -> VarSet {
        let mut seen = VarSet::singleton(start);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in self.spouse_set(v).intersection(within).iter() {
                if !seen.contains(w) {
                    seen = seen.with(w);
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Partition of `d` into maximal connected sets of the induced subgraph,
    /// ordered by smallest member.
    pub fn maximal_connected_components(&self, d: VarSet) -> Vec<VarSet> {
        let mut rest = d.intersection(self.all());
        let mut parts = Vec::new();
        while let Some(v) = rest.iter().next() {
            let part = self.reach(v, rest);
            rest = rest.difference(part);
            parts.push(part);
        }
        parts
    }

    /// `D(G)`: every vertex subset with at least two members that is not
    /// connected, ordered by cardinality then member positions.
    pub fn disconnected_sets(&self) -> Vec<VarSet> {
        let mut out: Vec<VarSet> = self
            .all()
            .subsets()
            .filter(|s| s.len() >= 2 && !self.is_connected(*s))
            .collect();
        out.sort_by(VarSet::canonical_cmp);
        out
    }

    pub fn classify(&self) -> Result<GraphClass> {
        if self.num_vertices() != 3 {
            return Err(Error::UnsupportedDimension(self.num_vertices()));
        }
        let class = match self.num_edges() {
            0 => GraphClass {
                kind: GraphKind::Independence,
                corner: None,
            },
            1 => GraphClass {
                kind: GraphKind::Edge,
                corner: None,
            },
            2 => GraphClass {
                kind: GraphKind::Gamma,
                corner: (0..3).find(|&v| self.degree(v) == 2),
            },
            _ => GraphClass {
                kind: GraphKind::Saturated,
                corner: None,
            },
        };
        Ok(class)
    }

    /// Maximal cliques, largest first, ties by member positions.
    pub fn maximal_cliques(&self) -> Vec<VarSet> {
        let mut out = Vec::new();
        self.bron_kerbosch(VarSet::EMPTY, self.all(), VarSet::EMPTY, &mut out);
        out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.to_vec().cmp(&b.to_vec())));
        out
    }

    fn bron_kerbosch(&self, r: VarSet, mut p: VarSet, mut x: VarSet, out: &mut Vec<VarSet>) {
        if p.is_empty() && x.is_empty() {
            out.push(r);
            return;
        }
        for v in p.to_vec() {
            let nb = self.spouse_set(v);
            self.bron_kerbosch(r.with(v), p.intersection(nb), x.intersection(nb), out);
            p = p.difference(VarSet::singleton(v));
            x = x.with(v);
        }
    }

    /// Model label: maximal cliques joined by `+`, e.g. `SC+A`, `AS+SC`.
    pub fn label(&self) -> String {
        self.maximal_cliques()
            .iter()
            .map(|c| c.render(&self.vertices))
            .collect::<Vec<_>>()
            .join("+")
    }

    /// Independences given by the connected set Markov property:
    /// `C ⫫ V∖(C ∪ sp(C))` for every connected `C`, symmetric duplicates
    /// removed.
    pub fn markov_independences(&self) -> Vec<IndependenceStatement> {
        let all = self.all();
        let mut connected: Vec<VarSet> = all.subsets().filter(|c| self.is_connected(*c)).collect();
        connected.sort_by(VarSet::canonical_cmp);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for c in connected {
            let rest = all.difference(c.union(self.spouses_of_set(c)));
            if rest.is_empty() {
                continue;
            }
            let st = IndependenceStatement::normalized(c, rest, VarSet::EMPTY);
            if seen.insert((st.left.bits(), st.right.bits())) {
                out.push(st);
            }
        }
        out
    }

    /// Same graph with vertices reordered: new vertex `k` is old `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<BidirectedGraph> {
        let n = self.num_vertices();
        if order.len() != n || order.iter().collect::<BTreeSet<_>>().len() != n || order.iter().any(|&o| o >= n) {
            return Err(Error::InvalidArgument(format!("{order:?} is not a permutation")));
        }
        let mut inverse = vec![0; n];
        for (k, &o) in order.iter().enumerate() {
            inverse[o] = k;
        }
        let vertices = order.iter().map(|&o| self.vertices[o].clone()).collect();
        let edges: Vec<_> = self.edges().map(|(a, b)| (inverse[a], inverse[b])).collect();
        BidirectedGraph::from_indices(vertices, &edges)
    }
}

/// The eight bidirected graphs on three variables, in canonical order:
/// independence, the three single-edge graphs, the three gamma graphs
/// (corner at the first, second, third variable), saturated.
pub fn enumerate_models<S: AsRef<str>>(names: &[S]) -> Result<Vec<BidirectedGraph>> {
    if names.len() != 3 {
        return Err(Error::UnsupportedDimension(names.len()));
    }
    let vertices: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
    let edge_sets: [&[(usize, usize)]; 8] = [
        &[],
        &[(0, 1)],
        &[(0, 2)],
        &[(1, 2)],
        &[(0, 1), (0, 2)],
        &[(0, 1), (1, 2)],
        &[(0, 2), (1, 2)],
        &[(0, 1), (0, 2), (1, 2)],
    ];
    edge_sets
        .iter()
        .map(|e| BidirectedGraph::from_indices(vertices.clone(), e))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asc() -> Vec<BidirectedGraph> {
        enumerate_models(&["A", "S", "C"]).unwrap()
    }

    fn set(g: &BidirectedGraph, names: &str) -> VarSet {
        names
            .chars()
            .map(|c| g.vertex_index(&c.to_string()).unwrap())
            .fold(VarSet::EMPTY, VarSet::with)
    }

    /// Brute-force connectivity: a set is connected iff every pair is joined
    /// by a path inside it. Paths are found by checking all vertex sequences.
    fn pair_connected(g: &BidirectedGraph, within: VarSet, a: usize, b: usize) -> bool {
        fn go(g: &BidirectedGraph, within: VarSet, cur: usize, b: usize, used: VarSet) -> bool {
            cur == b
                || within.iter().any(|w| {
                    !used.contains(w) && g.has_edge(cur, w) && go(g, within, w, b, used.with(w))
                })
        }
        go(g, within, a, b, VarSet::singleton(a))
    }

    #[test]
    fn labels_match_canonical_order() {
        let labels: Vec<_> = asc().iter().map(|g| g.label()).collect();
        assert_eq!(
            labels,
            ["A+S+C", "AS+C", "AC+S", "SC+A", "AS+AC", "AS+SC", "AC+SC", "ASC"]
        );
        let alcohol: Vec<_> = enumerate_models(&["H", "A", "O"])
            .unwrap()
            .iter()
            .map(|g| g.label())
            .collect();
        assert_eq!(
            alcohol,
            ["H+A+O", "HA+O", "HO+A", "AO+H", "HA+HO", "HA+AO", "HO+AO", "HAO"]
        );
    }

    #[test]
    fn each_edge_in_four_models() {
        let models = asc();
        assert_eq!(models.len(), 8);
        for e in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(models.iter().filter(|g| g.has_edge(e.0, e.1)).count(), 4);
        }
    }

    #[test]
    fn spouses_examples() {
        let m = asc();
        assert_eq!(m[7].spouses("A").unwrap(), vec!["S", "C"]);
        assert_eq!(m[5].spouses("S").unwrap(), vec!["A", "C"]);
        assert!(m[0].spouses("A").unwrap().is_empty());
        assert!(matches!(m[0].spouses("Z"), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn components_match_brute_force() {
        for g in asc() {
            for d in g.all().subsets() {
                let parts = g.maximal_connected_components(d);
                assert_eq!(parts.iter().fold(VarSet::EMPTY, |s, p| s.union(*p)), d);
                for (i, p) in parts.iter().enumerate() {
                    for q in &parts[i + 1..] {
                        assert!(p.is_disjoint(*q));
                        for a in p.iter() {
                            for b in q.iter() {
                                assert!(!pair_connected(&g, d, a, b));
                            }
                        }
                    }
                    for a in p.iter() {
                        for b in p.iter() {
                            assert!(pair_connected(&g, d, a, b));
                        }
                    }
                }
            }
        }
        let sc_a = &asc()[3];
        let parts = sc_a.maximal_connected_components(sc_a.all());
        assert_eq!(parts, vec![set(sc_a, "A"), set(sc_a, "SC")]);
    }

    #[test]
    fn disconnected_set_examples() {
        let m = asc();
        let g = &m[3];
        assert_eq!(
            g.disconnected_sets(),
            vec![set(g, "AS"), set(g, "AC"), set(g, "ASC")]
        );
        assert_eq!(m[5].disconnected_sets(), vec![set(&m[5], "AC")]);
        assert!(m[7].disconnected_sets().is_empty());
        let counts: Vec<_> = m.iter().map(|g| g.disconnected_sets().len()).collect();
        assert_eq!(counts, [4, 3, 3, 3, 1, 1, 1, 0]);
    }

    #[test]
    fn classify_examples() {
        let m = asc();
        assert_eq!(m[0].classify().unwrap().kind, GraphKind::Independence);
        assert_eq!(m[1].classify().unwrap().kind, GraphKind::Edge);
        let gamma = m[5].classify().unwrap();
        assert_eq!(gamma.kind, GraphKind::Gamma);
        assert_eq!(gamma.corner, Some(1));
        assert_eq!(m[7].classify().unwrap().kind, GraphKind::Saturated);
        for g in &m[4..7] {
            let c = g.classify().unwrap().corner.unwrap();
            assert_eq!(g.degree(c), 2);
            assert!((0..3).filter(|&v| v != c).all(|v| g.degree(v) == 1));
        }
        let four = BidirectedGraph::new(&["A", "B", "C", "D"], &[]).unwrap();
        assert!(matches!(four.classify(), Err(Error::UnsupportedDimension(4))));
        assert!(enumerate_models(&["A", "B"]).is_err());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(BidirectedGraph::new(&["A", "B"], &[("A", "A")]).is_err());
        assert!(BidirectedGraph::new(&["A", "B"], &[("A", "Q")]).is_err());
        assert!(BidirectedGraph::new(&["A", "A"], &[]).is_err());
    }

    #[test]
    fn markov_examples() {
        let m = asc();
        let g = &m[3];
        let st = g.markov_independences();
        let names = g.vertices();
        let rendered: Vec<_> = st.iter().map(|s| s.render(names)).collect();
        assert!(rendered.contains(&"A _||_ SC".to_string()), "{rendered:?}");
        assert!(m[7].markov_independences().is_empty());
        let ind: Vec<_> = m[0]
            .markov_independences()
            .iter()
            .map(|s| s.render(names))
            .collect();
        assert_eq!(ind, ["A _||_ SC", "S _||_ AC", "C _||_ AS"]);
        // gamma AS+SC: A and C are marginally independent
        let gamma: Vec<_> = m[5].markov_independences().iter().map(|s| s.render(names)).collect();
        assert_eq!(gamma, ["A _||_ C"]);
    }

    #[test]
    fn relabeling_is_equivariant() {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for g in asc() {
            for perm in perms {
                let p = g.permuted(&perm).unwrap();
                let mut inverse = [0; 3];
                for (k, &o) in perm.iter().enumerate() {
                    inverse[o] = k;
                }
                let map = |s: VarSet| VarSet::from_indices(s.iter().map(|v| inverse[v]));
                let mut expected: Vec<VarSet> = g.disconnected_sets().into_iter().map(map).collect();
                expected.sort_by(VarSet::canonical_cmp);
                assert_eq!(p.disconnected_sets(), expected);
                let mut a: Vec<_> = g
                    .markov_independences()
                    .iter()
                    .map(|s| IndependenceStatement::normalized(map(s.left), map(s.right), map(s.given)))
                    .collect();
                let mut b = p.markov_independences();
                a.sort_by_key(|s| (s.left.bits(), s.right.bits()));
                b.sort_by_key(|s| (s.left.bits(), s.right.bits()));
                assert_eq!(a, b);
            }
        }
    }
}
