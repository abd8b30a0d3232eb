//! Graphs, payoff parameters, strategy profiles and edge classification.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::Add;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A finite simple undirected graph with string node ids.
///
/// Nodes keep their declaration order. Each edge is stored once as an index
/// pair whose first endpoint has the lexicographically smaller id, and the
/// edge list is sorted lexicographically on ids.
#[derive(Debug, Clone)]
pub struct Graph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for Graph {}

impl Graph {
    /// Validates and builds a graph (`build_graph`).
    pub fn new<N, E, S>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator,
        N::Item: Into<String>,
        E: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, id) in nodes.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(id.clone()));
            }
        }
        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        for (u, v) in edges {
            let (u, v) = (u.as_ref(), v.as_ref());
            let iu = *index
                .get(u)
                .ok_or_else(|| Error::UnknownEndpoint(u.to_string()))?;
            let iv = *index
                .get(v)
                .ok_or_else(|| Error::UnknownEndpoint(v.to_string()))?;
            if iu == iv {
                return Err(Error::SelfLoop(u.to_string()));
            }
            let pair = if nodes[iu] < nodes[iv] {
                (iu, iv)
            } else {
                (iv, iu)
            };
            if !seen.insert(pair) {
                return Err(Error::DuplicateEdge(
                    nodes[pair.0].clone(),
                    nodes[pair.1].clone(),
                ));
            }
            pairs.push(pair);
        }
        Ok(Self::from_parts(nodes, index, pairs))
    }

    fn from_parts(
        nodes: Vec<String>,
        index: HashMap<String, usize>,
        mut edges: Vec<(usize, usize)>,
    ) -> Self {
        edges.sort_by(|a, b| (&nodes[a.0], &nodes[a.1]).cmp(&(&nodes[b.0], &nodes[b.1])));
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self {
            nodes,
            index,
            edges,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges as index pairs, in canonical order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges as id pairs, in canonical order.
    pub fn edge_ids(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(u, v)| (self.nodes[u].as_str(), self.nodes[v].as_str()))
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// The subgraph spanned by the given edges (indices into [`Graph::edges`]).
    /// Its nodes are exactly the endpoints, in the parent's node order.
    pub fn edge_induced_subgraph(&self, edge_indices: &[usize]) -> Graph {
        let mut keep = vec![false; self.nodes.len()];
        for &e in edge_indices {
            let (u, v) = self.edges[e];
            keep[u] = true;
            keep[v] = true;
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        let mut index = HashMap::new();
        for (i, id) in self.nodes.iter().enumerate() {
            if keep[i] {
                remap[i] = nodes.len();
                index.insert(id.clone(), nodes.len());
                nodes.push(id.clone());
            }
        }
        let edges = edge_indices
            .iter()
            .map(|&e| {
                let (u, v) = self.edges[e];
                (remap[u], remap[v])
            })
            .collect();
        Self::from_parts(nodes, index, edges)
    }
}

/// Payoffs of the coordination game: `alpha` for an A–A edge, `beta` for
/// B–B and `gamma` for a mixed edge.
///
/// Always satisfies `0 <= gamma <= beta <= alpha` and `beta > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    alpha: Rational,
    beta: Rational,
    gamma: Rational,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(with = "rational::serde_str")]
    alpha: Rational,
    #[serde(with = "rational::serde_str")]
    beta: Rational,
    #[serde(with = "rational::serde_str")]
    gamma: Rational,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.alpha, raw.beta, raw.gamma)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
        }
    }
}

impl Params {
    /// `validate_params`.
    pub fn new(alpha: Rational, beta: Rational, gamma: Rational) -> Result<Self> {
        if !beta.is_positive() {
            return Err(Error::InvalidParams(format!(
                "beta > 0 violated (beta = {beta})"
            )));
        }
        if beta > alpha {
            return Err(Error::InvalidParams(format!(
                "beta <= alpha violated (beta = {beta}, alpha = {alpha})"
            )));
        }
        if gamma.is_negative() {
            return Err(Error::InvalidParams(format!(
                "gamma >= 0 violated (gamma = {gamma})"
            )));
        }
        if gamma > beta {
            return Err(Error::InvalidParams(format!(
                "gamma <= beta violated (gamma = {gamma}, beta = {beta})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Convenience for small integer triples.
    pub fn from_ints(alpha: i64, beta: i64, gamma: i64) -> Result<Self> {
        Self::new(
            rational::int(alpha),
            rational::int(beta),
            rational::int(gamma),
        )
    }

    pub fn parse(alpha: &str, beta: &str, gamma: &str) -> Result<Self> {
        let parse =
            |s: &str| rational::parse_rational(s).map_err(|e| Error::InvalidParams(e.to_string()));
        Self::new(parse(alpha)?, parse(beta)?, parse(gamma)?)
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    /// The payoff matrix entry W(s, t).
    pub fn payoff(&self, s: Strategy, t: Strategy) -> &Rational {
        match (s, t) {
            (Strategy::A, Strategy::A) => &self.alpha,
            (Strategy::B, Strategy::B) => &self.beta,
            _ => &self.gamma,
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(alpha={}, beta={}, gamma={})",
            self.alpha, self.beta, self.gamma
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    A,
    B,
}

impl Strategy {
    pub fn flip(self) -> Self {
        match self {
            Strategy::A => Strategy::B,
            Strategy::B => Strategy::A,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::A => "A",
            Strategy::B => "B",
        })
    }
}

/// A pure strategy for every node, indexed like the graph's node list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile(Vec<Strategy>);

impl Profile {
    pub fn new(strategies: Vec<Strategy>) -> Self {
        Self(strategies)
    }

    pub fn uniform(len: usize, s: Strategy) -> Self {
        Self(vec![s; len])
    }

    /// Profile number `index` in binary-counter order: bit `i` set means
    /// node `i` plays B, so index 0 is all-A.
    pub fn from_index(len: usize, index: u64) -> Self {
        Self(
            (0..len)
                .map(|i| {
                    if index >> i & 1 == 1 {
                        Strategy::B
                    } else {
                        Strategy::A
                    }
                })
                .collect(),
        )
    }

    /// Builds a profile from an id → strategy map that must cover the
    /// graph's nodes exactly.
    pub fn from_assignment<'a, I>(g: &Graph, assignment: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Strategy)>,
    {
        let mut slots: Vec<Option<Strategy>> = vec![None; g.node_count()];
        for (id, s) in assignment {
            let i = g
                .node_index(id)
                .ok_or_else(|| Error::ProfileMismatch(format!("`{id}` is not a node")))?;
            if slots[i].replace(s).is_some() {
                return Err(Error::ProfileMismatch(format!("`{id}` assigned twice")));
            }
        }
        slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| {
                    Error::ProfileMismatch(format!("no strategy for `{}`", g.node_id(i)))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Strategy {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, s: Strategy) {
        self.0[i] = s;
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.0
    }

    /// Every strategy swapped A ↔ B.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| s.flip()).collect())
    }

    pub fn check_covers(&self, g: &Graph) -> Result<()> {
        if self.0.len() == g.node_count() {
            Ok(())
        } else {
            Err(Error::ProfileMismatch(format!(
                "profile has {} strategies, graph has {} nodes",
                self.0.len(),
                g.node_count()
            )))
        }
    }

    /// Restriction to a subgraph whose nodes all belong to `parent`.
    pub fn restrict(&self, parent: &Graph, sub: &Graph) -> Result<Self> {
        self.check_covers(parent)?;
        sub.nodes()
            .iter()
            .map(|id| {
                parent
                    .node_index(id)
                    .map(|i| self.0[i])
                    .ok_or_else(|| Error::ProfileMismatch(format!("`{id}` not in parent graph")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn to_map(&self, g: &Graph) -> BTreeMap<String, Strategy> {
        g.nodes()
            .iter()
            .cloned()
            .zip(self.0.iter().copied())
            .collect()
    }

    /// Compact form such as `AABB`.
    pub fn to_letters(&self) -> String {
        self.0.iter().map(|s| s.to_string()).collect()
    }
}

/// Counts of A-, B- and C-edges. Components may be fractional.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeState {
    #[serde(with = "rational::serde_str")]
    pub n_ea: Rational,
    #[serde(with = "rational::serde_str")]
    pub n_eb: Rational,
    #[serde(with = "rational::serde_str")]
    pub n_ec: Rational,
}

impl EdgeState {
    pub fn new(n_ea: Rational, n_eb: Rational, n_ec: Rational) -> Self {
        Self { n_ea, n_eb, n_ec }
    }

    pub fn from_counts(n_ea: u64, n_eb: u64, n_ec: u64) -> Self {
        let q = |n: u64| Rational::from_integer(n.into());
        Self::new(q(n_ea), q(n_eb), q(n_ec))
    }

    pub fn zero() -> Self {
        Self::from_counts(0, 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.n_ea.is_zero() && self.n_eb.is_zero() && self.n_ec.is_zero()
    }

    pub fn is_nonnegative(&self) -> bool {
        [&self.n_ea, &self.n_eb, &self.n_ec]
            .into_iter()
            .all(rational::is_nonnegative)
    }

    pub fn total(&self) -> Rational {
        &self.n_ea + &self.n_eb + &self.n_ec
    }

    /// SW = 2(n_ea·α + n_eb·β + n_ec·γ).
    pub fn welfare(&self, p: &Params) -> Rational {
        (&self.n_ea * p.alpha() + &self.n_eb * p.beta() + &self.n_ec * p.gamma()) * rational::int(2)
    }

    /// Welfare of an all-A state with the same number of edges.
    pub fn optimal_welfare(&self, p: &Params) -> Rational {
        self.total() * p.alpha() * rational::int(2)
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self::new(
            &self.n_ea * factor,
            &self.n_eb * factor,
            &self.n_ec * factor,
        )
    }
}

impl Add for &EdgeState {
    type Output = EdgeState;

    fn add(self, rhs: &EdgeState) -> EdgeState {
        EdgeState::new(
            &self.n_ea + &rhs.n_ea,
            &self.n_eb + &rhs.n_eb,
            &self.n_ec + &rhs.n_ec,
        )
    }
}

impl fmt::Display for EdgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n_ea, self.n_eb, self.n_ec)
    }
}

/// Which of the three types an edge is under a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    A,
    B,
    C,
}

pub fn edge_kind(s: &Profile, (u, v): (usize, usize)) -> EdgeKind {
    match (s.get(u), s.get(v)) {
        (Strategy::A, Strategy::A) => EdgeKind::A,
        (Strategy::B, Strategy::B) => EdgeKind::B,
        _ => EdgeKind::C,
    }
}

pub(crate) fn count_kinds<'a>(
    s: &Profile,
    edges: impl IntoIterator<Item = &'a (usize, usize)>,
) -> EdgeState {
    let (mut a, mut b, mut c) = (0u64, 0u64, 0u64);
    for &e in edges {
        match edge_kind(s, e) {
            EdgeKind::A => a += 1,
            EdgeKind::B => b += 1,
            EdgeKind::C => c += 1,
        }
    }
    EdgeState::from_counts(a, b, c)
}

/// Counts the A-, B- and C-edges of `g` under `s`.
pub fn classify_edges(g: &Graph, s: &Profile) -> Result<EdgeState> {
    s.check_covers(g)?;
    Ok(count_kinds(s, g.edges()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use Strategy::{A, B};

    pub(crate) fn nine_edge_graph() -> Graph {
        Graph::new(
            ["a1", "a2", "b1", "b2", "b3", "b4"],
            [
                ("a1", "a2"),
                ("a1", "b1"),
                ("a1", "b2"),
                ("a2", "b3"),
                ("a2", "b4"),
                ("b1", "b2"),
                ("b2", "b3"),
                ("b3", "b4"),
                ("b4", "b1"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn build_smallest_graph() {
        let g = Graph::new(["v1", "v2"], [("v1", "v2")]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn build_rejects_invalid_input() {
        assert_eq!(
            Graph::new(["v1"], [("v1", "v1")]),
            Err(Error::SelfLoop("v1".into()))
        );
        assert_eq!(
            Graph::new(["v1", "v1"], Vec::<(&str, &str)>::new()),
            Err(Error::DuplicateNode("v1".into()))
        );
        assert_eq!(
            Graph::new(["v1", "v2"], [("v2", "v1"), ("v1", "v2")]),
            Err(Error::DuplicateEdge("v1".into(), "v2".into()))
        );
        assert_eq!(
            Graph::new(["v1"], [("v1", "x")]),
            Err(Error::UnknownEndpoint("x".into()))
        );
    }

    #[test]
    fn build_nine_edge_realization() {
        let g = nine_edge_graph();
        assert_eq!((g.node_count(), g.edge_count()), (6, 9));
        // canonical: lexicographically ordered pairs, smaller id first
        assert!(g.edge_ids().any(|e| e == ("b1", "b4")));
        let ids: Vec<_> = g.edge_ids().collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn params_validation() {
        assert!(Params::from_ints(3, 2, 1).is_ok());
        assert!(Params::from_ints(1, 1, 1).is_ok());
        let err = Params::from_ints(1, 2, 0).unwrap_err();
        assert!(matches!(&err, Error::InvalidParams(m) if m.contains("beta <= alpha")));
        assert!(
            matches!(Params::from_ints(1, 0, 0), Err(Error::InvalidParams(m)) if m.contains("beta > 0"))
        );
        assert!(
            matches!(Params::from_ints(2, 1, -1), Err(Error::InvalidParams(m)) if m.contains("gamma >= 0"))
        );
        assert!(
            matches!(Params::from_ints(3, 1, 2), Err(Error::InvalidParams(m)) if m.contains("gamma <= beta"))
        );
        assert!(Params::parse("3", "2", "x").is_err());
        assert_eq!(
            Params::parse("1.5", "3/2", "0.5").unwrap().gamma(),
            &crate::rational::ratio(1, 2)
        );
    }

    #[test]
    fn params_json_is_string_encoded_and_validated() {
        let p = Params::parse("3", "2", "1/2").unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"alpha":"3","beta":"2","gamma":"1/2"}"#);
        assert_eq!(serde_json::from_str::<Params>(&json).unwrap(), p);
        assert!(serde_json::from_str::<Params>(r#"{"alpha":"1","beta":"2","gamma":"0"}"#).is_err());
    }

    #[test]
    fn classify_cycle_and_nine_edge() {
        let c4 = Graph::new(
            ["v1", "v2", "v3", "v4"],
            [("v1", "v2"), ("v2", "v3"), ("v3", "v4"), ("v4", "v1")],
        )
        .unwrap();
        let s = Profile::new(vec![A, A, B, B]);
        assert_eq!(
            classify_edges(&c4, &s).unwrap(),
            EdgeState::from_counts(1, 1, 2)
        );
        assert_eq!(
            classify_edges(&c4, &Profile::uniform(4, A)).unwrap(),
            EdgeState::from_counts(4, 0, 0)
        );

        let g = nine_edge_graph();
        let s = Profile::new(vec![A, A, B, B, B, B]);
        assert_eq!(
            classify_edges(&g, &s).unwrap(),
            EdgeState::from_counts(1, 4, 4)
        );
    }

    #[test]
    fn classify_rejects_short_profile() {
        let g = nine_edge_graph();
        assert!(matches!(
            classify_edges(&g, &Profile::uniform(5, A)),
            Err(Error::ProfileMismatch(_))
        ));
    }

    #[test]
    fn profile_from_assignment() {
        let g = Graph::new(["x", "y"], [("x", "y")]).unwrap();
        let s = Profile::from_assignment(&g, [("y", B), ("x", A)]).unwrap();
        assert_eq!(s.strategies(), &[A, B]);
        assert!(Profile::from_assignment(&g, [("x", A)]).is_err());
        assert!(Profile::from_assignment(&g, [("x", A), ("y", A), ("z", B)]).is_err());
        assert!(Profile::from_assignment(&g, [("x", A), ("x", B)]).is_err());
    }

    #[test]
    fn binary_counter_profiles() {
        assert_eq!(Profile::from_index(3, 0).to_letters(), "AAA");
        assert_eq!(Profile::from_index(3, 1).to_letters(), "BAA");
        assert_eq!(Profile::from_index(3, 6).to_letters(), "ABB");
    }

    #[test]
    fn edge_induced_subgraph_keeps_only_endpoints() {
        let g = nine_edge_graph();
        // edges are sorted: index 0 is (a1,a2)
        let sub = g.edge_induced_subgraph(&[0]);
        assert_eq!(sub.nodes(), &["a1".to_string(), "a2".to_string()]);
        assert_eq!(sub.edge_count(), 1);
        let s = Profile::new(vec![A, A, B, B, B, B]);
        assert_eq!(s.restrict(&g, &sub).unwrap().strategies(), &[A, A]);
    }

    #[test]
    fn edge_state_arithmetic() {
        let n = EdgeState::from_counts(1, 4, 4);
        let p = Params::from_ints(3, 2, 1).unwrap();
        assert_eq!(n.welfare(&p), int(30));
        assert_eq!(n.optimal_welfare(&p), int(54));
        assert_eq!(
            &n + &EdgeState::from_counts(1, 0, 0),
            EdgeState::from_counts(2, 4, 4)
        );
        assert_eq!(n.scale(&int(2)).total(), int(18));
    }
}
