//! Graph file formats.
//!
//! JSON:
//!
//! ```json
//! {"nodes": ["u", "v"], "edges": [["u", "v"]], "strategies": {"u": "A", "v": "B"}}
//! ```
//!
//! `strategies` is optional. The plain-text edge list has one `u v` pair per
//! line; blank lines and lines starting with `#` are ignored, and nodes are
//! declared in order of first appearance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Profile, Strategy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<String>,
    pub edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<BTreeMap<String, Strategy>>,
}

impl GraphDocument {
    pub fn from_graph(g: &Graph, profile: Option<&Profile>) -> Self {
        Self {
            nodes: g.nodes().to_vec(),
            edges: g
                .edge_ids()
                .map(|(u, v)| [u.to_string(), v.to_string()])
                .collect(),
            strategies: profile.map(|s| s.to_map(g)),
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(
            self.nodes.iter().cloned(),
            self.edges.iter().map(|[u, v]| (u.as_str(), v.as_str())),
        )
    }

    /// The stored profile; [`Error::ProfileMismatch`] if it is missing or
    /// does not cover the graph exactly.
    pub fn profile(&self, g: &Graph) -> Result<Profile> {
        let strategies = self
            .strategies
            .as_ref()
            .ok_or_else(|| Error::ProfileMismatch("no \"strategies\" in graph file".into()))?;
        Profile::from_assignment(g, strategies.iter().map(|(k, v)| (k.as_str(), *v)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph documents always serialize")
    }
}

pub fn parse_json(text: &str) -> Result<GraphDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph JSON: {e}")))
}

pub fn parse_edge_list(text: &str) -> Result<GraphDocument> {
    let mut nodes: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [u, v] = fields[..] else {
            return Err(Error::Parse(format!(
                "line {}: expected `u v`, got `{line}`",
                lineno + 1
            )));
        };
        for id in [u, v] {
            if !nodes.iter().any(|n| n == id) {
                nodes.push(id.to_string());
            }
        }
        edges.push([u.to_string(), v.to_string()]);
    }
    Ok(GraphDocument {
        nodes,
        edges,
        strategies: None,
    })
}

/// JSON when the text starts with `{`, an edge list otherwise.
pub fn parse_graph_text(text: &str) -> Result<GraphDocument> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_edge_list(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Strategy::{A, B};

    #[test]
    fn json_round_trip() {
        let text = r#"{"nodes":["v1","v2","v3"],"edges":[["v2","v1"],["v2","v3"]],
                       "strategies":{"v1":"A","v2":"A","v3":"B"}}"#;
        let doc = parse_graph_text(text).unwrap();
        let g = doc.to_graph().unwrap();
        let s = doc.profile(&g).unwrap();
        assert_eq!(s.strategies(), &[A, A, B]);
        let again = GraphDocument::from_graph(&g, Some(&s));
        // edges come back canonicalized
        assert_eq!(again.edges[0], ["v1".to_string(), "v2".to_string()]);
        assert_eq!(parse_json(&again.to_json()).unwrap(), again);
    }

    #[test]
    fn missing_strategies_is_a_profile_error() {
        let doc = parse_graph_text(r#"{"nodes":["x"],"edges":[]}"#).unwrap();
        let g = doc.to_graph().unwrap();
        assert!(matches!(doc.profile(&g), Err(Error::ProfileMismatch(_))));
    }

    #[test]
    fn edge_lists() {
        let doc = parse_graph_text("# a triangle\nx y\n\ny z\n  z x  \n").unwrap();
        assert_eq!(doc.nodes, ["x", "y", "z"]);
        assert_eq!(doc.to_graph().unwrap().edge_count(), 3);
        assert!(parse_edge_list("x y z\n").is_err());
        assert!(parse_graph_text("{not json").is_err());
        assert_eq!(
            parse_edge_list("x x\n").unwrap().to_graph(),
            Err(Error::SelfLoop("x".into()))
        );
    }
}
