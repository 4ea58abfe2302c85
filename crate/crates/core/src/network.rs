//! The phenotype: an immutable DAG of perceptrons or gates.
//!
//! Links point from a node to the node whose value it consumes, i.e. from a
//! configuration to its successor. Leaves (inputs, reads, constants) have no
//! outgoing links.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::build::BuildReport;
use crate::error::{Error, Result};
use crate::machine::{Flavor, GateType};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeKind {
    Output { coords: Vec<u64> },
    Hidden,
    Input { coords: Vec<u64> },
    Constant { value: bool },
    Read { coords: Vec<u64>, inverted: bool },
}

impl NodeKind {
    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            NodeKind::Input { .. } | NodeKind::Constant { .. } | NodeKind::Read { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    #[serde(flatten)]
    pub kind: NodeKind,
    pub bias: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateType>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: i64,
}

/// A built network. Links are stored grouped by `from`, in the order they were
/// first created within each node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    pub flavor: Flavor,
    pub input_dims: Vec<usize>,
    pub output_dims: Vec<usize>,
    pub depth: usize,
    pub report: BuildReport,
    /// Output node per coordinate in row-major order; `None` when the build
    /// stopped on a limit before reaching that output. Missing outputs read 0.
    pub outputs: Vec<Option<NodeId>>,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip)]
    order: Vec<NodeId>,
}

impl Network {
    pub(crate) fn assemble(
        flavor: Flavor,
        input_dims: Vec<usize>,
        output_dims: Vec<usize>,
        report: BuildReport,
        outputs: Vec<Option<NodeId>>,
        nodes: Vec<Node>,
        mut links: Vec<Link>,
    ) -> Network {
        links.sort_by_key(|l| l.from);
        let mut net = Network {
            flavor,
            input_dims,
            output_dims,
            depth: 0,
            report,
            outputs,
            nodes,
            links,
            offsets: Vec::new(),
            order: Vec::new(),
        };
        net.index();
        net.depth = net.compute_depth();
        net
    }

    fn index(&mut self) {
        let n = self.nodes.len();
        let mut offsets = vec![0usize; n + 1];
        for l in &self.links {
            offsets[l.from + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        self.offsets = offsets;
        self.order = self.postorder();
    }

    /// Outgoing links of `id` (the node's inputs).
    pub fn links_from(&self, id: NodeId) -> &[Link] {
        &self.links[self.offsets[id]..self.offsets[id + 1]]
    }

    /// Nodes ordered so every node follows all of its successors (leaves first).
    pub fn evaluation_order(&self) -> &[NodeId] {
        &self.order
    }

    fn postorder(&self) -> Vec<NodeId> {
        let n = self.nodes.len();
        let mut visited = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut stack: Vec<(NodeId, usize)> = Vec::new();
        for root in 0..n {
            if visited[root] {
                continue;
            }
            visited[root] = true;
            stack.push((root, 0));
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                let out = self.links_from(node);
                if *next < out.len() {
                    let child = out[*next].to;
                    *next += 1;
                    if !visited[child] {
                        visited[child] = true;
                        stack.push((child, 0));
                    }
                } else {
                    order.push(node);
                    stack.pop();
                }
            }
        }
        order
    }

    fn compute_depth(&self) -> usize {
        let mut height = vec![0usize; self.nodes.len()];
        for &id in &self.order {
            height[id] = self
                .links_from(id)
                .iter()
                .map(|l| height[l.to] + 1)
                .max()
                .unwrap_or(0);
        }
        self.outputs
            .iter()
            .flatten()
            .map(|&o| height[o])
            .max()
            .unwrap_or(0)
    }

    /// True when no directed cycle exists (checked independently of the
    /// stored order, by Kahn's algorithm).
    pub fn is_acyclic(&self) -> bool {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for l in &self.links {
            indegree[l.to] += 1;
        }
        let mut ready: Vec<NodeId> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(id) = ready.pop() {
            seen += 1;
            for l in self.links_from(id) {
                indegree[l.to] -= 1;
                if indegree[l.to] == 0 {
                    ready.push(l.to);
                }
            }
        }
        seen == n
    }

    /// Structured export: top-level JSON object with one node or link per line.
    pub fn to_structured(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"flavor\": {},", json(&self.flavor));
        let _ = writeln!(out, "  \"input_dims\": {},", json(&self.input_dims));
        let _ = writeln!(out, "  \"output_dims\": {},", json(&self.output_dims));
        let _ = writeln!(out, "  \"depth\": {},", self.depth);
        let _ = writeln!(out, "  \"report\": {},", json(&self.report));
        let _ = writeln!(out, "  \"outputs\": {},", json(&self.outputs));
        write_list(&mut out, "nodes", &self.nodes, true);
        write_list(&mut out, "links", &self.links, false);
        out.push_str("}\n");
        out
    }

    pub fn from_structured(text: &str) -> Result<Network> {
        let mut net: Network =
            serde_json::from_str(text).map_err(|e| Error::Network(e.to_string()))?;
        net.validate()?;
        net.index();
        if !net.is_acyclic() {
            return Err(Error::Network("link relation has a cycle".into()));
        }
        Ok(net)
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::Network(format!("node {i} has id {}", node.id)));
            }
        }
        for l in &self.links {
            if l.from >= n || l.to >= n {
                return Err(Error::Network(format!(
                    "link {} -> {} references a missing node",
                    l.from, l.to
                )));
            }
            if self.nodes[l.from].kind.is_leaf() {
                return Err(Error::Network(format!("leaf node {} has inputs", l.from)));
            }
        }
        let expected: usize = self.output_dims.iter().product();
        if self.outputs.len() != expected {
            return Err(Error::Network(format!(
                "expected {expected} outputs, found {}",
                self.outputs.len()
            )));
        }
        if self.outputs.iter().flatten().any(|&o| o >= n) {
            return Err(Error::Network("output references a missing node".into()));
        }
        self.links.sort_by_key(|l| l.from);
        Ok(())
    }

    /// Graphviz rendering for visual inspection.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph network {\n  rankdir=TB;\n");
        for node in &self.nodes {
            let (label, shape) = match &node.kind {
                NodeKind::Output { coords } => (format!("out{coords:?}"), "doublecircle"),
                NodeKind::Hidden => (format!("n{}", node.id), "circle"),
                NodeKind::Input { coords } => (format!("in{coords:?}"), "box"),
                NodeKind::Constant { value } => (format!("{value}"), "box"),
                NodeKind::Read { coords, inverted } => (
                    format!("{}{coords:?}", if *inverted { "not in" } else { "in" }),
                    "box",
                ),
            };
            let detail = match (self.flavor, node.gate) {
                (_, Some(g)) => format!("\\n{}", g.keyword()),
                (Flavor::Ptm, None) if !node.kind.is_leaf() => format!("\\nb={}", node.bias),
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "  n{} [label=\"{label}{detail}\", shape={shape}];",
                node.id
            );
        }
        for l in &self.links {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", l.from, l.to, l.weight);
        }
        out.push_str("}\n");
        out
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("network fields serialize")
}

fn write_list<T: Serialize>(out: &mut String, key: &str, items: &[T], comma: bool) {
    let _ = write!(out, "  \"{key}\": [");
    for (i, item) in items.iter().enumerate() {
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        out.push_str(&json(item));
    }
    if !items.is_empty() {
        out.push_str("\n  ");
    }
    out.push(']');
    if comma {
        out.push(',');
    }
    out.push('\n');
}
