use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Arg, EntityId, Experience, ExprId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Entity(EntityId),
    Expr(ExprId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    pub item: NodeRef,
    pub label: String,
}

/// Directed edge from an expression node to its argument at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub position: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ExpressionGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Builds the argument graph of an experience: entities occupy the first node
/// indices, expressions follow in id order.
pub fn to_graph(exp: &Experience) -> ExpressionGraph {
    let n_ent = exp.entities().len();
    let mut nodes = Vec::with_capacity(n_ent + exp.expressions().len());
    for (i, e) in exp.entities().iter().enumerate() {
        nodes.push(GraphNode {
            item: NodeRef::Entity(EntityId(i as u32)),
            label: e.name.clone(),
        });
    }
    let mut edges = Vec::new();
    for expr in exp.expressions() {
        let from = nodes.len();
        nodes.push(GraphNode {
            item: NodeRef::Expr(expr.id),
            label: expr.functor.clone(),
        });
        for (position, arg) in expr.args.iter().enumerate() {
            let to = match *arg {
                Arg::Entity(en) => en.index(),
                Arg::Expr(ex) => n_ent + ex.index(),
            };
            edges.push(GraphEdge { from, to, position });
        }
    }
    ExpressionGraph { nodes, edges }
}

impl ExpressionGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_acyclic(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.from].push(e.to);
        }
        let mut mark = vec![Mark::New; self.nodes.len()];
        for start in 0..self.nodes.len() {
            if mark[start] != Mark::New {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            mark[start] = Mark::Active;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if let Some(&succ) = adj[node].get(*next) {
                    *next += 1;
                    match mark[succ] {
                        Mark::Active => return false,
                        Mark::New => {
                            mark[succ] = Mark::Active;
                            stack.push((succ, 0));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[node] = Mark::Done;
                    stack.pop();
                }
            }
        }
        true
    }

    /// Renders the graph as a DOT digraph. Expressions in `dashed`, and the
    /// edges leaving them, are drawn dashed.
    pub fn to_dot(&self, name: &str, dashed: &BTreeSet<ExprId>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape(name));
        let _ = writeln!(out, "  rankdir=TB;");
        for (i, node) in self.nodes.iter().enumerate() {
            let (shape, style) = match node.item {
                NodeRef::Entity(_) => ("box", "solid"),
                NodeRef::Expr(e) if dashed.contains(&e) => ("ellipse", "dashed"),
                NodeRef::Expr(_) => ("ellipse", "solid"),
            };
            let _ = writeln!(
                out,
                "  n{i} [label=\"{}\", shape={shape}, style={style}];",
                escape(&node.label)
            );
        }
        for e in &self.edges {
            let style = match self.nodes[e.from].item {
                NodeRef::Expr(x) if dashed.contains(&x) => "dashed",
                _ => "solid",
            };
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}\", style={style}];",
                e.from, e.to, e.position
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kr::{parse_experience, ParseConfig};

    fn graph(text: &str) -> ExpressionGraph {
        to_graph(&parse_experience("g", text, &ParseConfig::default()).unwrap())
    }

    #[test]
    fn single_unary_fact() {
        let g = graph("(stranger person)");
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn rationale_edges() {
        let g = graph("(why (flee p) (and (dangerAff d) (safeDesire p)))");
        assert_eq!(g.edge_count(), 7);
        assert!(g.is_acyclic());
    }

    #[test]
    fn dot_marks_dashed_nodes() {
        let exp = parse_experience("g", "(flee p)", &ParseConfig::default()).unwrap();
        let dashed = [exp.facts()[0]].into_iter().collect();
        let dot = to_graph(&exp).to_dot("g", &dashed);
        assert!(dot.contains("label=\"flee\", shape=ellipse, style=dashed"));
        assert!(dot.contains("-> n0 [label=\"0\", style=dashed]"));
    }
}
