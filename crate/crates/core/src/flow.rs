//! Maximum flow with exact rational capacities.
//!
//! Edmonds-Karp: repeatedly augment along a shortest residual path found
//! by breadth-first search. The number of augmentations is bounded by
//! `nodes * edges` independently of capacities, which matters here because
//! capacities are arbitrary rationals and a capacity-scaling argument
//! would not apply. Networks in this crate are tiny (a node per poset
//! element or two, plus terminals), so this is far from the bottleneck.

use crate::rational::{zero, Int, Rational};

#[derive(Clone, Debug)]
struct Edge<T: Int> {
    to: usize,
    residual: Rational<T>,
}

/// Edge handle returned by [`FlowNetwork::add_edge`], valid for the
/// network that created it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeId(usize);

#[derive(Clone, Debug)]
pub struct FlowNetwork<T: Int> {
    edges: Vec<Edge<T>>,
    capacities: Vec<Rational<T>>,
    adjacency: Vec<Vec<usize>>,
}

impl<T: Int> FlowNetwork<T> {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            capacities: Vec::new(),
            adjacency: vec![Vec::new(); nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Adds a directed edge with the given capacity (must be nonnegative)
    /// and its zero-capacity reverse.
    pub fn add_edge(&mut self, from: usize, to: usize, capacity: Rational<T>) -> EdgeId {
        assert!(from < self.node_count() && to < self.node_count(), "node out of range");
        assert!(capacity >= zero(), "negative capacity");
        let id = self.edges.len();
        self.edges.push(Edge { to, residual: capacity.clone() });
        self.edges.push(Edge { to: from, residual: zero() });
        self.capacities.push(capacity);
        self.adjacency[from].push(id);
        self.adjacency[to].push(id + 1);
        EdgeId(id)
    }

    /// Flow currently routed through an edge added by `add_edge`.
    pub fn flow(&self, edge: EdgeId) -> Rational<T> {
        &self.capacities[edge.0 / 2] - &self.edges[edge.0].residual
    }

    /// Runs to completion and returns the maximum flow value from `source`
    /// to `sink`, leaving per-edge flows readable through [`Self::flow`].
    pub fn max_flow(&mut self, source: usize, sink: usize) -> Rational<T> {
        assert!(source < self.node_count() && sink < self.node_count(), "node out of range");
        assert_ne!(source, sink, "source and sink coincide");
        let mut total = zero::<T>();
        let mut parent: Vec<Option<usize>> = vec![None; self.node_count()];
        loop {
            parent.iter_mut().for_each(|p| *p = None);
            parent[source] = Some(usize::MAX);
            let mut queue = std::collections::VecDeque::from([source]);
            'bfs: while let Some(node) = queue.pop_front() {
                for &edge_index in &self.adjacency[node] {
                    let edge = &self.edges[edge_index];
                    if parent[edge.to].is_none() && edge.residual > zero() {
                        parent[edge.to] = Some(edge_index);
                        if edge.to == sink {
                            break 'bfs;
                        }
                        queue.push_back(edge.to);
                    }
                }
            }
            if parent[sink].is_none() {
                return total;
            }

            let mut bottleneck: Option<Rational<T>> = None;
            let mut node = sink;
            while node != source {
                let edge_index = parent[node].expect("path reaches source");
                let residual = &self.edges[edge_index].residual;
                if bottleneck.as_ref().is_none_or(|b| residual < b) {
                    bottleneck = Some(residual.clone());
                }
                node = self.edges[edge_index ^ 1].to;
            }
            let bottleneck = bottleneck.expect("augmenting path is nonempty");

            let mut node = sink;
            while node != source {
                let edge_index = parent[node].expect("path reaches source");
                self.edges[edge_index].residual -= &bottleneck;
                self.edges[edge_index ^ 1].residual += &bottleneck;
                node = self.edges[edge_index ^ 1].to;
            }
            total += bottleneck;
        }
    }
}
