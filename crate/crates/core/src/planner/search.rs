use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::PlanError;
use crate::graph::ChargeGraph;

/// Directed graph with non-negative edge costs.
pub trait Digraph {
    fn node_count(&self) -> usize;
    fn for_each_successor(&self, node: usize, f: impl FnMut(usize, f64));
}

impl Digraph for ChargeGraph {
    fn node_count(&self) -> usize {
        ChargeGraph::node_count(self)
    }

    fn for_each_successor(&self, node: usize, mut f: impl FnMut(usize, f64)) {
        self.for_each_out_edge(node, |e| f(e.to, e.cost));
    }
}

/// Plain adjacency-list digraph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedDigraph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl WeightedDigraph {
    pub fn new(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cost: f64) {
        assert!(
            from < self.adjacency.len() && to < self.adjacency.len(),
            "edge endpoint out of range"
        );
        assert!(cost >= 0.0, "edge costs must be non-negative");
        self.adjacency[from].push((to, cost));
    }
}

impl Digraph for WeightedDigraph {
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    fn for_each_successor(&self, node: usize, mut f: impl FnMut(usize, f64)) {
        for &(to, cost) in &self.adjacency[node] {
            f(to, cost);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPath {
    pub cost: f64,
    pub nodes: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra with a binary heap. Equal keys are settled in ascending node
/// order and, among predecessors giving the same cost, the smallest id wins,
/// so the result does not depend on edge order. `Ok(None)` means the sink is
/// unreachable.
pub fn shortest_path<G: Digraph>(graph: &G, source: usize, sink: usize) -> Result<Option<ShortestPath>, PlanError> {
    let n = graph.node_count();
    if source >= n || sink >= n {
        return Err(PlanError::InvalidArgument(format!(
            "node id out of range: source {source}, sink {sink}, graph has {n} nodes"
        )));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        cost: 0.0,
        node: source,
    });
    while let Some(Entry { cost, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        if node == sink {
            break;
        }
        graph.for_each_successor(node, |to, c| {
            if settled[to] {
                return;
            }
            let next = cost + c;
            if next < dist[to] {
                dist[to] = next;
                pred[to] = node;
                heap.push(Entry { cost: next, node: to });
            } else if next == dist[to] && node < pred[to] {
                pred[to] = node;
            }
        });
    }
    if !settled[sink] {
        return Ok(None);
    }
    let mut nodes = vec![sink];
    let mut cur = sink;
    while cur != source {
        cur = pred[cur];
        nodes.push(cur);
    }
    nodes.reverse();
    Ok(Some(ShortestPath {
        cost: dist[sink],
        nodes,
    }))
}
