//! Plain Dijkstra searches used for static planning, lower bounds and the
//! aerial transit metric.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::PlanError;
use crate::model::{EdgeCost, EdgeId, Path, ProblemInstance, VertexId, INF};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    v: VertexId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, vertex)
        other.dist.total_cmp(&self.dist).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest-path tree.
#[derive(Debug, Clone)]
pub struct ShortestTree {
    pub source: VertexId,
    pub dist: Vec<f64>,
    pub parent: Vec<Option<(VertexId, EdgeId)>>,
}

impl ShortestTree {
    /// Vertex sequence from the source to `to`, or `None` if unreachable.
    pub fn path_to(&self, to: VertexId) -> Option<Vec<VertexId>> {
        if !self.dist[to.index()].is_finite() {
            return None;
        }
        let mut out = vec![to];
        let mut cur = to;
        while let Some((prev, _)) = self.parent[cur.index()] {
            out.push(prev);
            cur = prev;
        }
        out.reverse();
        Some(out)
    }
}

fn run<'a, F>(
    n: usize,
    source: VertexId,
    neighbors: impl Fn(VertexId) -> &'a [(VertexId, EdgeId)],
    cost: F,
) -> ShortestTree
where
    F: Fn(EdgeId) -> f64,
{
    let mut dist = vec![INF; n];
    let mut parent = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[source.index()] = 0.0;
    heap.push(Entry { dist: 0.0, v: source });
    while let Some(Entry { dist: d, v }) = heap.pop() {
        if d > dist[v.index()] {
            continue;
        }
        for &(w, e) in neighbors(v) {
            let c = cost(e);
            if !c.is_finite() {
                continue;
            }
            let nd = d + c;
            if nd < dist[w.index()] {
                dist[w.index()] = nd;
                parent[w.index()] = Some((v, e));
                heap.push(Entry { dist: nd, v: w });
            }
        }
    }
    ShortestTree { source, dist, parent }
}

/// Ground shortest-path tree from `source` (undirected, so also distances to
/// `source`).
pub fn ugv_tree(inst: &ProblemInstance, costs: &impl EdgeCost, source: VertexId) -> ShortestTree {
    run(
        inst.num_vertices(),
        source,
        |v| inst.ugv_neighbors(v),
        |e| costs.cost(e),
    )
}

/// Aerial shortest-path tree over all edges priced at their aerial cost.
pub fn uav_tree(inst: &ProblemInstance, source: VertexId) -> ShortestTree {
    run(
        inst.num_vertices(),
        source,
        |v| inst.uav_neighbors(v),
        |e| inst.edge(e).uav_cost,
    )
}

/// Shortest ground path `from → to`, costs summed in path order.
pub fn ugv_shortest_path(
    inst: &ProblemInstance,
    costs: &impl EdgeCost,
    from: VertexId,
    to: VertexId,
) -> Result<Path, PlanError> {
    let tree = ugv_tree(inst, costs, from);
    let verts = tree.path_to(to).ok_or(PlanError::NoPath { from })?;
    Ok(Path::from_vertices(inst, costs, verts).expect("tree edges are ground edges"))
}
