//! Dynamic k loopless shortest paths: Yen's algorithm whose spur searches
//! reuse a copy of the shared D* Lite state instead of starting from scratch.

use std::cmp::Ordering;

use crate::dstar::{CostUpdate, DStarState};
use crate::error::PlanError;
use crate::model::{EdgeCost, EdgeId, Path, ProblemInstance, SuppressedCosts, VertexId};

/// Accepted paths `A` (ascending cost) and the candidate pool `B`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    pub candidates: Vec<Path>,
}

impl PathSet {
    pub fn best(&self) -> Option<&Path> {
        self.paths.first()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.cost).collect()
    }
}

/// Root path, spur node and the edges suppressed for one Yen iteration.
#[derive(Debug, Clone)]
pub struct SpurContext {
    pub root: Vec<VertexId>,
    pub spur: VertexId,
    pub suppressed: Vec<CostUpdate>,
}

/// Candidate order: cost, then lexicographic vertex sequence.
pub fn candidate_order(a: &Path, b: &Path) -> Ordering {
    a.cost.total_cmp(&b.cost).then_with(|| a.vertices.cmp(&b.vertices))
}

/// Edges to price at infinity for the spur iteration whose root is `root`
/// (the first `root.len()` vertices of the previous path):
/// the next edge of every accepted path sharing the root, and every edge
/// touching a root vertex other than the spur node.
pub fn yen_edge_suppression(
    inst: &ProblemInstance,
    costs: &impl EdgeCost,
    accepted: &[Path],
    root: &[VertexId],
) -> Vec<CostUpdate> {
    let i = root.len();
    let mut edges: Vec<EdgeId> = Vec::new();
    for path in accepted {
        if path.vertices.len() > i && path.vertices[..i] == *root {
            edges.push(path.edges[i - 1]);
        }
    }
    for &v in &root[..i - 1] {
        edges.extend(inst.ugv_neighbors(v).iter().map(|&(_, e)| e));
    }
    edges.sort_unstable();
    edges.dedup();
    edges
        .into_iter()
        .map(|e| CostUpdate {
            edge: e,
            old_cost: costs.cost(e),
            new_cost: f64::INFINITY,
        })
        .collect()
}

/// Adds `candidate` to `pool` unless its vertex sequence is already in the
/// pool or among the accepted paths. The pool stays sorted by
/// [`candidate_order`]. Returns whether it was added.
pub fn candidate_admission(pool: &mut Vec<Path>, accepted: &[Path], candidate: Path) -> bool {
    let dup = |p: &Path| p.vertices == candidate.vertices;
    if accepted.iter().any(dup) || pool.iter().any(dup) {
        return false;
    }
    let at = pool
        .binary_search_by(|p| candidate_order(p, &candidate))
        .unwrap_or_else(|i| i);
    pool.insert(at, candidate);
    true
}

/// Runs one spur search on a copy of `state` and joins root and spur path.
fn spur_candidate(
    inst: &ProblemInstance,
    costs: &impl EdgeCost,
    state: &DStarState,
    v_curr: VertexId,
    ctx: &SpurContext,
    mask: &mut [bool],
) -> Option<Path> {
    for u in &ctx.suppressed {
        mask[u.edge.index()] = true;
    }
    let overlay = SuppressedCosts::new(costs, mask);
    let mut spur_state = state.clone();
    spur_state.set_k_m(state.k_m() + inst.heuristic(v_curr, ctx.spur));
    let spur_path = spur_state.search(inst, &overlay, ctx.spur, &ctx.suppressed);
    for u in &ctx.suppressed {
        mask[u.edge.index()] = false;
    }
    let spur_path = spur_path.ok()?;
    let mut vertices = ctx.root[..ctx.root.len() - 1].to_vec();
    vertices.extend_from_slice(&spur_path.vertices);
    Some(Path::from_vertices(inst, costs, vertices).expect("root and spur are ground paths"))
}

/// Recomputes up to `k` loopless shortest paths from `v_curr` to the state's
/// destination after the given cost updates (already reflected in `costs`).
///
/// The best path comes from the shared `state`, which is advanced in place.
/// Every spur search runs on a deep copy with `k_m' = k_m + h(v_curr, spur)`
/// so the shared state is unaffected by them.
pub fn update_k_paths(
    inst: &ProblemInstance,
    costs: &impl EdgeCost,
    state: &mut DStarState,
    v_curr: VertexId,
    updates: &[CostUpdate],
    k: usize,
) -> Result<PathSet, PlanError> {
    assert!(k >= 1, "k must be at least 1");
    let first = state.replan(inst, costs, v_curr, updates)?;
    let mut set = PathSet {
        paths: vec![first],
        candidates: Vec::new(),
    };
    let mut mask = vec![false; inst.num_edges()];

    while set.paths.len() < k {
        let prev = set.paths.last().expect("non-empty").clone();
        for i in 1..prev.vertices.len() {
            let root = &prev.vertices[..i];
            let ctx = SpurContext {
                root: root.to_vec(),
                spur: root[i - 1],
                suppressed: yen_edge_suppression(inst, costs, &set.paths, root),
            };
            if let Some(candidate) = spur_candidate(inst, costs, state, v_curr, &ctx, &mut mask) {
                candidate_admission(&mut set.candidates, &set.paths, candidate);
            }
        }
        if set.candidates.is_empty() {
            break;
        }
        let next = set.candidates.remove(0);
        set.paths.push(next);
    }
    Ok(set)
}
