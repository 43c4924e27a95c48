//! Priority-based selection of the next edge for the UAV to inspect.
//!
//! Each critical edge gets four scores in `[0, 1]`:
//! the share of the k paths it lies on, how soon the UGV has to commit to
//! it, the variance of its cost, and how close it is to the UAV. The edge
//! with the highest weighted sum wins.

use crate::kspp::PathSet;
use crate::model::{EdgeCost, EdgeId, Path, PlanningCostView, ProblemInstance, VertexId};
use crate::rpp::CriticalEdge;
use crate::transit::UavMetric;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorityWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl Default for PriorityWeights {
    fn default() -> Self {
        PriorityWeights {
            w1: 0.25,
            w2: 0.25,
            w3: 0.2,
            w4: 0.3,
        }
    }
}

impl PriorityWeights {
    pub fn new(w: [f64; 4]) -> Option<Self> {
        w.iter().all(|x| x.is_finite() && *x >= 0.0).then_some(PriorityWeights {
            w1: w[0],
            w2: w[1],
            w3: w[2],
            w4: w[3],
        })
    }

    pub fn combine(&self, p: [f64; 4]) -> f64 {
        self.w1 * p[0] + self.w2 * p[1] + self.w3 * p[2] + self.w4 * p[3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePriority {
    pub edge: EdgeId,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub score: f64,
}

/// Share of the requested `k` paths that contain `edge`.
pub fn p1_path_count(edge: EdgeId, path_set: &PathSet, k: usize) -> f64 {
    let n = path_set.paths.iter().filter(|p| p.contains_edge(edge)).count();
    (n as f64 / k as f64).min(1.0)
}

fn prefix_cost(path: &Path, upto: usize, costs: &impl EdgeCost) -> f64 {
    path.edges[..upto].iter().map(|&e| costs.cost(e)).sum()
}

/// Expected time until the UGV has to commit to `edge`: on the best path,
/// its arrival at the edge's first vertex; on an alternative, its arrival
/// at the vertex where that alternative leaves the best path. The minimum
/// over all occurrences; `None` if the edge is on no path.
pub fn commit_time(edge: EdgeId, path_set: &PathSet, view: &PlanningCostView<'_>) -> Option<f64> {
    let best = path_set.best()?;
    let mut lambda: Option<f64> = None;
    let mut take = |x: f64| lambda = Some(lambda.map_or(x, |l: f64| l.min(x)));
    if let Some(i) = best.edges.iter().position(|&e| e == edge) {
        take(prefix_cost(best, i, view));
    }
    for alt in path_set.paths.iter().skip(1) {
        if !alt.contains_edge(edge) {
            continue;
        }
        let shared = alt
            .vertices
            .iter()
            .zip(&best.vertices)
            .take_while(|(a, b)| a == b)
            .count();
        take(prefix_cost(best, shared.saturating_sub(1), view));
    }
    lambda
}

/// `(max − x) / (max − min)`, or 1 when the range is empty.
pub fn p2_divergence(lambda: f64, min: f64, max: f64) -> f64 {
    if max - min <= 0.0 {
        1.0
    } else {
        ((max - lambda) / (max - min)).clamp(0.0, 1.0)
    }
}

/// `σ / σ_max`, or 1 when every variance is zero.
pub fn p3_variance(variance: f64, max: f64) -> f64 {
    if max <= 0.0 {
        1.0
    } else {
        (variance / max).clamp(0.0, 1.0)
    }
}

/// `1 − d / d_max`, or 1 when every distance is zero.
pub fn p4_proximity(distance: f64, max: f64) -> f64 {
    if max <= 0.0 {
        1.0
    } else {
        (1.0 - distance / max).clamp(0.0, 1.0)
    }
}

/// UAV transit cost to the nearer endpoint of `edge`.
pub fn uav_distance(inst: &ProblemInstance, metric: &mut UavMetric<'_>, uav_pos: VertexId, edge: EdgeId) -> f64 {
    let rec = inst.edge(edge);
    metric.cost(uav_pos, rec.u).min(metric.cost(uav_pos, rec.v))
}

pub struct PaaContext<'c, 'i> {
    pub inst: &'c ProblemInstance,
    pub path_set: &'c PathSet,
    pub view: &'c PlanningCostView<'c>,
    pub metric: &'c mut UavMetric<'i>,
    pub uav_pos: VertexId,
    pub k: usize,
    pub weights: PriorityWeights,
}

/// Scores every critical edge. Unreachable edges get distance `d_max`.
pub fn score_edges(critical: &[CriticalEdge], ctx: &mut PaaContext<'_, '_>) -> Vec<EdgePriority> {
    let lambdas: Vec<f64> = critical
        .iter()
        .map(|c| commit_time(c.edge, ctx.path_set, ctx.view).unwrap_or(0.0))
        .collect();
    let variances: Vec<f64> = critical
        .iter()
        .map(|c| ctx.inst.edge(c.edge).distribution().map_or(0.0, |d| d.variance()))
        .collect();
    let distances: Vec<f64> = critical
        .iter()
        .map(|c| uav_distance(ctx.inst, ctx.metric, ctx.uav_pos, c.edge))
        .collect();
    let fold =
        |xs: &[f64], f: fn(f64, f64) -> f64, init: f64| xs.iter().copied().filter(|x| x.is_finite()).fold(init, f);
    let l_min = fold(&lambdas, f64::min, f64::INFINITY);
    let l_max = fold(&lambdas, f64::max, f64::NEG_INFINITY);
    let s_max = fold(&variances, f64::max, 0.0);
    let d_max = fold(&distances, f64::max, 0.0);
    critical
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let p = [
                p1_path_count(c.edge, ctx.path_set, ctx.k),
                p2_divergence(lambdas[i], l_min, l_max),
                p3_variance(variances[i], s_max),
                p4_proximity(distances[i].min(d_max), d_max),
            ];
            EdgePriority {
                edge: c.edge,
                p1: p[0],
                p2: p[1],
                p3: p[2],
                p4: p[3],
                score: ctx.weights.combine(p),
            }
        })
        .collect()
}

/// The highest-scoring critical edge; ties go to the lowest edge id.
pub fn select_edge(critical: &[CriticalEdge], ctx: &mut PaaContext<'_, '_>) -> Option<EdgeId> {
    argmax(&score_edges(critical, ctx))
}

pub fn argmax(scores: &[EdgePriority]) -> Option<EdgeId> {
    scores
        .iter()
        .max_by(|a, b| a.score.total_cmp(&b.score).then(b.edge.cmp(&a.edge)))
        .map(|p| p.edge)
}
