//! UAV decision rules: the next inspection leg given the UGV's paths.

use std::time::{Duration, Instant};

use crate::error::PlanError;
use crate::kspp::PathSet;
use crate::model::{EdgeId, KnowledgeState, PlanningCostView, ProblemInstance, VertexId, INF};
use crate::paa::{self, PaaContext, PriorityWeights};
use crate::rpp::{self, CriticalEdge, Direction, InspectionLeg, RppOptions};
use crate::transit::UavMetric;

/// What the UAV knows about the UGV when deciding.
pub struct UgvView<'p> {
    /// Paths from the UGV's next vertex.
    pub paths: &'p PathSet,
    /// Time until the UGV reaches that vertex.
    pub offset: f64,
    /// Edge the UGV is currently traversing.
    pub traversing: Option<EdgeId>,
    pub k: usize,
}

pub struct Decision {
    pub leg: Option<InspectionLeg>,
    /// Inspection deadline of the chosen edge, relative to now.
    pub deadline: f64,
    /// Wall time of the solver or selection step alone.
    pub solve_time: Duration,
    pub budget_exhausted: bool,
}

impl Decision {
    fn idle() -> Self {
        Decision {
            leg: None,
            deadline: INF,
            solve_time: Duration::ZERO,
            budget_exhausted: false,
        }
    }
}

/// Runs `f` and returns its first result with the fastest of up to three
/// timings. Repeats stop once the total exceeds a few milliseconds, so
/// scheduler hiccups do not dominate microsecond-scale solves.
fn timed<T>(mut f: impl FnMut() -> T) -> (T, Duration) {
    const REPEAT_WITHIN: Duration = Duration::from_millis(5);
    let started = Instant::now();
    let out = f();
    let mut best = started.elapsed();
    let mut total = best;
    for _ in 0..2 {
        if total > REPEAT_WITHIN {
            break;
        }
        let again = Instant::now();
        f();
        let t = again.elapsed();
        best = best.min(t);
        total += t;
    }
    (out, best)
}

fn critical_edges(inst: &ProblemInstance, knowledge: &KnowledgeState, ugv: &UgvView<'_>) -> Vec<CriticalEdge> {
    let view = PlanningCostView::new(inst, knowledge);
    let mut crit = rpp::extract_critical_edges(ugv.paths, knowledge, inst, &view, ugv.offset);
    crit.retain(|c| Some(c.edge) != ugv.traversing);
    crit
}

fn deadline_of(crit: &[CriticalEdge], leg: &Option<InspectionLeg>) -> f64 {
    leg.as_ref()
        .and_then(|l| crit.iter().find(|c| c.edge == l.inspect.edge))
        .map_or(INF, |c| c.t_max)
}

fn leg_to(metric: &mut UavMetric<'_>, uav: VertexId, dir: Direction) -> Result<InspectionLeg, PlanError> {
    Ok(InspectionLeg {
        transit: metric.route(uav, dir.from)?,
        inspect: dir,
    })
}

/// The edge's two traversal directions, nearer start first.
fn directions(inst: &ProblemInstance, metric: &mut UavMetric<'_>, uav: VertexId, e: EdgeId) -> [(f64, Direction); 2] {
    let r = inst.edge(e);
    let a = (
        metric.cost(uav, r.u),
        Direction {
            edge: e,
            from: r.u,
            to: r.v,
        },
    );
    let b = (
        metric.cost(uav, r.v),
        Direction {
            edge: e,
            from: r.v,
            to: r.u,
        },
    );
    if b.0 < a.0 {
        [b, a]
    } else {
        [a, b]
    }
}

/// Solves the inspection routing problem and returns its first leg.
pub fn rpp_step(
    inst: &ProblemInstance,
    metric: &mut UavMetric<'_>,
    knowledge: &KnowledgeState,
    ugv: &UgvView<'_>,
    uav: VertexId,
    opts: RppOptions,
) -> Result<Decision, PlanError> {
    let crit = critical_edges(inst, knowledge, ugv);
    if crit.is_empty() {
        return Ok(Decision::idle());
    }
    let go = rpp::build_transformed_graph(inst, metric, &crit, uav, 0.0);
    let (sol, solve_time) = timed(|| rpp::rpp_dfs(&go, opts));
    let leg = match sol.best_visited.get(1) {
        Some(&node) => Some(leg_to(metric, uav, go.direction(node).expect("non-depot"))?),
        None => None,
    };
    Ok(Decision {
        deadline: deadline_of(&crit, &leg),
        leg,
        solve_time,
        budget_exhausted: sol.timed_out,
    })
}

/// Picks the highest-priority critical edge and flies to its nearer end.
pub fn paa_step(
    inst: &ProblemInstance,
    metric: &mut UavMetric<'_>,
    knowledge: &KnowledgeState,
    ugv: &UgvView<'_>,
    uav: VertexId,
    weights: PriorityWeights,
) -> Result<Decision, PlanError> {
    let crit = critical_edges(inst, knowledge, ugv);
    if crit.is_empty() {
        return Ok(Decision::idle());
    }
    for c in &crit {
        paa::uav_distance(inst, metric, uav, c.edge);
    }
    let view = PlanningCostView::new(inst, knowledge);
    let (chosen, solve_time) = timed(|| {
        paa::select_edge(
            &crit,
            &mut PaaContext {
                inst,
                path_set: ugv.paths,
                view: &view,
                metric,
                uav_pos: uav,
                k: ugv.k,
                weights,
            },
        )
    });
    let leg = match chosen {
        Some(e) => {
            let nearer = directions(inst, metric, uav, e)[0].1;
            Some(leg_to(metric, uav, nearer)?)
        }
        None => None,
    };
    Ok(Decision {
        deadline: deadline_of(&crit, &leg),
        leg,
        solve_time,
        budget_exhausted: false,
    })
}

/// Baseline: the first unrealized impeded edge along the UGV's best path
/// that the UAV can finish inspecting before the UGV's earliest arrival.
/// `ugv.paths` is expected to hold the best path only.
pub fn naive_step(
    inst: &ProblemInstance,
    metric: &mut UavMetric<'_>,
    knowledge: &KnowledgeState,
    ugv: &UgvView<'_>,
    uav: VertexId,
) -> Result<Decision, PlanError> {
    let started = Instant::now();
    let crit = critical_edges(inst, knowledge, ugv);
    let best = match ugv.paths.best() {
        Some(p) => p,
        None => return Ok(Decision::idle()),
    };
    for &e in &best.edges {
        let Some(window) = crit.iter().find(|c| c.edge == e) else {
            continue;
        };
        let tau = inst.edge(e).uav_cost;
        let feasible = directions(inst, metric, uav, e)
            .into_iter()
            .find(|(transit, _)| transit + tau <= window.t_max);
        if let Some((_, dir)) = feasible {
            let leg = leg_to(metric, uav, dir)?;
            return Ok(Decision {
                leg: Some(leg),
                deadline: window.t_max,
                solve_time: started.elapsed(),
                budget_exhausted: false,
            });
        }
    }
    Ok(Decision {
        leg: None,
        deadline: INF,
        solve_time: started.elapsed(),
        budget_exhausted: false,
    })
}
