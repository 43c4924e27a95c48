//! Event-driven co-simulation of the UGV and the UAV under a hidden
//! realization.
//!
//! Both vehicles start at time 0. The UGV never waits: at every vertex it
//! enters the next edge of its current best path. Replanning is triggered by
//! revelations and takes effect at each vehicle's next vertex, so no vehicle
//! ever turns around inside an edge. Planner wall time is measured but does
//! not advance simulated time.
//!
//! At equal times revelations are logged before arrivals and the UAV's
//! arrival before the UGV's, so an inspection finishing exactly when the UGV
//! reaches a junction informs its choice there.

mod event;
pub mod policy;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use event::{format_log, replay_ugv, Event, EventKind, Vehicle};

use crate::dstar::{CostUpdate, DStarState};
use crate::error::{PlanError, SimError};
use crate::kspp::{update_k_paths, PathSet};
use crate::model::{
    EdgeId, KnowledgeState, PlanningCostView, ProblemInstance, Realization, RealizedCosts, UgvCost, VertexId, INF,
};
use crate::paa::PriorityWeights;
use crate::rpp::{InspectionLeg, RppOptions};
use crate::shortest::ugv_tree;
use crate::transit::UavMetric;
use policy::{Decision, UgvView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Planner {
    /// k paths for the UGV, inspection routing for the UAV.
    #[serde(rename = "rpp")]
    KsppRpp,
    /// k paths for the UGV, priority-based single-edge choice for the UAV.
    #[serde(rename = "paa")]
    KsppPaa,
    /// Best path only; the UAV inspects the nearest feasible on-path edge.
    Naive,
    /// Best path only, no UAV.
    UgvOnly,
}

impl Planner {
    pub fn name(self) -> &'static str {
        match self {
            Planner::KsppRpp => "rpp",
            Planner::KsppPaa => "paa",
            Planner::Naive => "naive",
            Planner::UgvOnly => "ugv_only",
        }
    }

    /// Number of paths the UGV maintains for a requested `k`.
    pub fn ugv_paths(self, k: usize) -> usize {
        match self {
            Planner::KsppRpp | Planner::KsppPaa => k,
            Planner::Naive | Planner::UgvOnly => 1,
        }
    }
}

impl fmt::Display for Planner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Planner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rpp" => Ok(Planner::KsppRpp),
            "paa" => Ok(Planner::KsppPaa),
            "naive" => Ok(Planner::Naive),
            "ugv_only" => Ok(Planner::UgvOnly),
            other => Err(format!(
                "unknown planner {other:?} (expected rpp, paa, naive or ugv_only)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub planner: Planner,
    pub k: usize,
    pub weights: PriorityWeights,
    pub rpp: RppOptions,
    pub max_events: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            planner: Planner::KsppRpp,
            k: 4,
            weights: PriorityWeights::default(),
            rpp: RppOptions::default(),
            max_events: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    Start,
    Revelation,
    UavLeg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplanTiming {
    pub time: f64,
    pub trigger: Trigger,
    pub ugv: Duration,
    pub uav: Duration,
    /// Solver or selection step only, excluding metric and graph set-up.
    pub uav_solve: Duration,
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub arrival_time: f64,
    pub lower_bound: f64,
    pub event_log: Vec<Event>,
    pub replanning_times: Vec<ReplanTiming>,
    /// Revelation-triggered replanning rounds.
    pub n_replans: usize,
    pub budget_exhaustions: usize,
    /// Inspections that finished after the UGV's earliest possible arrival
    /// at the edge as estimated when the edge was chosen.
    pub late_inspections: usize,
}

impl SimulationOutcome {
    fn max_of(&self, f: impl Fn(&ReplanTiming) -> Duration) -> Duration {
        self.replanning_times.iter().map(f).max().unwrap_or_default()
    }

    pub fn max_ugv_replan(&self) -> Duration {
        self.max_of(|r| r.ugv)
    }

    pub fn max_uav_replan(&self) -> Duration {
        self.max_of(|r| r.uav)
    }

    pub fn max_uav_solve(&self) -> Duration {
        self.max_of(|r| r.uav_solve)
    }
}

/// One CSV row per simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub instance_id: String,
    pub seed: u64,
    pub planner: Planner,
    pub k: usize,
    #[serde(rename = "LB")]
    pub lb: f64,
    pub cost: f64,
    pub arrival_time: f64,
    pub n_replans: usize,
    pub max_ugv_replan_ms: f64,
    pub max_uav_replan_ms: f64,
}

impl OutcomeRow {
    pub fn new(instance_id: String, seed: u64, cfg: &SimulationConfig, out: &SimulationOutcome) -> Self {
        OutcomeRow {
            instance_id,
            seed,
            planner: cfg.planner,
            k: cfg.k,
            lb: out.lower_bound,
            cost: out.arrival_time,
            arrival_time: out.arrival_time,
            n_replans: out.n_replans,
            max_ugv_replan_ms: out.max_ugv_replan().as_secs_f64() * 1e3,
            max_uav_replan_ms: out.max_uav_replan().as_secs_f64() * 1e3,
        }
    }
}

/// Perfect-information cost: shortest `p → d` path at true costs.
pub fn lower_bound(inst: &ProblemInstance, real: &Realization) -> Result<f64, PlanError> {
    let ends = inst.endpoints();
    let costs = RealizedCosts {
        inst,
        realization: real,
    };
    let dist = ugv_tree(inst, &costs, ends.p).dist[ends.d.index()];
    if dist.is_finite() {
        Ok(dist)
    } else {
        Err(PlanError::NoPath { from: ends.p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    AtVertex(VertexId),
    /// `edge` is the ground edge for the UGV, the inspected edge (if any) for
    /// the UAV.
    Moving {
        from: VertexId,
        to: VertexId,
        edge: Option<EdgeId>,
        entry: f64,
        arrival: f64,
    },
}

impl Mode {
    fn arrival(&self) -> f64 {
        match *self {
            Mode::AtVertex(_) => INF,
            Mode::Moving { arrival, .. } => arrival,
        }
    }
}

struct Hop {
    to: VertexId,
    inspect: Option<EdgeId>,
    duration: f64,
}

struct Sim<'a> {
    inst: &'a ProblemInstance,
    real: &'a Realization,
    cfg: SimulationConfig,
    ugv_k: usize,
    knowledge: KnowledgeState,
    metric: UavMetric<'a>,
    dstar: DStarState,
    now: f64,
    log: Vec<Event>,
    timings: Vec<ReplanTiming>,
    n_replans: usize,
    budget_exhaustions: usize,
    late_inspections: usize,

    ugv: Mode,
    /// Planned vertices; the first is where the UGV is or is heading.
    route: Vec<VertexId>,
    paths: PathSet,
    paths_origin: VertexId,

    uav: Option<Mode>,
    hops: VecDeque<Hop>,
    target: Option<(EdgeId, f64)>,
    uav_pending: bool,
    cancel_target: bool,
}

impl<'a> Sim<'a> {
    fn emit(&mut self, kind: EventKind) {
        self.log.push(Event { time: self.now, kind });
    }

    fn ugv_origin(&self) -> VertexId {
        self.route[0]
    }

    fn ugv_offset(&self) -> f64 {
        match self.ugv {
            Mode::AtVertex(_) => 0.0,
            Mode::Moving { arrival, .. } => arrival - self.now,
        }
    }

    fn plan_ugv(&mut self, updates: &[CostUpdate]) -> Result<Duration, PlanError> {
        let origin = self.ugv_origin();
        let view = PlanningCostView::new(self.inst, &self.knowledge);
        let started = Instant::now();
        self.paths = update_k_paths(self.inst, &view, &mut self.dstar, origin, updates, self.ugv_k)?;
        let elapsed = started.elapsed();
        self.paths_origin = origin;
        self.route = self.paths.best().expect("at least one path").vertices.clone();
        Ok(elapsed)
    }

    fn ugv_depart(&mut self) {
        let from = self.route[0];
        let to = self.route[1];
        let edge = self
            .inst
            .ugv_edge_between(from, to)
            .expect("route follows ground edges");
        let cost = self.real.ground_cost(self.inst, edge);
        self.emit(EventKind::UgvDeparts { from, to, edge });
        self.ugv = Mode::Moving {
            from,
            to,
            edge: Some(edge),
            entry: self.now,
            arrival: self.now + cost,
        };
        self.route.remove(0);
        if self.target.map(|(e, _)| e) == Some(edge) && !self.knowledge.is_realized(edge) {
            self.cancel_target = true;
        }
    }

    fn uav_start_hop(&mut self, from: VertexId) {
        let Some(hop) = self.hops.pop_front() else {
            self.uav = Some(Mode::AtVertex(from));
            return;
        };
        self.emit(EventKind::UavDeparts {
            from,
            to: hop.to,
            inspect: hop.inspect,
        });
        self.uav = Some(Mode::Moving {
            from,
            to: hop.to,
            edge: hop.inspect,
            entry: self.now,
            arrival: self.now + hop.duration,
        });
    }

    fn load_leg(&mut self, leg: &InspectionLeg) {
        self.hops.clear();
        for w in leg.transit.windows(2) {
            self.hops.push_back(Hop {
                to: w[1],
                inspect: None,
                duration: self.metric.hop_cost(w[0], w[1]),
            });
        }
        self.hops.push_back(Hop {
            to: leg.inspect.to,
            inspect: Some(leg.inspect.edge),
            duration: self.inst.edge(leg.inspect.edge).uav_cost,
        });
    }

    /// Chooses the UAV's next leg from vertex `at`. Returns UGV refresh time,
    /// total UAV time and solver time.
    fn decide_uav(&mut self, at: VertexId) -> Result<(Duration, Duration, Duration), PlanError> {
        let mut ugv_time = Duration::ZERO;
        if self.paths_origin != self.ugv_origin() {
            ugv_time = self.plan_ugv(&[])?;
        }
        let started = Instant::now();
        let traversing = match self.ugv {
            Mode::Moving { edge, .. } => edge,
            Mode::AtVertex(_) => None,
        };
        let view = UgvView {
            paths: &self.paths,
            offset: self.ugv_offset(),
            traversing,
            k: self.ugv_k,
        };
        let decision: Decision = match self.cfg.planner {
            Planner::KsppRpp => {
                policy::rpp_step(self.inst, &mut self.metric, &self.knowledge, &view, at, self.cfg.rpp)?
            }
            Planner::KsppPaa => policy::paa_step(
                self.inst,
                &mut self.metric,
                &self.knowledge,
                &view,
                at,
                self.cfg.weights,
            )?,
            Planner::Naive => policy::naive_step(self.inst, &mut self.metric, &self.knowledge, &view, at)?,
            Planner::UgvOnly => unreachable!("no UAV"),
        };
        let uav_time = started.elapsed();
        if decision.budget_exhausted {
            self.budget_exhaustions += 1;
            self.emit(EventKind::SolverBudgetExhausted);
        }
        self.emit(EventKind::UavTarget(decision.leg.as_ref().map(|l| l.inspect.edge)));
        self.cancel_target = false;
        self.uav_pending = false;
        match &decision.leg {
            Some(leg) => {
                self.target = Some((leg.inspect.edge, self.now + decision.deadline));
                self.load_leg(leg);
            }
            None => {
                self.target = None;
                self.hops.clear();
            }
        }
        self.uav_start_hop(at);
        Ok((ugv_time, uav_time, decision.solve_time))
    }

    fn reveal(&mut self, edge: EdgeId, by: Vehicle, updates: &mut Vec<CostUpdate>) {
        if self.knowledge.is_realized(edge) {
            return;
        }
        let old = PlanningCostView::new(self.inst, &self.knowledge)
            .planning_cost(edge)
            .expect("ground edge");
        let cost = self.real.cost(edge).expect("impeded edges are realized");
        self.knowledge.reveal(edge, cost);
        updates.push(CostUpdate {
            edge,
            old_cost: old,
            new_cost: cost,
        });
        self.emit(EventKind::Revealed { edge, cost, by });
    }

    fn start(&mut self) -> Result<Option<f64>, SimError> {
        let ends = self.inst.endpoints();
        if ends.p == ends.d {
            return Ok(Some(0.0));
        }
        let ugv = self.plan_ugv(&[])?;
        self.ugv_depart();
        let (mut refresh, mut uav, mut solve) = Default::default();
        if self.uav.is_some() {
            (refresh, uav, solve) = self.decide_uav(ends.q)?;
        }
        self.timings.push(ReplanTiming {
            time: 0.0,
            trigger: Trigger::Start,
            ugv: ugv + refresh,
            uav,
            uav_solve: solve,
        });
        Ok(None)
    }

    /// Processes every arrival at the next event time. Returns the arrival
    /// time once the UGV reaches the destination.
    fn step(&mut self) -> Result<Option<f64>, SimError> {
        let t_ugv = self.ugv.arrival();
        let t_uav = self.uav.map_or(INF, |m| m.arrival());
        self.now = t_ugv.min(t_uav);
        let mut updates = Vec::new();

        let uav_arrival = match self.uav {
            Some(Mode::Moving { to, edge, arrival, .. }) if arrival == self.now => Some((to, edge)),
            _ => None,
        };
        let ugv_arrival = match self.ugv {
            Mode::Moving { to, edge, arrival, .. } if arrival == self.now => Some((to, edge.expect("ground edge"))),
            _ => None,
        };
        if let Some((_, Some(e))) = uav_arrival {
            if let Some((_, deadline)) = self.target.filter(|(t, _)| *t == e) {
                if self.now > deadline && !self.knowledge.is_realized(e) {
                    self.late_inspections += 1;
                }
            }
            self.reveal(e, Vehicle::Uav, &mut updates);
        }
        if let Some((_, e)) = ugv_arrival {
            if matches!(self.inst.edge(e).ugv, UgvCost::Impeded(_)) {
                self.reveal(e, Vehicle::Ugv, &mut updates);
            }
        }
        if let Some((v, _)) = uav_arrival {
            self.emit(EventKind::UavArrives(v));
            self.uav = Some(Mode::AtVertex(v));
        }
        if let Some((v, _)) = ugv_arrival {
            self.emit(EventKind::UgvArrives(v));
            self.ugv = Mode::AtVertex(v);
            if v == self.inst.endpoints().d {
                return Ok(Some(self.now));
            }
        }

        let mut timing = ReplanTiming {
            time: self.now,
            trigger: Trigger::UavLeg,
            ugv: Duration::ZERO,
            uav: Duration::ZERO,
            uav_solve: Duration::ZERO,
        };
        let mut replanned = false;
        if !updates.is_empty() {
            self.n_replans += 1;
            timing.trigger = Trigger::Revelation;
            timing.ugv = self.plan_ugv(&updates)?;
            self.uav_pending = self.uav.is_some();
            replanned = true;
        }
        if ugv_arrival.is_some() {
            self.ugv_depart();
        }
        if let Some(Mode::AtVertex(at)) = self.uav {
            let leg_done = self.hops.is_empty();
            if self.uav_pending || (uav_arrival.is_some() && (leg_done || self.cancel_target)) {
                if self.cancel_target && !leg_done {
                    let e = self.target.expect("target while hops remain").0;
                    self.emit(EventKind::InspectionCancelled(e));
                }
                let (refresh, uav, solve) = self.decide_uav(at)?;
                timing.ugv += refresh;
                timing.uav = uav;
                timing.uav_solve = solve;
                replanned = true;
            } else if uav_arrival.is_some() {
                self.uav_start_hop(at);
            }
        }
        if replanned {
            self.timings.push(timing);
        }
        Ok(None)
    }
}

/// Simulates one run to the UGV's arrival at the destination.
pub fn run(inst: &ProblemInstance, real: &Realization, cfg: &SimulationConfig) -> Result<SimulationOutcome, SimError> {
    assert!(cfg.k >= 1, "k must be at least 1");
    let lb = lower_bound(inst, real)?;
    let ends = inst.endpoints();
    let mut sim = Sim {
        inst,
        real,
        cfg: *cfg,
        ugv_k: cfg.planner.ugv_paths(cfg.k),
        knowledge: KnowledgeState::new(inst),
        metric: UavMetric::new(inst),
        dstar: DStarState::initialize(inst, ends.p, ends.d),
        now: 0.0,
        log: Vec::new(),
        timings: Vec::new(),
        n_replans: 0,
        budget_exhaustions: 0,
        late_inspections: 0,
        ugv: Mode::AtVertex(ends.p),
        route: vec![ends.p],
        paths: PathSet::default(),
        paths_origin: ends.p,
        uav: (cfg.planner != Planner::UgvOnly).then_some(Mode::AtVertex(ends.q)),
        hops: VecDeque::new(),
        target: None,
        uav_pending: false,
        cancel_target: false,
    };
    let mut arrival = sim.start()?;
    let mut steps = 0;
    while arrival.is_none() {
        steps += 1;
        if steps > cfg.max_events {
            return Err(SimError::EventLimit(cfg.max_events));
        }
        arrival = sim.step()?;
    }
    Ok(SimulationOutcome {
        arrival_time: arrival.expect("loop exits on arrival"),
        lower_bound: lb,
        event_log: sim.log,
        replanning_times: sim.timings,
        n_replans: sim.n_replans,
        budget_exhaustions: sim.budget_exhaustions,
        late_inspections: sim.late_inspections,
    })
}
