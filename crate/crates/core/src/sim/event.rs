use std::fmt;

use crate::model::{EdgeId, ProblemInstance, Realization, UgvCost, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vehicle {
    Ugv,
    Uav,
}

impl fmt::Display for Vehicle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vehicle::Ugv => "ugv",
            Vehicle::Uav => "uav",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    UgvDeparts {
        from: VertexId,
        to: VertexId,
        edge: EdgeId,
    },
    UgvArrives(VertexId),
    /// `inspect` is set when the hop traverses an edge to observe it.
    UavDeparts {
        from: VertexId,
        to: VertexId,
        inspect: Option<EdgeId>,
    },
    UavArrives(VertexId),
    Revealed {
        edge: EdgeId,
        cost: f64,
        by: Vehicle,
    },
    /// The UAV committed to inspecting `edge` next, or to idling.
    UavTarget(Option<EdgeId>),
    InspectionCancelled(EdgeId),
    SolverBudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} ", self.time)?;
        match &self.kind {
            EventKind::UgvDeparts { from, to, edge } => write!(f, "ugv_depart from={from} to={to} e={edge}"),
            EventKind::UgvArrives(v) => write!(f, "ugv_arrive v={v}"),
            EventKind::UavDeparts { from, to, inspect } => match inspect {
                Some(e) => write!(f, "uav_depart from={from} to={to} inspect={e}"),
                None => write!(f, "uav_depart from={from} to={to}"),
            },
            EventKind::UavArrives(v) => write!(f, "uav_arrive v={v}"),
            EventKind::Revealed { edge, cost, by } => write!(f, "reveal e={edge} cost={cost} by={by}"),
            EventKind::UavTarget(Some(e)) => write!(f, "uav_target e={e}"),
            EventKind::UavTarget(None) => write!(f, "uav_target none"),
            EventKind::InspectionCancelled(e) => write!(f, "uav_cancel e={e}"),
            EventKind::SolverBudgetExhausted => write!(f, "solver_budget_exhausted"),
        }
    }
}

/// Writes one event per line.
pub fn format_log(events: &[Event]) -> String {
    events.iter().map(|e| format!("{e}\n")).collect()
}

/// Checks a log against the instance and realization and returns the UGV's
/// arrival time at the destination, recomputed from its departures.
///
/// Verified: event times never decrease; the UGV starts at `p` at time 0,
/// departs from wherever and whenever it last arrived (no waiting, no
/// teleporting), finishes every edge it enters after exactly its ground
/// cost, and each impeded edge is revealed at most once, at its true cost.
pub fn replay_ugv(inst: &ProblemInstance, real: &Realization, events: &[Event]) -> Result<f64, String> {
    let ends = inst.endpoints();
    let mut last = 0.0;
    let mut at = Some((ends.p, 0.0));
    let mut moving: Option<(VertexId, f64)> = None;
    let mut revealed = vec![false; inst.num_edges()];
    for ev in events {
        if ev.time < last {
            return Err(format!("time goes backwards at {ev}"));
        }
        last = ev.time;
        match ev.kind {
            EventKind::UgvDeparts { from, to, edge } => {
                let (v, t) = at.take().ok_or_else(|| format!("departure while moving: {ev}"))?;
                if v != from || t != ev.time {
                    return Err(format!(
                        "departure from {from} at {} but UGV was at {v} since {t}",
                        ev.time
                    ));
                }
                if inst.ugv_edge_between(from, to) != Some(edge) {
                    return Err(format!("{edge} does not join {from} and {to} on the ground"));
                }
                let cost = match inst.edge(edge).ugv {
                    UgvCost::Fixed(c) => c,
                    UgvCost::Impeded(_) => real.cost(edge).ok_or("impeded edge without realization")?,
                    UgvCost::Absent => unreachable!(),
                };
                moving = Some((to, ev.time + cost));
            }
            EventKind::UgvArrives(v) => {
                let (to, t) = moving
                    .take()
                    .ok_or_else(|| format!("arrival without departure: {ev}"))?;
                if to != v || t != ev.time {
                    return Err(format!("expected arrival at {to} at {t}, log has {ev}"));
                }
                if v == ends.d {
                    return Ok(t);
                }
                at = Some((v, t));
            }
            EventKind::Revealed { edge, cost, .. } => {
                if std::mem::replace(&mut revealed[edge.index()], true) {
                    return Err(format!("{edge} revealed twice"));
                }
                if real.cost(edge) != Some(cost) {
                    return Err(format!("{edge} revealed at {cost}, true cost differs"));
                }
            }
            _ => {}
        }
    }
    match at {
        Some((v, t)) if v == ends.d => Ok(t),
        _ => Err("UGV never reached the destination".into()),
    }
}
