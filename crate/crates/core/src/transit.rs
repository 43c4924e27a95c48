//! Aerial transit metric: straight-line flight when the instance allows it,
//! shortest paths over the aerial edge set otherwise.

use std::collections::HashMap;

use crate::error::PlanError;
use crate::model::{ProblemInstance, VertexId};
use crate::shortest::{uav_tree, ShortestTree};

/// Caches one shortest-path tree per queried source. The aerial edge set is
/// static, so a metric can live for a whole simulation.
#[derive(Debug, Clone)]
pub struct UavMetric<'a> {
    inst: &'a ProblemInstance,
    trees: HashMap<VertexId, ShortestTree>,
}

impl<'a> UavMetric<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Self {
        UavMetric {
            inst,
            trees: HashMap::new(),
        }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.inst
    }

    fn tree(&mut self, from: VertexId) -> &ShortestTree {
        let inst = self.inst;
        self.trees.entry(from).or_insert_with(|| uav_tree(inst, from))
    }

    /// Transit time `a → b`. `INF` when `b` is unreachable without free
    /// flight.
    pub fn cost(&mut self, a: VertexId, b: VertexId) -> f64 {
        if a == b {
            return 0.0;
        }
        let settings = self.inst.uav_settings();
        if settings.free_flight {
            self.inst.euclidean(a, b) / settings.speed
        } else {
            self.tree(a).dist[b.index()]
        }
    }

    /// Waypoints flown from `a` to `b`; a straight hop under free flight.
    pub fn route(&mut self, a: VertexId, b: VertexId) -> Result<Vec<VertexId>, PlanError> {
        if a == b {
            return Ok(vec![a]);
        }
        if self.inst.uav_settings().free_flight {
            return Ok(vec![a, b]);
        }
        self.tree(a)
            .path_to(b)
            .ok_or(PlanError::UavUnreachable { from: a, to: b })
    }

    /// Duration of a single hop between consecutive waypoints of a route.
    pub fn hop_cost(&self, a: VertexId, b: VertexId) -> f64 {
        let settings = self.inst.uav_settings();
        if settings.free_flight {
            self.inst.euclidean(a, b) / settings.speed
        } else {
            let e = self.inst.edge_between(a, b).expect("route hops follow aerial edges");
            self.inst.edge(e).uav_cost
        }
    }
}

/// Transit time between two vertices (see [`UavMetric::cost`]).
pub fn uav_transit_cost(inst: &ProblemInstance, a: VertexId, b: VertexId) -> Result<f64, PlanError> {
    let c = UavMetric::new(inst).cost(a, b);
    if c.is_finite() {
        Ok(c)
    } else {
        Err(PlanError::UavUnreachable { from: a, to: b })
    }
}
