//! Independent oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sapp_core::rpp::CriticalEdge;
use sapp_core::{
    Coord, CostDistribution, EdgeId, EdgeRecord, Endpoints, ProblemInstance, Realization, UavSettings, UgvCost,
    VertexId,
};

/// Total order wrapper for heap keys.
#[derive(Clone, Copy, PartialEq)]
struct F(f64);
impl Eq for F {}
impl PartialOrd for F {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for F {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

/// Plain Dijkstra over ground edges; `cost` returns `None` for edges to
/// skip. Returns distances from `src`.
pub fn dijkstra(inst: &ProblemInstance, src: usize, cost: &dyn Fn(&EdgeRecord) -> Option<f64>) -> Vec<f64> {
    dijkstra_filtered(inst, src, cost, &HashSet::new())
}

fn dijkstra_filtered(
    inst: &ProblemInstance,
    src: usize,
    cost: &dyn Fn(&EdgeRecord) -> Option<f64>,
    banned_vertices: &HashSet<usize>,
) -> Vec<f64> {
    let n = inst.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in inst.edges() {
        if let Some(c) = cost(e) {
            if c.is_finite() {
                adj[e.u.index()].push((e.v.index(), c));
                adj[e.v.index()].push((e.u.index(), c));
            }
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((F(0.0), src)));
    while let Some(Reverse((F(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, c) in &adj[v] {
            if banned_vertices.contains(&w) {
                continue;
            }
            if d + c < dist[w] {
                dist[w] = d + c;
                heap.push(Reverse((F(d + c), w)));
            }
        }
    }
    dist
}

/// Dijkstra returning one shortest path as a vertex list.
fn dijkstra_path(
    inst: &ProblemInstance,
    src: usize,
    dst: usize,
    cost: &dyn Fn(&EdgeRecord) -> Option<f64>,
    banned_vertices: &HashSet<usize>,
) -> Option<(f64, Vec<usize>)> {
    let dist = dijkstra_filtered(inst, dst, cost, banned_vertices);
    if !dist[src].is_finite() || banned_vertices.contains(&src) {
        return None;
    }
    // walk downhill from src towards dst
    let mut path = vec![src];
    let mut v = src;
    while v != dst {
        let next = inst
            .edges()
            .iter()
            .filter_map(|e| {
                let c = cost(e)?;
                let w = if e.u.index() == v {
                    e.v.index()
                } else if e.v.index() == v {
                    e.u.index()
                } else {
                    return None;
                };
                (!banned_vertices.contains(&w) && (dist[w] + c - dist[v]).abs() <= 1e-9 * dist[v].max(1.0)).then_some(w)
            })
            .min()?;
        path.push(next);
        v = next;
    }
    Some((dist[src], path))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Costs of the `k` cheapest simple paths by exhaustive enumeration.
pub fn enumerate_k_costs(
    inst: &ProblemInstance,
    src: usize,
    dst: usize,
    k: usize,
    cost: &dyn Fn(&EdgeRecord) -> Option<f64>,
) -> Vec<f64> {
    fn rec(adj: &[Vec<(usize, f64)>], v: usize, dst: usize, acc: f64, seen: &mut Vec<bool>, out: &mut Vec<f64>) {
        if v == dst {
            out.push(acc);
            return;
        }
        for &(w, c) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                rec(adj, w, dst, acc + c, seen, out);
                seen[w] = false;
            }
        }
    }
    let n = inst.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in inst.edges() {
        if let Some(c) = cost(e) {
            adj[e.u.index()].push((e.v.index(), c));
            adj[e.v.index()].push((e.u.index(), c));
        }
    }
    let mut seen = vec![false; n];
    seen[src] = true;
    let mut out = Vec::new();
    rec(&adj, src, dst, 0.0, &mut seen, &mut out);
    out.sort_by(f64::total_cmp);
    out.truncate(k);
    out
}

/// Textbook Yen: costs of the `k` cheapest loopless paths.
pub fn yen_k_costs(
    inst: &ProblemInstance,
    src: usize,
    dst: usize,
    k: usize,
    cost: &dyn Fn(&EdgeRecord) -> Option<f64>,
) -> Vec<f64> {
    let edge_cost = |a: usize, b: usize| -> f64 {
        inst.edges()
            .iter()
            .filter(|e| edge_key(e.u.index(), e.v.index()) == edge_key(a, b))
            .find_map(cost)
            .unwrap()
    };
    let Some(first) = dijkstra_path(inst, src, dst, cost, &HashSet::new()) else {
        return Vec::new();
    };
    let mut accepted: Vec<(f64, Vec<usize>)> = vec![first];
    let mut pool: Vec<(f64, Vec<usize>)> = Vec::new();
    while accepted.len() < k {
        let prev = accepted.last().unwrap().1.clone();
        for i in 0..prev.len() - 1 {
            let root = &prev[..=i];
            let mut banned_edges = HashSet::new();
            for (_, p) in &accepted {
                if p.len() > i && p[..=i] == *root {
                    banned_edges.insert(edge_key(p[i], p[i + 1]));
                }
            }
            let banned_vertices: HashSet<usize> = root[..i].iter().copied().collect();
            let masked = |e: &EdgeRecord| {
                if banned_edges.contains(&edge_key(e.u.index(), e.v.index())) {
                    None
                } else {
                    cost(e)
                }
            };
            if let Some((spur_cost, spur)) = dijkstra_path(inst, root[i], dst, &masked, &banned_vertices) {
                let root_cost: f64 = root.windows(2).map(|w| edge_cost(w[0], w[1])).sum();
                let mut path = root[..i].to_vec();
                path.extend(spur);
                if !pool.iter().any(|(_, p)| *p == path) && !accepted.iter().any(|(_, p)| *p == path) {
                    pool.push((root_cost + spur_cost, path));
                }
            }
        }
        if pool.is_empty() {
            break;
        }
        pool.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        accepted.push(pool.remove(0));
    }
    accepted.into_iter().map(|(c, _)| c).collect()
}

/// Planning cost with nothing realized: expected cost for impeded edges.
pub fn expected_cost(e: &EdgeRecord) -> Option<f64> {
    match e.ugv {
        UgvCost::Fixed(c) => Some(c),
        UgvCost::Impeded(CostDistribution::Uniform { min, max }) => Some((min + max) / 2.0),
        UgvCost::Absent => None,
    }
}

/// Random connected graph with integer costs at least the straight-line
/// length, so every sum is exact and the straight-line heuristic stays
/// admissible. Impeded ranges have an even width so the expected cost is an
/// integer too.
pub fn random_integer_graph(
    rng: &mut ChaCha8Rng,
    n: usize,
    extra_edges: usize,
    impeded_share: f64,
    free_flight: bool,
) -> (ProblemInstance, Realization) {
    let vertices: Vec<Coord> = (0..n)
        .map(|_| Coord::new(rng.gen_range(0..60) as f64, rng.gen_range(0..60) as f64))
        .collect();
    let mut pairs: Vec<(u32, u32)> = (1..n).map(|i| (rng.gen_range(0..i) as u32, i as u32)).collect();
    let mut seen: HashSet<(u32, u32)> = pairs.iter().copied().collect();
    for _ in 0..extra_edges {
        let a = rng.gen_range(0..n) as u32;
        let b = rng.gen_range(0..n) as u32;
        if a != b && seen.insert((a.min(b), a.max(b))) {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| {
            let len = vertices[u as usize].distance(&vertices[v as usize]).ceil().max(1.0);
            let base = len + rng.gen_range(0..6) as f64;
            let ugv = if rng.gen_bool(impeded_share) {
                UgvCost::Impeded(CostDistribution::Uniform {
                    min: base,
                    max: base + 2.0 * rng.gen_range(1..30) as f64,
                })
            } else {
                UgvCost::Fixed(base)
            };
            EdgeRecord {
                id: EdgeId(i as u32),
                u: VertexId(u),
                v: VertexId(v),
                ugv,
                uav_cost: (len / 2.0).ceil(),
            }
        })
        .collect();
    let ends = Endpoints {
        p: VertexId(0),
        q: VertexId(rng.gen_range(0..n) as u32),
        d: VertexId(n as u32 - 1),
    };
    let uav = UavSettings {
        speed: 2.0,
        free_flight,
    };
    let inst = ProblemInstance::new(vertices, edges, ends, uav).unwrap();
    let real = Realization::sample(&inst, rng);
    (inst, real)
}

/// Aerial transit time between every pair, from the instance directly.
pub fn uav_distances(inst: &ProblemInstance) -> Vec<Vec<f64>> {
    let settings = inst.uav_settings();
    (0..inst.num_vertices())
        .map(|a| {
            if settings.free_flight {
                (0..inst.num_vertices())
                    .map(|b| inst.euclidean(VertexId(a as u32), VertexId(b as u32)) / settings.speed)
                    .collect()
            } else {
                dijkstra_aerial(inst, a)
            }
        })
        .collect()
}

fn dijkstra_aerial(inst: &ProblemInstance, src: usize) -> Vec<f64> {
    let n = inst.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    dist[src] = 0.0;
    let mut done = vec![false; n];
    for _ in 0..n {
        let Some(v) = (0..n)
            .filter(|&v| !done[v] && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[v] = true;
        for e in inst.edges() {
            let w = if e.u.index() == v {
                e.v.index()
            } else if e.v.index() == v {
                e.u.index()
            } else {
                continue;
            };
            dist[w] = dist[w].min(dist[v] + e.uav_cost);
        }
    }
    dist
}

/// Best (inspected count, start time of the last inspection) over every
/// ordered subset of critical edges and every traversal direction, with each
/// inspection finishing by its deadline.
pub fn rpp_brute_force(inst: &ProblemInstance, crit: &[CriticalEdge], start: VertexId) -> (usize, f64) {
    struct Ctx<'a> {
        inst: &'a ProblemInstance,
        crit: &'a [CriticalEdge],
        dist: Vec<Vec<f64>>,
        used: Vec<bool>,
        best: (usize, f64),
    }
    fn rec(c: &mut Ctx<'_>, at: usize, free: f64, last_start: f64, count: usize) {
        if count > c.best.0 || (count == c.best.0 && last_start < c.best.1) {
            c.best = (count, last_start);
        }
        for i in 0..c.crit.len() {
            if c.used[i] {
                continue;
            }
            let e = c.inst.edge(c.crit[i].edge);
            for (a, b) in [(e.u.index(), e.v.index()), (e.v.index(), e.u.index())] {
                let begin = free + c.dist[at][a];
                if begin + e.uav_cost <= c.crit[i].t_max {
                    c.used[i] = true;
                    rec(c, b, begin + e.uav_cost, begin, count + 1);
                    c.used[i] = false;
                }
            }
        }
    }
    let mut c = Ctx {
        inst,
        crit,
        dist: uav_distances(inst),
        used: vec![false; crit.len()],
        best: (0, 0.0),
    };
    rec(&mut c, start.index(), 0.0, 0.0, 0);
    c.best
}
