//! Instance generators: grids with impeded cuts, parallel chains joined by
//! bridges, the scaling series, and road networks loaded from files.
//!
//! Every generator is a pure function of its spec and seed.

use std::path::Path as FsPath;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FormatError, InstanceError};
use crate::io::load_instance;
use crate::model::{
    Coord, CostDistribution, EdgeId, EdgeRecord, Endpoints, KnowledgeState, PlanningCostView, ProblemInstance,
    Realization, UavSettings, UgvCost, VertexId,
};
use crate::shortest::{ugv_shortest_path, ugv_tree};

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Coord>,
    pairs: Vec<(u32, u32)>,
    costs: Vec<UgvCost>,
}

impl Builder {
    fn vertex(&mut self, x: f64, y: f64) -> u32 {
        self.vertices.push(Coord::new(x, y));
        self.vertices.len() as u32 - 1
    }

    fn edge(&mut self, u: u32, v: u32) -> usize {
        let len = self.length(u, v);
        self.pairs.push((u.min(v), u.max(v)));
        self.costs.push(UgvCost::Fixed(len));
        self.pairs.len() - 1
    }

    fn length(&self, u: u32, v: u32) -> f64 {
        self.vertices[u as usize].distance(&self.vertices[v as usize])
    }

    fn impede(&mut self, e: usize, t_max: f64) {
        let (u, v) = self.pairs[e];
        let len = self.length(u, v);
        self.costs[e] = UgvCost::Impeded(CostDistribution::Uniform {
            min: len,
            max: t_max.max(len),
        });
    }

    fn build(self, ends: Endpoints, uav: UavSettings) -> Result<ProblemInstance, InstanceError> {
        let edges = self
            .pairs
            .iter()
            .zip(self.costs)
            .enumerate()
            .map(|(i, (&(u, v), ugv))| EdgeRecord {
                id: EdgeId(i as u32),
                u: VertexId(u),
                v: VertexId(v),
                ugv,
                uav_cost: self.vertices[u as usize].distance(&self.vertices[v as usize]) / uav.speed,
            })
            .collect();
        ProblemInstance::new(self.vertices, edges, ends, uav)
    }
}

/// How a cut picks its impeded edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutMode {
    /// A contiguous random run of the horizontal edges crossing a column
    /// boundary.
    Partial,
    /// Every horizontal edge crossing a column boundary.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub n_impeded_cuts: usize,
    pub cut_mode: CutMode,
    pub t_max_range: (f64, f64),
    pub uav_speed: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rows: 10,
            cols: 20,
            spacing: 10.0,
            n_impeded_cuts: 5,
            cut_mode: CutMode::Partial,
            t_max_range: (80.0, 100.0),
            uav_speed: 2.0,
        }
    }
}

/// `rows × cols` lattice from `(0, 0)`; `p` and `d` at opposite corners.
pub fn generate_grid(spec: &GridSpec, seed: u64) -> Result<(ProblemInstance, Realization), InstanceError> {
    assert!(
        spec.rows >= 2 && spec.cols >= 2,
        "grid needs at least 2 rows and 2 columns"
    );
    let mut rng = rng_for(seed);
    let (rows, cols) = (spec.rows, spec.cols);
    let mut b = Builder::default();
    for r in 0..rows {
        for c in 0..cols {
            b.vertex(c as f64 * spec.spacing, r as f64 * spec.spacing);
        }
    }
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    // horizontal[c][r]: edge between columns c and c + 1 in row r
    let mut horizontal = vec![Vec::with_capacity(rows); cols - 1];
    for r in 0..rows {
        for c in 0..cols {
            if let Some(column) = horizontal.get_mut(c) {
                column.push(b.edge(id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                b.edge(id(r, c), id(r + 1, c));
            }
        }
    }
    let n_cuts = spec.n_impeded_cuts.min(cols - 1);
    let mut columns = index::sample(&mut rng, cols - 1, n_cuts).into_vec();
    columns.sort_unstable();
    for c in columns {
        let (start, len) = match spec.cut_mode {
            CutMode::Full => (0, rows),
            CutMode::Partial => {
                let len = rng.gen_range(1..=rows);
                (rng.gen_range(0..=rows - len), len)
            }
        };
        for &e in &horizontal[c][start..start + len] {
            let t_max = rng.gen_range(spec.t_max_range.0..=spec.t_max_range.1);
            b.impede(e, t_max);
        }
    }
    let n = (rows * cols) as u32;
    let ends = Endpoints {
        p: VertexId(0),
        q: VertexId(rng.gen_range(0..n)),
        d: VertexId(n - 1),
    };
    let inst = b.build(
        ends,
        UavSettings {
            speed: spec.uav_speed,
            free_flight: false,
        },
    )?;
    let real = Realization::sample(&inst, &mut rng);
    Ok((inst, real))
}

/// Impeded edges per chain: an absolute count or a share of chain edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerPath {
    Count(usize),
    Fraction(f64),
}

impl PerPath {
    fn resolve(self, n: usize) -> usize {
        match self {
            PerPath::Count(c) => c.min(n),
            PerPath::Fraction(f) => ((f * n as f64).round() as usize).min(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BridgeSpec {
    pub n_paths: usize,
    pub nodes_per_path: usize,
    /// Chain nodes fill this box, given as top-left and bottom-right
    /// corners; the first chain runs along the top edge.
    pub bbox: ((f64, f64), (f64, f64)),
    pub impeded_per_path: PerPath,
    /// Share of each chain's nodes that get a bridge to a neighbouring chain.
    pub bridge_fraction: f64,
    pub t_max_range: (f64, f64),
    /// Impeded edges on the initial best path realize at their maximum,
    /// all others at their minimum.
    pub adversarial: bool,
    pub uav_speed: f64,
}

impl Default for BridgeSpec {
    fn default() -> Self {
        BridgeSpec {
            n_paths: 10,
            nodes_per_path: 19,
            bbox: ((10.0, 100.0), (190.0, -90.0)),
            impeded_per_path: PerPath::Count(2),
            bridge_fraction: 0.1,
            t_max_range: (80.0, 100.0),
            adversarial: true,
            uav_speed: 2.0,
        }
    }
}

/// Parallel chains from `p = (0, 0)` to `d = (right + dx, 0)` spread evenly
/// over the box, with vertical bridges between neighbouring chains.
pub fn generate_bridge(spec: &BridgeSpec, seed: u64) -> Result<(ProblemInstance, Realization), InstanceError> {
    assert!(
        spec.n_paths >= 1 && spec.nodes_per_path >= 2,
        "need a chain of at least two nodes"
    );
    assert!(
        spec.bridge_fraction > 0.0 && spec.bridge_fraction <= 1.0,
        "bridge fraction must be in (0, 1]"
    );
    let mut rng = rng_for(seed);
    let (m, len) = (spec.n_paths, spec.nodes_per_path);
    let mut b = Builder::default();
    let p = b.vertex(0.0, 0.0);
    let ((left, top), (right, bottom)) = spec.bbox;
    let dx = (right - left) / (len - 1) as f64;
    let dy = if m > 1 { (top - bottom) / (m - 1) as f64 } else { 0.0 };
    let chains: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            let y = top - i as f64 * dy;
            (0..len).map(|j| b.vertex(left + j as f64 * dx, y)).collect()
        })
        .collect();
    let d = b.vertex(right + dx, 0.0);
    let mut chain_edges = Vec::with_capacity(m);
    for chain in &chains {
        b.edge(p, chain[0]);
        chain_edges.push(chain.windows(2).map(|w| b.edge(w[0], w[1])).collect::<Vec<_>>());
        b.edge(chain[len - 1], d);
    }
    let n_bridges = ((spec.bridge_fraction * len as f64).round() as usize).clamp(1, len);
    let mut bridged = std::collections::HashSet::new();
    for i in 0..m {
        if m == 1 {
            break;
        }
        for j in index::sample(&mut rng, len, n_bridges).into_vec() {
            let other = match i {
                0 => 1,
                _ if i == m - 1 => i - 1,
                _ if rng.gen_bool(0.5) => i - 1,
                _ => i + 1,
            };
            if bridged.insert((i.min(other), j)) {
                b.edge(chains[i][j], chains[other][j]);
            }
        }
    }
    let per_path = spec.impeded_per_path.resolve(len - 1);
    for edges in &chain_edges {
        for k in index::sample(&mut rng, edges.len(), per_path).into_vec() {
            let t_max = rng.gen_range(spec.t_max_range.0..=spec.t_max_range.1);
            b.impede(edges[k], t_max);
        }
    }
    let n = b.vertices.len() as u32;
    let ends = Endpoints {
        p: VertexId(p),
        q: VertexId(rng.gen_range(0..n)),
        d: VertexId(d),
    };
    let inst = b.build(
        ends,
        UavSettings {
            speed: spec.uav_speed,
            free_flight: false,
        },
    )?;
    let real = if spec.adversarial {
        adversarial_realization(&inst)?
    } else {
        Realization::sample(&inst, &mut rng)
    };
    Ok((inst, real))
}

/// Impeded edges on the expected-cost shortest path at their maximum, every
/// other impeded edge at its minimum.
pub fn adversarial_realization(inst: &ProblemInstance) -> Result<Realization, InstanceError> {
    let know = KnowledgeState::new(inst);
    let view = PlanningCostView::new(inst, &know);
    let ends = inst.endpoints();
    let best = ugv_shortest_path(inst, &view, ends.p, ends.d).map_err(|_| InstanceError::DestinationUnreachable)?;
    Realization::new(
        inst,
        inst.impeded().iter().map(|&e| {
            let (lo, hi) = inst.edge(e).distribution().expect("impeded").bounds();
            (e, if best.contains_edge(e) { hi } else { lo })
        }),
    )
}

/// Scaling series sizes as (nodes per chain, chains).
pub const SCALING_SIZES: [(usize, usize); 5] = [(20, 20), (25, 20), (30, 20), (30, 25), (40, 25)];

/// Bridge-style instance for the scaling study: 30% of each chain's edges
/// impeded and bridges at 30% of its nodes.
pub fn scaling_spec(nodes_per_path: usize, n_paths: usize) -> BridgeSpec {
    BridgeSpec {
        n_paths,
        nodes_per_path,
        bbox: (
            (10.0, 10.0 * n_paths as f64),
            (10.0 * nodes_per_path as f64, -10.0 * n_paths as f64),
        ),
        impeded_per_path: PerPath::Fraction(0.3),
        bridge_fraction: 0.3,
        adversarial: false,
        ..BridgeSpec::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSpec {
    pub nodes_per_path: usize,
    pub n_paths: usize,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        let (nodes_per_path, n_paths) = SCALING_SIZES[0];
        ScalingSpec {
            nodes_per_path,
            n_paths,
        }
    }
}

pub fn generate_scaling(
    nodes_per_path: usize,
    n_paths: usize,
    seed: u64,
) -> Result<(ProblemInstance, Realization), InstanceError> {
    generate_bridge(&scaling_spec(nodes_per_path, n_paths), seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadSpec {
    pub impeded_fraction: f64,
    pub t_max_factor: f64,
}

impl Default for RoadSpec {
    fn default() -> Self {
        RoadSpec {
            impeded_fraction: 0.1,
            t_max_factor: 10.0,
        }
    }
}

/// Turns a plain road graph into a problem instance: `⌊f·|E|⌋` ground edges
/// become impeded on `[T, factor·T]` where `T` is the road's length, `p`
/// and `d` are the pair farthest apart by road, `q` is random and the UAV
/// flies straight lines.
pub fn prepare_road_network(
    base: &ProblemInstance,
    spec: &RoadSpec,
    seed: u64,
) -> Result<(ProblemInstance, Realization), InstanceError> {
    let mut rng = rng_for(seed);
    let ground: Vec<usize> = base
        .edges()
        .iter()
        .filter(|e| e.is_ugv())
        .map(|e| e.id.index())
        .collect();
    let n_imp = ((spec.impeded_fraction.clamp(0.0, 1.0) * ground.len() as f64).floor() as usize).min(ground.len());
    let mut chosen = vec![false; base.num_edges()];
    for i in index::sample(&mut rng, ground.len(), n_imp) {
        chosen[ground[i]] = true;
    }
    let edges: Vec<EdgeRecord> = base
        .edges()
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if chosen[e.id.index()] {
                let len = e.min_ugv_cost().expect("ground edge");
                e.ugv = UgvCost::Impeded(CostDistribution::uniform(len, spec.t_max_factor * len)?);
            }
            Ok(e)
        })
        .collect::<Result<_, InstanceError>>()?;
    let (p, d) = farthest_pair(base);
    let n = base.num_vertices() as u32;
    let ends = Endpoints {
        p,
        q: VertexId(rng.gen_range(0..n)),
        d,
    };
    let uav = UavSettings {
        free_flight: true,
        ..base.uav_settings()
    };
    let inst = ProblemInstance::new(base.vertices().to_vec(), edges, ends, uav)?;
    let real = Realization::sample(&inst, &mut rng);
    Ok((inst, real))
}

/// Loads a road graph in the instance format and prepares it.
pub fn import_road_network(
    path: impl AsRef<FsPath>,
    spec: &RoadSpec,
    seed: u64,
) -> Result<(ProblemInstance, Realization), FormatError> {
    let base = load_instance(path)?;
    Ok(prepare_road_network(&base, spec, seed)?)
}

/// The vertex pair with the largest ground distance at minimum costs; ties
/// go to the lexicographically smallest pair.
pub fn farthest_pair(inst: &ProblemInstance) -> (VertexId, VertexId) {
    struct MinCost<'a>(&'a ProblemInstance);
    impl crate::model::EdgeCost for MinCost<'_> {
        fn cost(&self, e: EdgeId) -> f64 {
            self.0.edge(e).min_ugv_cost().unwrap_or(f64::INFINITY)
        }
    }
    let mut best = (f64::NEG_INFINITY, VertexId(0), VertexId(0));
    for a in 0..inst.num_vertices() {
        let tree = ugv_tree(inst, &MinCost(inst), VertexId(a as u32));
        for (b, &dist) in tree.dist.iter().enumerate().skip(a + 1) {
            if dist.is_finite() && dist > best.0 {
                best = (dist, VertexId(a as u32), VertexId(b as u32));
            }
        }
    }
    (best.1, best.2)
}

/// A small road-like network: a jittered lattice with some streets removed
/// and some diagonals added, road lengths 1 to 1.3 times the straight line.
pub fn road_like_network(cols: usize, rows: usize, seed: u64) -> Result<ProblemInstance, InstanceError> {
    assert!(cols >= 2 && rows >= 2);
    let mut rng = rng_for(seed);
    let block = 100.0;
    let mut b = Builder::default();
    for r in 0..rows {
        for c in 0..cols {
            let jx = rng.gen_range(-0.25..0.25) * block;
            let jy = rng.gen_range(-0.25..0.25) * block;
            b.vertex(c as f64 * block + jx, r as f64 * block + jy);
        }
    }
    let id = |r: usize, c: usize| (r * cols + c) as u32;
    let mut streets = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                streets.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                streets.push((id(r, c), id(r + 1, c)));
            }
            if r + 1 < rows && c + 1 < cols && rng.gen_bool(0.15) {
                streets.push((id(r, c), id(r + 1, c + 1)));
            }
        }
    }
    streets.shuffle(&mut rng);
    // drop streets while the network stays connected
    let n = rows * cols;
    let mut kept = Vec::new();
    let mut uf = UnionFind::new(n);
    let mut spare = Vec::new();
    for (u, v) in streets {
        if uf.union(u as usize, v as usize) {
            kept.push((u, v));
        } else {
            spare.push((u, v));
        }
    }
    kept.extend(spare.into_iter().filter(|_| rng.gen_bool(0.6)));
    kept.sort_unstable();
    for (u, v) in kept {
        let e = b.edge(u, v);
        let stretch = rng.gen_range(1.0..1.3);
        if let UgvCost::Fixed(len) = b.costs[e] {
            b.costs[e] = UgvCost::Fixed(len * stretch);
        }
    }
    let ends = Endpoints {
        p: VertexId(0),
        q: VertexId(0),
        d: VertexId(n as u32 - 1),
    };
    b.build(
        ends,
        UavSettings {
            speed: 2.0,
            free_flight: true,
        },
    )
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            x = std::mem::replace(&mut self.0[x], r);
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        ra != rb
    }
}
