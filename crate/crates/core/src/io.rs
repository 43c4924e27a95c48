//! Line-oriented text formats for instances and realizations.
//!
//! ```text
//! sapp 1
//! v <id> <x> <y>
//! e <id> <u> <v> <ugv_cost|?|-> <uav_cost> <U t_min t_max|->
//! meta p=<id> q=<id> d=<id> uav_speed=<f> free_flight=<0|1>
//! ```
//!
//! The ground-cost column holds a number for an unimpeded ground edge, `?` for
//! an impeded edge (its cost is the distribution in the last column) and `-`
//! for an aerial-only edge. Realizations are `r <edge_id> <true_cost>` lines.
//! Numbers are written in shortest round-trip form, so saving a loaded
//! canonical file reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use crate::error::{FormatError, InstanceError};
use crate::model::{
    Coord, CostDistribution, EdgeId, EdgeRecord, Endpoints, ProblemInstance, Realization, UavSettings, UgvCost,
    VertexId,
};

const HEADER: &str = "sapp 1";

fn read(path: &FsPath) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &FsPath, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_instance(path: impl AsRef<FsPath>) -> Result<ProblemInstance, FormatError> {
    parse_instance(&read(path.as_ref())?)
}

pub fn save_instance(inst: &ProblemInstance, path: impl AsRef<FsPath>) -> Result<(), FormatError> {
    write(path.as_ref(), &format_instance(inst))
}

pub fn load_realization(inst: &ProblemInstance, path: impl AsRef<FsPath>) -> Result<Realization, FormatError> {
    parse_realization(inst, &read(path.as_ref())?)
}

pub fn save_realization(real: &Realization, path: impl AsRef<FsPath>) -> Result<(), FormatError> {
    write(path.as_ref(), &format_realization(real))
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, field: &'static str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| FormatError::parse(line, field, "missing"))?;
    tok.parse()
        .map_err(|_| FormatError::parse(line, field, format!("cannot parse {tok:?}")))
}

fn meta_value<'a>(tok: &'a str, key: &'static str, line: usize) -> Result<&'a str, FormatError> {
    tok.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| FormatError::parse(line, key, format!("expected {key}=<value>, got {tok:?}")))
}

pub fn parse_instance(text: &str) -> Result<ProblemInstance, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, HEADER)) => {}
        Some((n, other)) => {
            return Err(FormatError::parse(
                n,
                "header",
                format!("expected {HEADER:?}, got {other:?}"),
            ))
        }
        None => return Err(FormatError::parse(1, "header", "empty file")),
    }

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut meta = None;
    for (n, l) in lines {
        let mut toks = l.split_whitespace();
        let tag = toks.next().unwrap_or_default();
        if meta.is_some() {
            return Err(FormatError::parse(n, "meta", "content after meta line"));
        }
        match tag {
            "v" => {
                let id: u32 = num(toks.next(), n, "vertex id")?;
                if id as usize != vertices.len() {
                    return Err(FormatError::parse(
                        n,
                        "vertex id",
                        format!("expected {}, got {id}", vertices.len()),
                    ));
                }
                let x = num(toks.next(), n, "x")?;
                let y = num(toks.next(), n, "y")?;
                vertices.push(Coord::new(x, y));
            }
            "e" => {
                let id: u32 = num(toks.next(), n, "edge id")?;
                let u = VertexId(num(toks.next(), n, "u")?);
                let v = VertexId(num(toks.next(), n, "v")?);
                let ugv_tok = toks
                    .next()
                    .ok_or_else(|| FormatError::parse(n, "ugv_cost", "missing"))?;
                let uav_cost = num(toks.next(), n, "uav_cost")?;
                let dist = match toks.next() {
                    Some("-") => None,
                    Some("U") => {
                        let lo = num(toks.next(), n, "t_min")?;
                        let hi = num(toks.next(), n, "t_max")?;
                        Some(CostDistribution::uniform(lo, hi)?)
                    }
                    Some(other) => {
                        return Err(FormatError::parse(
                            n,
                            "distribution",
                            format!("unknown distribution {other:?}"),
                        ))
                    }
                    None => return Err(FormatError::parse(n, "distribution", "missing")),
                };
                let eid = EdgeId(id);
                let ugv = match (ugv_tok, dist) {
                    ("?", Some(d)) => UgvCost::Impeded(d),
                    ("?", None) => {
                        return Err(FormatError::parse(
                            n,
                            "distribution",
                            "impeded edge needs a distribution",
                        ))
                    }
                    ("-", Some(_)) => return Err(InstanceError::ImpededNotUgv(eid).into()),
                    ("-", None) => UgvCost::Absent,
                    (_, Some(_)) => return Err(InstanceError::ImpededWithFixedCost(eid).into()),
                    (tok, None) => UgvCost::Fixed(num(Some(tok), n, "ugv_cost")?),
                };
                edges.push(EdgeRecord {
                    id: eid,
                    u,
                    v,
                    ugv,
                    uav_cost,
                });
            }
            "meta" => {
                let mut next = |key| {
                    toks.next()
                        .ok_or_else(|| FormatError::parse(n, key, "missing"))
                        .and_then(|t| meta_value(t, key, n).map(str::to_owned))
                };
                let p = VertexId(num(Some(&next("p")?), n, "p")?);
                let q = VertexId(num(Some(&next("q")?), n, "q")?);
                let d = VertexId(num(Some(&next("d")?), n, "d")?);
                let speed: f64 = num(Some(&next("uav_speed")?), n, "uav_speed")?;
                let free_flight = match next("free_flight")?.as_str() {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(FormatError::parse(
                            n,
                            "free_flight",
                            format!("expected 0 or 1, got {other:?}"),
                        ))
                    }
                };
                meta = Some((Endpoints { p, q, d }, UavSettings { speed, free_flight }));
            }
            other => return Err(FormatError::parse(n, "record", format!("unknown record {other:?}"))),
        }
    }
    let (ends, uav) = meta.ok_or_else(|| FormatError::parse(text.lines().count(), "meta", "missing meta line"))?;
    Ok(ProblemInstance::new(vertices, edges, ends, uav)?)
}

pub fn format_instance(inst: &ProblemInstance) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for (i, c) in inst.vertices().iter().enumerate() {
        let _ = writeln!(out, "v {i} {} {}", c.x, c.y);
    }
    for e in inst.edges() {
        let _ = write!(out, "e {} {} {} ", e.id, e.u, e.v);
        match e.ugv {
            UgvCost::Fixed(c) => {
                let _ = write!(out, "{c} {} -", e.uav_cost);
            }
            UgvCost::Impeded(CostDistribution::Uniform { min, max }) => {
                let _ = write!(out, "? {} U {min} {max}", e.uav_cost);
            }
            UgvCost::Absent => {
                let _ = write!(out, "- {} -", e.uav_cost);
            }
        }
        out.push('\n');
    }
    let ends = inst.endpoints();
    let uav = inst.uav_settings();
    let _ = writeln!(
        out,
        "meta p={} q={} d={} uav_speed={} free_flight={}",
        ends.p,
        ends.q,
        ends.d,
        uav.speed,
        u8::from(uav.free_flight)
    );
    out
}

pub fn parse_realization(inst: &ProblemInstance, text: &str) -> Result<Realization, FormatError> {
    let mut costs = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let n = i + 1;
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut toks = l.split_whitespace();
        if toks.next() != Some("r") {
            return Err(FormatError::parse(n, "record", "expected `r <edge_id> <true_cost>`"));
        }
        let e = EdgeId(num(toks.next(), n, "edge id")?);
        let c: f64 = num(toks.next(), n, "true_cost")?;
        costs.push((e, c));
    }
    Ok(Realization::new(inst, costs)?)
}

pub fn format_realization(real: &Realization) -> String {
    let mut out = String::new();
    for (e, c) in real.iter() {
        let _ = writeln!(out, "r {e} {c}");
    }
    out
}
