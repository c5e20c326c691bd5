//! Reports for each subcommand, as JSON values with an exit code.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use acmkin::acm::{ActorId, AcmDiagram, Skeleton};
use acmkin::geomcore::derive_seed;
use acmkin::liecls::{motion_set_subgroup_check, pair_normal_form, realizable_as_pair, Group};
use acmkin::linkcat::{daemon_slice as slice, limit_options, listing as catalog_listing, mobility as mobility_report, LinkError, LinkageBuild};
use acmkin::manifest::Manifest;
use acmkin::reduce::{
    decomposes_external, decomposes_into_constraints, f_limit, weld as weld_pair, ChainTranscript, ConfigurationSpace, ObstructionReport,
    Provenance, ReduceError, ReductionChain,
};

/// Samples per sampled check.
const CHECK_SAMPLES: usize = 8;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
    pub fn parse(message: impl Into<String>) -> Failure {
        Failure { code: 4, message: message.into() }
    }
}

pub enum Out {
    Report { value: Value, code: u8 },
    /// Printed as is, whatever the output mode.
    Raw(String),
}

impl Out {
    fn ok(value: Map<String, Value>) -> Out {
        Out::Report { value: Value::Object(value), code: 0 }
    }

    pub fn code(&self) -> u8 {
        match self {
            Out::Report { code, .. } => *code,
            Out::Raw(_) => 0,
        }
    }

    pub fn render(&self, json: bool) -> String {
        match self {
            Out::Raw(s) => s.clone(),
            Out::Report { value, .. } if json => serde_json::to_string_pretty(value).expect("reports serialize") + "\n",
            Out::Report { value, .. } => {
                let mut s = String::new();
                text(&mut s, value, 0);
                s
            }
        }
    }
}

fn text(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(inner) if !inner.is_empty() => {
                        out.push_str(&format!("{}{}:\n", pad, k));
                        text(out, x, depth + 1);
                    }
                    Value::Array(a) if a.iter().any(|e| e.is_object()) => {
                        out.push_str(&format!("{}{}:\n", pad, k));
                        for e in a {
                            out.push_str(&format!("{}  -\n", pad));
                            text(out, e, depth + 2);
                        }
                    }
                    _ => out.push_str(&format!("{}{}: {}\n", pad, k, x)),
                }
            }
        }
        other => out.push_str(&format!("{}{}\n", pad, other)),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn build(m: &Manifest) -> Result<LinkageBuild, Failure> {
    m.to_build().map_err(Failure::from)
}

fn diagram_summary(d: &AcmDiagram) -> Value {
    let shape = d.shape();
    let actors: Vec<Value> = d
        .actor_spaces()
        .iter()
        .map(|(a, s)| {
            let cs: Vec<&str> = shape.constraints_of(a).expect("actor").iter().filter(|c| !c.is_star()).map(|c| c.as_str()).collect();
            json!({"id": a, "dim": s.dim(), "ambient": s.ambient_dim(), "constraints": cs})
        })
        .collect();
    let constraints: Vec<Value> = d
        .constraint_spaces()
        .iter()
        .map(|(c, s)| json!({"id": c, "dim": s.dim(), "actors": shape.actors_with(c)}))
        .collect();
    let sk = Skeleton::of(shape);
    json!({
        "actors": actors,
        "constraints": constraints,
        "skeleton": {"edges": sk.edges, "acyclic": sk.is_acyclic(), "components": sk.components()},
    })
}

fn header(b: &LinkageBuild, seed: u64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("seed".into(), json!(seed));
    m.insert("name".into(), json!(b.name));
    m.insert("params".into(), to_value(&b.params));
    m.insert("diagram".into(), diagram_summary(&b.diagram));
    m
}

pub fn listing(seed: u64) -> Out {
    let mut m = Map::new();
    m.insert("seed".into(), json!(seed));
    m.insert("catalog".into(), to_value(&catalog_listing()));
    Out::ok(m)
}

pub fn validate(man: &Manifest, seed: u64) -> Result<Out, Failure> {
    let b = build(man)?;
    let mut m = header(&b, seed);
    let axioms = b.diagram.validate(CHECK_SAMPLES, seed);
    let valid = axioms.is_valid();
    m.insert("axioms".into(), to_value(&axioms));
    let mut warnings = Vec::new();
    if valid {
        let ext = decomposes_external(&b.diagram, CHECK_SAMPLES, derive_seed(seed, 1)).map_err(|e| Failure::validation(e.to_string()))?;
        let into = decomposes_into_constraints(&b.diagram, CHECK_SAMPLES, derive_seed(seed, 2)).map_err(|e| Failure::validation(e.to_string()))?;
        if !ext.holds {
            warnings.push("external constraints do not decompose: no welding route".to_string());
        }
        m.insert("decomposition".into(), json!({"external": to_value(&ext), "into_constraints": to_value(&into)}));
    } else {
        warnings.push("axioms fail: analysis stops here".to_string());
    }
    m.insert("warnings".into(), json!(warnings));
    Ok(Out::Report { value: Value::Object(m), code: if valid { 0 } else { 2 } })
}

pub fn skeleton(man: &Manifest, seed: u64) -> Result<Out, Failure> {
    let b = build(man)?;
    let mut m = header(&b, seed);
    let sk = Skeleton::of(b.diagram.shape());
    let degrees: Map<String, Value> = sk.vertices.iter().map(|v| (v.0.clone(), json!(sk.degree(v)))).collect();
    m.insert("degrees".into(), Value::Object(degrees));
    Ok(Out::ok(m))
}

struct Limit {
    section: Value,
    space: Result<ConfigurationSpace, ObstructionReport>,
    warnings: Vec<String>,
}

fn provenance_name(p: &Provenance) -> &'static str {
    match p {
        Provenance::Welding(_) => "welding",
        Provenance::Union { .. } => "union",
        Provenance::RawEqualizer(_) => "raw_equalizer",
    }
}

/// Limit by the declared strategies, falling back to the raw equalizer
/// when its sampled local dimension is constant.
fn compute_limit(b: &LinkageBuild, seed: u64) -> Limit {
    let opts = limit_options(b, CHECK_SAMPLES, seed);
    let mut warnings = Vec::new();
    let (space, attempts) = match f_limit(&b.diagram, &opts) {
        Ok(cs) => (Ok(cs), None),
        Err(report) => {
            let fallback = match report.diagnostics.as_ref().and_then(|h| h.constant()) {
                Some(k) => {
                    warnings.push(format!("no strategy applies; using the raw equalizer, local dimension {} on every converged solve", k));
                    ConfigurationSpace::from_raw_equalizer(&b.diagram, opts.diagnostic_seeds, derive_seed(seed, 999)).ok()
                }
                None => None,
            };
            let attempts = to_value(&report);
            (fallback.ok_or(report), Some(attempts))
        }
    };
    let mut s = Map::new();
    s.insert("n_samples".into(), json!(opts.n_samples));
    s.insert("diagnostic_seeds".into(), json!(opts.diagnostic_seeds));
    match &space {
        Ok(cs) => {
            s.insert("status".into(), json!("ok"));
            s.insert("provenance".into(), json!(provenance_name(&cs.provenance)));
            s.insert("apex_dim".into(), json!(cs.dim()));
            s.insert("apex_ambient".into(), json!(cs.apex.ambient_dim()));
            if let Some(t) = cs.transcript() {
                s.insert("transcript".into(), to_value(&t));
            }
            if let Provenance::RawEqualizer(h) = &cs.provenance {
                s.insert("local_dims".into(), to_value(h));
            }
        }
        Err(_) => {
            s.insert("status".into(), json!("obstructed"));
        }
    }
    if let Some(a) = attempts {
        s.insert("obstruction".into(), a);
    }
    Limit { section: Value::Object(s), space, warnings }
}

pub fn limit(man: &Manifest, seed: u64, transcript: Option<&Path>, replay: Option<&Path>) -> Result<Out, Failure> {
    let b = build(man)?;
    let mut m = header(&b, seed);
    let lim = compute_limit(&b, seed);
    let mut warnings = lim.warnings;
    let mut code = if lim.space.is_ok() { 0 } else { 3 };
    m.insert("limit".into(), lim.section);
    if let Ok(cs) = &lim.space {
        if let Some(path) = transcript {
            match cs.transcript() {
                Some(t) => std::fs::write(path, serde_json::to_string_pretty(&t).expect("transcripts serialize"))
                    .map_err(|e| Failure::validation(format!("{}: {}", path.display(), e)))?,
                None => warnings.push("no transcript: the apex does not come from welding".into()),
            }
        }
        if let Some(path) = replay {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {}", path.display(), e)))?;
            let t: ChainTranscript = serde_json::from_str(&text).map_err(|e| Failure::parse(format!("transcript: {}", e)))?;
            let replayed = ReductionChain::replay(&b.diagram, &t).and_then(ConfigurationSpace::from_chain);
            let matches = matches!(&replayed, Ok(r) if r.apex == cs.apex);
            let mut r = Map::new();
            r.insert("matches".into(), json!(matches));
            if let Err(e) = &replayed {
                r.insert("error".into(), json!(e.to_string()));
            }
            m.insert("replay".into(), Value::Object(r));
            if !matches {
                code = 2;
            }
        }
    }
    m.insert("warnings".into(), json!(warnings));
    Ok(Out::Report { value: Value::Object(m), code })
}

pub fn mobility(man: &Manifest, seed: u64) -> Result<Out, Failure> {
    let b = build(man)?;
    if b.group_dim == 0 {
        return Err(Failure::validation("motion group unknown: set group_dim in the manifest"));
    }
    let mut m = header(&b, seed);
    let lim = compute_limit(&b, seed);
    m.insert("limit".into(), lim.section);
    let code = match &lim.space {
        Ok(cs) => {
            let r = mobility_report(cs, b.group_dim).map_err(|e| Failure::validation(e.to_string()))?;
            let mut v = to_value(&r);
            v["group_dim"] = json!(b.group_dim);
            m.insert("mobility".into(), v);
            0
        }
        Err(_) => 3,
    };
    m.insert("warnings".into(), json!(lim.warnings));
    Ok(Out::Report { value: Value::Object(m), code })
}

pub fn weld(man: &Manifest, seed: u64, i: &str, j: &str) -> Result<Out, Failure> {
    let b = build(man)?;
    let mut m = header(&b, seed);
    match weld_pair(&b.diagram, &ActorId::new(i), &ActorId::new(j), CHECK_SAMPLES, seed) {
        Ok(step) => {
            let s = step.after.actor_space(&step.new_actor).expect("welded actor");
            m.insert("weld".into(), json!({"pair": step.pair, "new_actor": step.new_actor, "dim": s.dim(), "ambient": s.ambient_dim()}));
            let welded = LinkageBuild { diagram: step.after.clone(), union: None, expected_dim: None, ..b.clone() };
            let mut out = Manifest::from_build(&welded);
            out.daemons = man.daemons.clone();
            out.motion_sets.clear();
            m.insert("manifest".into(), to_value(&out));
            Ok(Out::ok(m))
        }
        Err(ReduceError::WeldObstruction { witness, verdict }) => {
            m.insert("weld".into(), json!({"status": "obstructed", "witness": witness, "verdict": to_value(&*verdict)}));
            Ok(Out::Report { value: Value::Object(m), code: 3 })
        }
        Err(e) => Err(Failure::validation(e.to_string())),
    }
}

pub fn daemon_slice(man: &Manifest, seed: u64, t: f64, name: Option<&str>, n: usize) -> Result<Out, Failure> {
    let b = build(man)?;
    let mut m = header(&b, seed);
    let lim = compute_limit(&b, seed);
    m.insert("limit".into(), lim.section);
    let cs = match lim.space {
        Ok(cs) => cs,
        Err(_) => return Ok(Out::Report { value: Value::Object(m), code: 3 }),
    };
    let d = man.daemon(name, cs).map_err(Failure::from)?;
    match slice(&d, t, n, seed) {
        Ok(s) => {
            m.insert("slice".into(), to_value(&s));
            Ok(Out::ok(m))
        }
        Err(LinkError::EmptySlice) => {
            m.insert("slice".into(), json!({"status": "empty", "t": t}));
            Ok(Out::Report { value: Value::Object(m), code: 3 })
        }
        Err(e) => Err(Failure::validation(e.to_string())),
    }
}

pub fn pair_check(man: &Manifest, seed: u64) -> Result<Out, Failure> {
    let b = build(man)?;
    let mut m = header(&b, seed);
    let mut sets = Vec::new();
    for entry in &man.motion_sets {
        let (g, set) = entry.split();
        let sub = motion_set_subgroup_check(g, &set, 50, seed).map_err(|e| Failure::validation(e.to_string()))?;
        let real = realizable_as_pair(g, &set, seed).map_err(|e| Failure::validation(e.to_string()))?;
        sets.push(json!({"set": to_value(entry), "subgroup": to_value(&sub), "realizable": to_value(&real)}));
    }
    m.insert("motion_sets".into(), json!(sets));
    m.insert("pair".into(), pair_section(&b, seed));
    Ok(Out::ok(m))
}

/// Normal form of a two-actor diagram with one shared constraint, and its
/// dimension counted three ways.
fn pair_section(b: &LinkageBuild, seed: u64) -> Value {
    let d = &b.diagram;
    let actors = d.actors();
    let constraints: Vec<_> = d.shape().constraints().iter().filter(|c| !c.is_star()).cloned().collect();
    if actors.len() != 2 || constraints.len() != 1 {
        return json!({"status": "not_a_pair"});
    }
    let (a, c) = (&actors[0], &constraints[0]);
    let sa = d.actor_space(a).expect("actor");
    let Some(group) = [Group::SE2, Group::SE3].into_iter().find(|g| actors.iter().all(|x| d.actor_space(x).expect("actor").same_manifold(&g.space()))) else {
        return json!({"status": "actors_not_group_spaces"});
    };
    let (p1, p2) = match (d.constraint_map(&actors[0], c), d.constraint_map(&actors[1], c)) {
        (Ok(p1), Ok(p2)) => (p1, p2),
        _ => return json!({"status": "constraint_not_shared"}),
    };
    let cdim = d.constraint_space(c).expect("constraint").dim();
    let fiber = 2 * sa.dim() - cdim;
    let rank_dim = d
        .interaction(&actors[0], &actors[1])
        .ok()
        .and_then(|fp| fp.space.sample_point(derive_seed(seed, 5)).ok().and_then(|x| fp.space.local_dim(&x).ok()));
    match pair_normal_form(group, &p1, &p2, CHECK_SAMPLES, seed) {
        Ok(nf) => json!({
            "status": "ok",
            "group": group,
            "h_dim": nf.h_dim,
            "h_basis": nf.h_basis,
            "equivariance_residual": nf.equivariance_residual,
            "roundtrip_error": nf.roundtrip_error,
            "samples": nf.samples,
            "dims": {"fiber_formula": fiber, "normal_form": nf.dim(), "residual_rank": rank_dim},
        }),
        Err(e) => json!({
            "status": "no_normal_form",
            "group": group,
            "reason": e.to_string(),
            "dims": {"fiber_formula": fiber, "residual_rank": rank_dim},
        }),
    }
}

pub fn sample(man: &Manifest, seed: u64, n: usize, out: Option<&Path>) -> Result<Out, Failure> {
    let b = build(man)?;
    let lim = compute_limit(&b, seed);
    let cs = match lim.space {
        Ok(cs) => cs,
        Err(_) => {
            let mut m = header(&b, seed);
            m.insert("limit".into(), lim.section);
            return Ok(Out::Report { value: Value::Object(m), code: 3 });
        }
    };
    let points = cs.apex.sample_points(n, derive_seed(seed, 77)).map_err(|e| Failure::validation(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::validation(e.to_string());
    w.write_record(cs.apex.coords()).map_err(csv_err)?;
    for p in &points {
        w.write_record(p.iter().map(|x| x.to_string())).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::validation(e.to_string()))?;
    let csv_text = String::from_utf8(bytes).expect("csv of numbers is utf-8");
    eprintln!("seed: {}", seed);
    match out {
        Some(path) => {
            std::fs::write(path, &csv_text).map_err(|e| Failure::validation(format!("{}: {}", path.display(), e)))?;
            let mut m = header(&b, seed);
            m.insert("sample".into(), json!({"n": n, "path": path.display().to_string(), "coords": cs.apex.coords()}));
            Ok(Out::ok(m))
        }
        None => Ok(Out::Raw(csv_text)),
    }
}
