//! Scenario ingestion and task orchestration for the command line.
//!
//! A scenario is a JSON file declaring a character space, named elements
//! (expression strings over the coordinate `z`, or inline value tables),
//! named monic polynomials (coefficient expression lists `a_0..a_{n-1}`),
//! a task list and a seed. Tasks run in order and emit CSV/JSON artifacts;
//! outputs are byte-identical across runs for a fixed scenario and seed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::algebra::Element;
use crate::averaging::{t_fibre_avg, AveragingOperator};
use crate::cole::{ColeSpace, sup_distance};
use crate::density;
use crate::error::{Error, Result};
use crate::extension::{AHElement, AHExtension};
use crate::fibration::FibredSpace;
use crate::logext;
use crate::poly::MonicPoly;
use crate::space::{CharacterSpace, Edge, Space};
use crate::tower::Tower;

/// A scenario file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub space: SpaceSpec,
    #[serde(default)]
    pub elements: BTreeMap<String, ElementSpec>,
    #[serde(default)]
    pub polys: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Interval { resolution: usize },
    Circle { resolution: usize },
    CircleAround { resolution: usize, center: [f64; 2], radius: f64 },
    PlaneGrid { resolution: [usize; 2] },
    Explicit {
        points: Vec<String>,
        #[serde(default)]
        coords: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        adjacency: Vec<Edge>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Expression(String),
    Table { values: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    ExtendAh {
        alpha: String,
        #[serde(default)]
        t: Option<f64>,
        /// When present, the extension element whose norm, resultant, and
        /// inversion are reported as CSV rows keyed by character.
        #[serde(default)]
        coeffs: Option<Vec<String>>,
    },
    ExtendCole {
        polys: Vec<String>,
    },
    ExtendLog {
        element: String,
        #[serde(default)]
        t: Option<f64>,
    },
    Fibration {
        alpha: String,
    },
    TOperator {
        alpha: String,
        #[serde(default)]
        coeffs: Option<Vec<String>>,
    },
    ApproxInvert {
        alpha: String,
        coeffs: Vec<String>,
        epsilon: f64,
        #[serde(default)]
        strategy: Option<String>,
        #[serde(default)]
        retries: Option<usize>,
    },
    LogDescent {
        alpha: String,
        log_of: String,
    },
    Winding {
        element: String,
    },
    Tower {
        stages: Vec<StageSpec>,
    },
    #[serde(rename = "region-5323")]
    Region5323 {
        t: f64,
        arc: [f64; 2],
        center: [f64; 2],
        radius: f64,
    },
    Report {
        test: Vec<String>,
        rounds: usize,
        samples: usize,
    },
    Distance {
        element: String,
        basis: Vec<String>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StageSpec {
    Ah { alpha: String },
    Cole { polys: Vec<String>
    },
    Log { element: String },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::ExtendAh { .. } => "extend-ah",
            Task::ExtendCole { .. } => "extend-cole",
            Task::ExtendLog { .. } => "extend-log",
            Task::Fibration { .. } => "fibration",
            Task::TOperator { .. } => "t-operator",
            Task::ApproxInvert { .. } => "approx-invert",
            Task::LogDescent { .. } => "log-descent",
            Task::Winding { .. } => "winding",
            Task::Tower { .. } => "tower",
            Task::Region5323 { .. } => "region-5323",
            Task::Report { .. } => "report",
            Task::Distance { .. } => "distance",
        }
    }
}

/// Parses a scenario; any JSON shape violation is a parse error.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
}

/// A scenario with its space, elements and polynomials resolved.
pub struct Runtime {
    pub space: Space,
    pub elements: BTreeMap<String, Element>,
    pub polys: BTreeMap<String, MonicPoly>,
    pub seed: u64,
}

impl Runtime {
    pub fn element(&self, name: &str) -> Result<&Element> {
        self.elements
            .get(name)
            .ok_or_else(|| Error::Scenario(format!("unknown element `{name}`")))
    }

    pub fn poly(&self, name: &str) -> Result<&MonicPoly> {
        self.polys
            .get(name)
            .ok_or_else(|| Error::Scenario(format!("unknown polynomial `{name}`")))
    }
}

fn build_space(spec: &SpaceSpec) -> Result<Space> {
    match spec {
        SpaceSpec::Interval { resolution } => CharacterSpace::interval(*resolution),
        SpaceSpec::Circle { resolution } => CharacterSpace::circle(*resolution),
        SpaceSpec::CircleAround { resolution, center, radius } => {
            CharacterSpace::circle_around(
                Complex64::new(center[0], center[1]),
                *radius,
                *resolution,
            )
        }
        SpaceSpec::PlaneGrid { resolution } => {
            CharacterSpace::plane_grid(resolution[0], resolution[1])
        }
        SpaceSpec::Explicit { points, coords, adjacency } => {
            let coords = match coords {
                None => None,
                Some(raw) => {
                    let mut cs = Vec::with_capacity(raw.len());
                    for arr in raw {
                        let z = match arr.len() {
                            1 => Complex64::new(arr[0], 0.0),
                            2 => Complex64::new(arr[0], arr[1]),
                            _ => {
                                return Err(Error::Scenario(
                                    "coordinate must have 1 or 2 components".into(),
                                ))
                            }
                        };
                        cs.push(z);
                    }
                    Some(cs)
                }
            };
            CharacterSpace::new(points.clone(), coords, adjacency.clone())
        }
    }
}

/// Resolves the space, elements and polynomials of a scenario.
pub fn build_runtime(scenario: &Scenario) -> Result<Runtime> {
    let space = build_space(&scenario.space)?;
    let mut elements = BTreeMap::new();
    for (name, spec) in &scenario.elements {
        let elem = match spec {
            ElementSpec::Expression(src) => eval_expression(src, &space)?,
            ElementSpec::Table { values } => {
                let vals = values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                Element::new(space.clone(), vals)?
            }
        };
        elements.insert(name.clone(), elem);
    }
    let mut polys = BTreeMap::new();
    for (name, coeff_exprs) in &scenario.polys {
        let coeffs = coeff_exprs
            .iter()
            .map(|src| eval_expression(src, &space))
            .collect::<Result<Vec<_>>>()?;
        polys.insert(name.clone(), MonicPoly::new(coeffs)?);
    }
    Ok(Runtime { space, elements, polys, seed: scenario.seed })
}

/// One output file of a task run.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Runs the tasks in order. Each task produces one artifact named
/// `NN-taskname.{csv,json}`; a few tasks add a companion file (the
/// fibration's ordered loop components).
pub fn run_tasks(rt: &Runtime, tasks: &[Task]) -> Result<Vec<Artifact>> {
    let mut artifacts = Vec::new();
    for (idx, task) in tasks.iter().enumerate() {
        for (suffix, ext, bytes) in run_task(rt, task, idx)? {
            artifacts.push(Artifact {
                name: format!("{:02}-{}{}.{}", idx, task.name(), suffix, ext),
                bytes,
            });
        }
    }
    Ok(artifacts)
}

fn random_elem(space: &Space, rng: &mut impl Rng) -> Element {
    Element::from_fn(space, |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
    .expect("finite values")
}

fn ah_element(
    rt: &Runtime,
    ext: &crate::extension::Extension,
    coeffs: &Option<Vec<String>>,
    rng: &mut impl Rng,
) -> Result<AHElement> {
    match coeffs {
        Some(names) => {
            let elems = names
                .iter()
                .map(|n| rt.element(n).cloned())
                .collect::<Result<Vec<_>>>()?;
            AHElement::new(ext, elems)
        }
        None => {
            let elems = (0..ext.degree()).map(|_| random_elem(&rt.space, rng)).collect();
            AHElement::new(ext, elems)
        }
    }
}

fn json_artifact(v: &serde_json::Value) -> Vec<u8> {
    let mut out = serde_json::to_string_pretty(v).expect("serializable");
    out.push('\n');
    out.into_bytes()
}

type TaskOutput = Vec<(&'static str, &'static str, Vec<u8>)>;

fn run_task(rt: &Runtime, task: &Task, idx: usize) -> Result<TaskOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(rt.seed ^ (idx as u64));
    match task {
        Task::ExtendAh { alpha, t, coeffs } => {
            let poly = rt.poly(alpha)?.clone();
            let tmin = crate::extension::min_norm_param(&poly, 1.0);
            let ext = match t {
                Some(t) => AHExtension::with_norm_param(poly, *t)?,
                None => AHExtension::new(poly),
            };
            let x = AHElement::x_bar(&ext);
            if let Some(names) = coeffs {
                // norms, resultants, and inversion results keyed by character
                let u = ah_element(rt, &ext, &Some(names.clone()), &mut rng)?;
                let res = density::element_resultant(&u)?;
                let inverse = u.invert().ok();
                let n = ext.degree();
                let mut csv = format!(
                    "# ah-extend-csv v1 alpha={} t={:e} u_norm={:e} invertible={}\n",
                    alpha,
                    ext.norm_param(),
                    u.norm(),
                    inverse.is_some()
                );
                csv.push_str("character,res_re,res_im");
                for k in 0..n {
                    csv.push_str(&format!(",inv_b{k}_re,inv_b{k}_im"));
                }
                csv.push('\n');
                for w in 0..rt.space.len() {
                    csv.push_str(&format!(
                        "{},{:e},{:e}",
                        rt.space.point_id(w),
                        res.value(w).re,
                        res.value(w).im
                    ));
                    for k in 0..n {
                        match &inverse {
                            Some(v) => csv.push_str(&format!(
                                ",{:e},{:e}",
                                v.coeffs()[k].value(w).re,
                                v.coeffs()[k].value(w).im
                            )),
                            None => csv.push_str(",,"),
                        }
                    }
                    csv.push('\n');
                }
                return Ok(vec![("", "csv", csv.into_bytes())]);
            }
            Ok(vec![(
                "",
                "json",
                json_artifact(&serde_json::json!({
                    "alpha": alpha,
                    "degree": ext.degree(),
                    "norm_param": ext.norm_param(),
                    "min_norm_param": tmin,
                    "x_bar_norm": x.norm(),
                })),
            )])
        }
        Task::ExtendCole { polys } => {
            let ps = polys
                .iter()
                .map(|n| rt.poly(n).cloned())
                .collect::<Result<Vec<_>>>()?;
            let cole = ColeSpace::build(&rt.space, ps)?;
            Ok(vec![("", "csv", cole.to_csv().into_bytes())])
        }
        Task::ExtendLog { element, t } => {
            let a = rt.element(element)?;
            let t = match t {
                Some(t) => *t,
                None => {
                    logext::choose_norm_param_log(a, &logext::LogParamPolicy::default())?.t
                }
            };
            let fib = logext::LogFibration::build(a, t)?;
            Ok(vec![("", "csv", fib.to_csv().into_bytes())])
        }
        Task::Fibration { alpha } => {
            let ext = AHExtension::new(rt.poly(alpha)?.clone());
            let fib = FibredSpace::build(&ext)?;
            let comps = fib.loop_components()?;
            let comp_json = serde_json::json!({
                "components": comps.iter().map(|comp| serde_json::json!({
                    "cyclic": comp.cyclic,
                    "ordered": comp.is_simple,
                    "points": comp.points.iter().map(|&p| {
                        fib.as_space().point_id(p)
                    }).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            });
            Ok(vec![
                ("", "csv", fib.to_csv().into_bytes()),
                ("-components", "json", json_artifact(&comp_json)),
            ])
        }
        Task::TOperator { alpha, coeffs } => {
            let ext = AHExtension::new(rt.poly(alpha)?.clone());
            let op = AveragingOperator::new(&ext);
            let fib = FibredSpace::build(&ext)?;
            let u = ah_element(rt, &ext, coeffs, &mut rng)?;
            let tf = op.apply(&u)?;
            let ta = t_fibre_avg(&fib, &u)?;
            let mut csv = String::from("# t-operator-csv v1\n");
            csv.push_str("character,t_re,t_im,avg_re,avg_im,abs_difference\n");
            for w in 0..rt.space.len() {
                let d = (tf.value(w) - ta.value(w)).norm();
                csv.push_str(&format!(
                    "{},{:e},{:e},{:e},{:e},{:e}\n",
                    rt.space.point_id(w),
                    tf.value(w).re,
                    tf.value(w).im,
                    ta.value(w).re,
                    ta.value(w).im,
                    d
                ));
                if d > 1e-8 {
                    return Err(Error::Scenario(format!(
                        "t-operator forms disagree at `{}` by {d:e}",
                        rt.space.point_id(w)
                    )));
                }
            }
            Ok(vec![("", "csv", csv.into_bytes())])
        }
        Task::ApproxInvert { alpha, coeffs, epsilon, strategy, retries } => {
            let ext = AHExtension::new(rt.poly(alpha)?.clone());
            let u = ah_element(rt, &ext, &Some(coeffs.clone()), &mut rng)?;
            let strategy = strategy.as_deref().unwrap_or("direct");
            let (out, trace_json) = match strategy {
                "direct" => {
                    let out = density::approx_invertible_direct(&u, *epsilon)?;
                    (out, serde_json::Value::Null)
                }
                "chain" => {
                    let (out, trace) = density::approx_invertible_chain(
                        &u,
                        *epsilon,
                        retries.unwrap_or(32),
                        rt.seed,
                    )?;
                    (out, trace.to_json())
                }
                other => {
                    return Err(Error::Scenario(format!("unknown strategy `{other}`")))
                }
            };
            let dist = out.try_sub(&u)?.norm();
            let res = density::element_resultant(&out)?;
            let min_mod = res
                .values()
                .iter()
                .map(|z| z.norm())
                .fold(f64::INFINITY, f64::min);
            if dist >= *epsilon {
                return Err(Error::Scenario(format!(
                    "perturbation {dist:e} exceeds epsilon"
                )));
            }
            Ok(vec![(
                "",
                "json",
                json_artifact(&serde_json::json!({
                    "strategy": strategy,
                    "epsilon": epsilon,
                    "distance": dist,
                    "resultant_min_modulus": min_mod,
                    "trace": trace_json,
                })),
            )])
        }
        Task::LogDescent { alpha, log_of } => {
            let g0 = rt.element(log_of)?;
            let f = g0.exp();
            let ext = AHExtension::new(rt.poly(alpha)?.clone());
            let h = AHElement::embed(&ext, g0)?;
            let op = AveragingOperator::new(&ext);
            let fib = FibredSpace::build(&ext)?;
            let g = logext::log_descent(&f, &h, &op, &fib)?;
            let resid = (&g.exp() - &f).sup_norm();
            Ok(vec![(
                "",
                "json",
                json_artifact(&serde_json::json!({
                    "alpha": alpha,
                    "log_of": log_of,
                    "residual": resid,
                })),
            )])
        }
        Task::Winding { element } => {
            let e = rt.element(element)?;
            let mut csv = String::from("# winding-csv v1\nloop,winding\n");
            for (i, lp) in rt.space.loops().iter().enumerate() {
                let w = logext::winding_number(e, lp)?;
                csv.push_str(&format!("loop{i},{w}\n"));
            }
            Ok(vec![("", "csv", csv.into_bytes())])
        }
        Task::Tower { stages } => {
            let mut tower = Tower::new(rt.space.clone());
            for spec in stages {
                match spec {
                    StageSpec::Ah { alpha } => {
                        let p = rt.poly(alpha)?;
                        // scenario polynomials live on the base; lift the
                        // coefficients to the current top
                        let top = tower.top_index();
                        let lifted = MonicPoly::new(
                            p.coeffs()
                                .iter()
                                .map(|c| tower.embed(0, top, c))
                                .collect::<Result<Vec<_>>>()?,
                        )?;
                        tower.extend_ah(lifted)?;
                    }
                    StageSpec::Cole { polys } => {
                        let top = tower.top_index();
                        let mut lifted = Vec::new();
                        for n in polys {
                            let p = rt.poly(n)?;
                            lifted.push(MonicPoly::new(
                                p.coeffs()
                                    .iter()
                                    .map(|c| tower.embed(0, top, c))
                                    .collect::<Result<Vec<_>>>()?,
                            )?);
                        }
                        tower.extend_cole(lifted)?;
                    }
                    StageSpec::Log { element } => {
                        let top = tower.top_index();
                        let a = tower.embed(0, top, rt.element(element)?)?;
                        let (fib, patches, weights) =
                            logext::log_stage(&a, &logext::LogParamPolicy::default())?;
                        let parent = (0..fib.len()).map(|p| fib.parent_of(p)).collect();
                        tower.push_stage(
                            fib.space().clone(),
                            parent,
                            weights,
                            format!("log {element}"),
                            Some(patches.t),
                        )?;
                    }
                }
            }
            // composition invariants replayed on samples
            let top = tower.top_index();
            for _ in 0..5.min(top * 5) {
                let e = random_elem(&rt.space, &mut rng);
                let round =
                    tower.average_down(0, top, &tower.embed(0, top, &e)?)?;
                if (&round - &e).sup_norm() > 1e-8 {
                    return Err(Error::Scenario(
                        "tower averaging does not invert the embedding".into(),
                    ));
                }
            }
            if top >= 1 {
                for p in 0..tower.top().len().min(64) {
                    let direct = tower.project(0, top, p)?;
                    let mut staged = p;
                    for s in (1..=top).rev() {
                        staged = tower.project(s - 1, s, staged)?;
                    }
                    if direct != staged {
                        return Err(Error::Scenario(
                            "tower projections do not compose".into(),
                        ));
                    }
                }
            }
            Ok(vec![("", "json", json_artifact(&tower.manifest_json()))])
        }
        Task::Region5323 { t, arc, center, radius } => {
            let arcs = logext::example_5323_region(
                *t,
                (arc[0], arc[1]),
                Complex64::new(center[0], center[1]),
                *radius,
            );
            Ok(vec![(
                "",
                "json",
                json_artifact(&serde_json::json!({
                    "arcs": arcs.iter().map(|a| serde_json::json!({
                        "lo": a.lo,
                        "hi": a.hi,
                        "lo_closed": a.lo_closed,
                        "hi_closed": a.hi_closed,
                    })).collect::<Vec<_>>(),
                })),
            )])
        }
        Task::Report { test, rounds, samples } => {
            let tests = test
                .iter()
                .map(|n| rt.element(n).cloned())
                .collect::<Result<Vec<_>>>()?;
            let (tower, report) = logext::log_tower(
                &rt.space,
                &tests,
                *rounds,
                *samples,
                rt.seed,
                &logext::LogParamPolicy::default(),
            )?;
            let mut v = serde_json::to_value(&report)
                .map_err(|e| Error::Scenario(e.to_string()))?;
            v["tower"] = tower.manifest_json();
            Ok(vec![("", "json", json_artifact(&v))])
        }
        Task::Distance { element, basis } => {
            let f = rt.element(element)?;
            let gs = basis
                .iter()
                .map(|n| rt.element(n).cloned())
                .collect::<Result<Vec<_>>>()?;
            let d = sup_distance(f, &gs)?;
            Ok(vec![(
                "",
                "json",
                json_artifact(&serde_json::json!({
                    "element": element,
                    "basis": basis,
                    "distance": d,
                })),
            )])
        }
    }
}

/// Runs a scenario end to end, writing artifacts and a manifest into
/// `out_dir`.
pub fn run_to_dir(scenario: &Scenario, out_dir: &std::path::Path) -> Result<()> {
    let rt = build_runtime(scenario)?;
    let artifacts = run_tasks(&rt, &scenario.tasks)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Scenario(format!("create out dir: {e}")))?;
    let mut names = Vec::new();
    for a in &artifacts {
        std::fs::write(out_dir.join(&a.name), &a.bytes)
            .map_err(|e| Error::Scenario(format!("write {}: {e}", a.name)))?;
        names.push(a.name.clone());
    }
    let manifest = serde_json::json!({
        "version": 1,
        "seed": rt.seed,
        "tasks": scenario.tasks.iter().map(|t| t.name()).collect::<Vec<_>>(),
        "artifacts": names,
    });
    std::fs::write(out_dir.join("manifest.json"), json_artifact(&manifest))
        .map_err(|e| Error::Scenario(format!("write manifest: {e}")))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Expression language: +, -, *, /, integer ^, exp(...), i, pi, numbers, and
// the coordinate symbol z.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // scientific suffix
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let num = text
                    .parse::<f64>()
                    .map_err(|_| Error::Scenario(format!("bad number `{text}`")))?;
                out.push(Tok::Num(num));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => {
                return Err(Error::Scenario(format!("unexpected character `{other}`")))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    space: &'a Space,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            other => Err(Error::Scenario(format!("expected {tok:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Element> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Element> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = &acc * &self.power()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.power()?;
                    acc = &acc * &rhs.invert()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Element> {
        let base = self.unary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let neg = if self.peek() == Some(&Tok::Minus) {
                self.bump();
                true
            } else {
                false
            };
            let exp = match self.bump() {
                Some(Tok::Num(x)) if x.fract() == 0.0 && x >= 0.0 => x as u32,
                other => {
                    return Err(Error::Scenario(format!(
                        "exponent must be an integer literal, found {other:?}"
                    )))
                }
            };
            let mut acc = Element::one(self.space);
            for _ in 0..exp {
                acc = &acc * &base;
            }
            if neg {
                return acc.invert();
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Element> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(-&self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Element> {
        match self.bump() {
            Some(Tok::Num(x)) => Ok(Element::constant(self.space, Complex64::new(x, 0.0))),
            Some(Tok::Ident(name)) => match name.as_str() {
                "i" => Ok(Element::constant(self.space, Complex64::new(0.0, 1.0))),
                "pi" => Ok(Element::constant(self.space, Complex64::new(PI, 0.0))),
                "z" => Element::coordinate(self.space),
                "exp" => {
                    self.expect(Tok::LParen)?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(inner.exp())
                }
                other => Err(Error::Scenario(format!("unknown symbol `{other}`"))),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            other => Err(Error::Scenario(format!("unexpected token {other:?}"))),
        }
    }
}

/// Evaluates an expression over the coordinate `z` into an element.
pub fn eval_expression(src: &str, space: &Space) -> Result<Element> {
    let toks = lex(src)?;
    let mut parser = Parser { toks: &toks, pos: 0, space };
    let out = parser.expr()?;
    if parser.pos != toks.len() {
        return Err(Error::Scenario(format!(
            "trailing input after expression `{src}`"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_basics() {
        let s = CharacterSpace::interval(5).unwrap();
        let e = eval_expression("2 + 3*i", &s).unwrap();
        assert_eq!(e.value(0), Complex64::new(2.0, 3.0));
        let z = eval_expression("z^2 - 1", &s).unwrap();
        let coord = Element::coordinate(&s).unwrap();
        let expect = &(&coord * &coord) - &Element::one(&s);
        assert!((&z - &expect).sup_norm() == 0.0);
        let ex = eval_expression("exp(i*pi*z)", &s).unwrap();
        assert!((ex.value(4) - Complex64::new(-1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn expression_division_and_negative_power() {
        let s = CharacterSpace::interval(3).unwrap();
        let e = eval_expression("1 / (2 + 0*z)", &s).unwrap();
        assert_eq!(e.value(0), Complex64::new(0.5, 0.0));
        let p = eval_expression("(2)^-1", &s).unwrap();
        assert_eq!(p.value(0), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn expression_rejects_garbage() {
        let s = CharacterSpace::interval(3).unwrap();
        assert!(eval_expression("2 +", &s).is_err());
        assert!(eval_expression("foo(3)", &s).is_err());
        assert!(eval_expression("z^z", &s).is_err());
        assert!(eval_expression("sin(z)", &s).is_err());
    }

    #[test]
    fn scenario_parse_and_run() {
        let text = r#"{
            "space": {"kind": "circle", "resolution": 64},
            "elements": {"id": "z"},
            "tasks": [{"task": "winding", "element": "id"}],
            "seed": 5
        }"#;
        let sc = load_scenario(text).unwrap();
        let rt = build_runtime(&sc).unwrap();
        let arts = run_tasks(&rt, &sc.tasks).unwrap();
        assert_eq!(arts.len(), 1);
        let text = String::from_utf8(arts[0].bytes.clone()).unwrap();
        assert!(text.contains("loop0,1"), "winding of id is 1: {text}");
    }

    #[test]
    fn scenario_rejects_unknown_keys() {
        let text = r#"{
            "space": {"kind": "circle", "resolution": 8},
            "nonsense": true
        }"#;
        assert!(load_scenario(text).is_err());
    }

    #[test]
    fn empty_task_list_produces_no_artifacts() {
        let text = r#"{"space": {"kind": "interval", "resolution": 4}}"#;
        let sc = load_scenario(text).unwrap();
        let rt = build_runtime(&sc).unwrap();
        let arts = run_tasks(&rt, &sc.tasks).unwrap();
        assert!(arts.is_empty());
    }

    #[test]
    fn circle_example_fibration_task() {
        // interval base with alpha = (x - e^{i pi t})(x - e^{-i pi t})
        let text = r#"{
            "space": {"kind": "interval", "resolution": 128},
            "polys": {"alpha": ["1", "-(exp(i*pi*z) + exp(-i*pi*z))"]},
            "tasks": [{"task": "fibration", "alpha": "alpha"}],
            "seed": 1
        }"#;
        let sc = load_scenario(text).unwrap();
        let rt = build_runtime(&sc).unwrap();
        let arts = run_tasks(&rt, &sc.tasks).unwrap();
        let csv = String::from_utf8(arts[0].bytes.clone()).unwrap();
        // one component: every row ends with component 0
        for line in csv.lines().skip(2) {
            assert!(line.ends_with(",0"), "unexpected component in {line}");
        }
    }

    #[test]
    fn deterministic_artifacts() {
        let text = r#"{
            "space": {"kind": "circle", "resolution": 32},
            "elements": {"id": "z"},
            "polys": {"alpha": ["-z", "0"]},
            "tasks": [
                {"task": "winding", "element": "id"},
                {"task": "t-operator", "alpha": "alpha"},
                {"task": "region-5323", "t": 6.283185307179586,
                 "arc": [-1.5707963267948966, 1.5707963267948966],
                 "center": [0.0, 6.283185307179586], "radius": 0.7853981633974483}
            ],
            "seed": 42
        }"#;
        let sc1 = load_scenario(text).unwrap();
        let sc2 = load_scenario(text).unwrap();
        let a1 = run_tasks(&build_runtime(&sc1).unwrap(), &sc1.tasks).unwrap();
        let a2 = run_tasks(&build_runtime(&sc2).unwrap(), &sc2.tasks).unwrap();
        for (x, y) in a1.iter().zip(&a2) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.bytes, y.bytes, "artifact {} differs", x.name);
        }
    }
}
