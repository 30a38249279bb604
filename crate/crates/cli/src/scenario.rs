//! Scenario files and their dispatch into the library.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use shiftlab::constructions::{
    all_pass, approx_local_rule, bound_report, e_set, free_image_coloring, probability_audit, schedule_sets, stage_sft,
    step_csp, step_sets, trivial_stab_coloring, verify_coset_coding, witness_pipeline, Audit, AuditStatus,
    FreeImageOptions, PipelineOptions, Schedule, ScheduleKind, ScheduleOptions, StabScope, StepExponents, StepInput,
    StepPartition,
};
use shiftlab::lll::{
    check_continuous_lll, check_symmetric_lll, compute_params, moser_tardos, random_csp, Csp, CspFile, RandomCspSpec,
    SolveStatus, Verdict,
};
use shiftlab::shift::{FiniteAction, LocalRule, PointFunction};
use shiftlab::{Caps, Element, Group, GroupDescriptor, GroupRef, GroupSubset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    CosetCoding,
    TrivialStab,
    DistinguishingStep,
    Schedule,
    FreeImage,
    WitnessPipeline,
    ApproxRule,
    MoserTardos,
    BoundReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub group: GroupDescriptor,
    pub mode: Mode,
    /// Required by the stochastic modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub caps: Option<Caps>,
    #[serde(default)]
    pub params: Value,
}

/// Malformed input: bad JSON, unknown fields, undecodable elements.
#[derive(Debug)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub status: AuditStatus,
    pub audits: Vec<Audit>,
    pub artifacts: Value,
    /// Scalar metrics for sweep tables.
    pub summary: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.status == AuditStatus::Pass
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, SchemaError> {
    serde_json::from_str(text).map_err(|e| SchemaError(format!("scenario: {e}")))
}

fn params<T: DeserializeOwned>(v: &Value) -> Result<T, SchemaError> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| SchemaError(format!("params: {e}")))
}

fn subset(g: &GroupRef, v: &[Value]) -> Result<GroupSubset, SchemaError> {
    let els = v
        .iter()
        .map(|x| g.decode(x).map_err(|e| SchemaError(format!("element {x}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    GroupSubset::new(g, els).map_err(|e| SchemaError(e.to_string()))
}

fn element(g: &GroupRef, v: &Value) -> Result<Element, SchemaError> {
    g.decode(v).map_err(|e| SchemaError(format!("element {v}: {e}")))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RuleSpec {
    /// x ↦ x(1)
    Evaluation,
    /// x ↦ [x(a) = x(b)]
    EqualPair { window: [Value; 2] },
    /// Explicit table over a window, patterns in window order.
    Table { window: Vec<Value>, m: u32, table: Vec<(Vec<u32>, u32)> },
}

fn build_rule(g: &GroupRef, spec: &RuleSpec, k: u32, caps: &Caps) -> Result<LocalRule, SchemaError> {
    let bad = |e: shiftlab::Error| SchemaError(format!("rule: {e}"));
    match spec {
        RuleSpec::Evaluation => {
            LocalRule::from_fn(GroupSubset::identity(g), k, k, caps, |_| true, |p| p[0]).map_err(bad)
        }
        RuleSpec::EqualPair { window } => {
            let (a, b) = (element(g, &window[0])?, element(g, &window[1])?);
            let w = GroupSubset::new(g, [a.clone(), b.clone()]).map_err(bad)?;
            if w.len() != 2 {
                return Err(SchemaError("rule: equal_pair needs two distinct elements".into()));
            }
            let ia = w.elements().iter().position(|e| *e == a).unwrap();
            let ib = 1 - ia;
            LocalRule::from_fn(w, k, 2, caps, |_| true, move |p| u32::from(p[ia] == p[ib])).map_err(bad)
        }
        RuleSpec::Table { window, m, table } => {
            let w = subset(g, window)?;
            LocalRule::new(w, k, *m, table.iter().cloned().collect()).map_err(bad)
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CosetParams {
    h: Vec<Value>,
    #[serde(default = "two")]
    k: u32,
}

fn two() -> u32 {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrivialStabParams {
    f: Vec<Value>,
    colors: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepParams {
    f: Vec<Value>,
    colors: u32,
    rule: RuleSpec,
    r: Vec<Value>,
    m: Vec<Value>,
    gamma: Value,
    #[serde(default = "one")]
    copies: usize,
    #[serde(default)]
    e_d: Option<u32>,
    #[serde(default)]
    e_s: Option<u32>,
    #[serde(default)]
    e_v: Option<u32>,
    /// Precolored points with their colors.
    #[serde(default)]
    c0: Vec<(usize, u32)>,
    /// Points left for later stages.
    #[serde(default)]
    u: Vec<usize>,
    #[serde(default = "million")]
    max_resamples: u64,
    #[serde(default)]
    probability: bool,
}

fn one() -> usize {
    1
}

fn million() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PadSpec {
    m: Vec<Value>,
    e: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleParams {
    kind: ScheduleKind,
    #[serde(default)]
    d: Option<Vec<Value>>,
    #[serde(default)]
    t: Option<Vec<Value>>,
    /// Number of γ's taken in canonical order; all non-identity elements
    /// of a finite group when absent.
    #[serde(default)]
    count: Option<usize>,
    #[serde(default)]
    pad: Option<PadSpec>,
    #[serde(default)]
    close_on_saturation: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FreeImageParams {
    #[serde(default = "two")]
    k: u32,
    schedule: ScheduleParams,
    #[serde(default)]
    node_budget: Option<u64>,
    #[serde(default = "million")]
    max_resamples: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineParams {
    #[serde(default = "two")]
    k: u32,
    rule: RuleSpec,
    #[serde(default = "one_u32")]
    f_exponent: u32,
}

fn one_u32() -> u32 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproxParams {
    #[serde(default = "two")]
    k: u32,
    rule: RuleSpec,
    schedule: ScheduleParams,
    /// Length N of the prefix Z_{<N}; the whole family when absent.
    #[serde(default)]
    prefix: Option<usize>,
    d: Vec<Value>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoserTardosParams {
    #[serde(default)]
    spec: Option<RandomCspSpec>,
    #[serde(default)]
    csp: Option<CspFile>,
    #[serde(default = "one")]
    count: usize,
    #[serde(default = "million")]
    max_resamples: u64,
    /// Skip random instances that fail the symmetric criterion.
    #[serde(default)]
    require_lll: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundParams {
    colors: u64,
    d: u64,
    r: u64,
    m: u64,
}

/// What a mode hands back before assembly into a report.
struct Outcome {
    audits: Vec<Audit>,
    artifacts: Value,
    summary: BTreeMap<String, Value>,
}

fn outcome(audits: Vec<Audit>, artifacts: Value, summary: Value) -> Outcome {
    let summary = match summary {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    };
    Outcome { audits, artifacts, summary }
}

/// "stage N: check" inside an error message.
fn failed_stage(msg: &str) -> Option<(usize, &str)> {
    let rest = &msg[msg.find("stage ")? + 6..];
    let (n, check) = rest.split_once(": ")?;
    Some((n.parse().ok()?, check))
}

fn failure(mode: Mode, err: shiftlab::Error) -> Outcome {
    let tag = serde_json::to_value(mode).unwrap().as_str().unwrap().to_string();
    let msg = err.to_string();
    let (name, witness) = match failed_stage(&msg) {
        Some((n, check)) => (format!("stage {n}: failed"), json!({ "stage": n, "check": check, "error": msg })),
        None => ("run".to_string(), json!({ "error": msg })),
    };
    outcome(
        vec![Audit { name, status: AuditStatus::Fail, tag, witness }],
        Value::Null,
        json!({ "error": err.to_string() }),
    )
}

fn build_schedule(g: &GroupRef, p: &ScheduleParams) -> Result<Result<Schedule, shiftlab::Error>, SchemaError> {
    let id = GroupSubset::identity(g);
    let d = match &p.d {
        Some(v) => subset(g, v)?,
        None => id.clone(),
    };
    let t = match &p.t {
        Some(v) => subset(g, v)?,
        None => id.clone(),
    };
    let pad = match &p.pad {
        Some(pd) => Some((subset(g, &pd.m)?, pd.e)),
        None => None,
    };
    let count = match (p.count, g.order()) {
        (Some(c), _) => c,
        (None, Some(n)) => n as usize - 1,
        (None, None) => return Err(SchemaError("schedule: count is required on infinite groups".into())),
    };
    let opts = ScheduleOptions { pad, close_on_saturation: p.close_on_saturation };
    Ok(g.enumerate_nonidentity(count).and_then(|gammas| schedule_sets(p.kind, g, &d, &t, &gammas, &opts)))
}

pub fn run_scenario(sc: &Scenario, caps_override: Option<Caps>) -> Result<Report, SchemaError> {
    let g = Group::from_descriptor(&sc.group).map_err(|e| SchemaError(format!("group: {e}")))?;
    let caps = caps_override.or(sc.caps).unwrap_or_default();
    let stochastic =
        matches!(sc.mode, Mode::DistinguishingStep | Mode::FreeImage | Mode::WitnessPipeline | Mode::MoserTardos);
    let seed = match sc.seed {
        Some(s) => s,
        None if stochastic => return Err(SchemaError(format!("scenario: mode {:?} needs a seed", sc.mode))),
        None => 0,
    };
    let out = match sc.mode {
        Mode::CosetCoding => {
            let p: CosetParams = params(&sc.params)?;
            let h = subset(&g, &p.h)?;
            match verify_coset_coding(&g, &h, p.k, &caps) {
                Ok(r) => outcome(
                    r.audits.clone(),
                    json!({ "stab": r.stab, "points": r.points }),
                    json!({ "points": r.points, "stab_size": r.stab.len() }),
                ),
                Err(e) => failure(sc.mode, e),
            }
        }
        Mode::TrivialStab => {
            let p: TrivialStabParams = params(&sc.params)?;
            let f = subset(&g, &p.f)?;
            match trivial_stab_coloring(&g, &f, p.colors, &caps) {
                Ok(r) => outcome(r.audits.clone(), artifact(&r), json!({ "points": r.points, "j0": r.j0, "j1": r.j1 })),
                Err(e) => failure(sc.mode, e),
            }
        }
        Mode::DistinguishingStep => run_step(&g, &sc.params, seed, &caps, sc.mode)?,
        Mode::Schedule => {
            let p: ScheduleParams = params(&sc.params)?;
            match build_schedule(&g, &p)? {
                Ok(s) => outcome(s.audits.clone(), s.to_json(), json!({ "entries": s.entries.len() })),
                Err(e) => failure(sc.mode, e),
            }
        }
        Mode::FreeImage => {
            let p: FreeImageParams = params(&sc.params)?;
            let sched = build_schedule(&g, &p.schedule)?;
            let run = || -> Result<Outcome, shiftlab::Error> {
                let s = sched?;
                let act = FiniteAction::translation(&g)?;
                let mut fi = FreeImageOptions { seed, max_resamples: p.max_resamples, ..FreeImageOptions::default() };
                if let Some(b) = p.node_budget {
                    fi.node_budget = b;
                }
                let r = free_image_coloring(&act, p.k, &s, &fi, &caps)?;
                let mut audits = s.audits.clone();
                audits.extend(r.audits.clone());
                let summary =
                    json!({ "stages": s.entries.len(), "solver": r.solver, "certificate": r.certificate.len() });
                Ok(outcome(audits, json!({ "schedule": s.to_json(), "coloring": artifact(&r) }), summary))
            };
            run().unwrap_or_else(|e| failure(sc.mode, e))
        }
        Mode::WitnessPipeline => {
            let p: PipelineParams = params(&sc.params)?;
            let rule = build_rule(&g, &p.rule, p.k, &caps)?;
            let opts = PipelineOptions { f_exponent: p.f_exponent, seed, ..PipelineOptions::default() };
            match witness_pipeline(&g, &rule, &opts, &caps) {
                Ok(r) => {
                    let summary = json!({ "colors": r.colors, "points": r.points, "k_points": r.k_points.len() });
                    outcome(r.audits.clone(), artifact(&r), summary)
                }
                Err(e) => failure(sc.mode, e),
            }
        }
        Mode::ApproxRule => {
            let p: ApproxParams = params(&sc.params)?;
            let rule = build_rule(&g, &p.rule, p.k, &caps)?;
            let d = subset(&g, &p.d)?;
            let sched = build_schedule(&g, &p.schedule)?;
            let run = || -> Result<Outcome, shiftlab::Error> {
                let s = sched?;
                let family = s.entries.iter().map(|e| stage_sft(e, p.k, &caps)).collect::<Result<Vec<_>, _>>()?;
                let prefix = p.prefix.unwrap_or(family.len());
                let r = approx_local_rule(&family, prefix, &rule, &d, &caps)?;
                let table: Vec<(Vec<u32>, u32)> = r.rule.table().iter().map(|(k, v)| (k.clone(), *v)).collect();
                Ok(outcome(
                    r.audits.clone(),
                    json!({ "window": r.rule.window().encode(), "table": table }),
                    json!({ "z_star": r.z_star, "z_prefix": r.z_prefix, "family": family.len() }),
                ))
            };
            run().unwrap_or_else(|e| failure(sc.mode, e))
        }
        Mode::MoserTardos => run_moser_tardos(&sc.params, seed, sc.mode)?,
        Mode::BoundReport => {
            let p: BoundParams = params(&sc.params)?;
            match bound_report(p.colors, p.d, p.r, p.m) {
                Ok(r) => {
                    let audits = vec![
                        audit(
                            "product below one at the threshold",
                            r.at_threshold == Verdict::Pass,
                            "bounds",
                            json!(r.threshold),
                        ),
                        audit(
                            "product at least one just below the threshold",
                            r.below_threshold == Verdict::Fail,
                            "bounds",
                            json!(r.threshold - 1),
                        ),
                    ];
                    let summary = json!({ "threshold": r.threshold, "verdict": r.verdict, "a": r.a, "c": r.c });
                    outcome(audits, artifact(&r), summary)
                }
                Err(e) => failure(sc.mode, e),
            }
        }
    };
    let status = if all_pass(&out.audits) { AuditStatus::Pass } else { AuditStatus::Fail };
    Ok(Report {
        scenario: sc.clone(),
        status,
        audits: out.audits,
        artifacts: out.artifacts,
        summary: out.summary,
        timings: None,
    })
}

/// Library report minus its audits, which already sit at the top level.
fn artifact(r: &impl Serialize) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    if let Some(m) = v.as_object_mut() {
        m.remove("audits");
    }
    v
}

fn audit(name: &str, ok: bool, tag: &str, witness: Value) -> Audit {
    Audit {
        name: name.into(),
        status: if ok { AuditStatus::Pass } else { AuditStatus::Fail },
        tag: tag.into(),
        witness,
    }
}

fn run_step(g: &GroupRef, raw: &Value, seed: u64, caps: &Caps, mode: Mode) -> Result<Outcome, SchemaError> {
    let p: StepParams = params(raw)?;
    let defaults = StepExponents::default();
    let input = StepInput {
        f: subset(g, &p.f)?,
        colors: p.colors,
        rule: build_rule(g, &p.rule, p.colors, caps)?,
        r: subset(g, &p.r)?,
        m: subset(g, &p.m)?,
        gamma: element(g, &p.gamma)?,
        exps: StepExponents { e_d: p.e_d.unwrap_or(defaults.e_d), e_s: p.e_s.unwrap_or(defaults.e_s), e_v: p.e_v },
        scope: StabScope::Exact,
        candidates: None,
    };
    let run = || -> Result<Outcome, shiftlab::Error> {
        let action = FiniteAction::regular_copies(g, p.copies)?;
        let mut f0 = PointFunction::empty(action.len(), p.colors);
        for &(x, c) in &p.c0 {
            if x >= action.len() {
                return Err(shiftlab::Error::Parse(format!("c0 point {x} out of range")));
            }
            f0.set(x, c);
        }
        let part = StepPartition { c0: p.c0.iter().map(|&(x, _)| x).collect(), f0, u: p.u.clone(), u_prime: None };
        let sets = step_sets(input, caps)?;
        let step = step_csp(&action, &sets, &part, seed, p.max_resamples, caps)?;
        let mut audits = sets.audits.clone();
        audits.extend(step.audits.clone());
        let mut e_sets = Vec::new();
        for k in 0..step.meta.len() {
            let es = e_set(&action, &sets, &part, &step, k)?;
            audits.extend(es.audits.clone());
            e_sets.push(serde_json::to_value(&es).unwrap());
        }
        let mut prob = Value::Null;
        if p.probability && !step.meta.is_empty() {
            let pa = probability_audit(&action, &sets, &part, &step, 0, caps)?;
            audits.extend(pa.audits.clone());
            prob = serde_json::to_value(&pa).unwrap();
        }
        let summary = json!({
            "constraints": step.meta.len(),
            "solver": step.solver,
            "resamples": step.resamples,
            "d": sets.d.len(),
            "s": sets.s.len(),
        });
        Ok(outcome(
            audits,
            json!({ "sets": sets.to_json(), "csp": step.to_json(), "e_sets": e_sets, "probability": prob }),
            summary,
        ))
    };
    Ok(run().unwrap_or_else(|e| failure(mode, e)))
}

fn run_moser_tardos(raw: &Value, seed: u64, mode: Mode) -> Result<Outcome, SchemaError> {
    let p: MoserTardosParams = params(raw)?;
    let mut instances: Vec<(u64, Csp)> = Vec::new();
    match (&p.spec, &p.csp) {
        (Some(spec), None) => {
            let mut s = seed;
            // a bounded scan keeps require_lll from looping forever
            while instances.len() < p.count && s < seed + 1000 * p.count.max(1) as u64 {
                let csp = random_csp(spec, s).map_err(|e| SchemaError(format!("spec: {e}")))?;
                if !p.require_lll || check_symmetric_lll(&csp).verdict == Verdict::Pass {
                    instances.push((s, csp));
                }
                s += 1;
            }
        }
        (None, Some(file)) => {
            instances.push((seed, Csp::from_file(file).map_err(|e| SchemaError(format!("csp: {e}")))?))
        }
        _ => return Err(SchemaError("params: exactly one of spec and csp is required".into())),
    }
    if instances.len() < p.count && p.csp.is_none() {
        return Ok(failure(
            mode,
            shiftlab::Error::Precondition(format!(
                "only {} of {} instances met the criterion",
                instances.len(),
                p.count
            )),
        ));
    }
    let mut audits = Vec::new();
    let mut runs = Vec::new();
    let (mut solved, mut max_res, mut lll_pass) = (0, 0, 0);
    for (i, (s, csp)) in instances.iter().enumerate() {
        let r = moser_tardos(csp, *s, p.max_resamples);
        let sym = check_symmetric_lll(csp);
        let cont = check_continuous_lll(csp);
        if sym.verdict == Verdict::Pass {
            lll_pass += 1;
        }
        let sound = r.assignment.as_ref().is_none_or(|a| csp.is_solution(a));
        audits.push(audit(
            &format!("resampling run {i}"),
            sound,
            "moser-tardos",
            json!({ "seed": s, "status": r.status, "resamples": r.resamples }),
        ));
        if sym.verdict == Verdict::Pass {
            audits.push(audit(
                &format!("resampling run {i} solves an instance meeting the criterion"),
                r.status == SolveStatus::Solved,
                "moser-tardos",
                json!({ "seed": s, "resamples": r.resamples }),
            ));
        }
        if r.status == SolveStatus::Solved {
            solved += 1;
            max_res = max_res.max(r.resamples);
        }
        runs.push(json!({
            "seed": s,
            "params": compute_params(csp).to_json(),
            "symmetric": sym,
            "continuous": cont,
            "report": r,
        }));
    }
    let summary =
        json!({ "instances": instances.len(), "lll_pass": lll_pass, "solved": solved, "max_resamples": max_res });
    Ok(outcome(audits, json!({ "runs": runs }), summary))
}
