//! Splitting schedules T_n, R_n, S_n and the free-image coloring they drive,
//! plus the local approximation of a rule on the resulting stage subshifts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Audit, AuditLog};
use crate::error::{invariant, precondition, Caps, Error, Result};
use crate::graph::{split_syndetic_d, split_syndetic_plain, SplitParams};
use crate::group::{Element, GroupRef, GroupSubset};
use crate::lll::draw;
use crate::shift::{
    all_configurations, coding_map, points_to_mask, Configuration, FiniteAction, LocalRule, PointFunction, Points, Sft,
};

/// Windowed schedules carry a window D and a padding set Q_n and feed the
/// (·,D) split; plain schedules use a disjoint translate T_nδ_n and the
/// plain split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Windowed,
    Plain,
}

#[derive(Clone, Debug)]
pub struct ScheduleEntry {
    pub t: GroupSubset,
    pub r: GroupSubset,
    pub s: GroupSubset,
    pub t_next: GroupSubset,
    pub q: Option<GroupSubset>,
    pub delta: Option<Element>,
    /// Elements this stage must separate; several only for a closing stage.
    pub gammas: Vec<Element>,
    /// R = S = T_next = G, used once the group is exhausted.
    pub closing: bool,
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub group: GroupRef,
    pub d: GroupSubset,
    pub entries: Vec<ScheduleEntry>,
    pub audits: Vec<Audit>,
}

impl Schedule {
    pub fn to_json(&self) -> Value {
        let g = &self.group;
        json!({
            "kind": self.kind,
            "d": self.d.encode(),
            "entries": self.entries.iter().map(|e| json!({
                "t": e.t.encode(),
                "r": e.r.encode(),
                "s": e.s.encode(),
                "t_next": e.t_next.encode(),
                "q": e.q.as_ref().map(GroupSubset::encode),
                "delta": e.delta.as_ref().map(|x| g.encode(x)),
                "gammas": e.gammas.iter().map(|x| g.encode(x)).collect::<Vec<_>>(),
                "closing": e.closing,
            })).collect::<Vec<_>>(),
        })
    }

    /// Union of all S_n.
    pub fn s_union(&self) -> Result<GroupSubset> {
        self.entries.iter().try_fold(GroupSubset::empty(&self.group), |acc, e| acc.union(&e.s))
    }
}

#[derive(Clone, Debug, Default)]
pub struct ScheduleOptions {
    /// Enlarge S_n by (sym(R_n)M ∪ M·sym(R_n) ∪ {γ_n, γ_n⁻¹})^e.
    pub pad: Option<(GroupSubset, u32)>,
    /// On a finite group, finish with one closing stage instead of failing
    /// when no further disjoint translate exists.
    pub close_on_saturation: bool,
}

fn canonical_prefix(group: &GroupRef, n: usize) -> Result<Option<GroupSubset>> {
    if let Some(order) = group.order() {
        if n > order as usize {
            return Ok(None);
        }
    }
    Ok(Some(GroupSubset::new(group, group.canonical_iter().take(n))?))
}

fn pad_set(r: &GroupSubset, gamma: &Element, pad: &Option<(GroupSubset, u32)>) -> Result<Option<GroupSubset>> {
    let Some((m, e)) = pad else { return Ok(None) };
    let g = r.group();
    let rs = r.symmetrize(true);
    let gen = rs.product(m)?.union(&m.product(&rs)?)?.union(&GroupSubset::new(g, [gamma.clone(), g.inv(gamma)])?)?;
    Ok(Some(gen.power(*e)))
}

/// Build the schedule for `gammas`. In windowed mode T₀ = {1} and `t` is
/// ignored; in plain mode T₀ = t.
pub fn schedule_sets(
    kind: ScheduleKind,
    group: &GroupRef,
    d: &GroupSubset,
    t: &GroupSubset,
    gammas: &[Element],
    opts: &ScheduleOptions,
) -> Result<Schedule> {
    let id = group.identity();
    precondition(gammas.iter().all(|g| *g != id), "γ-list must avoid the identity")?;
    let mut log = AuditLog::new("schedule");
    let mut entries = Vec::new();
    let mut t_n = match kind {
        ScheduleKind::Windowed => GroupSubset::identity(group),
        ScheduleKind::Plain => {
            precondition(!t.is_empty(), "T must be nonempty")?;
            t.clone()
        }
    };
    for (n, gamma) in gammas.iter().enumerate() {
        let step = match kind {
            ScheduleKind::Windowed => {
                let need = t_n.len() * d.len() * d.len() + 1;
                match canonical_prefix(group, need)? {
                    None => None,
                    Some(q) => {
                        let r = t_n.product(&q)?;
                        let d2 = d.power(2);
                        let base = GroupSubset::product_all(&[&d2, &r, &r.inverse(), &d2])?;
                        Some((r, base, Some(q), None))
                    }
                }
            }
            ScheduleKind::Plain => {
                let delta = match group.order() {
                    Some(_) => group.elements()?.into_iter().find(|x| t_n.right_translate(x).is_disjoint(&t_n)),
                    None => group.canonical_iter().find(|x| t_n.right_translate(x).is_disjoint(&t_n)),
                };
                match delta {
                    None => None,
                    Some(delta) => {
                        let r = t_n.union(&t_n.right_translate(&delta))?;
                        let base = r.product(&r.inverse())?;
                        Some((r, base, None, Some(delta)))
                    }
                }
            }
        };
        let Some((r, base, q, delta)) = step else {
            if !opts.close_on_saturation {
                return Err(Error::Precondition(format!("group too small for stage {n}")));
            }
            let whole = GroupSubset::whole(group)?;
            entries.push(ScheduleEntry {
                t: t_n.clone(),
                r: whole.clone(),
                s: whole.clone(),
                t_next: whole,
                q: None,
                delta: None,
                gammas: gammas[n..].to_vec(),
                closing: true,
            });
            log.record(format!("stage {n}: closing stage"), true, json!({ "remaining": gammas.len() - n }));
            break;
        };
        let mut s = base.symmetrize(true);
        if let Some(p) = pad_set(&r, gamma, &opts.pad)? {
            s = s.union(&p.symmetrize(true))?;
        }
        let t_next = s.product(&t_n)?;
        entries.push(ScheduleEntry {
            t: t_n.clone(),
            r,
            s,
            t_next: t_next.clone(),
            q,
            delta,
            gammas: vec![gamma.clone()],
            closing: false,
        });
        t_n = t_next;
    }
    for (n, e) in entries.iter().enumerate() {
        log.record(
            format!("stage {n}: S symmetric with identity"),
            e.s.is_symmetric() && e.s.contains(&id),
            json!({ "s_size": e.s.len() }),
        );
        log.record(format!("stage {n}: T_next = S·T"), e.t_next == e.s.product(&e.t)?, json!(null));
        if e.closing {
            continue;
        }
        match kind {
            ScheduleKind::Windowed => {
                let q = e.q.as_ref().unwrap();
                log.record(
                    format!("stage {n}: |Q| > |T||D|²"),
                    q.len() > e.t.len() * d.len() * d.len(),
                    json!({ "q": q.len(), "t": e.t.len(), "d": d.len() }),
                );
                log.record(format!("stage {n}: R = TQ"), e.r == e.t.product(q)?, json!(null));
                let d2 = d.power(2);
                let need = GroupSubset::product_all(&[&d2, &e.r, &e.r.inverse(), &d2])?;
                log.record(format!("stage {n}: S ⊇ D²RR⁻¹D²"), need.is_subset(&e.s), json!(null));
            }
            ScheduleKind::Plain => {
                let delta = e.delta.as_ref().unwrap();
                let shifted = e.t.right_translate(delta);
                log.record(
                    format!("stage {n}: T ∩ Tδ = ∅"),
                    shifted.is_disjoint(&e.t),
                    json!({ "delta": group.encode(delta) }),
                );
                log.record(format!("stage {n}: R = T ⊔ Tδ"), e.r == e.t.union(&shifted)?, json!(null));
                let need = e.r.product(&e.r.inverse())?;
                log.record(format!("stage {n}: S ⊇ RR⁻¹"), need.is_subset(&e.s), json!(null));
            }
        }
    }
    invariant(log.all_pass(), "schedule invariant failed")?;
    Ok(Schedule { kind, group: group.clone(), d: d.clone(), entries, audits: log.into_vec() })
}

#[derive(Clone, Debug)]
pub struct FreeImageOptions {
    /// Points colored in advance, with their colors.
    pub c0: Points,
    pub f0: Option<PointFunction>,
    pub seed: u64,
    /// Backtracking nodes per component before switching to resampling.
    pub node_budget: u64,
    pub max_resamples: u64,
}

impl Default for FreeImageOptions {
    fn default() -> Self {
        FreeImageOptions { c0: Vec::new(), f0: None, seed: 0, node_budget: 1 << 22, max_resamples: 1_000_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub stage: usize,
    pub x: usize,
    pub gamma: Value,
    pub sigma: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeImageReport {
    pub coloring: Vec<u32>,
    pub blocks: Vec<Points>,
    pub leftover: Points,
    pub solver: String,
    pub certificate: Vec<Certificate>,
    pub audits: Vec<Audit>,
}

/// One stage requirement at one point: some listed pair must differ.
struct Requirement {
    stage: usize,
    pairs: Vec<(usize, usize)>,
}

fn satisfied(req: &Requirement, work: &[Option<u32>]) -> bool {
    req.pairs.iter().any(|&(a, b)| work[a] != work[b])
}

const EMPTY_STAGE: &str = "no coloring of the stage block meets every requirement";

/// Color X so that at every stage n each x has σ ∈ S_n with σ·x, σγ_n·x
/// already colored and colored differently.
pub fn free_image_coloring(
    action: &FiniteAction,
    k: u32,
    schedule: &Schedule,
    opts: &FreeImageOptions,
    caps: &Caps,
) -> Result<FreeImageReport> {
    let group = action.group();
    precondition(group == &schedule.group, "schedule and action use different groups")?;
    precondition(action.is_free(), "action must be free")?;
    precondition(k >= 1, "need at least one color")?;
    let n = action.len();
    let mut log = AuditLog::new("free-image");

    let mut work: Vec<Option<u32>> = vec![None; n];
    let c0_mask = points_to_mask(n, &opts.c0);
    if let Some(f0) = &opts.f0 {
        precondition(f0.len() == n && f0.domain() == opts.c0, "f₀ must be defined exactly on C₀")?;
        precondition(f0.values().iter().flatten().all(|&v| v < k), "f₀ uses too many colors")?;
        work.clone_from(&f0.values().to_vec());
    } else {
        precondition(opts.c0.is_empty(), "C₀ given without f₀")?;
    }

    // partition X ∖ C₀ = C_1 ⊔ … ⊔ C_N ⊔ U_N
    let mut u: Points = (0..n).filter(|&x| !c0_mask[x]).collect();
    let mut blocks: Vec<Points> = Vec::new();
    for (i, e) in schedule.entries.iter().enumerate() {
        if e.closing {
            // S = G, so the whole remainder is colored at once
            log.record(format!("stage {i}: closing stage takes the remainder"), true, json!({ "c": u.len() }));
            blocks.push(std::mem::take(&mut u));
            continue;
        }
        let p = SplitParams {
            t: e.t.clone(),
            r: e.r.clone(),
            s: e.s.clone(),
            t_next: e.t_next.clone(),
            d: (schedule.kind == ScheduleKind::Windowed).then(|| schedule.d.clone()),
            q: e.q.clone(),
        };
        let out = match schedule.kind {
            ScheduleKind::Windowed => split_syndetic_d(action, &u, &p, caps),
            ScheduleKind::Plain => split_syndetic_plain(action, &u, &p),
        }
        .map_err(|err| Error::Precondition(format!("split at stage {i}: {err}")))?;
        let verdicts: BTreeMap<&str, bool> = out.checks.iter().map(|(n, ok)| (n.as_str(), *ok)).collect();
        log.record(
            format!("stage {i}: split"),
            out.checks.iter().all(|(_, ok)| *ok),
            json!({ "c": out.c, "u": out.u, "checks": verdicts }),
        );
        blocks.push(out.c);
        u = out.u;
    }

    let mut order = vec![usize::MAX; n];
    let mut stage_of = vec![usize::MAX; n];
    let mut vars: Vec<usize> = Vec::new();
    for (i, b) in blocks.iter().enumerate() {
        for &x in b {
            order[x] = vars.len();
            stage_of[x] = i;
            vars.push(x);
        }
    }
    let mut dom = c0_mask.clone();
    let mut reqs: Vec<Requirement> = Vec::new();
    for (i, e) in schedule.entries.iter().enumerate() {
        for &x in &blocks[i] {
            dom[x] = true;
        }
        let s_idx = e.s.indices();
        for gamma in &e.gammas {
            let gi = gamma.index();
            for x in 0..n {
                let gx = action.act_idx(gi, x);
                let pairs: Vec<(usize, usize)> = s_idx
                    .iter()
                    .map(|&s| (action.act_idx(s, x), action.act_idx(s, gx)))
                    .filter(|&(a, b)| dom[a] && dom[b])
                    .collect();
                reqs.push(Requirement { stage: i, pairs });
            }
        }
    }

    // requirements whose pairs are all precolored are checked now
    let trigger = |r: &Requirement| -> Option<usize> {
        r.pairs.iter().flat_map(|&(a, b)| [a, b]).filter(|&p| order[p] != usize::MAX).map(|p| order[p]).max()
    };
    let mut by_trigger: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
    for (j, r) in reqs.iter().enumerate() {
        match trigger(r) {
            Some(t) => by_trigger[t].push(j),
            None => {
                if !satisfied(r, &work) {
                    return Err(Error::Unsolvable(format!("stage {}: {EMPTY_STAGE}", r.stage)));
                }
            }
        }
    }

    // components: variables linked through a shared requirement
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for r in &reqs {
        let vs: Vec<usize> =
            r.pairs.iter().flat_map(|&(a, b)| [a, b]).filter(|&p| order[p] != usize::MAX).map(|p| order[p]).collect();
        for w in vs.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..vars.len() {
        let r = find(&mut parent, v);
        comps.entry(r).or_default().push(v);
    }

    let mut solver = "backtracking".to_string();
    for comp in comps.values() {
        let mut nodes = 0u64;
        let mut first_fail: Option<usize> = None;
        let res =
            backtrack(comp, 0, &vars, &by_trigger, &reqs, k, &mut work, &mut nodes, opts.node_budget, &mut first_fail);
        match res {
            Some(true) => {}
            Some(false) => {
                let stage = first_fail.unwrap_or(stage_of[vars[comp[0]]]);
                return Err(Error::Unsolvable(format!("stage {stage}: {EMPTY_STAGE}")));
            }
            None => {
                solver = "backtracking+resampling".to_string();
                resample(comp, &vars, &by_trigger, &reqs, k, &mut work, opts.seed, opts.max_resamples)?;
            }
        }
    }
    for &x in &u {
        work[x] = Some(0);
    }
    let f = PointFunction::from_options(k, work)?;
    invariant(f.is_total(), "coloring is not total")?;

    let mut certificate = Vec::new();
    let mut dom = c0_mask;
    let mut missing = 0usize;
    for (i, e) in schedule.entries.iter().enumerate() {
        for &x in &blocks[i] {
            dom[x] = true;
        }
        for gamma in &e.gammas {
            for x in 0..n {
                let gx = action.act(gamma, x);
                let w = e.s.iter().find(|s| {
                    let (a, b) = (action.act(s, x), action.act(s, gx));
                    dom[a] && dom[b] && f.get(a) != f.get(b)
                });
                match w {
                    Some(s) => certificate.push(Certificate {
                        stage: i,
                        x,
                        gamma: group.encode(gamma),
                        sigma: group.encode(s),
                    }),
                    None => missing += 1,
                }
            }
        }
    }
    log.record("every (stage, x, γ) has a witness σ", missing == 0, json!({ "missing": missing }));
    log.record(
        "certificate replays",
        replay_certificate(action, &f, schedule, &certificate)?,
        json!({ "entries": certificate.len() }),
    );
    let listed: usize = schedule.entries.iter().map(|e| e.gammas.len()).sum();
    if listed + 1 == group.finite_order()? {
        let periodic: Vec<usize> =
            (0..n).filter(|&x| coding_map(action, &f, x).map(|c| !c.is_free()).unwrap_or(true)).collect();
        log.record("every coding image has trivial stabilizer", periodic.is_empty(), json!({ "periodic": periodic }));
    }
    Ok(FreeImageReport {
        coloring: f.total_values()?,
        blocks,
        leftover: u,
        solver,
        certificate,
        audits: log.into_vec(),
    })
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    comp: &[usize],
    i: usize,
    vars: &[usize],
    by_trigger: &[Vec<usize>],
    reqs: &[Requirement],
    k: u32,
    work: &mut [Option<u32>],
    nodes: &mut u64,
    budget: u64,
    first_fail: &mut Option<usize>,
) -> Option<bool> {
    if i == comp.len() {
        return Some(true);
    }
    let v = comp[i];
    let x = vars[v];
    for c in 0..k {
        *nodes += 1;
        if *nodes > budget {
            work[x] = None;
            return None;
        }
        work[x] = Some(c);
        let bad = by_trigger[v].iter().find(|&&j| !satisfied(&reqs[j], work));
        match bad {
            Some(&j) => {
                first_fail.get_or_insert(reqs[j].stage);
            }
            None => match backtrack(comp, i + 1, vars, by_trigger, reqs, k, work, nodes, budget, first_fail) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => {
                    work[x] = None;
                    return None;
                }
            },
        }
    }
    work[x] = None;
    Some(false)
}

#[allow(clippy::too_many_arguments)]
fn resample(
    comp: &[usize],
    vars: &[usize],
    by_trigger: &[Vec<usize>],
    reqs: &[Requirement],
    k: u32,
    work: &mut [Option<u32>],
    seed: u64,
    max_resamples: u64,
) -> Result<()> {
    let list: Vec<u32> = (0..k).collect();
    for &v in comp {
        work[vars[v]] = Some(draw(seed, 0, vars[v], &list));
    }
    let active: Vec<usize> = comp.iter().flat_map(|&v| by_trigger[v].iter().copied()).collect();
    let mut round = 0u64;
    loop {
        let Some(&j) = active.iter().find(|&&j| !satisfied(&reqs[j], work)) else { return Ok(()) };
        if round == max_resamples {
            return Err(Error::Unsolvable(format!("stage {} not solved within the resampling budget", reqs[j].stage)));
        }
        round += 1;
        let mut pts: Vec<usize> = reqs[j].pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        pts.sort_unstable();
        pts.dedup();
        for p in pts {
            if comp.iter().any(|&v| vars[v] == p) {
                work[p] = Some(draw(seed, round, p, &list));
            }
        }
    }
}

/// Independent replay: σ ∈ S_n and f(σ·x) ≠ f(σγ·x) for every entry.
pub fn replay_certificate(
    action: &FiniteAction,
    f: &PointFunction,
    schedule: &Schedule,
    cert: &[Certificate],
) -> Result<bool> {
    let g = action.group();
    for c in cert {
        let e = &schedule.entries[c.stage];
        let sigma = g.decode(&c.sigma)?;
        let gamma = g.decode(&c.gamma)?;
        if !e.s.contains(&sigma) || !e.gammas.contains(&gamma) {
            return Ok(false);
        }
        let a = action.act(&sigma, c.x);
        let b = action.act(&g.mul(&sigma, &gamma)?, c.x);
        if f.get(a) == f.get(b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Z_n as a subshift: every shift of z has σ ∈ S_n with z(σ) ≠ z(σγ) for
/// each γ the stage handles.
pub fn stage_sft(entry: &ScheduleEntry, k: u32, caps: &Caps) -> Result<Sft> {
    let mut window = entry.s.clone();
    for g in &entry.gammas {
        window = window.union(&entry.s.right_translate(g))?;
    }
    let pos = |e: &Element| window.elements().binary_search(e).unwrap();
    let g = entry.s.group().clone();
    let checks: Vec<Vec<(usize, usize)>> = entry
        .gammas
        .iter()
        .map(|gamma| entry.s.iter().map(|s| (pos(s), pos(&g.mul_unchecked(s, gamma)))).collect())
        .collect();
    Sft::from_predicate(window.clone(), k, caps, |p| {
        checks.iter().all(|pairs| pairs.iter().any(|&(a, b)| p[a] != p[b]))
    })
}

#[derive(Clone, Debug)]
pub struct ApproxReport {
    pub rule: LocalRule,
    pub z_star: usize,
    pub z_prefix: usize,
    pub audits: Vec<Audit>,
}

/// ρ̃ on Z_{<N}: ρ̃(z) = ρ(z*) for any z* ∈ Z* that agrees with z on
/// D ∪ W ∪ WD. `family` lists Z_0, Z_1, …; Z* uses all of it.
pub fn approx_local_rule(
    family: &[Sft],
    prefix: usize,
    rule: &LocalRule,
    d: &GroupSubset,
    caps: &Caps,
) -> Result<ApproxReport> {
    precondition(prefix <= family.len(), "prefix longer than the family")?;
    let w = rule.window();
    let group = w.group().clone();
    let k = rule.k();
    let configs = all_configurations(&group, k, caps)?;
    let mut in_prefix = Vec::new();
    let mut star: Vec<&Configuration> = Vec::new();
    for c in &configs {
        let mut inside = true;
        let mut pref = true;
        for (i, s) in family.iter().enumerate() {
            if !s.contains(c)? {
                inside = false;
                if i < prefix {
                    pref = false;
                    break;
                }
            }
        }
        if pref {
            in_prefix.push(c);
        }
        if inside {
            star.push(c);
        }
    }
    precondition(!star.is_empty(), "Z* is empty on this surrogate")?;
    let match_set = d.union(w)?.union(&w.product(d)?)?;
    let key = |c: &Configuration| -> Vec<u32> { match_set.iter().map(|e| c.at(e)).collect() };
    let mut by_key: BTreeMap<Vec<u32>, &Configuration> = BTreeMap::new();
    let mut table: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut conflicts = 0usize;
    for &c in &star {
        by_key.entry(key(c)).or_insert(c);
        let v = rule.apply(c).ok_or_else(|| Error::Precondition("ρ undefined on a point of Z*".into()))?;
        let p = c.shifted_pattern(&group.identity(), w);
        if let Some(&old) = table.get(&p) {
            if old != v {
                conflicts += 1;
            }
        }
        table.insert(p, v);
    }
    let mut log = AuditLog::new("approximation");
    log.record("existential and universal definitions agree", conflicts == 0, json!({ "conflicts": conflicts }));
    let tilde = LocalRule::new(w.clone(), k, rule.m(), table)?;
    let (mut unmatched, mut ia, mut ib, mut on_star) = (Vec::new(), true, true, true);
    for &z in &in_prefix {
        let Some(zs) = by_key.get(&key(z)) else {
            unmatched.push(z.values().to_vec());
            continue;
        };
        ia &= match_set.iter().all(|e| z.at(e) == zs.at(e));
        for delta in d.iter() {
            ib &= tilde.apply_at(z, delta) == rule.apply_at(zs, delta);
        }
        if star.contains(&z) {
            on_star &= tilde.apply(z) == rule.apply(z);
        }
    }
    if let Some(z) = unmatched.first() {
        return Err(Error::Precondition(format!(
            "no z* ∈ Z* matches {z:?} on D ∪ W ∪ WD; the surrogate N is too small"
        )));
    }
    log.record("(Ia) z agrees with z* on D ∪ W ∪ WD", ia, json!({ "tested": in_prefix.len() }));
    log.record("(Ib) ρ̃(δ·z) = ρ(δ·z*) for δ ∈ D", ib, json!(null));
    log.record("ρ̃ = ρ on Z*", on_star, json!({ "z_star": star.len() }));
    Ok(ApproxReport { rule: tilde, z_star: star.len(), z_prefix: in_prefix.len(), audits: log.into_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::all_pass;
    use crate::group::Group;

    fn full_gammas(g: &GroupRef) -> Vec<Element> {
        g.enumerate_nonidentity(g.order().unwrap() as usize - 1).unwrap()
    }

    fn padded(g: &GroupRef) -> ScheduleOptions {
        ScheduleOptions { pad: Some((GroupSubset::from_ints(g, &[-1, 0, 1]).unwrap(), 3)), close_on_saturation: true }
    }

    #[test]
    fn plain_schedule_on_z16() {
        let g = Group::cyclic(16);
        let t = GroupSubset::identity(&g);
        let gam = full_gammas(&g);
        let opts = ScheduleOptions { pad: None, close_on_saturation: true };
        let s = schedule_sets(ScheduleKind::Plain, &g, &t, &t, &gam, &opts).unwrap();
        assert_eq!(s.entries[0].delta, Some(Element::Finite(1)));
        assert_eq!(s.entries[1].delta, Some(Element::Finite(3)));
        assert!(s.entries.last().unwrap().closing);
        assert!(all_pass(&s.audits));
        let strict = ScheduleOptions::default();
        assert!(schedule_sets(ScheduleKind::Plain, &g, &t, &t, &gam, &strict).is_err());
    }

    #[test]
    fn windowed_schedule_entry_zero() {
        let g = Group::lattice(1);
        let d = GroupSubset::from_ints(&g, &[0, 1]).unwrap();
        let gam = g.enumerate_nonidentity(2).unwrap();
        let s = schedule_sets(ScheduleKind::Windowed, &g, &d, &d, &gam, &ScheduleOptions::default()).unwrap();
        let e0 = &s.entries[0];
        assert_eq!(e0.t, GroupSubset::identity(&g));
        assert_eq!(e0.q.as_ref().unwrap().len(), 5);
        assert!(all_pass(&s.audits));
    }

    #[test]
    fn free_image_on_z8() {
        let caps = Caps::default();
        let g = Group::cyclic(8);
        let a = FiniteAction::translation(&g).unwrap();
        let t = GroupSubset::identity(&g);
        let s = schedule_sets(ScheduleKind::Plain, &g, &t, &t, &full_gammas(&g), &padded(&g)).unwrap();
        let r = free_image_coloring(&a, 2, &s, &FreeImageOptions::default(), &caps).unwrap();
        assert!(all_pass(&r.audits), "{:?}", r.audits);
        let f = PointFunction::total(2, r.coloring.clone()).unwrap();
        for x in 0..8 {
            assert!(coding_map(&a, &f, x).unwrap().is_free());
        }
        let err = free_image_coloring(&a, 1, &s, &FreeImageOptions::default(), &caps).unwrap_err();
        assert!(err.to_string().contains("stage 0"), "{err}");
    }

    #[test]
    fn approximation_on_z4() {
        let caps = Caps::default();
        let g = Group::cyclic(4);
        let t = GroupSubset::identity(&g);
        let s = schedule_sets(ScheduleKind::Plain, &g, &t, &t, &full_gammas(&g), &padded(&g)).unwrap();
        let family: Vec<Sft> = s.entries.iter().map(|e| stage_sft(e, 2, &caps).unwrap()).collect();
        let rule = LocalRule::evaluation(&g, 2, &caps).unwrap();
        let d = GroupSubset::identity(&g);
        for prefix in 0..=family.len() {
            match approx_local_rule(&family, prefix, &rule, &d, &caps) {
                Ok(rep) => {
                    assert!(all_pass(&rep.audits));
                    assert!(rep.z_prefix >= rep.z_star);
                }
                Err(e) => assert!(e.to_string().contains("too small")),
            }
        }
        let full = approx_local_rule(&family, family.len(), &rule, &d, &caps).unwrap();
        assert_eq!(full.z_star, full.z_prefix);
    }
}
