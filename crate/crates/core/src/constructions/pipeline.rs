//! The witness pipeline: from a rule ρ on Free(k^G) to a proper-coloring
//! space X, a partial coloring f₀ on C₀ = 𝔄 ⊔ 𝔅, its free-image extension
//! and the approximated rule, with Stab(π̃) = Stab(π) checked at the end.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use super::schedule::{
    approx_local_rule, free_image_coloring, schedule_sets, stage_sft, FreeImageOptions, ScheduleKind, ScheduleOptions,
};
use super::{Audit, AuditLog};
use crate::error::{invariant, precondition, Caps, Error, Result};
use crate::graph::{greedy_separated, is_syndetic};
use crate::group::{Element, GroupRef, GroupSubset};
use crate::shift::{
    coding_map, map_stabilizer, rule_point_function, Configuration, FiniteAction, LocalRule, PointFunction, Points,
};

/// ρ(σ·b) ≠ ρ(σγ·b), and this persists for every free c with c↾B_γ = b↾B_γ.
#[derive(Clone, Debug)]
pub struct DistinguishingWitness {
    pub gamma: Element,
    pub b: Configuration,
    pub sigma: Element,
    pub b_set: GroupSubset,
}

#[derive(Clone, Debug)]
pub struct Witnesses {
    pub a0: Configuration,
    pub a1: Configuration,
    /// Determining set: c↾A = c′↾A forces ρ(c) = ρ(c′).
    pub a: GroupSubset,
    pub stab: GroupSubset,
    pub items: Vec<DistinguishingWitness>,
    /// Listed γ that lie in Stab(π_ρ) and so have no witness.
    pub excluded: Vec<Element>,
    pub audits: Vec<Audit>,
}

impl Witnesses {
    pub fn get(&self, gamma: &Element) -> Option<&DistinguishingWitness> {
        self.items.iter().find(|w| &w.gamma == gamma)
    }
}

fn pattern_on(c: &Configuration, set: &GroupSubset) -> Vec<u32> {
    set.iter().map(|e| c.at(e)).collect()
}

/// Exhaustive search over Free(k^G) in point order, σ in canonical order.
pub fn find_witnesses(free: &FiniteAction, rule: &LocalRule, gammas: &[Element]) -> Result<Witnesses> {
    let group = free.group().clone();
    let configs = free.configs().ok_or_else(|| Error::Precondition("witness search needs a shift action".into()))?;
    precondition(!configs.is_empty(), "free part is empty")?;
    let rho = rule_point_function(free, rule)?;
    let val = |x: usize| rho.get(x).unwrap();
    let stab = map_stabilizer(free, &rho)?;
    let a1_idx = (0..free.len())
        .find(|&x| val(x) != val(0))
        .ok_or_else(|| Error::Precondition("ρ is constant on the free part".into()))?;
    let mut log = AuditLog::new("witnesses");

    let id = group.identity();
    let a = rule.window().insert(id.clone())?.symmetrize(true);
    let mut seen: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut clash = None;
    for (x, c) in configs.iter().enumerate() {
        let v = *seen.entry(pattern_on(c, &a)).or_insert(val(x));
        if v != val(x) && clash.is_none() {
            clash = Some(x);
        }
    }
    log.record("A is determining", clash.is_none(), json!({ "a": a.encode(), "counterexample": clash }));

    let elems = group.elements()?;
    let w = rule.window();
    let mut items = Vec::new();
    let mut excluded = Vec::new();
    for gamma in gammas {
        if stab.contains(gamma) {
            excluded.push(gamma.clone());
            continue;
        }
        let found = (0..free.len()).find_map(|x| {
            elems
                .iter()
                .find(|s| val(free.act(s, x)) != val(free.act(&group.mul_unchecked(s, gamma), x)))
                .map(|s| (x, s.clone()))
        });
        let (x, sigma) = found.ok_or_else(|| Error::Invariant(format!("γ = {gamma} ∉ Stab but has no witness")))?;
        let sg = group.mul_unchecked(&sigma, gamma);
        let b_set = w
            .right_translate(&sigma)
            .union(&w.right_translate(&sg))?
            .union(&GroupSubset::new(&group, [id.clone(), sigma.clone(), sg.clone()])?)?
            .symmetrize(true);
        let b = configs[x].clone();
        let key = pattern_on(&b, &b_set);
        let holds = (0..free.len())
            .filter(|&y| pattern_on(&configs[y], &b_set) == key)
            .all(|y| val(free.act(&sigma, y)) != val(free.act(&sg, y)));
        log.record(
            format!("witness for γ = {gamma} persists on B_γ"),
            holds,
            json!({ "gamma": group.encode(gamma), "sigma": group.encode(&sigma), "b_set": b_set.encode() }),
        );
        items.push(DistinguishingWitness { gamma: gamma.clone(), b, sigma, b_set });
    }
    Ok(Witnesses {
        a0: configs[0].clone(),
        a1: configs[a1_idx].clone(),
        a,
        stab,
        items,
        excluded,
        audits: log.into_vec(),
    })
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Exponent e in F = (T₀ ∪ T₁ ∪ D ∪ S)^e ∖ {1}.
    pub f_exponent: u32,
    pub seed: u64,
    pub node_budget: u64,
    pub max_resamples: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { f_exponent: 1, seed: 0, node_budget: 1 << 22, max_resamples: 1_000_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub a: Value,
    pub t0: Value,
    pub t1: Value,
    pub b: Value,
    pub d: Value,
    pub gamma2: Vec<Value>,
    pub f_size: usize,
    pub colors: u32,
    pub points: usize,
    pub j0: Points,
    pub j1: Points,
    pub k_points: Points,
    pub c0: Points,
    pub coloring: Vec<u32>,
    pub stab_pi: Value,
    pub stab_tilde: Value,
    pub audits: Vec<Audit>,
}

/// Grow a symmetric set in canonical order until it has more than `n`
/// elements, or is the whole group.
fn grow_symmetric(group: &GroupRef, n: usize) -> Result<GroupSubset> {
    let mut s = GroupSubset::identity(group);
    let total = group.finite_order()?;
    for g in group.canonical_iter() {
        if s.len() > n || s.len() == total {
            break;
        }
        s = s.insert(g.clone())?.insert(group.inv(&g))?;
    }
    Ok(s)
}

/// Injective coloring of G with values fixed at `pins`, the rest filled in
/// canonical order from `from` upward, skipping pinned values.
fn injective_seed(group: &GroupRef, colors: u32, pins: &[(Element, u32)], from: u32) -> Result<Configuration> {
    let elems = group.elements()?;
    let mut vals = vec![u32::MAX; elems.len()];
    for (e, c) in pins {
        vals[e.index()] = *c;
    }
    let mut next = from;
    for v in vals.iter_mut().filter(|v| **v == u32::MAX) {
        while pins.iter().any(|(_, c)| *c == next) {
            next += 1;
        }
        *v = next;
        next += 1;
    }
    precondition(next <= colors, "palette too small for the seed colorings")?;
    Configuration::new(group, colors, vals)
}

fn is_proper(c: &Configuration, f: &GroupSubset) -> bool {
    let g = c.group();
    g.elements().unwrap().iter().all(|x| f.iter().all(|s| c.at(x) != c.at(&g.mul_unchecked(s, x))))
}

/// Run the pipeline on a finite group for `rule` on k^G.
pub fn witness_pipeline(
    group: &GroupRef,
    rule: &LocalRule,
    opts: &PipelineOptions,
    caps: &Caps,
) -> Result<PipelineReport> {
    let k = rule.k();
    let id = group.identity();
    let order = group.finite_order()?;
    let gammas = group.enumerate_nonidentity(order - 1)?;
    let free = FiniteAction::free_part(group, k, caps)?;
    let wit = find_witnesses(&free, rule, &gammas)?;
    let mut log = AuditLog::new("witness-pipeline");
    log.extend(wit.audits.clone());
    let stab = wit.stab.clone();
    let a = wit.a.clone();

    // sets and palette
    let t0 = grow_symmetric(group, a.len())?;
    let at2a = GroupSubset::product_all(&[&a, &t0, &t0, &a])?;
    let gamma2 = at2a.difference(&stab)?;
    let mut b = GroupSubset::empty(group);
    for g in gamma2.iter() {
        let w = wit.get(g).ok_or_else(|| Error::Invariant(format!("no witness for {g}")))?;
        b = b.union(&w.b_set)?;
    }
    let d = rule.window().union(&a)?.union(&b)?.union(&stab)?;
    let t1 = grow_symmetric(group, t0.len() * b.len())?;
    let t = t0.product(&t1)?;
    log.record(
        "|T₁| > |T₀||B| or T₁ = G",
        t1.len() > t0.len() * b.len() || t1.len() == order,
        json!({ "t0": t0.len(), "t1": t1.len(), "b": b.len() }),
    );
    let sched_opts = ScheduleOptions { pad: Some((GroupSubset::identity(group), 2)), close_on_saturation: true };
    let schedule = schedule_sets(ScheduleKind::Plain, group, &d, &t, &gammas, &sched_opts)?;
    let s_all = schedule.s_union()?;
    let f_set =
        t0.union(&t1)?.union(&d)?.union(&s_all)?.power(opts.f_exponent).difference(&GroupSubset::identity(group))?;
    let colors = f_set.len() as u32 + 4;
    log.record("ℓ = |F| + 4", colors as usize == f_set.len() + 4, json!({ "f": f_set.len(), "colors": colors }));

    // X: orbit closure of proper seed colorings
    let mut seeds = Vec::new();
    for g in gammas.iter().filter(|g| !at2a.contains(g)) {
        seeds.push(injective_seed(group, colors, &[(id.clone(), 0), (g.clone(), 1)], 2)?);
    }
    let others: Vec<Element> = gammas.clone();
    for j in 0..=gamma2.len() {
        let pins = [(id.clone(), 2), (others[j % others.len()].clone(), 3)];
        seeds.push(injective_seed(group, colors, &pins, 4)?);
    }
    let x_act = FiniteAction::orbit_closure(group, &seeds)?;
    let xs = x_act.configs().unwrap();
    log.record("X ⊆ Col(F, ℓ)", xs.iter().all(|c| is_proper(c, &f_set)), json!({ "points": xs.len() }));
    precondition(x_act.is_free(), "X must be free")?;

    // J_i and 𝔄
    let avoid = at2a.difference(&GroupSubset::identity(group))?;
    let j_of = |i: u32| -> Points {
        (0..xs.len()).filter(|&x| xs[x].at(&id) == i && avoid.iter().all(|e| xs[x].at(e) >= 2)).collect()
    };
    let (j0, j1) = (j_of(0), j_of(1));
    log.record("J₀, J₁ nonempty", !j0.is_empty() && !j1.is_empty(), json!({ "j0": j0.len(), "j1": j1.len() }));
    let n = x_act.len();
    let mut assign: Vec<Option<u32>> = vec![None; n];
    let mut conflicts = 0usize;
    let mut put = |assign: &mut Vec<Option<u32>>, p: usize, v: u32| match assign[p] {
        Some(old) if old != v => conflicts += 1,
        _ => assign[p] = Some(v),
    };
    let mut frak_a = Vec::new();
    for (js, ai) in [(&j0, &wit.a0), (&j1, &wit.a1)] {
        for &x in js.iter() {
            for alpha in a.iter() {
                let p = x_act.act(alpha, x);
                put(&mut assign, p, ai.at(alpha));
                frak_a.push(p);
            }
        }
    }
    let a0_pts = x_act.apply_set(&a, &j0);
    let a1_pts = x_act.apply_set(&a, &j1);
    let a_mask = crate::shift::points_to_mask(n, &frak_a);
    log.record(
        "A·J₀ and A·J₁ are disjoint",
        a0_pts.iter().all(|p| !a1_pts.contains(p)),
        json!({ "a_j0": a0_pts.len(), "a_j1": a1_pts.len() }),
    );

    // K and 𝔅
    let b_near = crate::shift::points_to_mask(n, &x_act.apply_set(&b, &frak_a));
    let outside: Points = (0..n).filter(|&x| !b_near[x]).collect();
    let sep = GroupSubset::product_all(&[&b, &t, &t.inverse(), &b])?;
    let k_pts = greedy_separated(&x_act, &outside, &sep);
    log.record(
        "K nonempty with |K| ≥ |Γ₂|",
        !k_pts.is_empty() && k_pts.len() >= gamma2.len(),
        json!({ "k": k_pts.len(), "gamma2": gamma2.len() }),
    );
    let g2: Vec<Element> = gamma2.elements().to_vec();
    let mut k_classes: Vec<(Element, Points)> = g2.iter().map(|g| (g.clone(), Vec::new())).collect();
    let mut frak_b = Vec::new();
    if !g2.is_empty() {
        for (i, &x) in k_pts.iter().enumerate() {
            let slot = i % g2.len();
            k_classes[slot].1.push(x);
            let w = wit.get(&g2[slot]).unwrap();
            for beta in b.iter() {
                let p = x_act.act(beta, x);
                put(&mut assign, p, w.b.at(beta));
                frak_b.push(p);
            }
        }
    }
    log.record("no point receives two colors", conflicts == 0, json!({ "conflicts": conflicts }));
    log.record(
        "𝔄 and 𝔅 are disjoint",
        frak_b.iter().all(|&p| !a_mask[p]),
        json!({ "a": frak_a.len(), "b": frak_b.len() }),
    );
    let mut c0: Points = (0..n).filter(|&p| assign[p].is_some()).collect();
    c0.sort_unstable();
    let rest: Points = (0..n).filter(|&p| assign[p].is_none()).collect();
    log.record("X ∖ C₀ is T-syndetic", is_syndetic(&x_act, &rest, &t), json!({ "rest": rest.len() }));
    invariant(log.all_pass(), "pipeline stage audit failed")?;

    // extension, approximation and the final stabilizer checks
    let fi = FreeImageOptions {
        c0: c0.clone(),
        f0: Some(PointFunction::from_options(k, assign)?),
        seed: opts.seed,
        node_budget: opts.node_budget,
        max_resamples: opts.max_resamples,
    };
    let img = free_image_coloring(&x_act, k, &schedule, &fi, caps)?;
    log.extend(img.audits.clone());
    let f = PointFunction::total(k, img.coloring.clone())?;
    let family = schedule.entries.iter().map(|e| stage_sft(e, k, caps)).collect::<Result<Vec<_>>>()?;
    let approx = approx_local_rule(&family, family.len(), rule, &d, caps)?;
    log.extend(approx.audits.clone());
    let images: Vec<Configuration> = (0..n).map(|x| coding_map(&x_act, &f, x)).collect::<Result<_>>()?;
    let mut in_star = true;
    for c in &images {
        for s in &family {
            in_star &= s.contains(c)?;
        }
    }
    log.record("π_f(X) ⊆ Z*", in_star, json!(null));
    let tilde_vals = images
        .iter()
        .map(|c| approx.rule.apply(c).ok_or_else(|| Error::Invariant("ρ̃ undefined on π_f(X)".into())))
        .collect::<Result<Vec<_>>>()?;
    let tilde = PointFunction::total(rule.m(), tilde_vals)?;
    let stab_tilde = map_stabilizer(&x_act, &tilde)?;
    log.record(
        "Stab(π̃) = Stab(π)",
        stab_tilde == stab,
        json!({ "stab_pi": stab.encode(), "stab_tilde": stab_tilde.encode() }),
    );
    let pv = |x: usize| tilde.get(x).unwrap();
    for &x in &j0 {
        log.record(format!("J₀ point {x} maps to ρ(a₀)"), pv(x) == rule.apply(&wit.a0).unwrap(), json!(null));
    }
    for &x in &j1 {
        log.record(format!("J₁ point {x} maps to ρ(a₁)"), pv(x) == rule.apply(&wit.a1).unwrap(), json!(null));
    }
    for g in gammas.iter().filter(|g| !stab.contains(g)) {
        if at2a.contains(g) {
            let w = wit.get(g).unwrap();
            let sg = group.mul_unchecked(&w.sigma, g);
            let pts = &k_classes.iter().find(|(h, _)| h == g).unwrap().1;
            let hit = pts.iter().find(|&&x| pv(x_act.act(&w.sigma, x)) != pv(x_act.act(&sg, x)));
            log.record(
                format!("γ = {g} separated on K_γ"),
                hit.is_some(),
                json!({ "gamma": group.encode(g), "point": hit }),
            );
        } else {
            let hit = j0.iter().chain(&j1).find(|&&x| pv(x) != pv(x_act.act(g, x)));
            log.record(
                format!("γ = {g} separated on J₀ ⊔ J₁"),
                hit.is_some(),
                json!({ "gamma": group.encode(g), "point": hit }),
            );
        }
    }
    Ok(PipelineReport {
        a: a.encode(),
        t0: t0.encode(),
        t1: t1.encode(),
        b: b.encode(),
        d: d.encode(),
        gamma2: g2.iter().map(|g| group.encode(g)).collect(),
        f_size: f_set.len(),
        colors,
        points: n,
        j0,
        j1,
        k_points: k_pts,
        c0,
        coloring: img.coloring,
        stab_pi: stab.encode(),
        stab_tilde: stab_tilde.encode(),
        audits: log.into_vec(),
    })
}
