//! One distinguishing step: given a proper coloring g on C₀ and a rule ρ
//! whose map does not fix γ, color the block C so that every point sees a
//! σ ∈ S with ρ_f(σ·x) ≠* ρ_f(σγ·x).
//!
//! The step is posed as a CSP over a maximal N⁴-separated net Z in the
//! D-core of C: the variable at z is a coloring of C ∩ N·z, one constraint
//! per (z, h) with h a conjugate βγβ⁻¹, β ∈ N⁵.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::bounds::bound_report;
use super::stabilizers::{compute_h, q_map, rule_stab, StabScope, StabSet};
use super::{Audit, AuditLog};
use crate::error::{precondition, Caps, Error, Result};
use crate::graph::{
    core, extend_proper_coloring_within, greedy_separated, is_sd_syndetic, is_separated, schreier_graph, sd_separated,
    FiniteGraph,
};
use crate::group::{Element, GroupRef, GroupSubset};
use crate::lll::{
    brute_force, compute_params, constraint_probability, moser_tardos, BruteForce, Constraint, Csp, LllParams,
    SolveStatus,
};
use crate::shift::{points_to_mask, FiniteAction, LocalRule, PointFunction, Points};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepExponents {
    /// D = (F ∪ W ∪ Q ∪ Q⁻¹)^e_d
    pub e_d: u32,
    /// S = (N ∪ {γ, γ⁻¹})^e_s
    pub e_s: u32,
    /// Radius of the blocks V_ν = (F ∪ W)^e_v ν·z; by default the largest
    /// value with (F ∪ W)^e_v Q ⊆ D.
    pub e_v: Option<u32>,
}

impl Default for StepExponents {
    fn default() -> Self {
        StepExponents { e_d: 2, e_s: 6, e_v: None }
    }
}

#[derive(Clone, Debug)]
pub struct StepInput {
    pub f: GroupSubset,
    pub colors: u32,
    /// τ on proper patterns over W.
    pub rule: LocalRule,
    pub r: GroupSubset,
    pub m: GroupSubset,
    pub gamma: Element,
    pub exps: StepExponents,
    pub scope: StabScope,
    pub candidates: Option<GroupSubset>,
}

#[derive(Clone, Debug)]
pub struct StepSets {
    pub group: GroupRef,
    pub f: GroupSubset,
    pub w: GroupSubset,
    pub colors: u32,
    pub rule: LocalRule,
    pub r: GroupSubset,
    pub m: GroupSubset,
    pub gamma: Element,
    pub h: GroupSubset,
    pub stab: StabSet,
    pub q_pairs: Vec<(Element, Element)>,
    pub q: GroupSubset,
    pub d: GroupSubset,
    pub e_v: u32,
    pub drm: GroupSubset,
    pub n: GroupSubset,
    pub s: GroupSubset,
    pub audits: Vec<Audit>,
}

impl StepSets {
    pub fn to_json(&self) -> Value {
        let g = &self.group;
        json!({
            "h": self.h.encode(),
            "stab": self.stab.set.encode(),
            "stab_exact": self.stab.exact,
            "q_map": self.q_pairs.iter().map(|(h, q)| json!([g.encode(h), g.encode(q)])).collect::<Vec<_>>(),
            "q": self.q.encode(),
            "d": self.d.encode(),
            "e_v": self.e_v,
            "n": self.n.encode(),
            "s_size": self.s.len(),
        })
    }
}

/// Derive H, Stab, Q, D, N and S and check every containment the step uses.
pub fn step_sets(input: StepInput, caps: &Caps) -> Result<StepSets> {
    let StepInput { f, colors, rule, r, m, gamma, exps, scope, candidates } = input;
    let group = f.group().clone();
    let id = group.identity();
    let w = rule.window().clone();
    precondition(f.is_symmetric() && !f.contains(&id), "F must be symmetric without the identity")?;
    precondition(w.is_symmetric() && w.contains(&id), "W must be symmetric with the identity")?;
    let r = r.symmetrize(true);
    let m = m.symmetrize(true);
    let mut log = AuditLog::new("distinguishing-step");

    let h = compute_h(&f, colors, &rule, candidates.as_ref(), caps)?;
    log.record("identity in H", h.contains(&id), json!(null));
    if group.is_finite() && candidates.is_none() {
        let everything = GroupSubset::whole(&group)?;
        let full = compute_h(&f, colors, &rule, Some(&everything), caps)?;
        log.record(
            "H ⊆ W² ∪ WFW (whole-group window test)",
            full == h,
            json!({ "whole_group": full.encode(), "from_candidates": h.encode() }),
        );
    }
    let stab = rule_stab(&h, &scope)?;
    precondition(!stab.set.contains(&gamma), format!("γ = {gamma} lies in Stab(π_ρ)"))?;
    let (q_pairs, q) = q_map(&h, &stab.set, &scope)?;
    log.record(
        "q(h)·h·q(h)⁻¹ ∉ H",
        q_pairs.iter().all(|(x, g)| !h.contains(&group.conjugate(g, x))),
        json!({ "mapped": q_pairs.len() }),
    );

    let fw = f.union(&w)?;
    let base = fw.union(&q)?.union(&q.inverse())?;
    let d = base.power(exps.e_d);
    let e_v = match exps.e_v {
        Some(e) => {
            precondition(fw.power(e).product(&q)?.is_subset(&d), format!("(F∪W)^{e}·Q ⊄ D"))?;
            e
        }
        None => {
            let mut e = 0;
            let mut cur = fw.power(0);
            loop {
                let next = cur.product(&fw)?;
                if next == cur || !next.product(&q)?.is_subset(&d) || e >= 64 {
                    break e;
                }
                cur = next;
                e += 1;
            }
        }
    };
    let wfw = w.union(&f.product(&w)?)?;
    let case_set = GroupSubset::product_all(&[&wfw, &w, &wfw])?;
    precondition(case_set.is_subset(&fw.power(e_v)), format!("(W∪FW)W(W∪FW) ⊄ (F∪W)^{e_v}; raise e_d"))?;
    log.record("(F∪W)^e_v·Q ⊆ D", true, json!({ "e_v": e_v }));
    log.record("W ⊆ D", w.is_subset(&d), json!(null));

    let drm = GroupSubset::product_all(&[&d, &r, &m])?;
    let n = w.product(&drm)?.union(&GroupSubset::product_all(&[&m, &r, &d, &w])?)?;
    log.record("N symmetric", n.is_symmetric(), json!(null));
    log.record("identity in N", n.contains(&id), json!(null));
    let gen = n.union(&GroupSubset::new(&group, [gamma.clone(), group.inv(&gamma)])?)?;
    let s = gen.power(exps.e_s);
    log.record("N ∪ {γ, γ⁻¹} ⊆ S", gen.is_subset(&s), json!(null));
    let sigma_range = GroupSubset::product_all(&[&drm, &n.power(4), &r])?;
    precondition(sigma_range.is_subset(&s), format!("DRM·N⁴R ⊄ S at e_s = {}; raise e_s", exps.e_s))?;
    log.record("DRM·N⁴R ⊆ S", true, json!({ "s_size": s.len() }));

    Ok(StepSets {
        group,
        f,
        w,
        colors,
        rule,
        r,
        m,
        gamma,
        h,
        stab,
        q_pairs,
        q,
        d,
        e_v,
        drm,
        n,
        s,
        audits: log.into_vec(),
    })
}

/// X = C₀ ⊔ C ⊔ U with f₀ a proper coloring of C₀.
#[derive(Clone, Debug)]
pub struct StepPartition {
    pub c0: Points,
    pub f0: PointFunction,
    pub u: Points,
    /// Separated set generating U, if known.
    pub u_prime: Option<Points>,
}

impl StepPartition {
    pub fn trivial(action: &FiniteAction, colors: u32) -> Self {
        StepPartition { c0: Vec::new(), f0: PointFunction::empty(action.len(), colors), u: Vec::new(), u_prime: None }
    }

    pub fn c(&self, n: usize) -> Points {
        let mut mask = vec![true; n];
        for &x in self.c0.iter().chain(&self.u) {
            mask[x] = false;
        }
        (0..n).filter(|&x| mask[x]).collect()
    }
}

/// Per-constraint bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct ConstraintMeta {
    pub z: usize,
    pub h: Value,
    /// Number of β ∈ N⁵ with βγβ⁻¹ = h.
    pub betas: usize,
    pub delta: Vec<usize>,
    pub forbidden: usize,
}

#[derive(Clone, Debug)]
pub struct StepCsp {
    pub c: Points,
    pub c_prime: Points,
    pub z: Points,
    pub cells: Vec<Points>,
    pub col: Vec<Vec<Vec<u32>>>,
    pub g: PointFunction,
    pub csp: Csp,
    pub meta: Vec<ConstraintMeta>,
    pub hs: Vec<Element>,
    pub params: LllParams,
    pub f: PointFunction,
    pub solver: String,
    pub resamples: u64,
    pub audits: Vec<Audit>,
}

impl StepCsp {
    pub fn to_json(&self) -> Value {
        json!({
            "z": self.z,
            "cells": self.cells,
            "col_sizes": self.col.iter().map(Vec::len).collect::<Vec<_>>(),
            "constraints": self.meta,
            "params": self.params.to_json(),
            "solver": self.solver,
            "resamples": self.resamples,
            "coloring": self.f.values(),
        })
    }
}

/// ρ_f on points, undefined unless W·x ⊆ dom f.
struct RhoEval<'a> {
    action: &'a FiniteAction,
    w: Vec<usize>,
    rule: &'a LocalRule,
}

impl<'a> RhoEval<'a> {
    fn new(action: &'a FiniteAction, rule: &'a LocalRule) -> Self {
        RhoEval { action, w: rule.window().indices(), rule }
    }

    fn at(&self, work: &[Option<u32>], x: usize) -> Option<u32> {
        let mut p = Vec::with_capacity(self.w.len());
        for &g in &self.w {
            p.push(work[self.action.act_idx(g, x)]?);
        }
        self.rule.eval_pattern(&p)
    }

    /// ρ(a) ≠* ρ(b): both defined and different.
    fn differ(&self, work: &[Option<u32>], a: usize, b: usize) -> bool {
        matches!((self.at(work, a), self.at(work, b)), (Some(u), Some(v)) if u != v)
    }
}

/// Every proper extension of `work` to `pts` (in order), reported through
/// `visit`; stops early when `visit` returns false.
fn for_each_extension(
    graph: &FiniteGraph,
    work: &mut Vec<Option<u32>>,
    pts: &[usize],
    colors: u32,
    visit: &mut dyn FnMut(&[Option<u32>]) -> bool,
) -> bool {
    fn go(
        graph: &FiniteGraph,
        work: &mut Vec<Option<u32>>,
        pts: &[usize],
        i: usize,
        colors: u32,
        visit: &mut dyn FnMut(&[Option<u32>]) -> bool,
    ) -> bool {
        if i == pts.len() {
            return visit(work);
        }
        let x = pts[i];
        for c in 0..colors {
            if graph.neighbors(x).iter().all(|&y| work[y] != Some(c)) {
                work[x] = Some(c);
                let more = go(graph, work, pts, i + 1, colors, visit);
                work[x] = None;
                if !more {
                    return false;
                }
            }
        }
        true
    }
    go(graph, work, pts, 0, colors, visit)
}

fn check_partition(
    action: &FiniteAction,
    sets: &StepSets,
    part: &StepPartition,
    graph: &FiniteGraph,
    caps: &Caps,
) -> Result<Points> {
    let n = action.len();
    let mut seen = vec![false; n];
    for &x in part.c0.iter().chain(&part.u) {
        precondition(x < n && !seen[x], "C₀ and U must be disjoint point sets")?;
        seen[x] = true;
    }
    precondition(part.f0.len() == n && part.f0.domain() == part.c0, "f₀ must be defined exactly on C₀")?;
    precondition(graph.is_proper(&part.f0), "f₀ is not proper")?;
    precondition(part.f0.values().iter().flatten().all(|&v| v < sets.colors), "f₀ uses too many colors")?;
    let c = part.c(n);
    precondition(is_sd_syndetic(action, &c, &sets.r, &sets.d), "C is not (R,D)-syndetic")?;
    let sep = sd_separated(action, &part.u, &sets.s, &sets.d, part.u_prime.as_deref(), caps)?;
    precondition(sep.is_some(), "U is not (S,D)-separated")?;
    Ok(c)
}

/// Build the CSP of the step, solve it and rescan the result.
pub fn step_csp(
    action: &FiniteAction,
    sets: &StepSets,
    part: &StepPartition,
    seed: u64,
    max_resamples: u64,
    caps: &Caps,
) -> Result<StepCsp> {
    precondition(action.group() == &sets.group, "action and sets use different groups")?;
    precondition(action.is_free_on(&sets.s), "action is not S-free")?;
    let graph = schreier_graph(action, &sets.f)?;
    let c = check_partition(action, sets, part, &graph, caps)?;
    let npts = action.len();
    let mut log = AuditLog::new("distinguishing-step");
    log.extend(sets.audits.clone());

    let c_prime = core(action, &c, &sets.d);
    let n4 = sets.n.power(4);
    let z = greedy_separated(action, &c_prime, &n4);
    log.record("Z is N⁴-separated", is_separated(action, &z, &n4)?, json!({ "z": z }));
    let covered = points_to_mask(npts, &action.apply_set(&n4, &z));
    log.record("C′ ⊆ N⁴·Z", c_prime.iter().all(|&x| covered[x]), json!({ "c_prime": c_prime.len() }));

    let c_mask = points_to_mask(npts, &c);
    let mut cell_owner = vec![usize::MAX; npts];
    let mut cells = Vec::with_capacity(z.len());
    let mut disjoint = true;
    for (i, &zz) in z.iter().enumerate() {
        let cell: Points = action.apply_set(&sets.n, &[zz]).into_iter().filter(|&x| c_mask[x]).collect();
        for &x in &cell {
            disjoint &= cell_owner[x] == usize::MAX;
            cell_owner[x] = i;
        }
        cells.push(cell);
    }
    log.record("cells C ∩ N·z pairwise disjoint", disjoint, json!(null));
    let cross_edges = cells.iter().enumerate().any(|(i, cell)| {
        cell.iter().any(|&x| graph.neighbors(x).iter().any(|&y| cell_owner[y] != usize::MAX && cell_owner[y] != i))
    });
    log.record("no edges between distinct cells", !cross_edges, json!(null));

    let rest: Points = c.iter().copied().filter(|&x| cell_owner[x] == usize::MAX).collect();
    let g = extend_proper_coloring_within(&graph, &part.f0, sets.colors, &rest)?;
    log.record(
        "g extends f₀ to C₀ ∪ (C ∖ N·Z)",
        part.c0.iter().all(|&x| g.get(x) == part.f0.get(x)) && rest.iter().all(|&x| g.get(x).is_some()),
        json!({ "colored": g.domain().len() }),
    );

    // Col(z): proper extensions of g to the cell
    let mut col: Vec<Vec<Vec<u32>>> = Vec::with_capacity(z.len());
    for cell in &cells {
        let mut work = g.values().to_vec();
        let mut out = Vec::new();
        let mut over = false;
        for_each_extension(&graph, &mut work, cell, sets.colors, &mut |wk| {
            out.push(cell.iter().map(|&x| wk[x].unwrap()).collect());
            if out.len() as u128 > caps.table_entries {
                over = true;
                return false;
            }
            true
        });
        if over {
            return Err(Error::CapExceeded {
                what: "colorings of a cell".into(),
                needed: out.len() as u128,
                cap: caps.table_entries,
            });
        }
        invariant_nonempty(&out)?;
        col.push(out);
    }

    let eval = RhoEval::new(action, &sets.rule);
    let group = &sets.group;
    let n5 = sets.n.power(5);
    let n_idx = sets.n.indices();
    let mut keys: BTreeMap<(usize, Element), usize> = BTreeMap::new();
    let mut hs: Vec<Element> = Vec::new();
    let mut meta: Vec<ConstraintMeta> = Vec::new();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut max_delta = 0;
    for (i, &zz) in z.iter().enumerate() {
        for beta in n5.iter() {
            let h = group.conjugate(beta, &sets.gamma);
            if let Some(&k) = keys.get(&(i, h.clone())) {
                meta[k].betas += 1;
                continue;
            }
            let nh = sets.n.right_translate(&h);
            let reach = points_to_mask(npts, &action.apply_set(&sets.n.union(&nh)?, &[zz]));
            let delta: Vec<usize> = z
                .iter()
                .enumerate()
                .filter(|(_, &z2)| n_idx.iter().any(|&g| reach[action.act_idx(g, z2)]))
                .map(|(j, _)| j)
                .collect();
            max_delta = max_delta.max(delta.len());
            let pairs: Vec<(usize, usize)> =
                sets.drm.iter().map(|nu| (action.act(nu, zz), action.act(&group.mul_unchecked(nu, &h), zz))).collect();
            let space: u128 = delta.iter().map(|&j| col[j].len() as u128).product();
            Caps::check("constraint tuples", space, caps.search_space)?;
            let mut forbidden = Vec::new();
            let mut work = g.values().to_vec();
            let mut idx = vec![0usize; delta.len()];
            'tuples: loop {
                for (t, &j) in delta.iter().enumerate() {
                    for (p, &x) in cells[j].iter().enumerate() {
                        work[x] = Some(col[j][idx[t]][p]);
                    }
                }
                if !pairs.iter().any(|&(a, b)| eval.differ(&work, a, b)) {
                    forbidden.push(idx.iter().map(|&v| v as u32).collect::<Vec<_>>());
                }
                for t in (0..delta.len()).rev() {
                    idx[t] += 1;
                    if idx[t] < col[delta[t]].len() {
                        continue 'tuples;
                    }
                    idx[t] = 0;
                }
                break;
            }
            keys.insert((i, h.clone()), meta.len());
            meta.push(ConstraintMeta {
                z: zz,
                h: group.encode(&h),
                betas: 1,
                delta: delta.iter().map(|&j| z[j]).collect(),
                forbidden: forbidden.len(),
            });
            hs.push(h);
            constraints.push(Constraint::new(delta, forbidden)?);
        }
    }
    log.record("|Δ(z,β)| ≤ 2", max_delta <= 2, json!({ "max": max_delta }));

    let lists: Vec<Vec<u32>> = col.iter().map(|l| (0..l.len() as u32).collect()).collect();
    let csp = Csp::with_lists(lists, constraints)?;
    let params = compute_params(&csp);
    log.record("ord ≤ 2", params.ord <= 2, json!({ "ord": params.ord }));
    let bounds = bound_report(sets.colors as u64, sets.d.len() as u64, sets.r.len() as u64, sets.m.len() as u64)?;
    let a: BigInt = bounds.a.parse().map_err(|_| Error::Invariant("bad constant a".into()))?;
    let pair_vdeg = meta.iter().fold(vec![0usize; z.len()], |mut acc, mt| {
        for &zz in &mt.delta {
            acc[z.binary_search(&zz).unwrap()] += mt.betas;
        }
        acc
    });
    let pair_max = pair_vdeg.iter().copied().max().unwrap_or(0);
    let m7 = BigInt::from(sets.m.len()).pow(7u32);
    log.record(
        "vdeg ≤ a|M|⁷",
        BigInt::from(params.vdeg) <= &a * &m7 && BigInt::from(pair_max) <= &a * &m7,
        json!({ "vdeg": params.vdeg, "pairs": pair_max, "a": bounds.a }),
    );
    log.record(
        "(z′,β) pairs per variable ≤ 2|N|⁷",
        BigInt::from(pair_max) <= BigInt::from(2u32) * BigInt::from(sets.n.len()).pow(7u32),
        json!({ "pairs": pair_max }),
    );

    let mut report = moser_tardos(&csp, seed, max_resamples);
    let mut solver = "moser-tardos".to_string();
    if report.status != SolveStatus::Solved {
        solver = "brute-force".to_string();
        match brute_force(&csp, caps)? {
            BruteForce::Sat(a) => report.assignment = Some(a),
            BruteForce::Unsat => return Err(Error::Unsolvable("the step CSP has no solution".into())),
        }
    }
    let assignment = report.assignment.unwrap();
    let mut f = g.clone();
    for (i, cell) in cells.iter().enumerate() {
        for (p, &x) in cell.iter().enumerate() {
            f.set(x, col[i][assignment[i] as usize][p]);
        }
    }
    log.record("f proper", graph.is_proper(&f), json!(null));
    log.record(
        "f defined exactly on C₀ ⊔ C",
        (0..npts).all(|x| f.get(x).is_some() == (c_mask[x] || part.c0.contains(&x))),
        json!(null),
    );
    let gamma_idx = sets.gamma.index();
    let s_idx = sets.s.indices();
    let failing: Vec<usize> = (0..npts)
        .filter(|&x| {
            let gx = action.act_idx(gamma_idx, x);
            !s_idx.iter().any(|&s| eval.differ(f.values(), action.act_idx(s, x), action.act_idx(s, gx)))
        })
        .collect();
    log.record(
        "every x has σ ∈ S with ρ_f(σ·x) ≠* ρ_f(σγ·x)",
        failing.is_empty(),
        json!({ "points": npts, "failing": failing }),
    );

    Ok(StepCsp {
        c,
        c_prime,
        z,
        cells,
        col,
        g,
        csp,
        meta,
        hs,
        params,
        f,
        solver,
        resamples: report.resamples,
        audits: log.into_vec(),
    })
}

fn invariant_nonempty(col: &[Vec<u32>]) -> Result<()> {
    if col.is_empty() {
        Err(Error::Invariant("a cell has no proper extension of g".into()))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ESet {
    pub e1: usize,
    pub e2: usize,
    pub e3: usize,
    pub e: Vec<Value>,
    #[serde(skip)]
    pub elems: Vec<Element>,
    pub conflict_degree: usize,
    pub required: u64,
    pub audits: Vec<Audit>,
}

/// ⌈|M| / (8|D|³|R|)⌉
fn e_lower_bound(sets: &StepSets) -> u64 {
    let den = 8 * (sets.d.len() as u64).pow(3) * sets.r.len() as u64;
    (sets.m.len() as u64).div_ceil(den)
}

/// The E-set for constraint `k` of a built step: greedy in canonical order,
/// keeping Dν ∪ Wνh pairwise disjoint.
pub fn e_set(action: &FiniteAction, sets: &StepSets, part: &StepPartition, step: &StepCsp, k: usize) -> Result<ESet> {
    let group = &sets.group;
    let z = step.meta[k].z;
    let h = &step.hs[k];
    let n = action.len();
    let cprime = points_to_mask(n, &step.c_prime);
    let c_mask = points_to_mask(n, &step.c);
    let mut colored = c_mask.clone();
    for &x in &part.c0 {
        colored[x] = true;
    }
    let rm = sets.r.product(&sets.m)?;
    let e1: Vec<Element> = rm.iter().filter(|nu| cprime[action.act(nu, z)]).cloned().collect();
    let e1_set = GroupSubset::new(group, e1.clone())?;
    let e2: Vec<Element> =
        sets.q.product(&e1_set)?.iter().filter(|nu| !sets.h.contains(&group.conjugate(nu, h))).cloned().collect();
    let block_h = |nu: &Element| sets.w.right_translate(&group.mul_unchecked(nu, h));
    let e3: Vec<Element> =
        e2.iter().filter(|nu| block_h(nu).iter().all(|g| colored[action.act(g, z)])).cloned().collect();
    let blocks: Vec<GroupSubset> =
        e3.iter().map(|nu| sets.d.right_translate(nu).union(&block_h(nu))).collect::<Result<_>>()?;
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..e3.len() {
        if chosen.iter().all(|&j| blocks[i].is_disjoint(&blocks[j])) {
            chosen.push(i);
        }
    }
    let conflict_degree = (0..e3.len())
        .map(|i| (0..e3.len()).filter(|&j| j != i && !blocks[i].is_disjoint(&blocks[j])).count())
        .max()
        .unwrap_or(0);
    let e: Vec<Element> = chosen.iter().map(|&i| e3[i].clone()).collect();
    let required = e_lower_bound(sets);

    let mut log = AuditLog::new("distinguishing-step");
    let fwv = sets.f.union(&sets.w)?.power(sets.e_v);
    log.record("(a) νhν⁻¹ ∉ H", e.iter().all(|nu| !sets.h.contains(&group.conjugate(nu, h))), json!(null));
    log.record(
        "(b) (F∪W)^e_v ν·z ⊆ C",
        e.iter().all(|nu| fwv.right_translate(nu).iter().all(|g| c_mask[action.act(g, z)])),
        json!({ "e_v": sets.e_v }),
    );
    log.record(
        "(c) Wνh·z ⊆ C₀ ⊔ C",
        e.iter().all(|nu| block_h(nu).iter().all(|g| colored[action.act(g, z)])),
        json!(null),
    );
    let pairwise =
        chosen.iter().enumerate().all(|(a, &i)| chosen[a + 1..].iter().all(|&j| blocks[i].is_disjoint(&blocks[j])));
    log.record("(d) Dν ∪ Wνh pairwise disjoint", pairwise, json!(null));
    log.record(
        "(e) |E| ≥ ⌈|M|/(8|D|³|R|)⌉",
        e.len() as u64 >= required,
        json!({ "size": e.len(), "required": required }),
    );
    let d2 = sets.d.len() * sets.d.len();
    log.record(
        "conflict degree < 4|D|²",
        conflict_degree < 4 * d2,
        json!({ "degree": conflict_degree, "bound": 4 * d2 }),
    );
    log.record("E ⊆ DRM", e.iter().all(|nu| sets.drm.contains(nu)), json!(null));
    Ok(ESet {
        e1: e1.len(),
        e2: e2.len(),
        e3: e3.len(),
        e: e.iter().map(|g| group.encode(g)).collect(),
        elems: e,
        conflict_degree,
        required,
        audits: log.into_vec(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbabilityAudit {
    /// Fraction of extensions of g to V that agree along all of E.
    pub p: String,
    /// The same ratio through the per-ν factorization.
    pub p_factored: String,
    /// Violation probability of the constraint itself.
    pub p_constraint: String,
    pub bound: String,
    pub extensions: u128,
    pub audits: Vec<Audit>,
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact probability that a uniform extension of g to V makes constraint k
/// fail along E, computed twice: by direct enumeration over V and by the
/// factorization over the blocks V_ν.
pub fn probability_audit(
    action: &FiniteAction,
    sets: &StepSets,
    part: &StepPartition,
    step: &StepCsp,
    k: usize,
    caps: &Caps,
) -> Result<ProbabilityAudit> {
    let graph = schreier_graph(action, &sets.f)?;
    let group = &sets.group;
    let n = action.len();
    let z = step.meta[k].z;
    let h = &step.hs[k];
    let es = e_set(action, sets, part, step, k)?;
    let eval = RhoEval::new(action, &sets.rule);

    let mut v: Points = Vec::new();
    for &zz in &step.meta[k].delta {
        let j = step.z.binary_search(&zz).unwrap();
        v.extend(&step.cells[j]);
    }
    v.sort_unstable();
    let space: u128 = (sets.colors as u128).checked_pow(v.len() as u32).unwrap_or(u128::MAX);
    Caps::check("extensions to V", space, caps.search_space)?;

    let targets: Vec<(usize, usize)> =
        es.elems.iter().map(|nu| (action.act(nu, z), action.act(&group.mul_unchecked(nu, h), z))).collect();
    let all_pairs: Vec<(usize, usize)> =
        sets.drm.iter().map(|nu| (action.act(nu, z), action.act(&group.mul_unchecked(nu, h), z))).collect();

    let mut log = AuditLog::new("distinguishing-step");
    let mut undefined = false;
    let agree_on = |wk: &[Option<u32>], pairs: &[(usize, usize)], undefined: &mut bool| {
        pairs.iter().all(|&(a, b)| match (eval.at(wk, a), eval.at(wk, b)) {
            (Some(x), Some(y)) => x == y,
            _ => {
                *undefined = true;
                true
            }
        })
    };

    // direct enumeration over V
    let (mut total, mut bad, mut violated) = (0u128, 0u128, 0u128);
    let mut work = step.g.values().to_vec();
    for_each_extension(&graph, &mut work, &v, sets.colors, &mut |wk| {
        total += 1;
        if agree_on(wk, &targets, &mut undefined) {
            bad += 1;
        }
        if !all_pairs.iter().any(|&(a, b)| eval.differ(wk, a, b)) {
            violated += 1;
        }
        true
    });
    log.record("ρ defined along E on every extension", !undefined, json!(null));

    // factorization over V_ν
    let fwv = sets.f.union(&sets.w)?.power(sets.e_v);
    let blocks: Vec<Points> = es.elems.iter().map(|nu| action.apply_set(&fwv.right_translate(nu), &[z])).collect();
    let v_mask = points_to_mask(n, &v);
    log.record("V_ν ⊆ V", blocks.iter().flatten().all(|&x| v_mask[x]), json!(null));
    let mut owner = vec![usize::MAX; n];
    for (i, b) in blocks.iter().enumerate() {
        for &x in b {
            owner[x] = i;
        }
    }
    let independent = blocks
        .iter()
        .enumerate()
        .all(|(i, b)| b.iter().all(|&x| graph.neighbors(x).iter().all(|&y| owner[y] == usize::MAX || owner[y] == i)));
    log.record("blocks V_ν independent", independent, json!(null));
    let v0: Points = v.iter().copied().filter(|&x| owner[x] == usize::MAX).collect();
    let (mut sum_ext, mut sum_bad) = (BigInt::zero(), BigInt::zero());
    let mut strict = true;
    let mut work = step.g.values().to_vec();
    for_each_extension(&graph, &mut work, &v0, sets.colors, &mut |psi| {
        let mut prod_ext = BigInt::one();
        let mut prod_bad = BigInt::one();
        for (i, b) in blocks.iter().enumerate() {
            let (mut ext, mut ext_bad) = (0u128, 0u128);
            let mut w2 = psi.to_vec();
            for_each_extension(&graph, &mut w2, b, sets.colors, &mut |xi| {
                ext += 1;
                if agree_on(xi, &targets[i..=i], &mut undefined) {
                    ext_bad += 1;
                }
                true
            });
            strict &= ext_bad < ext;
            prod_ext *= BigInt::from(ext);
            prod_bad *= BigInt::from(ext_bad);
        }
        sum_ext += prod_ext;
        sum_bad += prod_bad;
        true
    });
    log.record("Ext′(ψ,ν) ≠ Ext(ψ,ν)", strict, json!(null));
    log.record(
        "Σ|Ext(ψ)| counts every extension",
        sum_ext == BigInt::from(total),
        json!({ "direct": total.to_string(), "factored": sum_ext.to_string() }),
    );
    let p = ratio(bad, total);
    let p_factored = if sum_ext.is_zero() { BigRational::zero() } else { BigRational::new(sum_bad, sum_ext) };
    log.record("factored p equals direct p", p == p_factored, json!(null));
    let p_constraint = ratio(violated, total);
    log.record(
        "constraint probability matches the CSP",
        p_constraint == constraint_probability(&step.csp.constraints()[k], &step.csp),
        json!(null),
    );
    log.record("P[B] ≤ p", p_constraint <= p, json!(null));
    let ell_d = BigInt::from(sets.colors).pow(sets.d.len() as u32);
    let factor = BigRational::one() - BigRational::new(BigInt::one(), ell_d);
    let bound = (0..es.elems.len()).fold(BigRational::one(), |acc, _| acc * &factor);
    log.record("p ≤ (1 − ℓ^−|D|)^|E|", p <= bound, json!({ "e": es.elems.len() }));
    log.record("p < 1", p < BigRational::one(), json!(null));
    Ok(ProbabilityAudit {
        p: p.to_string(),
        p_factored: p_factored.to_string(),
        p_constraint: p_constraint.to_string(),
        bound: if es.elems.len() <= 4 { bound.to_string() } else { format!("(1-{})^{}", factor, es.elems.len()) },
        extensions: total,
        audits: log.into_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::all_pass;
    use crate::group::Group;

    fn z24_input(f: &[i64], colors: u32, r: &[i64], m: &[i64], caps: &Caps) -> (GroupRef, StepInput) {
        let g = Group::cyclic(24);
        let w = GroupSubset::identity(&g);
        let input = StepInput {
            f: GroupSubset::from_ints(&g, f).unwrap(),
            colors,
            rule: LocalRule::from_fn(w, colors, colors, caps, |_| true, |p| p[0]).unwrap(),
            r: GroupSubset::from_ints(&g, r).unwrap(),
            m: GroupSubset::from_ints(&g, m).unwrap(),
            gamma: Element::Finite(1),
            exps: StepExponents::default(),
            scope: StabScope::Exact,
            candidates: None,
        };
        (g, input)
    }

    #[test]
    fn evaluation_step_on_two_copies() {
        let caps = Caps::default();
        let (g, input) = z24_input(&[-1, 1], 3, &[0], &[-1, 0, 1], &caps);
        let sets = step_sets(input, &caps).unwrap();
        assert_eq!(sets.d, GroupSubset::from_ints(&g, &[-2, -1, 0, 1, 2]).unwrap());
        assert_eq!(sets.n.len(), 7);
        assert!(all_pass(&sets.audits));
        let action = FiniteAction::regular_copies(&g, 2).unwrap();
        let part = StepPartition::trivial(&action, 3);
        let step = step_csp(&action, &sets, &part, 11, 1_000_000, &caps).unwrap();
        assert!(all_pass(&step.audits), "{:?}", step.audits.iter().filter(|a| !a.passed()).collect::<Vec<_>>());
        assert!(step.params.ord <= 2);
        assert!(step.meta.iter().all(|m| m.delta.len() <= 2));
        for k in 0..step.meta.len() {
            let es = e_set(&action, &sets, &part, &step, k).unwrap();
            assert!(all_pass(&es.audits));
        }
    }

    #[test]
    fn precolored_point_and_reserved_point() {
        let caps = Caps::default();
        let (g, input) = z24_input(&[], 2, &[-1, 0, 1], &[-1, 0, 1], &caps);
        let input = StepInput { r: GroupSubset::from_ints(&g, &[-1, 0, 1]).unwrap(), ..input };
        let sets = step_sets(input, &caps).unwrap();
        assert_eq!(sets.d, GroupSubset::identity(&g));
        let action = FiniteAction::translation(&g).unwrap();
        let mut f0 = PointFunction::empty(24, 2);
        f0.set(0, 1);
        let part = StepPartition { c0: vec![0], f0, u: vec![12], u_prime: None };
        let step = step_csp(&action, &sets, &part, 5, 1_000_000, &caps).unwrap();
        assert!(all_pass(&step.audits));
        assert_eq!(step.f.get(0), Some(1));
        let pa = probability_audit(&action, &sets, &part, &step, 0, &caps).unwrap();
        assert!(all_pass(&pa.audits), "{:?}", pa.audits);
        assert_eq!(pa.p, pa.p_factored);
    }
}
