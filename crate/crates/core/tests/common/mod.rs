#![allow(dead_code)]

use shiftlab::constructions::{StabScope, StepExponents, StepInput, StepPartition};
use shiftlab::shift::{FiniteAction, LocalRule, PointFunction};
use shiftlab::{Caps, Element, Group, GroupRef, GroupSubset};

pub struct StepInstance {
    pub name: &'static str,
    pub group: GroupRef,
    pub action: FiniteAction,
    pub input: StepInput,
    pub part: StepPartition,
}

fn evaluation(w: &GroupSubset, colors: u32, caps: &Caps) -> LocalRule {
    LocalRule::from_fn(w.clone(), colors, colors, caps, |_| true, |p| p[0]).unwrap()
}

fn input(f: GroupSubset, colors: u32, rule: LocalRule, r: GroupSubset, m: GroupSubset, gamma: Element) -> StepInput {
    StepInput {
        f,
        colors,
        rule,
        r,
        m,
        gamma,
        exps: StepExponents::default(),
        scope: StabScope::Exact,
        candidates: None,
    }
}

/// Four small distinguishing-step instances: two copies of Z24 with a
/// proper 3-coloring, Z2×Z16 with a vertical graph and a horizontal γ, two
/// copies of D12 under a reflection-comparing rule, and Z24 with one
/// precolored and one reserved point.
pub fn step_instances(caps: &Caps) -> Vec<StepInstance> {
    let mut out = Vec::new();

    let z24 = Group::cyclic(24);
    let ints = |xs: &[i64]| GroupSubset::from_ints(&z24, xs).unwrap();
    out.push(StepInstance {
        name: "Z24 x2, F = {±1}, 3 colors",
        group: z24.clone(),
        action: FiniteAction::regular_copies(&z24, 2).unwrap(),
        input: input(
            ints(&[-1, 1]),
            3,
            evaluation(&ints(&[0]), 3, caps),
            ints(&[0]),
            ints(&[-1, 0, 1]),
            Element::Finite(1),
        ),
        part: StepPartition::trivial(&FiniteAction::regular_copies(&z24, 2).unwrap(), 3),
    });

    let z2z16 = Group::product(&[Group::cyclic(2), Group::cyclic(16)]).unwrap();
    let el = |a: u32, b: u32| Element::Finite(z2z16.join(&[a, b]));
    let set = |xs: &[(u32, u32)]| GroupSubset::new(&z2z16, xs.iter().map(|&(a, b)| el(a, b))).unwrap();
    let act = FiniteAction::translation(&z2z16).unwrap();
    out.push(StepInstance {
        name: "Z2xZ16, F = {(0,±1)}, 3 colors",
        group: z2z16.clone(),
        part: StepPartition::trivial(&act, 3),
        action: act,
        input: input(
            set(&[(0, 1), (0, 15)]),
            3,
            evaluation(&GroupSubset::identity(&z2z16), 3, caps),
            GroupSubset::identity(&z2z16),
            set(&[(0, 0), (0, 1), (0, 15)]),
            el(1, 0),
        ),
    });

    let d12 = Group::dihedral(12);
    // index j·12 + i stands for r^i s^j
    let w = GroupSubset::from_indices(&d12, [0, 12]);
    let same = LocalRule::from_fn(w.clone(), 2, 2, caps, |_| true, |p| u32::from(p[0] == p[1])).unwrap();
    let act = FiniteAction::regular_copies(&d12, 2).unwrap();
    out.push(StepInstance {
        name: "D12 x2, F = {}, reflection rule",
        group: d12.clone(),
        part: StepPartition::trivial(&act, 2),
        action: act,
        input: input(GroupSubset::empty(&d12), 2, same, GroupSubset::identity(&d12), w, Element::Finite(1)),
    });

    let act = FiniteAction::translation(&z24).unwrap();
    let mut f0 = PointFunction::empty(24, 2);
    f0.set(0, 1);
    out.push(StepInstance {
        name: "Z24, F = {}, precolored 0, reserved 12",
        group: z24.clone(),
        action: act,
        input: input(
            GroupSubset::empty(&z24),
            2,
            evaluation(&ints(&[0]), 2, caps),
            ints(&[-1, 0, 1]),
            ints(&[-1, 0, 1]),
            Element::Finite(1),
        ),
        part: StepPartition { c0: vec![0], f0, u: vec![12], u_prime: None },
    });
    out
}

/// ρ_f(x) = τ((f(w·x))_w), if every f(w·x) is defined.
pub fn rho_f(action: &FiniteAction, rule: &LocalRule, f: &PointFunction, x: usize) -> Option<u32> {
    let pattern: Option<Vec<u32>> = rule.window().iter().map(|w| f.get(action.act(w, x))).collect();
    rule.eval_pattern(&pattern?)
}

/// Every x has σ ∈ S with ρ_f(σ·x) and ρ_f(σγ·x) defined and different.
pub fn distinguishes_everywhere(
    action: &FiniteAction,
    rule: &LocalRule,
    f: &PointFunction,
    s: &GroupSubset,
    gamma: &Element,
) -> Result<(), usize> {
    let g = action.group();
    for x in 0..action.len() {
        let ok = s.iter().any(|sigma| {
            let a = rho_f(action, rule, f, action.act(sigma, x));
            let b = rho_f(action, rule, f, action.act(&g.mul(sigma, gamma).unwrap(), x));
            matches!((a, b), (Some(a), Some(b)) if a != b)
        });
        if !ok {
            return Err(x);
        }
    }
    Ok(())
}
