//! Stabilizers of rule-induced maps: the coset coding, the trivial-stabilizer
//! coloring, the window test for H and the conjugation data built on it.

use serde::Serialize;
use serde_json::json;

use super::{Audit, AuditLog};
use crate::error::{precondition, Caps, Error, Result};
use crate::graph::{extend_proper_coloring, schreier_graph};
use crate::group::{Element, GroupRef, GroupSubset};
use crate::shift::{
    coding_map, coset_rule, map_stabilizer, rule_point_function, sft_cosets, FiniteAction, LocalRule, PointFunction,
};

#[derive(Clone, Debug, Serialize)]
pub struct CosetCodingReport {
    pub stab: Vec<serde_json::Value>,
    pub points: usize,
    pub audits: Vec<Audit>,
}

/// Code Free(k^G) by "x vanishes somewhere on Hγ" and check that the image
/// lies in X_H and that the map's stabilizer is exactly H.
pub fn verify_coset_coding(group: &GroupRef, h: &GroupSubset, k: u32, caps: &Caps) -> Result<CosetCodingReport> {
    precondition(h.is_subgroup() && h.is_normal(), "H must be a normal subgroup")?;
    precondition(k >= 2, "need at least two symbols")?;
    let action = FiniteAction::free_part(group, k, caps)?;
    let rule = coset_rule(h, k, caps)?;
    let f = rule_point_function(&action, &rule)?;
    let x_h = sft_cosets(h, 2, caps)?;
    let mut log = AuditLog::new("coset-coding");
    let mut outside = None;
    for x in 0..action.len() {
        let img = coding_map(&action, &f, x)?;
        if !x_h.contains(&img)? {
            outside = Some(x);
            break;
        }
    }
    log.record(
        "image inside X_H",
        outside.is_none(),
        json!({ "counterexample": outside.map(|x| action.config(x).unwrap().values().to_vec()) }),
    );
    let stab = map_stabilizer(&action, &f)?;
    log.record("map stabilizer equals H", stab == *h, json!({ "stab": stab.encode(), "h": h.encode() }));
    Ok(CosetCodingReport {
        stab: stab.iter().map(|g| group.encode(g)).collect(),
        points: action.len(),
        audits: log.into_vec(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TrivialStabReport {
    pub points: usize,
    pub j0: usize,
    pub j1: usize,
    pub coloring: Vec<u32>,
    pub audits: Vec<Audit>,
}

/// Color G(Free(3^G), F) properly with ℓ colors, pinning J₀ to 0 and J₁ to 1
/// so that the coding map has trivial stabilizer.
pub fn trivial_stab_coloring(group: &GroupRef, f: &GroupSubset, colors: u32, caps: &Caps) -> Result<TrivialStabReport> {
    let f = f.symmetrize(false);
    precondition(colors as usize > f.len(), format!("need more than |F| = {} colors", f.len()))?;
    precondition(colors >= 2, "need at least two colors")?;
    let action = FiniteAction::free_part(group, 3, caps)?;
    precondition(!action.is_empty(), "Free(3^G) is empty")?;
    let id = group.identity();
    let j = |i: u32| -> Vec<usize> {
        (0..action.len())
            .filter(|&x| {
                let c = action.config(x).unwrap();
                c.at(&id) == i && f.iter().all(|s| c.at(s) == 2)
            })
            .collect()
    };
    let (j0, j1) = (j(0), j(1));
    if j0.is_empty() || j1.is_empty() {
        return Err(Error::Precondition("J₀ or J₁ is empty; the group is too small".into()));
    }
    let graph = schreier_graph(&action, &f)?;
    let mut g = PointFunction::empty(action.len(), colors);
    for &x in &j0 {
        g.set(x, 0);
    }
    for &x in &j1 {
        g.set(x, 1);
    }
    let mut seeds = j0.clone();
    seeds.extend(&j1);
    let mut log = AuditLog::new("trivial-stabilizer");
    log.record("J₀ ⊔ J₁ independent", graph.is_independent(&seeds), json!({ "j0": j0.len(), "j1": j1.len() }));
    let out = extend_proper_coloring(&graph, &g, colors)?;
    log.record("extension agrees with g on J₀ ⊔ J₁", seeds.iter().all(|&x| out.get(x) == g.get(x)), json!(null));
    log.record("coloring proper on G(X,F)", graph.is_proper(&out), json!({ "edges": graph.edge_count() }));
    let stab = map_stabilizer(&action, &out)?;
    log.record("map stabilizer trivial", stab.len() == 1, json!({ "stab": stab.encode() }));
    Ok(TrivialStabReport {
        points: action.len(),
        j0: j0.len(),
        j1: j1.len(),
        coloring: out.total_values()?,
        audits: log.into_vec(),
    })
}

/// H = {h : ρ(x) = ρ(h·x) on Col(F,ℓ)}, by the window test on W ∪ Wh.
/// Exact because with ℓ > |F| every proper partial coloring of a finite set
/// extends to the whole group.
pub fn compute_h(
    f: &GroupSubset,
    colors: u32,
    rule: &LocalRule,
    candidates: Option<&GroupSubset>,
    caps: &Caps,
) -> Result<GroupSubset> {
    let f = f.symmetrize(false);
    if colors as usize <= f.len() {
        return Err(Error::Precondition(format!("ℓ = {colors} must exceed |F| = {}", f.len())));
    }
    precondition(rule.k() == colors, "rule alphabet must be the palette")?;
    let w = rule.window();
    let group = w.group().clone();
    let default;
    let cands = match candidates {
        Some(c) => c,
        None => {
            default = w.power(2).union(&GroupSubset::product_all(&[w, &f, w])?)?;
            &default
        }
    };
    let mut keep = Vec::new();
    for h in cands.iter() {
        if preserves_rule(&group, &f, colors, rule, h, caps)? {
            keep.push(h.clone());
        }
    }
    GroupSubset::new(&group, keep)
}

/// Whether τ(c↾W) = τ((h·c)↾W) for every proper coloring c of W ∪ Wh.
fn preserves_rule(
    group: &GroupRef,
    f: &GroupSubset,
    colors: u32,
    rule: &LocalRule,
    h: &Element,
    caps: &Caps,
) -> Result<bool> {
    let w = rule.window();
    let u = w.union(&w.right_translate(h))?;
    let pts: Vec<Element> = u.elements().to_vec();
    let pos = |e: &Element| pts.iter().position(|p| p == e);
    let mut earlier: Vec<Vec<usize>> = vec![Vec::new(); pts.len()];
    for (i, p) in pts.iter().enumerate() {
        for s in f.iter() {
            if let Some(j) = pos(&group.mul_unchecked(s, p)) {
                if j < i {
                    earlier[i].push(j);
                }
            }
        }
    }
    let at_w: Vec<usize> = w.iter().map(|e| pos(e).unwrap()).collect();
    let at_wh: Vec<usize> = w.iter().map(|e| pos(&group.mul_unchecked(e, h)).unwrap()).collect();
    let space = (colors as u128).checked_pow(pts.len() as u32).unwrap_or(u128::MAX);
    Caps::check("window colorings", space, caps.search_space)?;

    fn go(
        i: usize,
        c: &mut Vec<u32>,
        colors: u32,
        earlier: &[Vec<usize>],
        check: &mut dyn FnMut(&[u32]) -> Result<bool>,
    ) -> Result<bool> {
        if i == c.len() {
            return check(c);
        }
        for v in 0..colors {
            if earlier[i].iter().all(|&j| c[j] != v) {
                c[i] = v;
                if !go(i + 1, c, colors, earlier, check)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
    let mut check = |c: &[u32]| -> Result<bool> {
        let a: Vec<u32> = at_w.iter().map(|&i| c[i]).collect();
        let b: Vec<u32> = at_wh.iter().map(|&i| c[i]).collect();
        match (rule.eval_pattern(&a), rule.eval_pattern(&b)) {
            (Some(x), Some(y)) => Ok(x == y),
            _ => Err(Error::Precondition("rule undefined on a proper window pattern".into())),
        }
    };
    go(0, &mut vec![0; pts.len()], colors, &earlier, &mut check)
}

/// How conjugation is explored when computing Stab(π_ρ) from H.
#[derive(Clone, Debug)]
pub enum StabScope {
    /// All of a finite group.
    Exact,
    /// Only conjugators from the given set; the result is an upper bound.
    Bounded(GroupSubset),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabSet {
    pub set: GroupSubset,
    /// False when only a conjugator ball was explored.
    pub exact: bool,
}

/// {h ∈ H : every conjugate of h lies in H}.
pub fn rule_stab(h: &GroupSubset, scope: &StabScope) -> Result<StabSet> {
    let group = h.group().clone();
    let (conj, exact) = match scope {
        StabScope::Exact => (group.elements()?, true),
        StabScope::Bounded(b) => (b.elements().to_vec(), false),
    };
    let keep =
        h.iter().filter(|x| conj.iter().all(|g| h.contains(&group.conjugate(g, x)))).cloned().collect::<Vec<_>>();
    Ok(StabSet { set: GroupSubset::new(&group, keep)?, exact })
}

/// For each h ∈ H ∖ Stab the first q in canonical order with qhq⁻¹ ∉ H;
/// returns the pairs and Q = {q(h)} ∪ {1}.
pub fn q_map(h: &GroupSubset, stab: &GroupSubset, scope: &StabScope) -> Result<(Vec<(Element, Element)>, GroupSubset)> {
    let group = h.group().clone();
    let conj = match scope {
        StabScope::Exact => group.elements()?,
        StabScope::Bounded(b) => b.elements().to_vec(),
    };
    let mut pairs = Vec::new();
    for x in h.difference(stab)?.iter() {
        let q = conj
            .iter()
            .find(|g| !h.contains(&group.conjugate(g, x)))
            .ok_or_else(|| Error::Precondition(format!("no conjugator moves {x} out of H within scope")))?;
        pairs.push((x.clone(), q.clone()));
    }
    let q = GroupSubset::new(&group, pairs.iter().map(|(_, q)| q.clone()).chain([group.identity()]))?;
    Ok((pairs, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn coset_coding_examples() {
        let caps = Caps::default();
        let z6 = Group::cyclic(6);
        let h = GroupSubset::from_ints(&z6, &[0, 3]).unwrap();
        let r = verify_coset_coding(&z6, &h, 2, &caps).unwrap();
        assert!(super::super::all_pass(&r.audits));
        let triv = GroupSubset::identity(&z6);
        assert!(super::super::all_pass(&verify_coset_coding(&z6, &triv, 2, &caps).unwrap().audits));
        let d4 = Group::dihedral(4);
        let refl = GroupSubset::from_indices(&d4, [0, 4]);
        assert!(verify_coset_coding(&d4, &refl, 2, &caps).is_err());
    }

    #[test]
    fn trivial_stab_on_z7() {
        let caps = Caps::default();
        let z7 = Group::cyclic(7);
        let f = GroupSubset::from_ints(&z7, &[1]).unwrap();
        let r = trivial_stab_coloring(&z7, &f, 3, &caps).unwrap();
        assert!(super::super::all_pass(&r.audits));
        assert!(trivial_stab_coloring(&z7, &f, 2, &caps).is_err());
    }

    #[test]
    fn window_test_for_h() {
        let caps = Caps::default();
        let z = Group::lattice(1);
        let f = GroupSubset::from_ints(&z, &[-1, 1]).unwrap();
        let eval = LocalRule::from_fn(GroupSubset::identity(&z), 3, 3, &caps, |_| true, |p| p[0]).unwrap();
        assert_eq!(compute_h(&f, 3, &eval, None, &caps).unwrap(), GroupSubset::identity(&z));
        let w = GroupSubset::from_ints(&z, &[-1, 0, 1]).unwrap();
        // window order is 0, -1, 1
        let proper = |p: &[u32]| p[0] != p[1] && p[0] != p[2];
        let constant = LocalRule::from_fn(w.clone(), 3, 1, &caps, proper, |_| 0).unwrap();
        let cands = w.power(2);
        assert_eq!(compute_h(&f, 3, &constant, Some(&cands), &caps).unwrap(), cands);
        assert!(compute_h(&f, 2, &eval, None, &caps).is_err());
    }

    #[test]
    fn conjugation_data_on_d4() {
        let d4 = Group::dihedral(4);
        // {1, s} is not normal: r s r⁻¹ = r² s
        let h = GroupSubset::from_indices(&d4, [0, 4]);
        let stab = rule_stab(&h, &StabScope::Exact).unwrap();
        assert!(stab.exact);
        assert_eq!(stab.set, GroupSubset::identity(&d4));
        let (pairs, q) = q_map(&h, &stab.set, &StabScope::Exact).unwrap();
        assert_eq!(q.len(), 2);
        for (x, g) in &pairs {
            assert!(!h.contains(&d4.conjugate(g, x)));
        }
        let z6 = Group::cyclic(6);
        let h6 = GroupSubset::from_ints(&z6, &[0, 3]).unwrap();
        assert_eq!(rule_stab(&h6, &StabScope::Exact).unwrap().set, h6);
        let (pairs, q) = q_map(&h6, &h6, &StabScope::Exact).unwrap();
        assert!(pairs.is_empty());
        assert_eq!(q, GroupSubset::identity(&z6));
    }
}
