//! Configurations over finite groups, the Bernoulli shift, SFTs, local rules
//! and finite actions with their coding maps.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{invariant, precondition, Caps, Error, Result};
use crate::group::{Element, GroupRef, GroupSubset};

/// A map G -> {0..k-1}, stored in canonical element order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    group: GroupRef,
    k: u32,
    values: Vec<u32>,
}

impl Configuration {
    pub fn new(group: &GroupRef, k: u32, values: Vec<u32>) -> Result<Self> {
        let n = group.finite_order()?;
        precondition(values.len() == n, format!("configuration has {} values, group has {n} elements", values.len()))?;
        precondition(values.iter().all(|&v| v < k), "configuration value outside the alphabet")?;
        Ok(Configuration { group: group.clone(), k, values })
    }

    pub fn constant(group: &GroupRef, k: u32, c: u32) -> Result<Self> {
        Configuration::new(group, k, vec![c; group.finite_order()?])
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn at(&self, g: &Element) -> u32 {
        self.values[g.index()]
    }

    /// (γ·x)(δ) = x(δγ)
    pub fn shift(&self, gamma: &Element) -> Configuration {
        let g = &self.group;
        let c = gamma.index() as u32;
        let values = (0..self.values.len() as u32).map(|d| self.values[g.mul_idx(d, c) as usize]).collect();
        Configuration { group: g.clone(), k: self.k, values }
    }

    /// Values of (γ·x) on the window, in window order.
    pub fn shifted_pattern(&self, gamma: &Element, window: &GroupSubset) -> Vec<u32> {
        let g = &self.group;
        let c = gamma.index() as u32;
        window.iter().map(|w| self.values[g.mul_idx(w.index() as u32, c) as usize]).collect()
    }

    pub fn stabilizer(&self) -> GroupSubset {
        let g = &self.group;
        let n = self.values.len() as u32;
        let stab = (0..n).filter(|&c| (0..n).all(|d| self.values[g.mul_idx(d, c) as usize] == self.values[d as usize]));
        GroupSubset::from_indices(g, stab)
    }

    pub fn is_free(&self) -> bool {
        let g = &self.group;
        let n = self.values.len() as u32;
        (1..n).all(|c| (0..n).any(|d| self.values[g.mul_idx(d, c) as usize] != self.values[d as usize]))
    }
}

/// Every configuration in k^G, lexicographic in the value vector.
pub fn all_configurations(group: &GroupRef, k: u32, caps: &Caps) -> Result<Vec<Configuration>> {
    let n = group.finite_order()?;
    let total = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    Caps::check("k^|G| configurations", total, caps.table_entries)?;
    let mut out = Vec::with_capacity(total as usize);
    let mut v = vec![0u32; n];
    for _ in 0..total {
        out.push(Configuration { group: group.clone(), k, values: v.clone() });
        for i in (0..n).rev() {
            v[i] += 1;
            if v[i] < k {
                break;
            }
            v[i] = 0;
        }
    }
    Ok(out)
}

/// Configurations with trivial stabilizer.
pub fn free_part(group: &GroupRef, k: u32, caps: &Caps) -> Result<Vec<Configuration>> {
    Ok(all_configurations(group, k, caps)?.into_iter().filter(|x| x.is_free()).collect())
}

/// Subshift presented by a window and its allowed patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sft {
    window: GroupSubset,
    k: u32,
    allowed: BTreeSet<Vec<u32>>,
}

impl Sft {
    pub fn new(window: GroupSubset, k: u32, allowed: BTreeSet<Vec<u32>>) -> Result<Self> {
        precondition(!window.is_empty(), "SFT window must be nonempty")?;
        for p in &allowed {
            precondition(
                p.len() == window.len() && p.iter().all(|&v| v < k),
                "allowed pattern is not a total pattern on the window",
            )?;
        }
        Ok(Sft { window, k, allowed })
    }

    /// Window plus every pattern accepted by `keep`.
    pub fn from_predicate(window: GroupSubset, k: u32, caps: &Caps, keep: impl Fn(&[u32]) -> bool) -> Result<Self> {
        let allowed = patterns(window.len(), k, caps)?.into_iter().filter(|p| keep(p)).collect();
        Sft::new(window, k, allowed)
    }

    pub fn window(&self) -> &GroupSubset {
        &self.window
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn allowed(&self) -> &BTreeSet<Vec<u32>> {
        &self.allowed
    }

    pub fn allows(&self, pattern: &[u32]) -> bool {
        self.allowed.contains(pattern)
    }

    /// (γ·x)↾W ∈ Φ for every γ.
    pub fn contains(&self, x: &Configuration) -> Result<bool> {
        if x.k() != self.k {
            return Err(Error::Precondition(format!(
                "alphabet mismatch: configuration over {} symbols, SFT over {}",
                x.k(),
                self.k
            )));
        }
        if x.group() != self.window.group() {
            return Err(Error::MixedGroups);
        }
        Ok(x.group().elements()?.iter().all(|g| self.allowed.contains(&x.shifted_pattern(g, &self.window))))
    }

    /// Window test on a finite patch of an infinite-group configuration:
    /// every γ with Wγ inside the patch must see an allowed pattern.
    pub fn patch_consistent(&self, patch: &BTreeMap<Element, u32>) -> bool {
        let g = self.window.group();
        let mut centers = BTreeSet::new();
        for p in patch.keys() {
            for w in self.window.iter() {
                centers.insert(g.mul_unchecked(&g.inv(w), p));
            }
        }
        centers.iter().all(|c| {
            let pat: Option<Vec<u32>> =
                self.window.iter().map(|w| patch.get(&g.mul_unchecked(w, c)).copied()).collect();
            match pat {
                Some(p) => self.allowed.contains(&p),
                None => true,
            }
        })
    }

    /// Intersection of two SFTs over the union window.
    pub fn intersect(&self, other: &Sft, caps: &Caps) -> Result<Sft> {
        precondition(self.k == other.k, "alphabet mismatch")?;
        let window = self.window.union(&other.window)?;
        let pos =
            |w: &GroupSubset| -> Vec<usize> { w.iter().map(|e| window.elements().binary_search(e).unwrap()).collect() };
        let (pa, pb) = (pos(&self.window), pos(&other.window));
        Sft::from_predicate(window.clone(), self.k, caps, |p| {
            let a: Vec<u32> = pa.iter().map(|&i| p[i]).collect();
            let b: Vec<u32> = pb.iter().map(|&i| p[i]).collect();
            self.allowed.contains(&a) && other.allowed.contains(&b)
        })
    }
}

/// All k^len patterns in lexicographic order.
pub fn patterns(len: usize, k: u32, caps: &Caps) -> Result<Vec<Vec<u32>>> {
    let total = (k as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    Caps::check("window patterns", total, caps.table_entries)?;
    let mut out = Vec::with_capacity(total as usize);
    let mut v = vec![0u32; len];
    for _ in 0..total {
        out.push(v.clone());
        for i in (0..len).rev() {
            v[i] += 1;
            if v[i] < k {
                break;
            }
            v[i] = 0;
        }
    }
    Ok(out)
}

/// Col(F, ℓ): proper ℓ-colorings of the Cayley graph for the symmetric set F.
pub fn sft_col(f: &GroupSubset, colors: u32, caps: &Caps) -> Result<Sft> {
    let g = f.group();
    let id = g.identity();
    if f.contains(&id) {
        return Err(Error::Precondition("F must not contain the identity".into()));
    }
    precondition(f.is_symmetric(), "F must be symmetric")?;
    let window = f.insert(id.clone())?;
    let centre = window.elements().binary_search(&id).unwrap();
    Sft::from_predicate(window, colors, caps, |p| p.iter().enumerate().all(|(i, &c)| i == centre || c != p[centre]))
}

/// X_H: configurations constant on the cosets of the subgroup H.
pub fn sft_cosets(h: &GroupSubset, k: u32, caps: &Caps) -> Result<Sft> {
    precondition(h.is_subgroup(), "H must be a subgroup")?;
    Sft::from_predicate(h.clone(), k, caps, |p| p.iter().all(|&c| c == p[0]))
}

/// Finite-window rule τ on patterns over W.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRule {
    window: GroupSubset,
    k: u32,
    m: u32,
    table: BTreeMap<Vec<u32>, u32>,
}

impl LocalRule {
    pub fn new(window: GroupSubset, k: u32, m: u32, table: BTreeMap<Vec<u32>, u32>) -> Result<Self> {
        for (p, &v) in &table {
            precondition(p.len() == window.len() && p.iter().all(|&c| c < k), "rule pattern not total on the window")?;
            precondition(v < m, "rule output outside the output alphabet")?;
        }
        Ok(LocalRule { window, k, m, table })
    }

    /// Tabulate `f` on every pattern accepted by `admissible`.
    pub fn from_fn(
        window: GroupSubset,
        k: u32,
        m: u32,
        caps: &Caps,
        admissible: impl Fn(&[u32]) -> bool,
        f: impl Fn(&[u32]) -> u32,
    ) -> Result<Self> {
        let table = patterns(window.len(), k, caps)?
            .into_iter()
            .filter(|p| admissible(p))
            .map(|p| {
                let v = f(&p);
                (p, v)
            })
            .collect();
        LocalRule::new(window, k, m, table)
    }

    /// ρ(x) = x(1).
    pub fn evaluation(group: &GroupRef, k: u32, caps: &Caps) -> Result<Self> {
        LocalRule::from_fn(GroupSubset::identity(group), k, k, caps, |_| true, |p| p[0])
    }

    pub fn window(&self) -> &GroupSubset {
        &self.window
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn table(&self) -> &BTreeMap<Vec<u32>, u32> {
        &self.table
    }

    pub fn eval_pattern(&self, p: &[u32]) -> Option<u32> {
        self.table.get(p).copied()
    }

    /// ρ(γ·x) = τ((γ·x)↾W)
    pub fn apply_at(&self, x: &Configuration, gamma: &Element) -> Option<u32> {
        self.eval_pattern(&x.shifted_pattern(gamma, &self.window))
    }

    pub fn apply(&self, x: &Configuration) -> Option<u32> {
        self.apply_at(x, &x.group().identity())
    }
}

/// f(x) = 0 if x vanishes somewhere on H, else 1. Its coding image is
/// constant on H-cosets.
pub fn coset_rule(h: &GroupSubset, k: u32, caps: &Caps) -> Result<LocalRule> {
    precondition(h.is_subgroup(), "H is not closed under the group law")?;
    LocalRule::from_fn(h.clone(), k, 2, caps, |_| true, |p| u32::from(!p.contains(&0)))
}

/// Points are indexed 0..n in canonical order.
pub type Points = Vec<usize>;

/// A finite set with an exact action of a finite group.
#[derive(Clone, Debug)]
pub struct FiniteAction {
    group: GroupRef,
    n: usize,
    act: Vec<u32>,
    configs: Option<Vec<Configuration>>,
}

impl FiniteAction {
    /// Build from a raw table `act[g * n + x]` and verify the action laws.
    pub fn from_table(group: &GroupRef, n: usize, act: Vec<u32>) -> Result<Self> {
        let order = group.finite_order()?;
        precondition(act.len() == order * n, "action table has the wrong size")?;
        precondition(act.iter().all(|&y| (y as usize) < n), "action table leaves the point set")?;
        let a = FiniteAction { group: group.clone(), n, act, configs: None };
        a.verify_laws()?;
        Ok(a)
    }

    /// Left multiplication of G on itself.
    pub fn translation(group: &GroupRef) -> Result<Self> {
        let n = group.finite_order()?;
        let mut act = Vec::with_capacity(n * n);
        for g in 0..n as u32 {
            for x in 0..n as u32 {
                act.push(group.mul_idx(g, x));
            }
        }
        Ok(FiniteAction { group: group.clone(), n, act, configs: None })
    }

    /// Shift action on a shift-closed list of configurations.
    pub fn on_configurations(group: &GroupRef, configs: Vec<Configuration>) -> Result<Self> {
        let order = group.finite_order()?;
        let index: HashMap<&[u32], usize> = configs.iter().enumerate().map(|(i, c)| (c.values(), i)).collect();
        precondition(index.len() == configs.len(), "duplicate configurations")?;
        let n = configs.len();
        let mut act = vec![0u32; order * n];
        for g in 0..order {
            let ge = Element::Finite(g as u32);
            for (x, c) in configs.iter().enumerate() {
                let y = c.shift(&ge);
                let j = *index
                    .get(y.values())
                    .ok_or_else(|| Error::Precondition("configuration list is not shift-closed".into()))?;
                act[g * n + x] = j as u32;
            }
        }
        Ok(FiniteAction { group: group.clone(), n, act, configs: Some(configs) })
    }

    /// Shift action on Free(k^G).
    pub fn free_part(group: &GroupRef, k: u32, caps: &Caps) -> Result<Self> {
        FiniteAction::on_configurations(group, free_part(group, k, caps)?)
    }

    /// Shift action on the union of the orbits of `seeds`, points in
    /// lexicographic order of their configurations.
    pub fn orbit_closure(group: &GroupRef, seeds: &[Configuration]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for s in seeds {
            for g in group.elements()? {
                set.insert(s.shift(&g).values().to_vec());
            }
        }
        let k = seeds.iter().map(|s| s.k()).max().unwrap_or(1);
        let configs = set.into_iter().map(|v| Configuration::new(group, k, v)).collect::<Result<Vec<_>>>()?;
        FiniteAction::on_configurations(group, configs)
    }

    /// m disjoint copies of the translation action.
    pub fn regular_copies(group: &GroupRef, m: usize) -> Result<Self> {
        let order = group.finite_order()?;
        let n = order * m;
        let mut act = vec![0u32; order * n];
        for g in 0..order as u32 {
            for c in 0..m {
                for x in 0..order as u32 {
                    act[g as usize * n + c * order + x as usize] = (c * order) as u32 + group.mul_idx(g, x);
                }
            }
        }
        Ok(FiniteAction { group: group.clone(), n, act, configs: None })
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn configs(&self) -> Option<&[Configuration]> {
        self.configs.as_deref()
    }

    pub fn config(&self, x: usize) -> Option<&Configuration> {
        self.configs.as_ref().map(|c| &c[x])
    }

    /// Point with the given configuration, if this is a shift action.
    pub fn point_of(&self, c: &Configuration) -> Option<usize> {
        self.configs.as_ref()?.iter().position(|d| d == c)
    }

    #[inline]
    pub fn act_idx(&self, g: usize, x: usize) -> usize {
        self.act[g * self.n + x] as usize
    }

    pub fn act(&self, g: &Element, x: usize) -> usize {
        self.act_idx(g.index(), x)
    }

    /// D·A for a set of group elements and a set of points.
    pub fn apply_set(&self, d: &GroupSubset, a: &[usize]) -> Points {
        let mut mask = vec![false; self.n];
        for g in d.iter() {
            for &x in a {
                mask[self.act(g, x)] = true;
            }
        }
        mask_to_points(&mask)
    }

    /// Orbit of x in increasing point order.
    pub fn orbit(&self, x: usize) -> Points {
        let order = self.group.order().unwrap() as usize;
        let mut mask = vec![false; self.n];
        for g in 0..order {
            mask[self.act_idx(g, x)] = true;
        }
        mask_to_points(&mask)
    }

    /// Orbits, each sorted, listed by smallest point.
    pub fn orbits(&self) -> Vec<Points> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for x in 0..self.n {
            if !seen[x] {
                let o = self.orbit(x);
                for &y in &o {
                    seen[y] = true;
                }
                out.push(o);
            }
        }
        out
    }

    pub fn point_stabilizer(&self, x: usize) -> GroupSubset {
        let order = self.group.order().unwrap();
        GroupSubset::from_indices(&self.group, (0..order).filter(|&g| self.act_idx(g as usize, x) == x))
    }

    pub fn is_free(&self) -> bool {
        let order = self.group.order().unwrap() as usize;
        (0..self.n).all(|x| (1..order).all(|g| self.act_idx(g, x) != x))
    }

    /// F ∩ Stab(x) ⊆ {1} for every x.
    pub fn is_free_on(&self, f: &GroupSubset) -> bool {
        let id = self.group.identity();
        f.iter().filter(|g| **g != id).all(|g| (0..self.n).all(|x| self.act(g, x) != x))
    }

    /// Identity law and compatibility law, checked exhaustively.
    pub fn verify_laws(&self) -> Result<()> {
        let order = self.group.finite_order()?;
        for x in 0..self.n {
            invariant(self.act_idx(0, x) == x, format!("identity moves point {x}"))?;
        }
        for g in 0..order {
            for h in 0..order {
                let gh = self.group.mul_idx(g as u32, h as u32) as usize;
                for x in 0..self.n {
                    invariant(
                        self.act_idx(gh, x) == self.act_idx(g, self.act_idx(h, x)),
                        format!("action law fails at ({g},{h},{x})"),
                    )?;
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn mask_to_points(mask: &[bool]) -> Points {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

pub(crate) fn points_to_mask(n: usize, pts: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &p in pts {
        m[p] = true;
    }
    m
}

/// Partial or total function from points to colors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointFunction {
    k: u32,
    values: Vec<Option<u32>>,
}

impl PointFunction {
    pub fn empty(n: usize, k: u32) -> Self {
        PointFunction { k, values: vec![None; n] }
    }

    pub fn total(k: u32, values: Vec<u32>) -> Result<Self> {
        precondition(values.iter().all(|&v| v < k), "value outside the alphabet")?;
        Ok(PointFunction { k, values: values.into_iter().map(Some).collect() })
    }

    pub fn from_options(k: u32, values: Vec<Option<u32>>) -> Result<Self> {
        precondition(values.iter().flatten().all(|&v| v < k), "value outside the alphabet")?;
        Ok(PointFunction { k, values })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: usize) -> Option<u32> {
        self.values[x]
    }

    pub fn set(&mut self, x: usize, v: u32) {
        assert!(v < self.k);
        self.values[x] = Some(v);
    }

    pub fn unset(&mut self, x: usize) {
        self.values[x] = None;
    }

    pub fn values(&self) -> &[Option<u32>] {
        &self.values
    }

    pub fn domain(&self) -> Points {
        self.values.iter().enumerate().filter(|(_, v)| v.is_some()).map(|(i, _)| i).collect()
    }

    pub fn is_total(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }

    pub fn total_values(&self) -> Result<Vec<u32>> {
        self.values.iter().map(|v| v.ok_or_else(|| Error::Precondition("point function is partial".into()))).collect()
    }
}

/// π_f(x)(γ) = f(γ·x)
pub fn coding_map(action: &FiniteAction, f: &PointFunction, x: usize) -> Result<Configuration> {
    let order = action.group().finite_order()?;
    let values = (0..order)
        .map(|g| {
            f.get(action.act_idx(g, x)).ok_or_else(|| Error::Precondition("coding map needs a total function".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(action.group(), f.k(), values)
}

/// An equivariant map, one image configuration per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivariantMap {
    pub images: Vec<Configuration>,
}

pub fn map_of_rule(action: &FiniteAction, f: &PointFunction) -> Result<EquivariantMap> {
    let images = (0..action.len()).map(|x| coding_map(action, f, x)).collect::<Result<Vec<_>>>()?;
    Ok(EquivariantMap { images })
}

/// Inverse of `map_of_rule`: f(x) = π(x)(1), after checking equivariance.
pub fn rule_of_map(action: &FiniteAction, map: &EquivariantMap) -> Result<PointFunction> {
    precondition(map.images.len() == action.len(), "map has the wrong number of images")?;
    for g in action.group().elements()? {
        for x in 0..action.len() {
            if map.images[action.act(&g, x)] != map.images[x].shift(&g) {
                return Err(Error::Precondition(format!("map is not equivariant at ({g}, {x})")));
            }
        }
    }
    let k = map.images.first().map(|c| c.k()).unwrap_or(1);
    PointFunction::total(k, map.images.iter().map(|c| c.values()[0]).collect())
}

/// Stab(π_f) = ⋂ Stab(π_f(x)).
pub fn map_stabilizer(action: &FiniteAction, f: &PointFunction) -> Result<GroupSubset> {
    let mut acc = GroupSubset::whole(action.group())?;
    for x in 0..action.len() {
        acc = acc.intersection(&coding_map(action, f, x)?.stabilizer())?;
        if acc.len() == 1 {
            break;
        }
    }
    Ok(acc)
}

/// The point function x ↦ ρ(x) on a shift action.
pub fn rule_point_function(action: &FiniteAction, rule: &LocalRule) -> Result<PointFunction> {
    let configs = action.configs().ok_or_else(|| Error::Precondition("rule evaluation needs a shift action".into()))?;
    let vals = configs
        .iter()
        .map(|c| rule.apply(c).ok_or_else(|| Error::Precondition("rule undefined on a point of the action".into())))
        .collect::<Result<Vec<_>>>()?;
    PointFunction::total(rule.m(), vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn cfg(n: u32, k: u32, v: &[u32]) -> Configuration {
        Configuration::new(&Group::cyclic(n), k, v.to_vec()).unwrap()
    }

    #[test]
    fn shift_formula() {
        let x = cfg(4, 2, &[0, 1, 0, 0]);
        assert_eq!(x.shift(&Element::Finite(1)).values(), &[1, 0, 0, 0]);
        assert_eq!(x.shift(&Element::Finite(0)), x);
        let g = Group::cyclic(6);
        let y = cfg(6, 3, &[0, 1, 2, 2, 1, 0]);
        for a in 0..6 {
            for b in 0..6 {
                let lhs = y.shift(&Element::Finite(b)).shift(&Element::Finite(a));
                let rhs = y.shift(&Element::Finite(g.mul_idx(a, b)));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn stabilizers() {
        assert_eq!(cfg(4, 2, &[0, 1, 0, 1]).stabilizer().indices(), vec![0, 2]);
        assert_eq!(cfg(4, 2, &[1, 1, 1, 1]).stabilizer().len(), 4);
        assert_eq!(cfg(4, 2, &[0, 1, 1, 0]).stabilizer().indices(), vec![0]);
    }

    #[test]
    fn free_part_counts() {
        let caps = Caps::default();
        assert_eq!(free_part(&Group::cyclic(3), 2, &caps).unwrap().len(), 6);
        assert_eq!(free_part(&Group::cyclic(4), 2, &caps).unwrap().len(), 12);
        assert_eq!(free_part(&Group::cyclic(5), 1, &caps).unwrap().len(), 0);
        assert!(free_part(&Group::cyclic(30), 2, &caps).is_err());
    }

    #[test]
    fn coloring_sft() {
        let caps = Caps::default();
        let z5 = Group::cyclic(5);
        let f = GroupSubset::from_ints(&z5, &[1, -1]).unwrap();
        let two = sft_col(&f, 2, &caps).unwrap();
        assert!(!two.contains(&cfg(5, 2, &[0, 1, 0, 1, 0])).unwrap());
        let three = sft_col(&f, 3, &caps).unwrap();
        assert!(three.contains(&cfg(5, 3, &[0, 1, 0, 1, 2])).unwrap());
        let none = sft_col(&GroupSubset::empty(&z5), 2, &caps).unwrap();
        assert!(all_configurations(&z5, 2, &caps).unwrap().iter().all(|x| none.contains(x).unwrap()));
        assert!(sft_col(&GroupSubset::from_ints(&z5, &[0, 1, 4]).unwrap(), 3, &caps).is_err());
        assert!(sft_col(&GroupSubset::from_ints(&z5, &[1]).unwrap(), 3, &caps).is_err());
    }

    #[test]
    fn coset_membership() {
        let caps = Caps::default();
        let z6 = Group::cyclic(6);
        let h = GroupSubset::from_ints(&z6, &[0, 3]).unwrap();
        let x = cfg(6, 2, &[0, 1, 1, 0, 1, 1]);
        assert!(sft_cosets(&h, 2, &caps).unwrap().contains(&x).unwrap());
        let col = sft_col(&GroupSubset::from_ints(&z6, &[1, 5]).unwrap(), 2, &caps).unwrap();
        assert!(!col.contains(&x).unwrap());
        let empty = Sft::new(h.clone(), 2, BTreeSet::new()).unwrap();
        assert!(!empty.contains(&x).unwrap());
        assert!(empty.contains(&cfg(6, 3, &[0; 6])).is_err());
    }

    #[test]
    fn patch_check_on_integers() {
        let caps = Caps::default();
        let z = Group::lattice(1);
        let f = GroupSubset::from_ints(&z, &[-1, 1]).unwrap();
        let col = sft_col(&f, 2, &caps).unwrap();
        let good: BTreeMap<Element, u32> = (0..6).map(|i| (Element::Lattice(vec![i]), (i % 2) as u32)).collect();
        assert!(col.patch_consistent(&good));
        let mut bad = good.clone();
        bad.insert(Element::Lattice(vec![3]), 0);
        assert!(!col.patch_consistent(&bad));
    }

    #[test]
    fn coding_maps() {
        let caps = Caps::default();
        let z6 = Group::cyclic(6);
        let shift = FiniteAction::on_configurations(&z6, all_configurations(&z6, 2, &caps).unwrap()).unwrap();
        let eval = rule_point_function(&shift, &LocalRule::evaluation(&z6, 2, &caps).unwrap()).unwrap();
        for x in 0..shift.len() {
            let img = coding_map(&shift, &eval, x).unwrap();
            assert_eq!(&img, shift.config(x).unwrap());
            for g in z6.elements().unwrap() {
                assert_eq!(coding_map(&shift, &eval, shift.act(&g, x)).unwrap(), img.shift(&g));
            }
        }
        let z4 = Group::cyclic(4);
        let tr = FiniteAction::translation(&z4).unwrap();
        let f = PointFunction::total(2, vec![0, 0, 1, 0]).unwrap();
        assert_eq!(coding_map(&tr, &f, 0).unwrap().values(), &[0, 0, 1, 0]);
        assert!(coding_map(&tr, &PointFunction::empty(4, 2), 0).is_err());
    }

    #[test]
    fn rule_map_round_trip() {
        let caps = Caps::default();
        let z4 = Group::cyclic(4);
        let shift = FiniteAction::on_configurations(&z4, all_configurations(&z4, 2, &caps).unwrap()).unwrap();
        // every total f round-trips through its coding map
        for bits in 0u32..(1 << 16) {
            let f = PointFunction::total(2, (0..16).map(|i| (bits >> i) & 1).collect()).unwrap();
            let pi = map_of_rule(&shift, &f).unwrap();
            assert_eq!(rule_of_map(&shift, &pi).unwrap(), f);
        }
        let not_equivariant = EquivariantMap { images: (0..16).map(|_| cfg(4, 2, &[0, 1, 0, 0])).collect() };
        assert!(rule_of_map(&shift, &not_equivariant).is_err());
    }

    #[test]
    fn map_stabilizers() {
        let caps = Caps::default();
        let z4 = Group::cyclic(4);
        let free4 = FiniteAction::free_part(&z4, 2, &caps).unwrap();
        let c = PointFunction::total(2, vec![1; free4.len()]).unwrap();
        assert_eq!(map_stabilizer(&free4, &c).unwrap().len(), 4);
        let eval = rule_point_function(&free4, &LocalRule::evaluation(&z4, 2, &caps).unwrap()).unwrap();
        assert_eq!(map_stabilizer(&free4, &eval).unwrap().indices(), vec![0]);

        let z6 = Group::cyclic(6);
        let free6 = FiniteAction::free_part(&z6, 2, &caps).unwrap();
        let h = GroupSubset::from_ints(&z6, &[0, 3]).unwrap();
        let rule = coset_rule(&h, 2, &caps).unwrap();
        let f = rule_point_function(&free6, &rule).unwrap();
        assert_eq!(map_stabilizer(&free6, &f).unwrap(), h);
        let xh = sft_cosets(&h, 2, &caps).unwrap();
        for x in 0..free6.len() {
            assert!(xh.contains(&coding_map(&free6, &f, x).unwrap()).unwrap());
        }
        assert_eq!(rule.apply(&cfg(6, 2, &[0, 1, 1, 1, 1, 1])), Some(0));
        assert_eq!(rule.apply(&cfg(6, 2, &[1; 6])), Some(1));
        assert!(coset_rule(&GroupSubset::from_ints(&z6, &[0, 1]).unwrap(), 2, &caps).is_err());
    }

    #[test]
    fn action_laws() {
        let d = Group::dihedral(3);
        FiniteAction::translation(&d).unwrap().verify_laws().unwrap();
        FiniteAction::regular_copies(&d, 3).unwrap().verify_laws().unwrap();
        let z3 = Group::cyclic(3);
        assert!(FiniteAction::from_table(&z3, 1, vec![0, 0, 0]).is_ok());
        // 1 acts as a transposition: violates 1+1+1 = 0 acting trivially
        assert!(FiniteAction::from_table(&z3, 2, vec![0, 1, 1, 0, 0, 1]).is_err());
        let lonely = vec![cfg(3, 2, &[0, 0, 1])];
        assert!(FiniteAction::on_configurations(&z3, lonely.clone()).is_err());
        assert_eq!(FiniteAction::orbit_closure(&z3, &lonely).unwrap().len(), 3);
    }
}
