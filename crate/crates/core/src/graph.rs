//! Schreier graphs of finite actions, greedy independent sets and colorings,
//! and the syndetic / separated predicates with the two splitting steps.
//!
//! Every greedy routine scans vertices in increasing point order.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{invariant, precondition, Caps, Error, Result};
use crate::group::GroupSubset;
use crate::shift::{mask_to_points, points_to_mask, FiniteAction, PointFunction, Points};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGraph {
    adj: Vec<Vec<usize>>,
    max_degree: usize,
}

impl FiniteGraph {
    /// Build from an edge list; loops are rejected, duplicates merged.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            precondition(u < n && v < n, "edge endpoint out of range")?;
            precondition(u != v, "self-loop")?;
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        let max_degree = adj.iter().map(|a| a.len()).max().unwrap_or(0);
        Ok(FiniteGraph { adj, max_degree })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        FiniteGraph::from_edges(n, &edges).unwrap()
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).map(|u| (u, (u + 1) % n)).filter(|(u, v)| u != v).collect();
        FiniteGraph::from_edges(n, &edges).unwrap()
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            for &v in a {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mask = points_to_mask(self.len(), set);
        set.iter().all(|&v| self.adj[v].iter().all(|&w| !mask[w]))
    }

    /// Every vertex outside `set` has a neighbor inside it.
    pub fn is_maximal_independent(&self, set: &[usize]) -> bool {
        let mask = points_to_mask(self.len(), set);
        self.is_independent(set) && (0..self.len()).all(|v| mask[v] || self.adj[v].iter().any(|&w| mask[w]))
    }

    /// No edge inside the domain of `f` is monochromatic.
    pub fn is_proper(&self, f: &PointFunction) -> bool {
        self.edges().iter().all(|&(u, v)| match (f.get(u), f.get(v)) {
            (Some(a), Some(b)) => a != b,
            _ => true,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.len(),
            "edges": self.edges().iter().map(|&(u, v)| vec![u, v]).collect::<Vec<_>>(),
        })
    }
}

/// G(X, F): x ~ σ·x for σ in F ∪ F⁻¹, x ≠ σ·x.
pub fn schreier_graph(action: &FiniteAction, f: &GroupSubset) -> Result<FiniteGraph> {
    precondition(action.is_free_on(f), "action is not F-free")?;
    let s = f.symmetrize(false);
    let mut edges = Vec::new();
    for x in 0..action.len() {
        for g in s.iter() {
            let y = action.act(g, x);
            if x < y {
                edges.push((x, y));
            }
        }
    }
    FiniteGraph::from_edges(action.len(), &edges)
}

/// Greedy maximal independent superset of J, scanning vertices in order.
pub fn greedy_mis(graph: &FiniteGraph, j: &[usize]) -> Result<Points> {
    greedy_mis_within(graph, j, &vec![true; graph.len()])
}

/// Greedy MIS of the induced subgraph on `alive`, seeded with J.
pub fn greedy_mis_within(graph: &FiniteGraph, j: &[usize], alive: &[bool]) -> Result<Points> {
    precondition(graph.is_independent(j), "seed set J is not independent")?;
    precondition(j.iter().all(|&v| alive[v]), "seed set J leaves the vertex set")?;
    let mut inside = points_to_mask(graph.len(), j);
    for v in 0..graph.len() {
        if alive[v] && !inside[v] && graph.adj[v].iter().all(|&w| !inside[w]) {
            inside[v] = true;
        }
    }
    Ok(mask_to_points(&inside))
}

/// Greedy sequential coloring; classes are listed by color.
pub fn partition_independent(graph: &FiniteGraph) -> Vec<Points> {
    let mut color = vec![usize::MAX; graph.len()];
    let mut classes: Vec<Points> = Vec::new();
    for v in 0..graph.len() {
        let used: Vec<usize> = graph.adj[v].iter().map(|&w| color[w]).collect();
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        color[v] = c;
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(v);
    }
    classes
}

/// Extend a proper partial coloring to a total one by iterated maximal
/// independent sets: I_i is a greedy MIS of G minus I_0..I_{i-1} minus the
/// later seed classes J_{i+1}.., grown from J_i = g⁻¹(i).
pub fn extend_proper_coloring(graph: &FiniteGraph, g: &PointFunction, colors: u32) -> Result<PointFunction> {
    precondition(g.len() == graph.len(), "coloring has the wrong number of points")?;
    precondition(
        colors as usize > graph.max_degree(),
        format!("need more than {} colors, got {colors}", graph.max_degree()),
    )?;
    precondition(g.values().iter().flatten().all(|&c| c < colors), "seed color outside the palette")?;
    precondition(graph.is_proper(g), "seed coloring is not proper")?;
    let n = graph.len();
    let mut seed_class: Vec<Points> = vec![Vec::new(); colors as usize];
    for v in 0..n {
        if let Some(c) = g.get(v) {
            seed_class[c as usize].push(v);
        }
    }
    let mut taken = vec![false; n];
    let mut out = PointFunction::empty(n, colors);
    for i in 0..colors as usize {
        let mut alive: Vec<bool> = taken.iter().map(|t| !t).collect();
        for later in &seed_class[i + 1..] {
            for &v in later {
                alive[v] = false;
            }
        }
        let class = greedy_mis_within(graph, &seed_class[i], &alive)?;
        for v in class {
            taken[v] = true;
            out.set(v, i as u32);
        }
    }
    invariant(out.is_total(), "color classes do not cover the graph")?;
    invariant(graph.is_proper(&out), "extension is not proper")?;
    Ok(out)
}

/// Extend g to a proper coloring of dom(g) ∪ target, leaving every other
/// point uncolored. Works on the induced subgraph.
pub fn extend_proper_coloring_within(
    graph: &FiniteGraph,
    g: &PointFunction,
    colors: u32,
    target: &[usize],
) -> Result<PointFunction> {
    precondition(g.len() == graph.len(), "coloring has the wrong number of points")?;
    let mut keep = points_to_mask(graph.len(), target);
    for v in g.domain() {
        keep[v] = true;
    }
    let verts = mask_to_points(&keep);
    let mut local = vec![usize::MAX; graph.len()];
    for (i, &v) in verts.iter().enumerate() {
        local[v] = i;
    }
    let mut edges = Vec::new();
    for (i, &v) in verts.iter().enumerate() {
        for &w in &graph.adj[v] {
            if keep[w] && i < local[w] {
                edges.push((i, local[w]));
            }
        }
    }
    let sub = FiniteGraph::from_edges(verts.len(), &edges)?;
    let sub_g = PointFunction::from_options(g.k().max(colors), verts.iter().map(|&v| g.get(v)).collect())?;
    let sub_f = extend_proper_coloring(&sub, &sub_g, colors)?;
    let mut out = PointFunction::empty(graph.len(), colors);
    for (i, &v) in verts.iter().enumerate() {
        out.set(v, sub_f.get(i).unwrap());
    }
    invariant(graph.is_proper(&out), "extension is not proper")?;
    Ok(out)
}

/// Number of proper colorings, by backtracking (test oracle).
pub fn count_proper_colorings(graph: &FiniteGraph, colors: u32) -> u128 {
    fn go(graph: &FiniteGraph, colors: u32, v: usize, col: &mut Vec<u32>) -> u128 {
        if v == graph.len() {
            return 1;
        }
        let mut total = 0;
        for c in 0..colors {
            if graph.adj[v].iter().all(|&w| w >= v || col[w] != c) {
                col[v] = c;
                total += go(graph, colors, v + 1, col);
            }
        }
        total
    }
    go(graph, colors, 0, &mut vec![0; graph.len()])
}

/// S⁻¹·A = X, i.e. every x has some σ ∈ S with σ·x ∈ A.
pub fn is_syndetic(action: &FiniteAction, a: &[usize], s: &GroupSubset) -> bool {
    let mask = points_to_mask(action.len(), a);
    (0..action.len()).all(|x| s.iter().any(|g| mask[action.act(g, x)]))
}

/// {x : D·x ⊆ A}
pub fn core(action: &FiniteAction, a: &[usize], d: &GroupSubset) -> Points {
    let mask = points_to_mask(action.len(), a);
    (0..action.len()).filter(|&x| d.iter().all(|g| mask[action.act(g, x)])).collect()
}

pub fn is_sd_syndetic(action: &FiniteAction, a: &[usize], s: &GroupSubset, d: &GroupSubset) -> bool {
    is_syndetic(action, &core(action, a, d), s)
}

/// Independence of A in G(X, S).
pub fn is_separated(action: &FiniteAction, a: &[usize], s: &GroupSubset) -> Result<bool> {
    precondition(action.is_free_on(s), "action is not S-free")?;
    Ok(separated_unchecked(action, a, s))
}

fn separated_unchecked(action: &FiniteAction, a: &[usize], s: &GroupSubset) -> bool {
    let mask = points_to_mask(action.len(), a);
    let id = action.group().identity();
    a.iter().all(|&x| {
        s.iter().filter(|g| **g != id).all(|g| {
            let y = action.act(g, x);
            y == x || !mask[y]
        })
    })
}

/// Search for an S-separated A′ with A ⊆ D·A′. Tries the hint, then a greedy
/// cover, then exact backtracking under the node budget.
pub fn sd_separated(
    action: &FiniteAction,
    a: &[usize],
    s: &GroupSubset,
    d: &GroupSubset,
    hint: Option<&[usize]>,
    caps: &Caps,
) -> Result<Option<Points>> {
    precondition(action.is_free_on(s), "action is not S-free")?;
    let covers = |w: &[usize]| {
        let cover = points_to_mask(action.len(), &action.apply_set(d, w));
        a.iter().all(|&x| cover[x])
    };
    if let Some(h) = hint {
        if separated_unchecked(action, h, s) && covers(h) {
            return Ok(Some(h.to_vec()));
        }
    }
    let d_inv = d.inverse();
    // candidates able to cover x: d⁻¹·x
    let options: Vec<Points> = a.iter().map(|&x| action.apply_set(&d_inv, &[x])).collect();
    let mut conflicts =
        |c: usize, chosen: &[usize]| chosen.iter().any(|&u| u != c && s.iter().any(|g| action.act(g, u) == c));

    let mut chosen: Vec<usize> = Vec::new();
    let mut greedy_ok = true;
    for (i, &x) in a.iter().enumerate() {
        if action.apply_set(d, &chosen).contains(&x) {
            continue;
        }
        match options[i].iter().find(|&&c| !conflicts(c, &chosen)) {
            Some(&c) => chosen.push(c),
            None => {
                greedy_ok = false;
                break;
            }
        }
    }
    if greedy_ok {
        chosen.sort_unstable();
        return Ok(Some(chosen));
    }

    let mut nodes: u128 = 0;
    #[allow(clippy::too_many_arguments)]
    fn search(
        action: &FiniteAction,
        a: &[usize],
        d: &GroupSubset,
        options: &[Points],
        chosen: &mut Vec<usize>,
        conflicts: &mut dyn FnMut(usize, &[usize]) -> bool,
        nodes: &mut u128,
        budget: u128,
    ) -> Result<bool> {
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::CapExceeded {
                what: "separated witness search nodes".into(),
                needed: *nodes,
                cap: budget,
            });
        }
        let covered = points_to_mask(action.len(), &action.apply_set(d, chosen));
        let Some(i) = a.iter().position(|&x| !covered[x]) else { return Ok(true) };
        for &c in &options[i] {
            if !conflicts(c, chosen) && !chosen.contains(&c) {
                chosen.push(c);
                if search(action, a, d, options, chosen, conflicts, nodes, budget)? {
                    return Ok(true);
                }
                chosen.pop();
            }
        }
        Ok(false)
    }
    let mut chosen = Vec::new();
    if search(action, a, d, &options, &mut chosen, &mut conflicts, &mut nodes, caps.witness_nodes)? {
        chosen.sort_unstable();
        Ok(Some(chosen))
    } else {
        Ok(None)
    }
}

/// Greedy maximal S-separated subset of `within`.
pub fn greedy_separated(action: &FiniteAction, within: &[usize], s: &GroupSubset) -> Points {
    let mut inside = vec![false; action.len()];
    let sym = s.symmetrize(false);
    for &x in within {
        if sym.iter().all(|g| !inside[action.act(g, x)]) {
            inside[x] = true;
        }
    }
    mask_to_points(&inside)
}

/// Sets driving one splitting step.
#[derive(Clone, Debug)]
pub struct SplitParams {
    pub t: GroupSubset,
    pub r: GroupSubset,
    pub s: GroupSubset,
    pub t_next: GroupSubset,
    /// Window for the (·,D) variants.
    pub d: Option<GroupSubset>,
    /// When present, the size hypothesis |Q| > |T||D|² and R ⊇ TQ are checked.
    pub q: Option<GroupSubset>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitOutcome {
    pub c: Points,
    pub u: Points,
    /// Separated set generating U (U = D·U′, or U itself in the plain form).
    pub u_prime: Points,
    pub checks: Vec<(String, bool)>,
}

fn split_common_checks(action: &FiniteAction, p: &SplitParams) -> Result<()> {
    precondition(action.is_free_on(&p.s), "action is not S-free")?;
    precondition(
        p.s.is_symmetric() && p.s.contains(&action.group().identity()),
        "S must be symmetric with the identity",
    )?;
    precondition(p.s.product(&p.t)?.is_subset(&p.t_next), "T_next must contain S·T")?;
    Ok(())
}

/// V = C ⊔ U with C (R,D)-syndetic and U both (S,D)-separated and
/// (T_next,D)-syndetic: U′ greedy maximal S-separated in the D-core of V,
/// U = D·U′, C = V ∖ U.
pub fn split_syndetic_d(action: &FiniteAction, v: &[usize], p: &SplitParams, caps: &Caps) -> Result<SplitOutcome> {
    let d = p.d.clone().ok_or_else(|| Error::Precondition("split needs the window D".into()))?;
    split_common_checks(action, p)?;
    precondition(is_sd_syndetic(action, v, &p.t, &d), "V is not (T,D)-syndetic")?;
    let d2 = d.power(2);
    let need = GroupSubset::product_all(&[&d2, &p.r, &p.r.inverse(), &d2])?;
    precondition(need.is_subset(&p.s), "S must contain D²RR⁻¹D²")?;
    if let Some(q) = &p.q {
        precondition(q.len() > p.t.len() * d.len() * d.len(), "|Q| must exceed |T||D|²")?;
        precondition(p.t.product(q)?.is_subset(&p.r), "R must contain TQ")?;
    }
    let v_core = core(action, v, &d);
    let u_prime = greedy_separated(action, &v_core, &p.s);
    let u = action.apply_set(&d, &u_prime);
    let u_mask = points_to_mask(action.len(), &u);
    invariant(v.iter().filter(|&&x| u_mask[x]).count() == u.len(), "D·U′ escapes V")?;
    let c: Points = v.iter().copied().filter(|&x| !u_mask[x]).collect();
    let checks = vec![
        ("C is (R,D)-syndetic".to_string(), is_sd_syndetic(action, &c, &p.r, &d)),
        ("U is (S,D)-separated".to_string(), sd_separated(action, &u, &p.s, &d, Some(&u_prime), caps)?.is_some()),
        ("U is (T_next,D)-syndetic".to_string(), is_sd_syndetic(action, &u, &p.t_next, &d)),
    ];
    for (name, ok) in &checks {
        invariant(*ok, format!("split post-condition failed: {name}"))?;
    }
    Ok(SplitOutcome { c, u, u_prime, checks })
}

/// V = C ⊔ U with C R-syndetic and U S-separated and T_next-syndetic:
/// U greedy maximal S-separated in V, C = V ∖ U.
pub fn split_syndetic_plain(action: &FiniteAction, v: &[usize], p: &SplitParams) -> Result<SplitOutcome> {
    split_common_checks(action, p)?;
    precondition(is_syndetic(action, v, &p.t), "V is not T-syndetic")?;
    precondition(p.r.product(&p.r.inverse())?.is_subset(&p.s), "S must contain RR⁻¹")?;
    let u = greedy_separated(action, v, &p.s);
    let u_mask = points_to_mask(action.len(), &u);
    let c: Points = v.iter().copied().filter(|&x| !u_mask[x]).collect();
    let checks = vec![
        ("C is R-syndetic".to_string(), is_syndetic(action, &c, &p.r)),
        ("U is S-separated".to_string(), is_separated(action, &u, &p.s)?),
        ("U is T_next-syndetic".to_string(), is_syndetic(action, &u, &p.t_next)),
    ];
    for (name, ok) in &checks {
        invariant(*ok, format!("split post-condition failed: {name}"))?;
    }
    Ok(SplitOutcome { c, u: u.clone(), u_prime: u, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn z(n: u32, xs: &[i64]) -> GroupSubset {
        GroupSubset::from_ints(&Group::cyclic(n), xs).unwrap()
    }

    fn tr(n: u32) -> FiniteAction {
        FiniteAction::translation(&Group::cyclic(n)).unwrap()
    }

    #[test]
    fn schreier_examples() {
        let c5 = schreier_graph(&tr(5), &z(5, &[1, 4])).unwrap();
        assert_eq!(c5.edge_count(), 5);
        assert_eq!(c5.max_degree(), 2);
        assert_eq!(schreier_graph(&tr(5), &z(5, &[])).unwrap().edge_count(), 0);
        let tri = schreier_graph(&tr(6), &z(6, &[2, 4])).unwrap();
        assert_eq!(tri.edges(), vec![(0, 2), (0, 4), (1, 3), (1, 5), (2, 4), (3, 5)]);
        // constant configurations are fixed by every shift
        let caps = Caps::default();
        let all = FiniteAction::on_configurations(
            &Group::cyclic(3),
            crate::shift::all_configurations(&Group::cyclic(3), 2, &caps).unwrap(),
        )
        .unwrap();
        assert!(schreier_graph(&all, &z(3, &[1, 2])).is_err());
    }

    #[test]
    fn greedy_examples() {
        let c5 = FiniteGraph::cycle(5);
        assert_eq!(greedy_mis(&c5, &[]).unwrap(), vec![0, 2]);
        assert_eq!(greedy_mis(&c5, &[1, 3]).unwrap(), vec![1, 3]);
        assert!(greedy_mis(&c5, &[0, 1]).is_err());
        let empty = FiniteGraph::from_edges(4, &[]).unwrap();
        assert_eq!(greedy_mis(&empty, &[]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(partition_independent(&c5).len(), 3);
        assert_eq!(partition_independent(&empty).len(), 1);
        assert_eq!(partition_independent(&FiniteGraph::complete(4)), vec![vec![0], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn coloring_extension() {
        let c5 = FiniteGraph::cycle(5);
        let f = extend_proper_coloring(&c5, &PointFunction::empty(5, 3), 3).unwrap();
        assert!(f.is_total() && c5.is_proper(&f));
        let g = PointFunction::total(3, vec![0, 1, 0, 1, 2]).unwrap();
        assert_eq!(extend_proper_coloring(&c5, &g, 3).unwrap(), g);
        assert!(extend_proper_coloring(&c5, &PointFunction::empty(5, 2), 2).is_err());
        assert_eq!(count_proper_colorings(&c5, 3), 30);
        assert_eq!(count_proper_colorings(&FiniteGraph::cycle(6), 3), 66);
        assert_eq!(count_proper_colorings(&c5, 2), 0);
    }

    #[test]
    fn syndetic_examples() {
        let a6 = tr(6);
        assert!(is_syndetic(&a6, &[0, 3], &z(6, &[0, 1, 2])));
        assert!(is_syndetic(&a6, &[0, 1, 2, 3, 4, 5], &z(6, &[0])));
        assert!(!is_syndetic(&a6, &[], &z(6, &[0, 1, 2])));
        let a8 = tr(8);
        assert_eq!(core(&a8, &[0, 1, 2, 4, 5, 6], &z(8, &[0, 1])), vec![0, 1, 4, 5]);
        // {0,4} + {0,1,4,5} = {0,1,4,5}, so the core is not {0,4}-syndetic
        assert!(!is_sd_syndetic(&a8, &[0, 1, 2, 4, 5, 6], &z(8, &[0, 4]), &z(8, &[0, 1])));
        assert!(is_sd_syndetic(&a8, &[0, 1, 2, 4, 5, 6], &z(8, &[0, 2, 4, 6]), &z(8, &[0, 1])));
        assert_eq!(
            is_sd_syndetic(&a6, &[0, 3], &z(6, &[0, 1, 2]), &z(6, &[0])),
            is_syndetic(&a6, &[0, 3], &z(6, &[0, 1, 2]))
        );
    }

    #[test]
    fn separation_examples() {
        let caps = Caps::default();
        let a6 = tr(6);
        assert!(is_separated(&a6, &[0, 3], &z(6, &[1, 5])).unwrap());
        assert!(!is_separated(&a6, &[0, 1], &z(6, &[1, 5])).unwrap());
        assert!(is_separated(&a6, &[4], &z(6, &[0, 1, 2, 3, 4, 5])).unwrap());
        let d = z(6, &[0, 1]);
        let a: Points = a6.apply_set(&d, &[0, 3]);
        assert_eq!(sd_separated(&a6, &a, &z(6, &[1, 5]), &d, Some(&[0, 3]), &caps).unwrap(), Some(vec![0, 3]));
        // {0,1,2} cannot be covered by D·A′ with A′ {±1,±2}-separated and D={0,1}
        let s = z(6, &[1, 2, 4, 5]);
        assert_eq!(sd_separated(&a6, &[0, 1, 2, 3], &s, &d, None, &caps).unwrap(), None);
    }

    #[test]
    fn plain_split_on_z16() {
        let g = Group::cyclic(16);
        let a = FiniteAction::translation(&g).unwrap();
        let t = z(16, &[0]);
        let r = z(16, &[0, 1]);
        let s = r.product(&r.inverse()).unwrap();
        let t_next = s.product(&t).unwrap();
        let p = SplitParams { t, r, s, t_next, d: None, q: None };
        let all: Points = (0..16).collect();
        let out = split_syndetic_plain(&a, &all, &p).unwrap();
        assert_eq!(out.c.len() + out.u.len(), 16);
        assert!(out.checks.iter().all(|(_, ok)| *ok));
        assert!(split_syndetic_plain(&a, &[], &p).is_err());
    }

    #[test]
    fn d_split_partition_contract() {
        let caps = Caps::default();
        let g = Group::cyclic(24);
        let a = FiniteAction::translation(&g).unwrap();
        let d = z(24, &[0]);
        let t = z(24, &[0]);
        let q = z(24, &[0, 1]);
        let r = t.product(&q).unwrap();
        let s = r.product(&r.inverse()).unwrap();
        let t_next = s.product(&t).unwrap();
        let p = SplitParams { t, r, s, t_next, d: Some(d), q: Some(q) };
        let all: Points = (0..24).collect();
        let out = split_syndetic_d(&a, &all, &p, &caps).unwrap();
        let mut union = out.c.clone();
        union.extend(&out.u);
        union.sort_unstable();
        assert_eq!(union, all);
        assert_eq!(out.u, out.u_prime);
    }
}
