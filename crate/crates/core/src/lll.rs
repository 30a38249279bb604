//! Finite constraint satisfaction: exact LLL parameters, the symmetric and
//! vertex-degree criteria, a Moser–Tardos solver, an exhaustive oracle and
//! the reduction from per-variable lists to a uniform alphabet.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invariant, precondition, Caps, Error, Result};

/// A set of forbidden assignments on a duplicate-free, sorted domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    domain: Vec<usize>,
    forbidden: BTreeSet<Vec<u32>>,
}

impl Constraint {
    /// Tuples are given in the order of `domain`; both are reordered so the
    /// domain is increasing.
    pub fn new(domain: Vec<usize>, forbidden: impl IntoIterator<Item = Vec<u32>>) -> Result<Self> {
        precondition(!domain.is_empty(), "constraint domain is empty")?;
        let mut order: Vec<usize> = (0..domain.len()).collect();
        order.sort_by_key(|&i| domain[i]);
        let sorted: Vec<usize> = order.iter().map(|&i| domain[i]).collect();
        precondition(sorted.windows(2).all(|w| w[0] < w[1]), "constraint domain repeats a variable")?;
        let mut set = BTreeSet::new();
        for t in forbidden {
            precondition(t.len() == domain.len(), "forbidden assignment has the wrong arity")?;
            set.insert(order.iter().map(|&i| t[i]).collect());
        }
        Ok(Constraint { domain: sorted, forbidden: set })
    }

    /// Forbid equal colors on two distinct variables.
    pub fn not_equal(u: usize, v: usize, colors: u32) -> Result<Self> {
        Constraint::new(vec![u, v], (0..colors).map(|c| vec![c, c]))
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn forbidden(&self) -> &BTreeSet<Vec<u32>> {
        &self.forbidden
    }

    pub fn is_violated(&self, assignment: &[u32]) -> bool {
        let t: Vec<u32> = self.domain.iter().map(|&x| assignment[x]).collect();
        self.forbidden.contains(&t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csp {
    lists: Vec<Vec<u32>>,
    colors: u32,
    constraints: Vec<Constraint>,
}

impl Csp {
    /// Forbidden tuples that leave some variable's list can never occur and
    /// are dropped.
    pub fn with_lists(lists: Vec<Vec<u32>>, constraints: Vec<Constraint>) -> Result<Self> {
        let mut lists = lists;
        for l in lists.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        precondition(lists.iter().all(|l| !l.is_empty()), "every list must be nonempty")?;
        let colors = lists.iter().flatten().map(|&c| c + 1).max().unwrap_or(0);
        let mut cs = Vec::with_capacity(constraints.len());
        for c in constraints {
            precondition(c.domain.iter().all(|&x| x < lists.len()), "constraint mentions an unknown variable")?;
            let forbidden = c
                .forbidden
                .into_iter()
                .filter(|t| t.iter().zip(&c.domain).all(|(v, &x)| lists[x].binary_search(v).is_ok()))
                .collect();
            cs.push(Constraint { domain: c.domain, forbidden });
        }
        Ok(Csp { lists, colors, constraints: cs })
    }

    pub fn uniform(vars: usize, colors: u32, constraints: Vec<Constraint>) -> Result<Self> {
        precondition(colors > 0, "need at least one color")?;
        let mut csp = Csp::with_lists(vec![(0..colors).collect(); vars], constraints)?;
        csp.colors = colors;
        Ok(csp)
    }

    /// Proper coloring of a graph given by edges.
    pub fn coloring(vars: usize, colors: u32, edges: &[(usize, usize)]) -> Result<Self> {
        let cs = edges.iter().map(|&(u, v)| Constraint::not_equal(u, v, colors)).collect::<Result<_>>()?;
        Csp::uniform(vars, colors, cs)
    }

    pub fn vars(&self) -> usize {
        self.lists.len()
    }

    /// Size of the ambient palette C (one more than the largest color).
    pub fn colors(&self) -> u32 {
        self.colors
    }

    pub fn lists(&self) -> &[Vec<u32>] {
        &self.lists
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_uniform(&self) -> bool {
        self.lists.iter().all(|l| l.len() as u32 == self.colors)
    }

    pub fn respects_lists(&self, assignment: &[u32]) -> bool {
        assignment.len() == self.vars() && assignment.iter().zip(&self.lists).all(|(v, l)| l.binary_search(v).is_ok())
    }

    /// Indices of violated constraints.
    pub fn violations(&self, assignment: &[u32]) -> Vec<usize> {
        (0..self.constraints.len()).filter(|&i| self.constraints[i].is_violated(assignment)).collect()
    }

    pub fn is_solution(&self, assignment: &[u32]) -> bool {
        self.respects_lists(assignment) && self.violations(assignment).is_empty()
    }

    fn var_index(&self) -> Vec<Vec<usize>> {
        let mut by_var = vec![Vec::new(); self.vars()];
        for (i, c) in self.constraints.iter().enumerate() {
            for &x in &c.domain {
                by_var[x].push(i);
            }
        }
        by_var
    }

    /// Search space size ∏|C_x|, saturating.
    pub fn search_space(&self) -> u128 {
        self.lists.iter().fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128))
    }

    pub fn to_file(&self) -> CspFile {
        CspFile {
            variables: (0..self.vars()).map(|i| format!("x{i}")).collect(),
            colors: self.is_uniform().then_some(self.colors),
            lists: (!self.is_uniform()).then(|| self.lists.clone()),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintFile {
                    domain: c.domain.iter().map(|i| format!("x{i}")).collect(),
                    forbidden: c.forbidden.iter().cloned().collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &CspFile) -> Result<Self> {
        let index: HashMap<&str, usize> = file.variables.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        precondition(index.len() == file.variables.len(), "variable names repeat")?;
        let mut cs = Vec::new();
        for c in &file.constraints {
            let domain = c
                .domain
                .iter()
                .map(|v| index.get(v.as_str()).copied().ok_or_else(|| Error::Parse(format!("unknown variable {v}"))))
                .collect::<Result<Vec<_>>>()?;
            cs.push(Constraint::new(domain, c.forbidden.clone())?);
        }
        match (&file.colors, &file.lists) {
            (Some(k), None) => Csp::uniform(file.variables.len(), *k, cs),
            (None, Some(l)) => {
                precondition(l.len() == file.variables.len(), "one list per variable")?;
                Csp::with_lists(l.clone(), cs)
            }
            _ => Err(Error::Parse("give exactly one of colors and lists".into())),
        }
    }
}

/// JSON form of a CSP.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CspFile {
    pub variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lists: Option<Vec<Vec<u32>>>,
    pub constraints: Vec<ConstraintFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConstraintFile {
    pub domain: Vec<String>,
    pub forbidden: Vec<Vec<u32>>,
}

/// |B| / ∏_{x ∈ dom B} |C_x|
pub fn constraint_probability(c: &Constraint, csp: &Csp) -> BigRational {
    let denom = c.domain.iter().fold(BigInt::one(), |acc, &x| acc * BigInt::from(csp.lists[x].len()));
    BigRational::new(BigInt::from(c.forbidden.len()), denom)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LllParams {
    pub p: BigRational,
    pub d: usize,
    pub vdeg: usize,
    pub ord: usize,
}

impl LllParams {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "p": self.p.to_string(), "d": self.d, "vdeg": self.vdeg, "ord": self.ord })
    }
}

pub fn compute_params(csp: &Csp) -> LllParams {
    let by_var = csp.var_index();
    let mut p = BigRational::zero();
    let mut d = 0;
    let mut ord = 0;
    let mut seen = vec![usize::MAX; csp.constraints.len()];
    for (i, c) in csp.constraints.iter().enumerate() {
        let q = constraint_probability(c, csp);
        if q > p {
            p = q;
        }
        ord = ord.max(c.domain.len());
        let mut deg = 0;
        for &x in &c.domain {
            for &j in &by_var[x] {
                if j != i && seen[j] != i {
                    seen[j] = i;
                    deg += 1;
                }
            }
        }
        d = d.max(deg);
    }
    let vdeg = by_var.iter().map(|v| v.len()).max().unwrap_or(0);
    LllParams { p, d, vdeg, ord }
}

/// Definitional recomputation by double loops (test oracle).
pub fn compute_params_naive(csp: &Csp) -> LllParams {
    let cs = &csp.constraints;
    let p = cs.iter().map(|c| constraint_probability(c, csp)).max().unwrap_or_else(BigRational::zero);
    let d = (0..cs.len())
        .map(|i| (0..cs.len()).filter(|&j| j != i && cs[i].domain.iter().any(|x| cs[j].domain.contains(x))).count())
        .max()
        .unwrap_or(0);
    let vdeg = (0..csp.vars()).map(|x| cs.iter().filter(|c| c.domain.contains(&x)).count()).max().unwrap_or(0);
    let ord = cs.iter().map(|c| c.domain.len()).max().unwrap_or(0);
    LllParams { p, d, vdeg, ord }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The quantity falls inside the rounding gap of an irrational constant.
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LllCheck {
    pub verdict: Verdict,
    /// 1 minus the checked quantity, as a float for display.
    pub margin: f64,
}

/// Rational enclosure of e.
pub fn e_bounds() -> (BigRational, BigRational) {
    let den = BigInt::from(10_000_000_000u64);
    (
        BigRational::new(BigInt::from(27_182_818_284u64), den.clone()),
        BigRational::new(BigInt::from(27_182_818_285u64), den),
    )
}

/// e · p · (d+1) ≤ 1
pub fn symmetric_lll(p: &BigRational, d: usize) -> LllCheck {
    let (lo, hi) = e_bounds();
    let x = p * BigRational::from_integer(BigInt::from(d + 1));
    let one = BigRational::one();
    let verdict = if &hi * &x <= one {
        Verdict::Pass
    } else if &lo * &x > one {
        Verdict::Fail
    } else {
        Verdict::Undecided
    };
    let margin = 1.0 - std::f64::consts::E * x.to_f64().unwrap_or(f64::INFINITY);
    LllCheck { verdict, margin }
}

pub fn check_symmetric_lll(csp: &Csp) -> LllCheck {
    let params = compute_params(csp);
    symmetric_lll(&params.p, params.d)
}

/// p · vdeg^ord < 1
pub fn continuous_lll(p: &BigRational, vdeg: usize, ord: usize) -> LllCheck {
    let x = p * BigRational::from_integer(BigInt::from(vdeg).pow(ord as u32));
    let verdict = if x < BigRational::one() { Verdict::Pass } else { Verdict::Fail };
    LllCheck { verdict, margin: 1.0 - x.to_f64().unwrap_or(f64::INFINITY) }
}

pub fn check_continuous_lll(csp: &Csp) -> LllCheck {
    let params = compute_params(csp);
    continuous_lll(&params.p, params.vdeg, params.ord)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Solved,
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolverReport {
    pub status: SolveStatus,
    pub assignment: Option<Vec<u32>>,
    pub resamples: u64,
    pub seed: u64,
}

/// The draw for `var` in round `round` (round 0 is the initial assignment,
/// round j the j-th resampling). Each (seed, round, var) owns a disjoint
/// window of the ChaCha8 keystream, so traces replay exactly.
pub fn draw(seed: u64, round: u64, var: usize, list: &[u32]) -> u32 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(var as u64);
    rng.set_word_pos((round as u128) << 8);
    list[rng.random_range(0..list.len())]
}

/// Resample the lowest-indexed violated constraint until none is violated
/// or the budget runs out.
pub fn moser_tardos(csp: &Csp, seed: u64, max_resamples: u64) -> SolverReport {
    let mut assignment: Vec<u32> = (0..csp.vars()).map(|x| draw(seed, 0, x, &csp.lists[x])).collect();
    let by_var = csp.var_index();
    let mut violated: BTreeSet<usize> = csp.violations(&assignment).into_iter().collect();
    let mut resamples = 0u64;
    while let Some(&i) = violated.iter().next() {
        if resamples == max_resamples {
            return SolverReport { status: SolveStatus::Exhausted, assignment: None, resamples, seed };
        }
        resamples += 1;
        for &x in &csp.constraints[i].domain {
            assignment[x] = draw(seed, resamples, x, &csp.lists[x]);
        }
        for &x in &csp.constraints[i].domain {
            for &j in &by_var[x] {
                if csp.constraints[j].is_violated(&assignment) {
                    violated.insert(j);
                } else {
                    violated.remove(&j);
                }
            }
        }
    }
    // full rescan before anything is returned
    let solved = csp.is_solution(&assignment);
    SolverReport {
        status: if solved { SolveStatus::Solved } else { SolveStatus::Exhausted },
        assignment: solved.then_some(assignment),
        resamples,
        seed,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForce {
    Sat(Vec<u32>),
    Unsat,
}

fn check_space(csp: &Csp, caps: &Caps) -> Result<()> {
    Caps::check("brute-force search space", csp.search_space(), caps.search_space)
}

/// Constraints whose largest variable is `x`: checked once `x` is set.
fn closing_index(csp: &Csp) -> Vec<Vec<usize>> {
    let mut closing = vec![Vec::new(); csp.vars()];
    for (i, c) in csp.constraints.iter().enumerate() {
        closing[*c.domain.last().unwrap()].push(i);
    }
    closing
}

fn dfs(csp: &Csp, closing: &[Vec<usize>], x: usize, cur: &mut Vec<u32>, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
    if x == csp.vars() {
        return visit(cur);
    }
    for &v in &csp.lists[x] {
        cur[x] = v;
        if closing[x].iter().all(|&i| !csp.constraints[i].is_violated(cur)) && dfs(csp, closing, x + 1, cur, visit) {
            return true;
        }
    }
    false
}

/// First solution in lexicographic order, or UNSAT.
pub fn brute_force(csp: &Csp, caps: &Caps) -> Result<BruteForce> {
    check_space(csp, caps)?;
    let closing = closing_index(csp);
    let mut found = None;
    let mut cur = vec![0; csp.vars()];
    dfs(csp, &closing, 0, &mut cur, &mut |a| {
        found = Some(a.to_vec());
        true
    });
    Ok(match found {
        Some(a) => BruteForce::Sat(a),
        None => BruteForce::Unsat,
    })
}

/// Every solution in lexicographic order.
pub fn all_solutions(csp: &Csp, caps: &Caps) -> Result<Vec<Vec<u32>>> {
    check_space(csp, caps)?;
    let closing = closing_index(csp);
    let mut out = Vec::new();
    let mut cur = vec![0; csp.vars()];
    dfs(csp, &closing, 0, &mut cur, &mut |a| {
        out.push(a.to_vec());
        false
    });
    Ok(out)
}

/// Uniform CSP over n = lcm(1..|C|) colors with per-variable decoders
/// h_{C_x}: n → C_x, each color owning a contiguous block of n/|C_x|.
#[derive(Clone, Debug)]
pub struct ListReduction {
    pub n: u32,
    pub csp: Csp,
    pub decoders: Vec<Vec<u32>>,
}

impl ListReduction {
    pub fn decode(&self, assignment: &[u32]) -> Vec<u32> {
        assignment.iter().zip(&self.decoders).map(|(&v, h)| h[v as usize]).collect()
    }
}

pub fn lcm_upto(m: u32) -> u64 {
    (1..=m as u64).fold(1, |acc, i| acc.lcm(&i))
}

pub fn list_reduction(csp: &Csp, caps: &Caps) -> Result<ListReduction> {
    let n = lcm_upto(csp.colors().max(1));
    precondition(n <= u32::MAX as u64, "lcm overflow")?;
    let n = n as u32;
    let decoders: Vec<Vec<u32>> = csp
        .lists
        .iter()
        .map(|l| {
            let block = n / l.len() as u32;
            (0..n).map(|j| l[(j / block) as usize]).collect()
        })
        .collect();
    let mut cs = Vec::with_capacity(csp.constraints.len());
    for c in &csp.constraints {
        // B′ = every uniform tuple whose decoding lies in B
        let mut needed = c.forbidden.len() as u128;
        for &x in &c.domain {
            needed = needed.saturating_mul((n / csp.lists[x].len() as u32) as u128);
        }
        Caps::check("reduced constraint size", needed, caps.table_entries)?;
        let mut forbidden = Vec::new();
        for t in &c.forbidden {
            let choices: Vec<Vec<u32>> = t
                .iter()
                .zip(&c.domain)
                .map(|(&v, &x)| (0..n).filter(|&j| decoders[x][j as usize] == v).collect())
                .collect();
            let mut idx = vec![0usize; choices.len()];
            loop {
                forbidden.push(idx.iter().zip(&choices).map(|(&i, ch)| ch[i]).collect::<Vec<u32>>());
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < choices[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        cs.push(Constraint::new(c.domain.clone(), forbidden)?);
    }
    let reduced = Csp::uniform(csp.vars(), n, cs)?;
    for (a, b) in csp.constraints.iter().zip(&reduced.constraints) {
        invariant(
            constraint_probability(a, csp) == constraint_probability(b, &reduced),
            "list reduction changed a constraint probability",
        )?;
    }
    Ok(ListReduction { n, csp: reduced, decoders })
}

/// Shape of a random CSP.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RandomCspSpec {
    pub vars: usize,
    pub colors: u32,
    pub constraints: usize,
    pub arity: usize,
    /// Forbidden tuples per constraint (capped by the tuple count).
    pub forbidden: usize,
    /// Draw a list of size in [min, max] for each variable.
    #[serde(default)]
    pub list_sizes: Option<(u32, u32)>,
}

pub fn random_csp(spec: &RandomCspSpec, seed: u64) -> Result<Csp> {
    precondition(spec.arity >= 1 && spec.arity <= spec.vars, "arity must lie in 1..=vars")?;
    precondition(spec.colors >= 1, "need at least one color")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lists: Vec<Vec<u32>> = match spec.list_sizes {
        None => vec![(0..spec.colors).collect(); spec.vars],
        Some((lo, hi)) => {
            precondition(1 <= lo && lo <= hi && hi <= spec.colors, "list sizes must lie in 1..=colors")?;
            (0..spec.vars)
                .map(|_| {
                    let size = rng.random_range(lo..=hi) as usize;
                    let mut all: Vec<u32> = (0..spec.colors).collect();
                    for i in 0..size {
                        let j = rng.random_range(i..all.len());
                        all.swap(i, j);
                    }
                    all.truncate(size);
                    all
                })
                .collect()
        }
    };
    let mut cs = Vec::with_capacity(spec.constraints);
    for _ in 0..spec.constraints {
        let mut vars: Vec<usize> = (0..spec.vars).collect();
        for i in 0..spec.arity {
            let j = rng.random_range(i..vars.len());
            vars.swap(i, j);
        }
        vars.truncate(spec.arity);
        vars.sort_unstable();
        let total: usize = vars.iter().map(|&x| lists[x].len()).product();
        let want = spec.forbidden.min(total);
        let mut forbidden = BTreeSet::new();
        while forbidden.len() < want {
            forbidden.insert(vars.iter().map(|&x| lists[x][rng.random_range(0..lists[x].len())]).collect::<Vec<u32>>());
        }
        cs.push(Constraint::new(vars, forbidden)?);
    }
    if spec.list_sizes.is_none() {
        Csp::uniform(spec.vars, spec.colors, cs)
    } else {
        Csp::with_lists(lists, cs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn cycle_csp(n: usize, colors: u32) -> Csp {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Csp::coloring(n, colors, &edges).unwrap()
    }

    #[test]
    fn probabilities() {
        let csp = Csp::uniform(2, 2, vec![Constraint::new(vec![0, 1], [vec![0, 1]]).unwrap()]).unwrap();
        assert_eq!(constraint_probability(&csp.constraints()[0], &csp), q(1, 4));
        let all = Constraint::new(vec![0, 1], [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        let csp = Csp::uniform(2, 2, vec![all]).unwrap();
        assert_eq!(constraint_probability(&csp.constraints()[0], &csp), q(1, 1));
        let csp =
            Csp::with_lists(vec![vec![0, 1], vec![0, 1, 2]], vec![Constraint::new(vec![0, 1], [vec![1, 2]]).unwrap()])
                .unwrap();
        assert_eq!(constraint_probability(&csp.constraints()[0], &csp), q(1, 6));
    }

    #[test]
    fn parameter_examples() {
        let one = Csp::uniform(3, 2, vec![Constraint::new(vec![0, 2], [vec![0, 0]]).unwrap()]).unwrap();
        let p = compute_params(&one);
        assert_eq!((p.d, p.vdeg, p.ord), (0, 1, 2));
        let two = Csp::uniform(
            3,
            2,
            vec![
                Constraint::new(vec![0, 1], [vec![0, 0]]).unwrap(),
                Constraint::new(vec![1, 2], [vec![0, 0]]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(compute_params(&two).d, 1);
        let c5 = compute_params(&cycle_csp(5, 3));
        assert_eq!(c5, LllParams { p: q(1, 3), d: 2, vdeg: 2, ord: 2 });
        assert_eq!(c5, compute_params_naive(&cycle_csp(5, 3)));
    }

    #[test]
    fn criteria_examples() {
        assert_eq!(symmetric_lll(&q(1, 4), 0).verdict, Verdict::Pass);
        assert_eq!(symmetric_lll(&q(1, 1), 5).verdict, Verdict::Fail);
        assert_eq!(symmetric_lll(&q(1, 8), 2).verdict, Verdict::Fail);
        assert_eq!(continuous_lll(&q(1, 4), 1, 2).verdict, Verdict::Pass);
        assert_eq!(continuous_lll(&q(1, 4), 2, 2).verdict, Verdict::Fail);
        let (lo, hi) = e_bounds();
        assert!(lo < hi);
        // 1/e itself lands in the gap
        assert_eq!(symmetric_lll(&lo.recip(), 0).verdict, Verdict::Undecided);
    }

    #[test]
    fn solver_examples() {
        let caps = Caps::default();
        let empty = Csp::uniform(4, 3, vec![]).unwrap();
        let r = moser_tardos(&empty, 1, 10);
        assert_eq!((r.status, r.resamples), (SolveStatus::Solved, 0));
        let c5 = cycle_csp(5, 3);
        let r = moser_tardos(&c5, 42, 100_000);
        assert!(c5.is_solution(r.assignment.as_ref().unwrap()));
        assert_eq!(r, moser_tardos(&c5, 42, 100_000));
        let c5_two = cycle_csp(5, 2);
        assert_eq!(brute_force(&c5_two, &caps).unwrap(), BruteForce::Unsat);
        assert_eq!(moser_tardos(&c5_two, 3, 500).status, SolveStatus::Exhausted);
        let unary = Csp::uniform(1, 3, vec![Constraint::new(vec![0], [vec![0], vec![1], vec![2]]).unwrap()]).unwrap();
        assert_eq!(brute_force(&unary, &caps).unwrap(), BruteForce::Unsat);
        assert_eq!(all_solutions(&c5, &caps).unwrap().len(), 30);
        assert!(brute_force(&cycle_csp(30, 3), &Caps::default()).is_err());
    }

    #[test]
    fn reduction_examples() {
        let caps = Caps::default();
        assert_eq!(lcm_upto(3), 6);
        assert_eq!(lcm_upto(4), 12);
        let csp =
            Csp::with_lists(vec![vec![0, 2], vec![0, 1, 2]], vec![Constraint::new(vec![0, 1], [vec![0, 0]]).unwrap()])
                .unwrap();
        let red = list_reduction(&csp, &caps).unwrap();
        assert_eq!(red.n, 6);
        assert_eq!(red.decoders[0], vec![0, 0, 0, 2, 2, 2]);
        assert_eq!(red.decoders[1], vec![0, 0, 1, 1, 2, 2]);
        let uniform = Csp::uniform(2, 2, vec![Constraint::new(vec![0, 1], [vec![1, 1]]).unwrap()]).unwrap();
        let red = list_reduction(&uniform, &caps).unwrap();
        assert_eq!(red.csp, uniform);
    }

    #[test]
    fn csp_json_round_trip() {
        let csp = Csp::with_lists(vec![vec![0, 2], vec![1]], vec![Constraint::new(vec![1, 0], [vec![1, 2]]).unwrap()])
            .unwrap();
        let text = serde_json::to_string(&csp.to_file()).unwrap();
        let back = Csp::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, csp);
        assert_eq!(back.constraints()[0].forbidden().iter().next().unwrap(), &vec![2, 1]);
    }

    proptest! {
        #[test]
        fn params_agree_with_naive(seed in any::<u64>(), vars in 2usize..8, cons in 0usize..10, arity in 1usize..3) {
            let spec = RandomCspSpec { vars, colors: 3, constraints: cons, arity, forbidden: 2, list_sizes: Some((1, 3)) };
            let csp = random_csp(&spec, seed).unwrap();
            prop_assert_eq!(compute_params(&csp), compute_params_naive(&csp));
        }

        #[test]
        fn solver_never_lies(seed in any::<u64>(), vars in 2usize..7, cons in 0usize..8) {
            let spec = RandomCspSpec { vars, colors: 2, constraints: cons, arity: 2, forbidden: 2, list_sizes: None };
            let csp = random_csp(&spec, seed).unwrap();
            let r = moser_tardos(&csp, seed, 2000);
            let exact = brute_force(&csp, &Caps::default()).unwrap();
            if let Some(a) = &r.assignment {
                prop_assert!(csp.is_solution(a));
                prop_assert!(exact != BruteForce::Unsat);
            }
        }
    }
}
