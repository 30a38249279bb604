//! Fixed workloads shared by the benchmarks.

use shiftlab::lll::{random_csp, Csp, RandomCspSpec};
use shiftlab::shift::FiniteAction;
use shiftlab::{Group, GroupSubset};

/// Sparse uniform CSP well inside the local-lemma regime.
pub fn sparse_csp(vars: usize, seed: u64) -> Csp {
    let spec = RandomCspSpec { vars, colors: 4, constraints: vars / 2, arity: 3, forbidden: 1, list_sizes: None };
    random_csp(&spec, seed).expect("spec is valid")
}

/// m copies of Z_n with F = {±1}: a disjoint union of cycles.
pub fn cycles(n: u32, m: usize) -> (FiniteAction, GroupSubset) {
    let g = Group::cyclic(n);
    let act = FiniteAction::regular_copies(&g, m).expect("finite group");
    let f = GroupSubset::from_ints(&g, &[-1, 1]).expect("valid elements");
    (act, f)
}
