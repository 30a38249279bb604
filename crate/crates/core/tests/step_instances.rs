mod common;

use shiftlab::constructions::{all_pass, e_set, probability_audit, step_csp, step_sets};
use shiftlab::Caps;

#[test]
fn every_instance_builds_solves_and_rescans() {
    let caps = Caps::default();
    for inst in common::step_instances(&caps) {
        let sets = step_sets(inst.input.clone(), &caps).unwrap_or_else(|e| panic!("{}: {e}", inst.name));
        assert!(all_pass(&sets.audits), "{}", inst.name);
        let step = step_csp(&inst.action, &sets, &inst.part, 3, 1_000_000, &caps)
            .unwrap_or_else(|e| panic!("{}: {e}", inst.name));
        let failed: Vec<_> = step.audits.iter().filter(|a| !a.passed()).map(|a| a.name.clone()).collect();
        assert!(failed.is_empty(), "{}: {failed:?}", inst.name);
        assert!(step.params.ord <= 2, "{}", inst.name);
        assert!(step.meta.iter().all(|m| m.delta.len() <= 2), "{}", inst.name);
        common::distinguishes_everywhere(&inst.action, &sets.rule, &step.f, &sets.s, &sets.gamma)
            .unwrap_or_else(|x| panic!("{}: point {x} not distinguished", inst.name));
        for k in 0..step.meta.len() {
            let es = e_set(&inst.action, &sets, &inst.part, &step, k).unwrap();
            assert!(all_pass(&es.audits), "{} constraint {k}", inst.name);
        }
        match probability_audit(&inst.action, &sets, &inst.part, &step, 0, &caps) {
            Ok(pa) => assert!(all_pass(&pa.audits), "{}: {:?}", inst.name, pa.audits),
            Err(e) => eprintln!("{}: probability audit skipped: {e}", inst.name),
        }
    }
}
