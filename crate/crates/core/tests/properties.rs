use proptest::prelude::*;

use shiftlab::constructions::{
    all_pass, free_image_coloring, schedule_sets, FreeImageOptions, ScheduleKind, ScheduleOptions,
};
use shiftlab::shift::{Configuration, FiniteAction, PointFunction};
use shiftlab::{Caps, Element, Group, GroupRef, GroupSubset};

fn groups() -> Vec<GroupRef> {
    vec![
        Group::cyclic(7),
        Group::cyclic(12),
        Group::dihedral(5),
        Group::dihedral(6),
        Group::product(&[Group::cyclic(2), Group::cyclic(6)]).unwrap(),
    ]
}

fn pick(g: &GroupRef, i: usize) -> Element {
    let els = g.elements().unwrap();
    els[i % els.len()].clone()
}

fn free_word(letters: &[i32]) -> Element {
    let g = Group::free(2);
    letters.iter().fold(g.identity(), |acc, &l| g.mul(&acc, &Element::Free(vec![l])).unwrap())
}

proptest! {
    #[test]
    fn finite_group_laws(gi in 0usize..5, a in 0usize..64, b in 0usize..64, c in 0usize..64) {
        let g = &groups()[gi];
        let (a, b, c) = (pick(g, a), pick(g, b), pick(g, c));
        let ab_c = g.mul(&g.mul(&a, &b).unwrap(), &c).unwrap();
        let a_bc = g.mul(&a, &g.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert_eq!(g.mul(&a, &g.inv(&a)).unwrap(), g.identity());
        prop_assert_eq!(g.decode(&g.encode(&a)).unwrap(), a);
    }

    #[test]
    fn free_words_reduce(xs in prop::collection::vec(prop::sample::select(vec![-2, -1, 1, 2]), 0..12)) {
        let g = Group::free(2);
        let w = free_word(&xs);
        if let Element::Free(letters) = &w {
            prop_assert!(letters.windows(2).all(|p| p[0] != -p[1]));
        }
        prop_assert_eq!(g.mul(&w, &g.inv(&w)).unwrap(), g.identity());
    }

    #[test]
    fn subset_algebra(gi in 0usize..5, xs in prop::collection::vec(0usize..64, 0..6), ys in prop::collection::vec(0usize..64, 0..6)) {
        let g = &groups()[gi];
        let a = GroupSubset::new(g, xs.iter().map(|&i| pick(g, i))).unwrap();
        let b = GroupSubset::new(g, ys.iter().map(|&i| pick(g, i))).unwrap();
        // (AB)⁻¹ = B⁻¹A⁻¹
        prop_assert_eq!(a.product(&b).unwrap().inverse(), b.inverse().product(&a.inverse()).unwrap());
        let s = a.symmetrize(true);
        prop_assert!(s.is_symmetric() && s.contains(&g.identity()));
        prop_assert!(a.is_subset(&a.union(&b).unwrap()));
        prop_assert!(a.difference(&b).unwrap().is_disjoint(&b));
        if !a.is_empty() {
            prop_assert!(a.power(2).len() >= a.len());
        }
    }

    #[test]
    fn shift_is_a_left_action(gi in 0usize..5, seed in prop::collection::vec(0u32..3, 12), a in 0usize..64, b in 0usize..64) {
        let g = &groups()[gi];
        let n = g.order().unwrap() as usize;
        let vals: Vec<u32> = (0..n).map(|i| seed[i % seed.len()]).collect();
        let x = Configuration::new(g, 3, vals).unwrap();
        let (a, b) = (pick(g, a), pick(g, b));
        // (ab)·x = a·(b·x)
        prop_assert_eq!(x.shift(&g.mul(&a, &b).unwrap()), x.shift(&b).shift(&a));
        prop_assert_eq!(x.shift(&g.identity()), x.clone());
        prop_assert!(x.stabilizer().is_subgroup());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn free_image_certificates_cover_everything(n in 5u32..12, seed in any::<u64>()) {
        let g = Group::cyclic(n);
        let act = FiniteAction::translation(&g).unwrap();
        let t = GroupSubset::identity(&g);
        let opts = ScheduleOptions { pad: Some((t.clone(), 2)), close_on_saturation: true };
        let gammas = g.enumerate_nonidentity(n as usize - 1).unwrap();
        let s = schedule_sets(ScheduleKind::Plain, &g, &t, &t, &gammas, &opts).unwrap();
        let fi = FreeImageOptions { seed, ..FreeImageOptions::default() };
        let r = free_image_coloring(&act, 2, &s, &fi, &Caps::default()).unwrap();
        prop_assert!(all_pass(&r.audits));
        let f = PointFunction::total(2, r.coloring).unwrap();
        prop_assert!(shiftlab::shift::map_stabilizer(&act, &f).unwrap().len() == 1);
    }
}
