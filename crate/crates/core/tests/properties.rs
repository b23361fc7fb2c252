use proptest::prelude::*;

use pspchain::psp::{maximizers, necessary_conditions};
use pspchain::*;

fn config(max_n: usize) -> impl Strategy<Value = SpinConfiguration> {
    (0..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::ANY, 2 * n + 1).prop_map(|v| {
            SpinConfiguration::new(v.into_iter().map(|b| if b { 1 } else { -1 }).collect()).unwrap()
        })
    })
}

/// Symmetric couplings `I_k = I_{1-k}` drawn for `k = 1..=8`.
fn symmetric_family() -> impl Strategy<Value = CouplingFamily> {
    prop::collection::vec(0.0f64..6.0, 8).prop_map(|v| {
        let entries = v
            .into_iter()
            .enumerate()
            .map(|(i, x)| (i as i64 + 1, x))
            .collect();
        CouplingFamily::Table(CouplingTable::new(entries, Extension::Reflect).unwrap())
    })
}

proptest! {
    #[test]
    fn psp_is_a_maximizing_rising_interface(c in config(9)) {
        let g = psp(&c);
        prop_assert!(maximizers(&c).contains(&g));
        let bc = BoundaryCondition::PM;
        prop_assert_eq!(c.extended(g.left_site(), bc), -1);
        prop_assert_eq!(c.extended(g.right_site(), bc), 1);
        prop_assert!(necessary_conditions(&c, g).unwrap().satisfied);
    }

    #[test]
    fn psp_antisymmetric_under_swap(c in config(12)) {
        prop_assert_eq!(psp(&c.swapped()), psp(&c).negated());
        prop_assert_ne!(majority_class(&c), majority_class(&c.swapped()));
    }

    #[test]
    fn swap_preserves_mixed_energy(c in config(7), fam in symmetric_family()) {
        // real couplings are summed in a different order after the swap
        let h = energy_pm(&c, &fam).unwrap();
        prop_assert!((h - energy_pm(&c.swapped(), &fam).unwrap()).abs() <= 1e-12 * h.max(1.0));
        prop_assert!((h - energy(&c, &fam, BoundaryCondition::PM).unwrap()).abs() <= 1e-12 * h.max(1.0));
    }

    #[test]
    fn closed_form_matches_enumeration(fam in symmetric_family(), n in 0usize..=5, beta in 0.05f64..6.0) {
        let closed = closed_form_partition(&fam, beta, n).unwrap();
        let v = Volume::new(n);
        let plus = brute_force_partition(&fam, beta, v, BoundaryCondition::PLUS).unwrap();
        let mixed = brute_force_partition(&fam, beta, v, BoundaryCondition::PM).unwrap();
        prop_assert!(closed.plus.log_distance(plus) < 1e-10);
        prop_assert!(closed.mixed.log_distance(mixed) < 1e-10);
        prop_assert!(closed.plus.ln() >= closed.mixed.ln());
    }

    #[test]
    fn psp_law_symmetric_with_floor_variance(fam in symmetric_family(), n in 0usize..=5, beta in 0.05f64..6.0) {
        let d = psp_distribution(&fam, beta, Volume::new(n)).unwrap();
        prop_assert!(d.reflection_symmetric);
        prop_assert!(d.symmetry_defect() < 1e-12);
        prop_assert!((d.total_probability() - 1.0).abs() < 1e-12);
        let m = psp_moments(&d);
        prop_assert!(m.mean.abs() < 1e-12);
        prop_assert!(m.variance >= 0.25 - 1e-12);
        prop_assert!((m.variance - m.folded_variance.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn decomposition_bounds(fam in symmetric_family(), n in 0usize..=4, beta in 0.1f64..5.0) {
        let r = decomposition_check(&fam, beta, Volume::new(n)).unwrap();
        prop_assert!(r.bounds_hold());
        prop_assert!(r.max_joint_error() < 1e-12);
    }
}
