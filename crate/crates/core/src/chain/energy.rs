use super::{BoundaryCondition, CouplingFamily, SpinConfiguration};
use crate::error::Result;

/// Sum of `I_x` over disagreeing bonds `(x-1, x)`, including the two bonds
/// that tie the volume to the boundary spins.
pub fn energy(
    config: &SpinConfiguration,
    family: &CouplingFamily,
    bc: BoundaryCondition,
) -> Result<f64> {
    let bonds = family.bond_couplings(config.half_width())?;
    Ok(energy_with_bonds(config.spins(), &bonds, bc))
}

/// Energy given precomputed bond couplings (`bonds[j] = I_{j-n}`, length `2n+2`).
pub(crate) fn energy_with_bonds(spins: &[i8], bonds: &[f64], bc: BoundaryCondition) -> f64 {
    debug_assert_eq!(bonds.len(), spins.len() + 1);
    let mut total = 0.0;
    let mut prev = bc.left;
    for (&s, &coupling) in spins.iter().zip(bonds) {
        if s != prev {
            total += coupling;
        }
        prev = s;
    }
    if prev != bc.right {
        total += bonds[spins.len()];
    }
    total
}

/// The mixed-boundary energy `H⁺(σ) + I_{-n} σ(-n)`.
///
/// Because `1{s ≠ -1} - 1{s ≠ 1} = s`, this coincides with
/// `energy(config, family, BoundaryCondition::PM)` term by term.
pub fn energy_pm(config: &SpinConfiguration, family: &CouplingFamily) -> Result<f64> {
    let n = config.half_width() as i64;
    let plus = energy(config, family, BoundaryCondition::PLUS)?;
    Ok(plus + family.value(-n)? * f64::from(config.spin(-n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_configs(n: usize) -> impl Iterator<Item = SpinConfiguration> {
        (0..1u64 << (2 * n + 1)).map(move |i| SpinConfiguration::from_packed(n, i).unwrap())
    }

    #[test]
    fn small_examples() {
        let c0 = SpinConfiguration::uniform(0, 1).unwrap();
        let one = CouplingFamily::constant(1.0);
        assert_eq!(energy(&c0, &one, BoundaryCondition::PLUS).unwrap(), 0.0);

        let minus0 = SpinConfiguration::uniform(0, -1).unwrap();
        let sul = CouplingFamily::Sullivan;
        assert_eq!(energy(&minus0, &sul, BoundaryCondition::PLUS).unwrap(), 2.0);

        let c1 = SpinConfiguration::new(vec![1, -1, 1]).unwrap();
        assert_eq!(energy(&c1, &one, BoundaryCondition::PLUS).unwrap(), 2.0);
    }

    #[test]
    fn mixed_energy_at_half_width_zero() {
        let sul = CouplingFamily::Sullivan;
        for s in [1, -1] {
            let c = SpinConfiguration::uniform(0, s).unwrap();
            assert_eq!(energy_pm(&c, &sul).unwrap(), 1.0);
        }
    }

    #[test]
    fn mixed_energy_equals_pm_boundary_energy() {
        for fam in [
            CouplingFamily::Sullivan,
            CouplingFamily::AbsoluteValue,
            CouplingFamily::constant(0.7),
        ] {
            for n in 0..=4 {
                for c in all_configs(n) {
                    let pm = energy(&c, &fam, BoundaryCondition::PM).unwrap();
                    assert_eq!(energy_pm(&c, &fam).unwrap(), pm, "{c}");
                }
            }
        }
    }

    #[test]
    fn all_agreeing_configuration_has_zero_energy() {
        let fam = CouplingFamily::Sullivan;
        for n in 0..5 {
            for (s, bc) in [(1, BoundaryCondition::PLUS), (-1, BoundaryCondition::MINUS)] {
                let c = SpinConfiguration::uniform(n, s).unwrap();
                assert_eq!(energy(&c, &fam, bc).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn symmetry_invariances_exhaustive() {
        let fam = CouplingFamily::Sullivan;
        let bcs = [
            BoundaryCondition::PLUS,
            BoundaryCondition::MINUS,
            BoundaryCondition::PM,
            BoundaryCondition::MP,
        ];
        for n in 0..=4 {
            for c in all_configs(n) {
                for bc in bcs {
                    let h = energy(&c, &fam, bc).unwrap();
                    assert_eq!(h, energy(&c.flipped(), &fam, bc.flipped()).unwrap());
                    assert_eq!(h, energy(&c.reflected(), &fam, bc.reflected()).unwrap());
                }
                assert_eq!(
                    energy_pm(&c, &fam).unwrap(),
                    energy_pm(&c.swapped(), &fam).unwrap()
                );
            }
        }
    }

    #[test]
    fn reflection_invariance_needs_symmetric_couplings() {
        // |n| breaks I_k = I_{1-k}, so reflecting moves weight between bonds
        let fam = CouplingFamily::AbsoluteValue;
        let c = SpinConfiguration::new(vec![1, 1, -1]).unwrap();
        let bc = BoundaryCondition::PLUS;
        assert_ne!(
            energy(&c, &fam, bc).unwrap(),
            energy(&c.reflected(), &fam, bc.reflected()).unwrap()
        );
    }

    #[test]
    fn out_of_range_coupling_propagates() {
        use crate::chain::{CouplingTable, Extension};
        let entries = [(0, 1.0), (1, 1.0)].into_iter().collect();
        let fam = CouplingFamily::Table(CouplingTable::new(entries, Extension::Strict).unwrap());
        let c = SpinConfiguration::uniform(1, 1).unwrap();
        assert!(energy(&c, &fam, BoundaryCondition::PLUS).is_err());
    }
}
