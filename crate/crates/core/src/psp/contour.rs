use serde::Serialize;

use crate::chain::{BoundaryCondition, CouplingFamily, Volume};
use crate::error::{Error, Result};
use crate::kernel::{reduce_chunks, PackedChain};
use crate::logspace::LogSumExp;

/// A connected set of sites `B = [left, right]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContourQuery {
    pub left: i64,
    pub right: i64,
}

impl ContourQuery {
    pub fn new(left: i64, right: i64) -> Result<Self> {
        if left > right {
            return Err(Error::InvalidParameter(format!(
                "contour set [{left}, {right}] is empty"
            )));
        }
        Ok(Self { left, right })
    }

    /// Every connected subset of `Λ_n`.
    pub fn all(n: usize) -> impl Iterator<Item = ContourQuery> {
        let n = n as i64;
        (-n..=n).flat_map(move |l| (l..=n).map(move |r| ContourQuery { left: l, right: r }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourProbability {
    pub query: ContourQuery,
    /// Plus-boundary probability that `B` is a maximal run of `-1` spins.
    pub probability: f64,
    /// `exp(-β (I_left + I_{right+1}))`, the cost of the two walls around `B`.
    pub bound: f64,
}

pub fn contour_probability(
    family: &CouplingFamily,
    beta: f64,
    volume: Volume,
    query: ContourQuery,
) -> Result<ContourProbability> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    let n = volume.half_width();
    if !(volume.contains(query.left) && volume.contains(query.right)) || query.left > query.right {
        return Err(Error::ContourOutsideVolume {
            left: query.left,
            right: query.right,
            n,
        });
    }
    let chain = PackedChain::new(family, volume)?;
    let lo = (query.left + n as i64) as u32;
    let hi = (query.right + n as i64) as u32;
    let run = ((1u64 << (hi - lo + 1)) - 1) << lo;
    // neighbours inside the volume must be +1; outside ones are +1 by the boundary
    let mut walls = 0u64;
    if lo > 0 {
        walls |= 1 << (lo - 1);
    }
    if (hi as usize) < 2 * n {
        walls |= 1 << (hi + 1);
    }
    let (total, hit) = reduce_chunks(
        chain.configurations(),
        || (LogSumExp::new(), LogSumExp::new()),
        |(total, hit), bits| {
            let w = -beta * chain.energy(bits, BoundaryCondition::PLUS);
            total.push(w);
            if bits & run == 0 && bits & walls == walls {
                hit.push(w);
            }
        },
        |(t, h), (pt, ph)| {
            t.merge(&pt);
            h.merge(&ph);
        },
    );
    let wall_cost = family.value(query.left)? + family.value(query.right + 1)?;
    Ok(ContourProbability {
        query,
        probability: (hit.value() - total.value()).exp(),
        bound: (-beta * wall_cost).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_volume() {
        let fam = CouplingFamily::Sullivan;
        for beta in [0.5, 1.0, 3.0] {
            let c =
                contour_probability(&fam, beta, Volume::new(0), ContourQuery::new(0, 0).unwrap())
                    .unwrap();
            let w = (-beta * (fam.value(0).unwrap() + fam.value(1).unwrap())).exp();
            assert!((c.probability - w / (1.0 + w)).abs() < 1e-15);
            assert!((c.bound - w).abs() < 1e-15);
        }
    }

    #[test]
    fn bound_holds_small_volumes() {
        let fam = CouplingFamily::Sullivan;
        for n in 0..=3 {
            for q in ContourQuery::all(n) {
                let c = contour_probability(&fam, 1.0, Volume::new(n), q).unwrap();
                assert!(c.probability <= c.bound, "{q:?}");
                assert!(c.probability > 0.0);
            }
        }
    }

    #[test]
    fn vanishes_at_large_beta() {
        let c = contour_probability(
            &CouplingFamily::Sullivan,
            200.0,
            Volume::new(2),
            ContourQuery::new(-1, 1).unwrap(),
        )
        .unwrap();
        assert!(c.probability < 1e-80);
    }

    #[test]
    fn rejects_sets_outside_volume() {
        let fam = CouplingFamily::Sullivan;
        assert!(matches!(
            contour_probability(&fam, 1.0, Volume::new(1), ContourQuery::new(0, 2).unwrap()),
            Err(Error::ContourOutsideVolume {
                left: 0,
                right: 2,
                n: 1
            })
        ));
        assert!(ContourQuery::new(1, 0).is_err());
        assert_eq!(ContourQuery::all(1).count(), 6);
    }
}
