use serde::Serialize;

use super::InterfaceIndex;
use crate::chain::{BoundaryCondition, CouplingFamily, Volume};
use crate::error::{Error, Result};
use crate::kernel::{reduce_chunks, PackedChain};
use crate::logspace::LogSumExp;
use crate::partition::bucket_of;

/// Tolerance under which `P(θ)` and `P(-θ)` count as equal for the folded variance.
const FOLD_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PspEntry {
    #[serde(rename = "twice_theta")]
    pub theta: InterfaceIndex,
    pub probability: f64,
    /// `ln Σ_{γ(σ)=θ} exp(-β H±(σ))`.
    pub log_weight: f64,
}

/// Exact law of the PSP under the mixed-boundary Gibbs measure on `Λ_n`.
#[derive(Debug, Clone, Serialize)]
pub struct PspDistribution {
    pub n: usize,
    pub beta: f64,
    pub family: String,
    /// `ln Z±_n`, from the same enumeration.
    pub log_partition: f64,
    /// Whether `I_k = I_{1-k}` holds on the volume; without it the law need not be symmetric.
    pub reflection_symmetric: bool,
    pub entries: Vec<PspEntry>,
}

impl PspDistribution {
    pub fn probability(&self, theta: InterfaceIndex) -> Option<f64> {
        theta.check_in(self.n).ok()?;
        Some(self.entries[bucket_of(theta.twice(), self.n)].probability)
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// `max_θ |P(θ) - P(-θ)|`.
    pub fn symmetry_defect(&self) -> f64 {
        self.entries
            .iter()
            .zip(self.entries.iter().rev())
            .map(|(a, b)| (a.probability - b.probability).abs())
            .fold(0.0, f64::max)
    }
}

/// Enumerates `Λ_n` and bins `exp(-β H±)` by PSP.
pub fn psp_distribution(
    family: &CouplingFamily,
    beta: f64,
    volume: Volume,
) -> Result<PspDistribution> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    let chain = PackedChain::new(family, volume)?;
    let n = volume.half_width();
    let buckets = volume.sites() + 1;
    let weights = reduce_chunks(
        chain.configurations(),
        || vec![LogSumExp::new(); buckets],
        |acc, bits| {
            let j = bucket_of(chain.psp_twice(bits), n);
            acc[j].push(-beta * chain.energy(bits, BoundaryCondition::PM));
        },
        |acc, part| {
            for (a, p) in acc.iter_mut().zip(&part) {
                a.merge(p);
            }
        },
    );
    let mut total = LogSumExp::new();
    for w in &weights {
        total.merge(w);
    }
    let log_partition = total.value();
    let entries = weights
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let log_weight = w.value();
            PspEntry {
                theta: InterfaceIndex::from_bond(j, n),
                probability: (log_weight - log_partition).exp(),
                log_weight,
            }
        })
        .collect();
    let bound = n as i64 + 1;
    Ok(PspDistribution {
        n,
        beta,
        family: family.to_string(),
        log_partition,
        reflection_symmetric: family.validate_reflection(-(n as i64)..=bound)?.holds(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// `2 Σ_{θ>0} θ² P(θ)`, only when the law is symmetric to within `1e-12`.
    pub folded_variance: Option<f64>,
}

/// Moments of the law, renormalised by its total mass so that rounding in
/// the probabilities cannot push the variance below its floor of 1/4.
pub fn psp_moments(dist: &PspDistribution) -> Moments {
    let mass = dist.total_probability();
    let mean: f64 = dist
        .entries
        .iter()
        .map(|e| e.theta.value() * e.probability)
        .sum::<f64>()
        / mass;
    let variance = dist
        .entries
        .iter()
        .map(|e| (e.theta.value() - mean).powi(2) * e.probability)
        .sum::<f64>()
        / mass;
    let folded_variance = (dist.symmetry_defect() <= FOLD_TOLERANCE).then(|| {
        2.0 / mass
            * dist
                .entries
                .iter()
                .filter(|e| e.theta.twice() > 0)
                .map(|e| e.theta.value().powi(2) * e.probability)
                .sum::<f64>()
    });
    Moments {
        mean,
        variance,
        folded_variance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{energy, SpinConfiguration};
    use crate::partition::closed_form_partition;
    use crate::psp::psp;

    #[test]
    fn half_width_zero_is_a_fair_coin() {
        for beta in [0.1, 1.0, 7.0] {
            let d = psp_distribution(&CouplingFamily::Sullivan, beta, Volume::new(0)).unwrap();
            assert_eq!(d.entries.len(), 2);
            for e in &d.entries {
                assert!((e.probability - 0.5).abs() < 1e-15);
            }
            let m = psp_moments(&d);
            assert!(m.mean.abs() < 1e-15);
            assert!((m.variance - 0.25).abs() < 1e-15);
            assert!((m.folded_variance.unwrap() - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_definitional_enumeration() {
        let fam = CouplingFamily::Sullivan;
        for n in 0..=3usize {
            let beta = 0.8;
            let d = psp_distribution(&fam, beta, Volume::new(n)).unwrap();
            let mut w = vec![0.0; 2 * n + 2];
            let mut z = 0.0;
            for bits in 0..1u64 << (2 * n + 1) {
                let c = SpinConfiguration::from_packed(n, bits).unwrap();
                let x = (-beta * energy(&c, &fam, BoundaryCondition::PM).unwrap()).exp();
                w[bucket_of(psp(&c).twice(), n)] += x;
                z += x;
            }
            for (e, wj) in d.entries.iter().zip(&w) {
                assert!((e.probability - wj / z).abs() < 1e-14);
            }
            let closed = closed_form_partition(&fam, beta, n).unwrap();
            assert!((d.log_partition - closed.mixed.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_family_is_flagged() {
        let d = psp_distribution(&CouplingFamily::AbsoluteValue, 1.0, Volume::new(2)).unwrap();
        assert!(!d.reflection_symmetric);
        assert!(d.symmetry_defect() > 1e-6);
        assert!(psp_moments(&d).folded_variance.is_none());
        assert!((d.total_probability() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        let fam = CouplingFamily::Sullivan;
        assert!(psp_distribution(&fam, 0.0, Volume::new(1)).is_err());
        assert!(psp_distribution(&fam, 1.0, Volume::new(13)).is_err());
    }
}
