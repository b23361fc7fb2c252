//! Heat-bath Monte Carlo for the mixed-boundary chain, with batch-means
//! error bars on the PSP histogram.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::energy_with_bonds;
use crate::chain::{BoundaryCondition, CouplingFamily, SpinConfiguration};
use crate::error::{Error, Result};
use crate::partition::bucket_of;
use crate::psp::{psp, InterfaceIndex};

/// Name of the generator recorded in reports.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

/// Sweeps between full energy recomputations.
pub const REVALIDATE_EVERY: u64 = 1000;
const DRIFT_TOLERANCE: f64 = 1e-9;

/// A single-spin heat-bath chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    config: SpinConfiguration,
    bc: BoundaryCondition,
    bonds: Vec<f64>,
    beta: f64,
    rng: ChaCha8Rng,
    seed: u64,
    sweeps: u64,
    energy: f64,
}

impl ChainState {
    pub fn new(
        family: &CouplingFamily,
        beta: f64,
        config: SpinConfiguration,
        bc: BoundaryCondition,
        seed: u64,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and non-negative, got {beta}"
            )));
        }
        let bonds = family.bond_couplings(config.half_width())?;
        let energy = energy_with_bonds(config.spins(), &bonds, bc);
        Ok(Self {
            config,
            bc,
            bonds,
            beta,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            sweeps: 0,
            energy,
        })
    }

    /// Starts from independent uniform spins drawn from the chain's own generator.
    pub fn random(
        family: &CouplingFamily,
        beta: f64,
        n: usize,
        bc: BoundaryCondition,
        seed: u64,
    ) -> Result<Self> {
        let mut state = Self::new(family, beta, SpinConfiguration::uniform(n, 1)?, bc, seed)?;
        let spins: Vec<i8> = (0..2 * n + 1)
            .map(|_| if state.rng.random::<bool>() { 1 } else { -1 })
            .collect();
        state.config = SpinConfiguration::new(spins)?;
        state.energy = state.recomputed_energy();
        Ok(state)
    }

    pub fn config(&self) -> &SpinConfiguration {
        &self.config
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn recomputed_energy(&self) -> f64 {
        energy_with_bonds(self.config.spins(), &self.bonds, self.bc)
    }

    /// Compares the cached energy with a full recomputation and resynchronises.
    pub fn revalidate(&mut self) -> Result<f64> {
        let fresh = self.recomputed_energy();
        let drift = (fresh - self.energy).abs();
        if drift >= DRIFT_TOLERANCE {
            return Err(Error::EnergyDrift { drift });
        }
        self.energy = fresh;
        Ok(drift)
    }

    /// Resamples every site once, left to right, from its exact conditional.
    pub fn sweep(&mut self) {
        let n = self.config.half_width() as i64;
        let last = 2 * n as usize;
        for i in 0..=last {
            let spins = self.config.spins();
            let left = if i == 0 { self.bc.left } else { spins[i - 1] };
            let right = if i == last {
                self.bc.right
            } else {
                spins[i + 1]
            };
            let old = spins[i];
            let cost = |s: i8| {
                let mut c = 0.0;
                if s != left {
                    c += self.bonds[i];
                }
                if s != right {
                    c += self.bonds[i + 1];
                }
                c
            };
            let (up, down) = (cost(1), cost(-1));
            // P(+1) = 1 / (1 + exp(β (c₊ - c₋)))
            let p_up = 1.0 / (1.0 + (self.beta * (up - down)).exp());
            let new = if self.rng.random::<f64>() < p_up {
                1
            } else {
                -1
            };
            if new != old {
                self.energy += cost(new) - cost(old);
                self.config.set(i as i64 - n, new);
            }
        }
        self.sweeps += 1;
    }
}

/// Burn-in, thinning and length of a run, all in sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub sweeps: u64,
    pub burn_in: u64,
    pub thin: u64,
}

impl Schedule {
    /// `burn_in = 10 (2n+1)` and `thin = 2n+1`.
    pub fn for_half_width(n: usize, sweeps: u64) -> Self {
        let sites = 2 * n as u64 + 1;
        Self {
            sweeps,
            burn_in: 10 * sites,
            thin: sites,
        }
    }

    pub fn samples(&self) -> u64 {
        self.sweeps.saturating_sub(self.burn_in) / self.thin.max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be at least 1".into()));
        }
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidParameter(format!(
                "sweeps ({}) must exceed burn-in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.samples() < 4 {
            return Err(Error::InvalidParameter(format!(
                "schedule yields {} samples; batch means need at least 4",
                self.samples()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateEntry {
    #[serde(rename = "twice_theta")]
    pub theta: InterfaceIndex,
    pub probability: f64,
    pub stderr: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub beta: f64,
    pub family: String,
    pub seed: u64,
    pub rng: &'static str,
    pub schedule: Schedule,
    pub n_samples: u64,
    pub batch_size: u64,
    pub batches: u64,
    pub max_energy_drift: f64,
    pub entries: Vec<EstimateEntry>,
}

/// Runs one heat-bath chain under the minus-left/plus-right boundary and
/// histograms the PSP every `thin` sweeps after burn-in.
pub fn estimate_psp_distribution(
    family: &CouplingFamily,
    beta: f64,
    n: usize,
    schedule: Schedule,
    seed: u64,
) -> Result<EstimateReport> {
    schedule.validate()?;
    let mut state = ChainState::random(family, beta, n, BoundaryCondition::PM, seed)?;
    let mut trace: Vec<u32> = Vec::with_capacity(schedule.samples() as usize);
    let mut max_drift: f64 = 0.0;
    for s in 1..=schedule.sweeps {
        state.sweep();
        if s.is_multiple_of(REVALIDATE_EVERY) {
            max_drift = max_drift.max(state.revalidate()?);
        }
        if s > schedule.burn_in && (s - schedule.burn_in).is_multiple_of(schedule.thin) {
            trace.push(bucket_of(psp(state.config()).twice(), n) as u32);
        }
    }

    let samples = trace.len() as u64;
    let batch_size = (samples as f64).sqrt().floor() as u64;
    let batches = samples / batch_size;
    let buckets = 2 * n + 2;
    let mut counts = vec![0u64; buckets];
    for &b in &trace {
        counts[b as usize] += 1;
    }
    let mut batch_counts = vec![vec![0u64; buckets]; batches as usize];
    for (k, &b) in trace
        .iter()
        .take((batches * batch_size) as usize)
        .enumerate()
    {
        batch_counts[k / batch_size as usize][b as usize] += 1;
    }

    let entries = (0..buckets)
        .map(|j| {
            let means: Vec<f64> = batch_counts
                .iter()
                .map(|c| c[j] as f64 / batch_size as f64)
                .collect();
            let grand = means.iter().sum::<f64>() / batches as f64;
            let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
            EstimateEntry {
                theta: InterfaceIndex::from_bond(j, n),
                probability: counts[j] as f64 / samples as f64,
                stderr: (var / batches as f64).sqrt(),
                count: counts[j],
            }
        })
        .collect();

    Ok(EstimateReport {
        n,
        beta,
        family: family.to_string(),
        seed,
        rng: RNG_NAME,
        schedule,
        n_samples: samples,
        batch_size,
        batches,
        max_energy_drift: max_drift,
        entries,
    })
}
