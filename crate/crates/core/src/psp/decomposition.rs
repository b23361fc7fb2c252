use serde::Serialize;

use super::{psp_distribution, InterfaceIndex};
use crate::chain::{CouplingFamily, Volume};
use crate::error::Result;
use crate::partition::{closed_form_partition, crystal_table, rarefied_left, rarefied_right};

const ROUNDING: f64 = 1e-12;

/// One θ ≥ 1/2 of the crystal decomposition of `P_n(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionRow {
    #[serde(rename = "twice_theta")]
    pub theta: InterfaceIndex,
    /// Exact `P_n(θ)` by enumeration.
    pub exact: f64,
    /// `exp(-β I_{θ+1/2}) · joint / Z±`; the same configurations as `exact`.
    pub joint: f64,
    /// `exp(-β I_{θ+1/2}) · left · right / Z±` with independently filtered blocks.
    pub product: f64,
    /// `exp(-β I_{θ+1/2}) · ←Z · →Z / Z±`, the unfiltered block sums.
    pub rarefied_bound: f64,
    /// `left ≤ ←Z` and `right ≤ →Z`.
    pub crystal_below_rarefied: bool,
}

impl DecompositionRow {
    pub fn joint_error(&self) -> f64 {
        (self.exact - self.joint).abs()
    }

    /// `product - exact`; positive when the block filters over-count.
    pub fn product_gap(&self) -> f64 {
        self.product - self.exact
    }

    /// `exact ≤ rarefied_bound`, up to rounding (the two coincide at `n = 0`).
    pub fn below_bound(&self) -> bool {
        self.exact <= self.rarefied_bound * (1.0 + ROUNDING)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub beta: f64,
    pub total_probability: f64,
    pub rows: Vec<DecompositionRow>,
}

impl DecompositionReport {
    pub fn max_joint_error(&self) -> f64 {
        self.rows
            .iter()
            .map(DecompositionRow::joint_error)
            .fold(0.0, f64::max)
    }

    pub fn max_product_gap(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.product_gap().abs())
            .fold(0.0, f64::max)
    }

    pub fn bounds_hold(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.below_bound() && r.crystal_below_rarefied)
    }
}

/// Compares exact `P_n(θ)` with its block decompositions. Needs `I_k = I_{1-k}`.
pub fn decomposition_check(
    family: &CouplingFamily,
    beta: f64,
    volume: Volume,
) -> Result<DecompositionReport> {
    let n = volume.half_width();
    let z = closed_form_partition(family, beta, n)?.mixed.ln();
    let dist = psp_distribution(family, beta, volume)?;
    let crystals = crystal_table(family, beta, volume)?;
    let mut rows = Vec::with_capacity(n + 1);
    for (entry, crystal) in dist.entries.iter().zip(&crystals) {
        let theta = entry.theta;
        if theta.twice() < 1 {
            continue;
        }
        let wall = -beta * family.value(theta.right_site())? - z;
        let left = rarefied_left(family, beta, n, theta)?.aligned;
        let right = rarefied_right(family, beta, n, theta)?.aligned;
        rows.push(DecompositionRow {
            theta,
            exact: entry.probability,
            joint: (wall + crystal.joint.ln()).exp(),
            product: (wall + crystal.left.ln() + crystal.right.ln()).exp(),
            rarefied_bound: (wall + left.ln() + right.ln()).exp(),
            crystal_below_rarefied: crystal.left.ln() <= left.ln() + ROUNDING
                && crystal.right.ln() <= right.ln() + ROUNDING,
        });
    }
    Ok(DecompositionReport {
        n,
        beta,
        total_probability: dist.total_probability(),
        rows,
    })
}
