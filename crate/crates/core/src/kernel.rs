//! Packed-index fast paths for exhaustive enumeration.
//!
//! A configuration on `Λ_n` is a `u64` whose bit `i` holds the spin at site
//! `i - n` (set means `+1`). Reductions split the index range into fixed
//! chunks of `2^16` and merge chunk results left to right, so the output is
//! bitwise identical for every thread count.

use rayon::prelude::*;

use crate::chain::{BoundaryCondition, CouplingFamily, Volume};
use crate::error::Result;

pub(crate) const CHUNK_BITS: u32 = 16;

/// Bond couplings and masks for one volume.
#[derive(Debug, Clone)]
pub(crate) struct PackedChain {
    n: usize,
    sites: u32,
    bonds: Vec<f64>,
}

impl PackedChain {
    pub fn new(family: &CouplingFamily, volume: Volume) -> Result<Self> {
        volume.check_enumerable()?;
        Ok(Self {
            n: volume.half_width(),
            sites: volume.sites() as u32,
            bonds: family.bond_couplings(volume.half_width())?,
        })
    }

    pub fn configurations(&self) -> u64 {
        1u64 << self.sites
    }

    /// Configuration bits with the boundary spins attached: bit 0 is the left
    /// boundary, bit `2n+2` the right one.
    #[inline]
    fn extended(&self, bits: u64, bc: BoundaryCondition) -> u64 {
        let left = u64::from(bc.left == 1);
        let right = u64::from(bc.right == 1);
        (bits << 1) | left | (right << (self.sites + 1))
    }

    /// Bit `j` set iff bond `j` (coupling `I_{j-n}`) is broken.
    #[inline]
    pub fn broken_bonds(&self, bits: u64, bc: BoundaryCondition) -> u64 {
        let ext = self.extended(bits, bc);
        (ext ^ (ext >> 1)) & ((1u64 << (self.sites + 1)) - 1)
    }

    #[inline]
    pub fn energy(&self, bits: u64, bc: BoundaryCondition) -> f64 {
        self.masked_energy(bits, bc, u64::MAX)
    }

    /// Energy restricted to the bonds selected by `bond_mask`.
    #[inline]
    pub fn masked_energy(&self, bits: u64, bc: BoundaryCondition, bond_mask: u64) -> f64 {
        let mut broken = self.broken_bonds(bits, bc) & bond_mask;
        let mut total = 0.0;
        while broken != 0 {
            let j = broken.trailing_zeros() as usize;
            total += self.bonds[j];
            broken &= broken - 1;
        }
        total
    }

    /// Twice the phase separation point under the minus-left/plus-right extension.
    #[inline]
    pub fn psp_twice(&self, bits: u64) -> i64 {
        let ext = self.extended(bits, BoundaryCondition::PM);
        let bond_mask = (1u64 << (self.sites + 1)) - 1;
        // maximisers of ‖Δ_t‖ are always minus-to-plus steps
        let mut rising = !ext & (ext >> 1) & bond_mask;
        let plus_total = bits.count_ones() as i64;
        let plus_class = plus_total > self.n as i64;
        let mut best_score = -1i64;
        let mut best_bond = 0u32;
        while rising != 0 {
            let j = rising.trailing_zeros();
            let below = if j == 0 { 0 } else { bits & ((1u64 << j) - 1) };
            let plus_left = below.count_ones() as i64;
            let minus_left = i64::from(j) - plus_left;
            let plus_right = plus_total - plus_left;
            let score = minus_left + plus_right;
            if score > best_score || (!plus_class && score == best_score) {
                best_score = score;
                best_bond = j;
            }
            rising &= rising - 1;
        }
        2 * i64::from(best_bond) - 2 * self.n as i64 - 1
    }
}

/// Deterministic chunked map-reduce over `0..total`.
pub(crate) fn reduce_chunks<A, I, F, M>(total: u64, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64) + Sync,
    M: Fn(&mut A, A),
{
    let chunk = 1u64 << CHUNK_BITS;
    let chunks = total.div_ceil(chunk);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let end = ((c + 1) * chunk).min(total);
            for i in c * chunk..end {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut out = init();
    for p in partials {
        merge(&mut out, p);
    }
    out
}
