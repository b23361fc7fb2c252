//! Partition functions of the chain under plus and mixed boundaries, the
//! rarefied block sums that bound the PSP probabilities, and the crystal
//! sums restricted to a prescribed PSP. Everything is carried as logarithms.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::chain::{BoundaryCondition, CouplingFamily, Volume};
use crate::error::{Error, Result};
use crate::kernel::{reduce_chunks, PackedChain};
use crate::logspace::{log1m_exp, log_add_exp, softplus, LogSumExp};
use crate::psp::InterfaceIndex;

/// Magnitude of `ln` beyond which no linear value is reported.
pub const LINEAR_LOG_LIMIT: f64 = 700.0;

/// A non-negative quantity stored as its natural logarithm. Exact zero is
/// represented by `ln = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PartitionValue {
    log_value: f64,
}

impl PartitionValue {
    pub const ONE: Self = Self { log_value: 0.0 };

    pub fn from_log(log_value: f64) -> Result<Self> {
        if log_value.is_nan() || log_value == f64::INFINITY {
            return Err(Error::InvalidParameter(format!(
                "partition logarithm must be finite or -inf, got {log_value}"
            )));
        }
        Ok(Self { log_value })
    }

    pub(crate) fn from_log_unchecked(log_value: f64) -> Self {
        debug_assert!(!log_value.is_nan() && log_value != f64::INFINITY);
        Self { log_value }
    }

    pub const fn zero() -> Self {
        Self {
            log_value: f64::NEG_INFINITY,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }

    pub fn ln(&self) -> f64 {
        self.log_value
    }

    /// `exp(ln)`, possibly overflowing to infinity.
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// The linear value when it is comfortably representable.
    pub fn linear(&self) -> Option<f64> {
        (self.log_value.abs() < LINEAR_LOG_LIMIT || self.is_zero()).then(|| self.value())
    }

    pub fn add(self, other: Self) -> Self {
        Self::from_log_unchecked(log_add_exp(self.log_value, other.log_value))
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::from_log_unchecked(self.log_value + other.log_value)
    }

    /// `self / other` as a logarithm.
    pub fn log_ratio(self, other: Self) -> f64 {
        self.log_value - other.log_value
    }

    /// `|ln a - ln b|`, the relative disagreement used by the oracle checks.
    pub fn log_distance(self, other: Self) -> f64 {
        if self.is_zero() && other.is_zero() {
            0.0
        } else {
            (self.log_value - other.log_value).abs()
        }
    }
}

impl Serialize for PartitionValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PartitionValue", 2)?;
        st.serialize_field("log_value", &self.log_value)?;
        st.serialize_field("value", &self.linear())?;
        st.end()
    }
}

impl fmt::Display for PartitionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.linear() {
            Some(v) => write!(f, "{v} (ln {})", self.log_value),
            None => write!(f, "exp({})", self.log_value),
        }
    }
}

/// `Z⁺_n` and `Z±_n` for one volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionPair {
    pub plus: PartitionValue,
    pub mixed: PartitionValue,
}

impl PartitionPair {
    /// Largest log-space disagreement over both components.
    pub fn log_distance(&self, other: &PartitionPair) -> f64 {
        self.plus
            .log_distance(other.plus)
            .max(self.mixed.log_distance(other.mixed))
    }
}

/// Block sums with equal end spins (`aligned`) and with one end flipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RarefiedPair {
    pub aligned: PartitionValue,
    pub flipped: PartitionValue,
}

impl RarefiedPair {
    pub fn log_distance(&self, other: &RarefiedPair) -> f64 {
        self.aligned
            .log_distance(other.aligned)
            .max(self.flipped.log_distance(other.flipped))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "beta must be positive and finite, got {beta}"
        )))
    }
}

/// Running products `Π(1 + τ)^p` and `Π(1 - τ)^p` over bonds with
/// `τ = exp(-β I)`, kept as `ln Π(1+τ)^p` plus the log-ratio
/// `ln Π(|1-τ|/(1+τ))^p` and the sign of `Π(1-τ)^p`.
#[derive(Debug, Clone, Copy, Default)]
struct BondProducts {
    log_plus: f64,
    log_ratio: f64,
    negative: bool,
}

impl BondProducts {
    fn include(&mut self, beta_coupling: f64, power: u32) {
        let p = f64::from(power);
        self.log_plus += p * softplus(-beta_coupling);
        // ln(|1-τ|/(1+τ)) = -2 atanh(exp(-|βI|)), valid for τ on either side of 1
        self.log_ratio += p * -2.0 * (-beta_coupling.abs()).exp().atanh();
        if beta_coupling < 0.0 && power % 2 == 1 {
            self.negative = !self.negative;
        }
    }

    /// `(½(Π₊ + Π₋), ½(Π₊ - Π₋))`: even and odd numbers of broken bonds.
    fn split(&self) -> (PartitionValue, PartitionValue) {
        let base = self.log_plus - LN_2;
        let with = PartitionValue::from_log_unchecked(base + softplus(self.log_ratio));
        let without = PartitionValue::from_log_unchecked(base + log1m_exp(self.log_ratio));
        if self.negative {
            (without, with)
        } else {
            (with, without)
        }
    }
}

/// Closed-form `(Z⁺_n, Z±_n)` from `X_n = Π(1 - τ_{i+1})²` and
/// `Y_n = Π(1 + τ_{i+1})²`, `i = 0..=n`.
///
/// The squared-product form folds the left half of the chain onto the right,
/// so `I_k = I_{1-k}` must hold on `[-n, n+1]`.
pub fn closed_form_partition(
    family: &CouplingFamily,
    beta: f64,
    n: usize,
) -> Result<PartitionPair> {
    check_beta(beta)?;
    let hi = n as i64 + 1;
    family.require_reflection(-(n as i64)..=hi)?;
    let mut products = BondProducts::default();
    for coupling in family.values(1, hi)? {
        products.include(beta * coupling, 2);
    }
    let (plus, mixed) = products.split();
    Ok(PartitionPair { plus, mixed })
}

/// `(Z⁺_m, Z±_m)` for `m = 0..=n` by the two-term recursion that adds the
/// sites `±m` one shell at a time.
pub fn recursive_partition(
    family: &CouplingFamily,
    beta: f64,
    n: usize,
) -> Result<Vec<PartitionPair>> {
    check_beta(beta)?;
    family.require_reflection(-(n as i64)..=n as i64 + 1)?;
    let couplings = family.values(1, n as i64 + 1)?;
    let mut out = Vec::with_capacity(n + 1);
    let first = beta * couplings[0];
    let mut plus = softplus(-2.0 * first);
    let mut mixed = LN_2 - first;
    out.push(PartitionPair {
        plus: PartitionValue::from_log_unchecked(plus),
        mixed: PartitionValue::from_log_unchecked(mixed),
    });
    for &coupling in &couplings[1..] {
        let bc = beta * coupling;
        let stay = softplus(-2.0 * bc);
        let cross = LN_2 - bc;
        let next_plus = log_add_exp(stay + plus, cross + mixed);
        let next_mixed = log_add_exp(stay + mixed, cross + plus);
        plus = next_plus;
        mixed = next_mixed;
        out.push(PartitionPair {
            plus: PartitionValue::from_log_unchecked(plus),
            mixed: PartitionValue::from_log_unchecked(mixed),
        });
    }
    Ok(out)
}

/// `ln Σ_σ exp(-β H(σ, bc))` over all `2^(2n+1)` configurations.
pub fn brute_force_partition(
    family: &CouplingFamily,
    beta: f64,
    volume: Volume,
    bc: BoundaryCondition,
) -> Result<PartitionValue> {
    check_beta(beta)?;
    let chain = PackedChain::new(family, volume)?;
    let acc = reduce_chunks(
        chain.configurations(),
        LogSumExp::new,
        |acc, bits| acc.push(-beta * chain.energy(bits, bc)),
        |acc, other| acc.merge(&other),
    );
    Ok(PartitionValue::from_log_unchecked(acc.value()))
}

/// `Z⁺_n / Z±_n` for the homogeneous chain.
pub fn ising_ratio(family: &CouplingFamily, beta: f64, n: usize) -> Result<f64> {
    if !matches!(family, CouplingFamily::Constant { .. }) {
        return Err(Error::InvalidParameter(format!(
            "the Ising ratio needs a constant family, got {family}"
        )));
    }
    let pair = closed_form_partition(family, beta, n)?;
    Ok(pair.plus.log_ratio(pair.mixed).exp())
}

/// `ln(Z⁺_n / Z±_n - 1)` for the homogeneous chain, resolved long after the
/// ratio itself has rounded to 1: with `r = X_n / Y_n` it is `ln(2r / (1 - r))`.
pub fn ising_ratio_log_excess(family: &CouplingFamily, beta: f64, n: usize) -> Result<f64> {
    let CouplingFamily::Constant { value } = family else {
        return Err(Error::InvalidParameter(format!(
            "the Ising ratio needs a constant family, got {family}"
        )));
    };
    check_beta(beta)?;
    let mut products = BondProducts::default();
    products.include(beta * value, 2 * (n as u32 + 1));
    let log_r = products.log_ratio;
    Ok(LN_2 + log_r - log1m_exp(log_r))
}

fn check_right_half(theta: InterfaceIndex, n: usize) -> Result<()> {
    theta.check_in(n)?;
    if theta.twice() < 1 {
        return Err(Error::InvalidParameter(format!(
            "block sums are defined for θ ≥ 1/2, got {theta}"
        )));
    }
    Ok(())
}

/// Right block `{θ+3/2, …, n}` between the fixed `+1` at `θ+1/2` and the
/// boundary: `aligned` with `+1` at `n+1`, `flipped` with `-1` there.
/// Bonds carry `I_{θ+3/2}, …, I_{n+1}`.
pub fn rarefied_right(
    family: &CouplingFamily,
    beta: f64,
    n: usize,
    theta: InterfaceIndex,
) -> Result<RarefiedPair> {
    check_beta(beta)?;
    check_right_half(theta, n)?;
    let mut products = BondProducts::default();
    for coupling in right_block_bonds(family, n, theta)? {
        products.include(beta * coupling, 1);
    }
    let (aligned, flipped) = products.split();
    Ok(RarefiedPair { aligned, flipped })
}

/// Same as [`rarefied_right`] via the site-by-site recursion.
pub fn rarefied_right_by_recursion(
    family: &CouplingFamily,
    beta: f64,
    n: usize,
    theta: InterfaceIndex,
) -> Result<RarefiedPair> {
    check_beta(beta)?;
    check_right_half(theta, n)?;
    Ok(block_recursion(beta, &right_block_bonds(family, n, theta)?))
}

/// Left block `{-n, …, θ-3/2}` between the boundary and the fixed `-1` at
/// `θ-1/2`: `aligned` with `-1` at `-n-1`, `flipped` with `+1` there.
///
/// Uses `I_k = I_{1-k}` to fold the bonds `I_{-n}, …, I_{θ-1/2}` into
/// `Π_{k=1}^{θ-1/2} (1 ± τ_k)² · Π_{k=θ+1/2}^{n+1} (1 ± τ_k)`.
pub fn rarefied_left(
    family: &CouplingFamily,
    beta: f64,
    n: usize,
    theta: InterfaceIndex,
) -> Result<RarefiedPair> {
    check_beta(beta)?;
    check_right_half(theta, n)?;
    family.require_reflection(-(n as i64)..=n as i64 + 1)?;
    let fold = theta.left_site(); // θ - 1/2 ≥ 0
    let mut products = BondProducts::default();
    for coupling in family.values(1, fold)? {
        products.include(beta * coupling, 2);
    }
    for coupling in family.values(fold + 1, n as i64 + 1)? {
        products.include(beta * coupling, 1);
    }
    let (aligned, flipped) = products.split();
    Ok(RarefiedPair { aligned, flipped })
}

/// Same as [`rarefied_left`] by recursion over the unfolded bonds; needs no
/// symmetry of the couplings.
pub fn rarefied_left_by_recursion(
    family: &CouplingFamily,
    beta: f64,
    n: usize,
    theta: InterfaceIndex,
) -> Result<RarefiedPair> {
    check_beta(beta)?;
    check_right_half(theta, n)?;
    Ok(block_recursion(beta, &left_block_bonds(family, n, theta)?))
}

pub(crate) fn right_block_bonds(
    family: &CouplingFamily,
    n: usize,
    theta: InterfaceIndex,
) -> Result<Vec<f64>> {
    family.values(theta.right_site() + 1, n as i64 + 1)
}

pub(crate) fn left_block_bonds(
    family: &CouplingFamily,
    n: usize,
    theta: InterfaceIndex,
) -> Result<Vec<f64>> {
    family.values(-(n as i64), theta.left_site())
}

/// Adds one bond at a time: `A' = A + τ D`, `D' = D + τ A`, starting from a
/// single bond `(1, τ_0)`. With no bonds the flipped sum is empty.
fn block_recursion(beta: f64, bonds: &[f64]) -> RarefiedPair {
    let Some((&first, rest)) = bonds.split_first() else {
        return RarefiedPair {
            aligned: PartitionValue::ONE,
            flipped: PartitionValue::zero(),
        };
    };
    let mut aligned = 0.0;
    let mut flipped = -beta * first;
    for &coupling in rest {
        let log_tau = -beta * coupling;
        let next_aligned = log_add_exp(aligned, log_tau + flipped);
        flipped = log_add_exp(flipped, log_tau + aligned);
        aligned = next_aligned;
    }
    RarefiedPair {
        aligned: PartitionValue::from_log_unchecked(aligned),
        flipped: PartitionValue::from_log_unchecked(flipped),
    }
}

/// Crystal sums for one interface point θ.
///
/// `joint` is the sum of `exp(-β(H_left + H_right))` over configurations whose
/// PSP is θ, so `exp(-β I_{θ+1/2}) · joint = Σ_{γ(σ)=θ} exp(-β H±(σ))`.
/// `left` and `right` sum each block over the block configurations that occur
/// in at least one such configuration; they are the block-wise filtered sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrystalPartitions {
    pub theta: InterfaceIndex,
    pub left: PartitionValue,
    pub right: PartitionValue,
    pub joint: PartitionValue,
}

/// Crystal sums for every θ in `T_n`, in increasing θ.
pub fn crystal_table(
    family: &CouplingFamily,
    beta: f64,
    volume: Volume,
) -> Result<Vec<CrystalPartitions>> {
    check_beta(beta)?;
    let chain = PackedChain::new(family, volume)?;
    let n = volume.half_width();
    let sites = volume.sites();
    let buckets = sites + 1;
    let bonds = family.bond_couplings(n)?;

    // bucket j ↔ PSP on bond j: left block bits 0..j-1, right block bits j+1..2n
    let left_len = |j: usize| j.saturating_sub(1);
    let right_len = |j: usize| sites.saturating_sub(j + 1);
    let mut left_seen: Vec<Vec<u64>> = (0..buckets).map(|j| bitset(left_len(j))).collect();
    let mut right_seen: Vec<Vec<u64>> = (0..buckets).map(|j| bitset(right_len(j))).collect();
    let mut joint = vec![LogSumExp::new(); buckets];

    for bits in 0..chain.configurations() {
        let j = bucket_of(chain.psp_twice(bits), n);
        let h = chain.energy(bits, BoundaryCondition::PM) - bonds[j];
        joint[j].push(-beta * h);
        let left_block = if j == 0 {
            0
        } else {
            bits & ((1u64 << left_len(j)) - 1)
        };
        let right_block = bits >> (j + 1);
        mark(&mut left_seen[j], left_block);
        mark(&mut right_seen[j], right_block);
    }

    let mut out = Vec::with_capacity(buckets);
    for j in 0..buckets {
        let bond_mask_left = (1u64 << j) - 1;
        let mut left = LogSumExp::new();
        for block in members(&left_seen[j]) {
            let h = chain.masked_energy(block, BoundaryCondition::PM, bond_mask_left);
            left.push(-beta * h);
        }
        let mut right = LogSumExp::new();
        let bond_mask_right = !((1u64 << (j + 1)) - 1);
        for block in members(&right_seen[j]) {
            let bits = (block << (j + 1)) | (1u64 << j);
            let h = chain.masked_energy(bits, BoundaryCondition::PM, bond_mask_right);
            right.push(-beta * h);
        }
        out.push(CrystalPartitions {
            theta: InterfaceIndex::from_bond(j, n),
            left: PartitionValue::from_log_unchecked(left.value()),
            right: PartitionValue::from_log_unchecked(right.value()),
            joint: PartitionValue::from_log_unchecked(joint[j].value()),
        });
    }
    Ok(out)
}

/// Crystal sums for a single θ (runs the full enumeration).
pub fn crystal_partitions(
    family: &CouplingFamily,
    beta: f64,
    volume: Volume,
    theta: InterfaceIndex,
) -> Result<CrystalPartitions> {
    theta.check_in(volume.half_width())?;
    let table = crystal_table(family, beta, volume)?;
    Ok(table[bucket_of(theta.twice(), volume.half_width())])
}

pub(crate) fn bucket_of(twice: i64, n: usize) -> usize {
    ((twice + 2 * n as i64 + 1) / 2) as usize
}

fn bitset(len: usize) -> Vec<u64> {
    vec![0; (1usize << len).div_ceil(64)]
}

fn mark(set: &mut [u64], index: u64) {
    set[(index / 64) as usize] |= 1 << (index % 64);
}

fn members(set: &[u64]) -> impl Iterator<Item = u64> + '_ {
    set.iter().enumerate().flat_map(|(w, &word)| {
        let mut word = word;
        std::iter::from_fn(move || {
            if word == 0 {
                return None;
            }
            let b = word.trailing_zeros() as u64;
            word &= word - 1;
            Some(w as u64 * 64 + b)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn half_width_zero_values() {
        let pair = closed_form_partition(&CouplingFamily::Sullivan, 1.0, 0).unwrap();
        assert!(close(pair.plus.value(), 1.0 + (-2f64).exp(), 1e-15));
        assert!(close(pair.mixed.value(), 2.0 * (-1f64).exp(), 1e-15));
        assert!(close(pair.plus.value(), 1.135335283236612, 1e-12));
        assert!(close(pair.mixed.value(), 0.7357588823428847, 1e-12));
    }

    #[test]
    fn homogeneous_closed_form() {
        for (i, beta, n) in [(1.0f64, 1.0f64, 3usize), (0.3, 2.0, 7), (2.0, 0.5, 0)] {
            let tau: f64 = (-beta * i).exp();
            let e = 2.0 * (n as f64 + 1.0);
            let plus = 0.5 * ((1.0 + tau).powf(e) + (1.0 - tau).powf(e));
            let mixed = 0.5 * ((1.0 + tau).powf(e) - (1.0 - tau).powf(e));
            let pair = closed_form_partition(&CouplingFamily::constant(i), beta, n).unwrap();
            assert!(close(pair.plus.value(), plus, 1e-13));
            assert!(close(pair.mixed.value(), mixed, 1e-13));
        }
    }

    #[test]
    fn zero_temperature_limit() {
        let pair = closed_form_partition(&CouplingFamily::Sullivan, 500.0, 12).unwrap();
        assert!(pair.plus.ln().abs() < 1e-200);
        // Z± ≈ 2τ₁ = 2e^{-500}
        assert!((pair.mixed.ln() - (LN_2 - 500.0)).abs() < 1e-12);
        assert!(pair.mixed.linear().is_some());
    }

    #[test]
    fn refuses_asymmetric_couplings() {
        assert!(matches!(
            closed_form_partition(&CouplingFamily::AbsoluteValue, 1.0, 2),
            Err(Error::SymmetryViolated { .. })
        ));
        assert!(recursive_partition(&CouplingFamily::AbsoluteValue, 1.0, 2).is_err());
        assert!(closed_form_partition(&CouplingFamily::Sullivan, 0.0, 2).is_err());
        assert!(closed_form_partition(&CouplingFamily::Sullivan, f64::NAN, 2).is_err());
    }

    #[test]
    fn zero_coupling_gives_vanishing_difference() {
        let pair = closed_form_partition(&CouplingFamily::constant(0.0), 1.0, 2).unwrap();
        // X = 0, so Z⁺ = Z± = Y/2 = 2^{2n+1}
        assert!(close(pair.plus.value(), 32.0, 1e-14));
        assert!(close(pair.mixed.value(), 32.0, 1e-14));
    }

    #[test]
    fn negative_couplings_stay_consistent() {
        let fam = CouplingFamily::constant(-0.4);
        for n in 0..4 {
            let closed = closed_form_partition(&fam, 1.3, n).unwrap();
            let plus =
                brute_force_partition(&fam, 1.3, Volume::new(n), BoundaryCondition::PLUS).unwrap();
            let mixed =
                brute_force_partition(&fam, 1.3, Volume::new(n), BoundaryCondition::PM).unwrap();
            assert!(closed.plus.log_distance(plus) < 1e-12);
            assert!(closed.mixed.log_distance(mixed) < 1e-12);
        }
    }

    #[test]
    fn recursion_difference_shrinks_by_squared_factor() {
        let fam = CouplingFamily::Sullivan;
        let beta = 0.7;
        let seq = recursive_partition(&fam, beta, 6).unwrap();
        for m in 1..seq.len() {
            let tau = (-beta * fam.value(m as i64 + 1).unwrap()).exp();
            let x_prev = seq[m - 1].plus.value() - seq[m - 1].mixed.value();
            let x = seq[m].plus.value() - seq[m].mixed.value();
            assert!(close(x, (1.0 - tau).powi(2) * x_prev, 1e-12));
        }
    }

    #[test]
    fn ising_ratio_examples() {
        let fam = CouplingFamily::constant(1.0);
        let tau: f64 = (-1f64).exp();
        let expected = ((1.0 + tau).powi(4) + (1.0 - tau).powi(4))
            / ((1.0 + tau).powi(4) - (1.0 - tau).powi(4));
        assert!(close(ising_ratio(&fam, 1.0, 1).unwrap(), expected, 1e-14));
        assert!(ising_ratio(&fam, 1.0, 60).unwrap() - 1.0 < 1e-12);
        assert!(ising_ratio(&fam, 200.0, 3).unwrap() > 1e80);
        assert!(ising_ratio(&CouplingFamily::Sullivan, 1.0, 3).is_err());
        for n in [0usize, 1, 5] {
            let excess = ising_ratio_log_excess(&fam, 1.0, n).unwrap().exp();
            assert!(close(
                excess,
                ising_ratio(&fam, 1.0, n).unwrap() - 1.0,
                1e-12
            ));
        }
        let far = ising_ratio_log_excess(&fam, 1.0, 60).unwrap();
        // 2 ((1-τ)/(1+τ))^{2(n+1)} once the ratio is near 1
        let tanh = (0.5f64).tanh();
        assert!(close(far, 2f64.ln() + 122.0 * tanh.ln(), 1e-12));
    }

    #[test]
    fn rarefied_base_case() {
        let fam = CouplingFamily::Sullivan;
        for n in 1..6usize {
            let theta = InterfaceIndex::from_twice(2 * n as i64 - 1).unwrap(); // n = θ + 1/2
            let pair = rarefied_right(&fam, 1.5, n, theta).unwrap();
            assert!(pair.aligned.ln().abs() < 1e-15);
            let i = fam.value(n as i64 + 1).unwrap();
            assert!((pair.flipped.ln() + 1.5 * i).abs() < 1e-12);
        }
    }

    #[test]
    fn rarefied_outermost_point_has_empty_flipped_sum() {
        let theta = InterfaceIndex::from_twice(7).unwrap();
        for pair in [
            rarefied_right(&CouplingFamily::Sullivan, 1.0, 3, theta).unwrap(),
            rarefied_right_by_recursion(&CouplingFamily::Sullivan, 1.0, 3, theta).unwrap(),
        ] {
            assert_eq!(pair.aligned, PartitionValue::ONE);
            assert!(pair.flipped.is_zero());
        }
    }

    #[test]
    fn rarefied_rejects_left_half_and_outside_points() {
        let fam = CouplingFamily::Sullivan;
        let neg = InterfaceIndex::from_twice(-1).unwrap();
        assert!(rarefied_right(&fam, 1.0, 3, neg).is_err());
        assert!(rarefied_left(&fam, 1.0, 3, neg).is_err());
        let far = InterfaceIndex::from_twice(9).unwrap();
        assert!(matches!(
            rarefied_right(&fam, 1.0, 3, far),
            Err(Error::InvalidInterface { .. })
        ));
    }

    #[test]
    fn crystal_hand_enumeration() {
        // n = 1, θ = 3/2: admissible left blocks (σ(-1), σ(0)) are (-,-), (+,-), (-,+)
        // with left-block energies 0, I_{-1}+I_0 = 3 and I_0+I_1 = 2
        let theta = InterfaceIndex::from_twice(3).unwrap();
        let c = crystal_partitions(&CouplingFamily::Sullivan, 1.0, Volume::new(1), theta).unwrap();
        let expected = 1.0 + (-3f64).exp() + (-2f64).exp();
        assert!(close(c.left.value(), expected, 1e-14));
        assert!(close(c.joint.value(), expected, 1e-14));
        assert_eq!(c.right, PartitionValue::ONE);
    }

    #[test]
    fn partition_value_arithmetic() {
        let a = PartitionValue::from_log(2f64.ln()).unwrap();
        let b = PartitionValue::from_log(3f64.ln()).unwrap();
        assert!(close(a.add(b).value(), 5.0, 1e-15));
        assert!(close(a.mul(b).value(), 6.0, 1e-15));
        assert!(a.mul(PartitionValue::zero()).is_zero());
        assert_eq!(a.add(PartitionValue::zero()), a);
        assert!(PartitionValue::from_log(f64::NAN).is_err());
        assert!(PartitionValue::from_log(f64::INFINITY).is_err());
        assert!(PartitionValue::from_log(900.0).unwrap().linear().is_none());
    }

    #[test]
    fn bitset_members_round_trip() {
        let mut set = bitset(8);
        for i in [0u64, 5, 63, 64, 200, 255] {
            mark(&mut set, i);
        }
        assert_eq!(
            members(&set).collect::<Vec<_>>(),
            vec![0, 5, 63, 64, 200, 255]
        );
    }
}
