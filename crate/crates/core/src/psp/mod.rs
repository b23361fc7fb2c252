//! Interface points and the phase separation point (PSP) of a configuration
//! under the minus-left/plus-right extension, plus the exact and bounded
//! statistics of the PSP under the mixed-boundary Gibbs measure.

mod bounds;
mod contour;
mod decomposition;
mod distribution;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::chain::{BoundaryCondition, SpinConfiguration};
use crate::error::{Error, Result};

pub use bounds::{tail_series, variance_envelope, TailSeries, VarianceEnvelope, ASYMPTOTIC_BETA};
pub use contour::{contour_probability, ContourProbability, ContourQuery};
pub use decomposition::{decomposition_check, DecompositionReport, DecompositionRow};
pub use distribution::{psp_distribution, psp_moments, Moments, PspDistribution, PspEntry};

/// A half-integer point `t` of `T_n = {-n-1/2, …, n+1/2}`, stored as `2t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterfaceIndex {
    twice: i64,
}

impl InterfaceIndex {
    pub fn from_twice(twice: i64) -> Result<Self> {
        if twice.rem_euclid(2) != 1 {
            return Err(Error::InvalidParameter(format!(
                "interface points are half-integers; 2t = {twice} is even"
            )));
        }
        Ok(Self { twice })
    }

    /// The point sitting on bond `j` of a volume (between sites `j-n-1` and `j-n`).
    pub(crate) fn from_bond(j: usize, n: usize) -> Self {
        Self {
            twice: 2 * j as i64 - 2 * n as i64 - 1,
        }
    }

    /// All points of `T_n` in increasing order.
    pub fn all(n: usize) -> impl DoubleEndedIterator<Item = InterfaceIndex> {
        let n = n as i64;
        (-n..=n + 1).map(|k| InterfaceIndex { twice: 2 * k - 1 })
    }

    pub fn twice(&self) -> i64 {
        self.twice
    }

    pub fn value(&self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// The site `t - 1/2`.
    pub fn left_site(&self) -> i64 {
        (self.twice - 1) / 2
    }

    /// The site `t + 1/2`.
    pub fn right_site(&self) -> i64 {
        (self.twice + 1) / 2
    }

    pub fn negated(&self) -> Self {
        Self { twice: -self.twice }
    }

    pub fn check_in(&self, n: usize) -> Result<()> {
        if self.twice.unsigned_abs() <= 2 * n as u64 + 1 {
            Ok(())
        } else {
            Err(Error::InvalidInterface {
                twice: self.twice,
                n,
            })
        }
    }
}

impl fmt::Display for InterfaceIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.twice)
    }
}

impl Serialize for InterfaceIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.twice)
    }
}

/// Counts of minority spins on either side of an interface point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InterfaceStats {
    /// `-1` spins left of `t`.
    pub l_minus: usize,
    /// `+1` spins right of `t`.
    pub r_plus: usize,
    /// `+1` spins left of `t`.
    pub l_plus: usize,
    /// `-1` spins right of `t`.
    pub r_minus: usize,
}

impl InterfaceStats {
    /// `‖Δ_t‖ = l⁻ + r⁺`.
    pub fn norm(&self) -> usize {
        self.l_minus + self.r_plus
    }
}

/// Which spin value holds the majority inside the volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MajorityClass {
    Plus,
    Minus,
}

pub fn majority_class(config: &SpinConfiguration) -> MajorityClass {
    if config.plus_count() > config.half_width() {
        MajorityClass::Plus
    } else {
        MajorityClass::Minus
    }
}

/// All `t ∈ T_n` where the extended configuration changes sign, in increasing order.
pub fn interface_points(config: &SpinConfiguration) -> Vec<InterfaceIndex> {
    let n = config.half_width();
    InterfaceIndex::all(n)
        .filter(|t| {
            config.extended(t.left_site(), BoundaryCondition::PM)
                != config.extended(t.right_site(), BoundaryCondition::PM)
        })
        .collect()
}

/// Spin counts on each side of `t`, restricted to the volume.
pub fn interface_stats(config: &SpinConfiguration, t: InterfaceIndex) -> Result<InterfaceStats> {
    let n = config.half_width();
    t.check_in(n)?;
    let (mut l_minus, mut l_plus, mut r_minus, mut r_plus) = (0, 0, 0, 0);
    for (i, &s) in config.spins().iter().enumerate() {
        let x = i as i64 - n as i64;
        match (x <= t.left_site(), s == 1) {
            (true, true) => l_plus += 1,
            (true, false) => l_minus += 1,
            (false, true) => r_plus += 1,
            (false, false) => r_minus += 1,
        }
    }
    Ok(InterfaceStats {
        l_minus,
        r_plus,
        l_plus,
        r_minus,
    })
}

/// The interface points attaining the largest `‖Δ_t‖`, in increasing order.
pub fn maximizers(config: &SpinConfiguration) -> Vec<InterfaceIndex> {
    let scored: Vec<(InterfaceIndex, usize)> = interface_points(config)
        .into_iter()
        .map(|t| {
            let stats = interface_stats(config, t).expect("interface points lie in T_n");
            (t, stats.norm())
        })
        .collect();
    let best = scored.iter().map(|&(_, s)| s).max().unwrap_or(0);
    scored
        .into_iter()
        .filter(|&(_, s)| s == best)
        .map(|(t, _)| t)
        .collect()
}

/// The phase separation point: among maximisers of `‖Δ_t‖`, the largest when
/// minus spins hold the majority and the smallest otherwise.
pub fn psp(config: &SpinConfiguration) -> InterfaceIndex {
    let best = maximizers(config);
    let chosen = match majority_class(config) {
        MajorityClass::Minus => best.last(),
        MajorityClass::Plus => best.first(),
    };
    *chosen.expect("the extended configuration always changes sign")
}

/// Where an interface point sits among all interface points of its configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterfacePosition {
    /// The only interface point (both first and last).
    Only,
    First,
    Last,
    Interior,
}

/// Result of testing the necessary conditions a PSP must meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NecessaryConditions {
    pub theta: InterfaceIndex,
    pub position: InterfacePosition,
    pub stats: InterfaceStats,
    /// First point: `l⁻ ≥ l⁺ = 0` and `r⁺ > r⁻`.
    pub first_edge: bool,
    /// Last point: `l⁻ > l⁺` and `r⁺ ≥ r⁻ = 0`.
    pub last_edge: bool,
    /// `l⁻ > l⁺` and `r⁺ > r⁻`.
    pub interior: bool,
    /// Whether the condition matching `position` holds.
    pub satisfied: bool,
}

/// Evaluates the conditions that any PSP located at `t` must satisfy.
pub fn necessary_conditions(
    config: &SpinConfiguration,
    t: InterfaceIndex,
) -> Result<NecessaryConditions> {
    let points = interface_points(config);
    let slot = points
        .iter()
        .position(|&p| p == t)
        .ok_or(Error::NotAnInterface { twice: t.twice() })?;
    let position = match (slot == 0, slot + 1 == points.len()) {
        (true, true) => InterfacePosition::Only,
        (true, false) => InterfacePosition::First,
        (false, true) => InterfacePosition::Last,
        (false, false) => InterfacePosition::Interior,
    };
    let s = interface_stats(config, t)?;
    let first_edge = s.l_plus == 0 && s.l_minus >= s.l_plus && s.r_plus > s.r_minus;
    let last_edge = s.r_minus == 0 && s.r_plus >= s.r_minus && s.l_minus > s.l_plus;
    let interior = s.l_minus > s.l_plus && s.r_plus > s.r_minus;
    let satisfied = match position {
        InterfacePosition::Only => first_edge || last_edge,
        InterfacePosition::First => first_edge,
        InterfacePosition::Last => last_edge,
        InterfacePosition::Interior => interior,
    };
    Ok(NecessaryConditions {
        theta: t,
        position,
        stats: s,
        first_edge,
        last_edge,
        interior,
        satisfied,
    })
}
