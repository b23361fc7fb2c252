use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default enumeration cap on the half-width (`2^25` configurations).
pub const DEFAULT_CAP: usize = 12;

/// Largest half-width whose configurations fit a packed `u64` index.
pub const MAX_PACKED_HALF_WIDTH: usize = 30;

/// The box `Λ_n = {-n, …, n}` together with the enumeration cap that
/// exhaustive operations must respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Volume {
    n: usize,
    cap: usize,
}

impl Volume {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cap: DEFAULT_CAP,
        }
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        if cap > MAX_PACKED_HALF_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "enumeration cap {cap} exceeds the packable maximum {MAX_PACKED_HALF_WIDTH}"
            )));
        }
        Ok(Self { n, cap })
    }

    pub fn half_width(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn sites(&self) -> usize {
        2 * self.n + 1
    }

    pub fn contains(&self, x: i64) -> bool {
        x.unsigned_abs() as usize <= self.n
    }

    /// Number of configurations, `2^(2n+1)`.
    pub fn configurations(&self) -> u64 {
        1u64 << self.sites()
    }

    /// Fails unless the volume may be enumerated exhaustively.
    pub fn check_enumerable(&self) -> Result<()> {
        if self.n > self.cap {
            Err(Error::CapExceeded {
                n: self.n,
                cap: self.cap,
            })
        } else {
            Ok(())
        }
    }
}

/// Spins fixed outside the volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub left: i8,
    pub right: i8,
}

impl BoundaryCondition {
    pub const PLUS: Self = Self { left: 1, right: 1 };
    pub const MINUS: Self = Self {
        left: -1,
        right: -1,
    };
    /// Minus on the left, plus on the right: the phase-separating boundary.
    pub const PM: Self = Self { left: -1, right: 1 };
    pub const MP: Self = Self { left: 1, right: -1 };

    pub fn new(left: i8, right: i8) -> Result<Self> {
        check_spin(left)?;
        check_spin(right)?;
        Ok(Self { left, right })
    }

    pub fn flipped(self) -> Self {
        Self {
            left: -self.left,
            right: -self.right,
        }
    }

    pub fn reflected(self) -> Self {
        Self {
            left: self.right,
            right: self.left,
        }
    }
}

fn check_spin(s: i8) -> Result<()> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("spin must be ±1, got {s}")))
    }
}

/// A `±1` assignment on `Λ_n`, stored left to right (index `i` is site `i - n`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    /// Builds a configuration from spins listed for sites `-n ..= n`.
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "a volume has an odd number of sites, got {}",
                spins.len()
            )));
        }
        spins.iter().try_for_each(|&s| check_spin(s))?;
        Ok(Self { spins })
    }

    pub fn uniform(n: usize, spin: i8) -> Result<Self> {
        check_spin(spin)?;
        Ok(Self {
            spins: vec![spin; 2 * n + 1],
        })
    }

    /// Unpacks index `packed`: bit `i` set means spin `+1` at site `i - n`.
    pub fn from_packed(n: usize, packed: u64) -> Result<Self> {
        if n > MAX_PACKED_HALF_WIDTH || (packed >> (2 * n + 1)) != 0 {
            return Err(Error::InvalidParameter(format!(
                "packed index {packed:#x} does not fit half-width {n}"
            )));
        }
        let spins = (0..=2 * n)
            .map(|i| if packed >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        Ok(Self { spins })
    }

    pub fn packed(&self) -> Result<u64> {
        if self.half_width() > MAX_PACKED_HALF_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "half-width {} is too large to pack",
                self.half_width()
            )));
        }
        Ok(self
            .spins
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0u64, |acc, (i, _)| acc | 1 << i))
    }

    pub fn half_width(&self) -> usize {
        self.spins.len() / 2
    }

    pub fn volume(&self) -> Volume {
        Volume::new(self.half_width())
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Spin at site `x`; panics if `x` lies outside the volume.
    pub fn spin(&self, x: i64) -> i8 {
        self.spins[self.slot(x)]
    }

    /// Spin at any site of `Z`, using `bc` outside the volume.
    pub fn extended(&self, x: i64, bc: BoundaryCondition) -> i8 {
        let n = self.half_width() as i64;
        if x < -n {
            bc.left
        } else if x > n {
            bc.right
        } else {
            self.spin(x)
        }
    }

    pub fn set(&mut self, x: i64, spin: i8) {
        debug_assert!(spin == 1 || spin == -1);
        let slot = self.slot(x);
        self.spins[slot] = spin;
    }

    pub fn plus_count(&self) -> usize {
        self.spins.iter().filter(|&&s| s == 1).count()
    }

    /// `U`: global spin flip.
    pub fn flipped(&self) -> Self {
        Self {
            spins: self.spins.iter().map(|s| -s).collect(),
        }
    }

    /// `V`: reflection `x ↦ -x`.
    pub fn reflected(&self) -> Self {
        Self {
            spins: self.spins.iter().rev().copied().collect(),
        }
    }

    /// `S = U ∘ V`: `σ(x) ↦ -σ(-x)`. Preserves the minus-left/plus-right extension.
    pub fn swapped(&self) -> Self {
        Self {
            spins: self.spins.iter().rev().map(|s| -s).collect(),
        }
    }

    fn slot(&self, x: i64) -> usize {
        let i = x + self.half_width() as i64;
        assert!(
            (0..self.spins.len() as i64).contains(&i),
            "site {x} outside volume of half-width {}",
            self.half_width()
        );
        i as usize
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.spins {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sigma2() -> SpinConfiguration {
        SpinConfiguration::new(vec![-1, -1, 1, -1, 1]).unwrap()
    }

    #[test]
    fn swap_of_reference_configuration() {
        let s = sigma2().swapped();
        assert_eq!(s.spins(), &[-1, 1, -1, 1, 1]);
        assert_eq!(s.swapped(), sigma2());
    }

    #[test]
    fn swap_is_flip_after_reflect() {
        let s = sigma2();
        assert_eq!(s.swapped(), s.reflected().flipped());
        assert_eq!(s.swapped(), s.flipped().reflected());
    }

    #[test]
    fn extension_under_pm() {
        let s = sigma2();
        let bc = BoundaryCondition::PM;
        assert_eq!(s.extended(-3, bc), -1);
        assert_eq!(s.extended(-100, bc), -1);
        assert_eq!(s.extended(3, bc), 1);
        assert_eq!(s.extended(1, bc), -1);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(SpinConfiguration::new(vec![1, 1]).is_err());
        assert!(SpinConfiguration::new(vec![1, 0, 1]).is_err());
        assert!(SpinConfiguration::from_packed(1, 8).is_err());
        assert!(BoundaryCondition::new(2, 1).is_err());
    }

    #[test]
    fn cap_enforced() {
        assert!(Volume::new(12).check_enumerable().is_ok());
        assert!(matches!(
            Volume::new(13).check_enumerable(),
            Err(Error::CapExceeded { n: 13, cap: 12 })
        ));
        assert!(Volume::with_cap(13, 14).unwrap().check_enumerable().is_ok());
        assert!(Volume::with_cap(3, 40).is_err());
    }

    #[test]
    fn packed_bit_order() {
        // bit 0 is site -n
        let c = SpinConfiguration::from_packed(1, 0b001).unwrap();
        assert_eq!(c.spins(), &[1, -1, -1]);
        assert_eq!(c.spin(-1), 1);
    }

    proptest! {
        #[test]
        fn packed_round_trip(n in 0usize..=8, raw in any::<u64>()) {
            let index = raw & ((1u64 << (2 * n + 1)) - 1);
            let c = SpinConfiguration::from_packed(n, index).unwrap();
            prop_assert_eq!(c.packed().unwrap(), index);
            prop_assert_eq!(c.half_width(), n);
        }

        #[test]
        fn symmetry_maps_are_involutions(spins in prop::collection::vec(prop::bool::ANY, 0..6usize)) {
            let mut s: Vec<i8> = spins.into_iter().map(|b| if b { 1 } else { -1 }).collect();
            s.push(1);
            if s.len().is_multiple_of(2) { s.push(-1); }
            let c = SpinConfiguration::new(s).unwrap();
            prop_assert_eq!(c.flipped().flipped(), c.clone());
            prop_assert_eq!(c.reflected().reflected(), c.clone());
            prop_assert_eq!(c.swapped().swapped(), c.clone());
            prop_assert_eq!(c.swapped(), c.flipped().reflected());
        }
    }
}
