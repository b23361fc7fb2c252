use serde::Serialize;

use crate::error::{Error, Result};

/// Below this β the large-β variance envelope is evaluated but flagged as
/// outside its asymptotic regime.
pub const ASYMPTOTIC_BETA: f64 = 5.0;

/// `Σ_{m≥1} (m + 1/2)² τ^m`: a truncated sum and two closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSeries {
    pub tau: f64,
    pub m_max: u32,
    pub partial: f64,
    /// The compact form `3τ(τ+3) / (4(1-τ)²)` used by the large-β envelope.
    /// It does not agree with the series (0.287037 vs 0.302126 at τ = 0.1).
    pub closed_compact: f64,
    /// `τ(1+τ)/(1-τ)³ + τ/(1-τ)² + τ/(4(1-τ))`, from `Σ m²τ^m`, `Σ mτ^m`, `Σ τ^m`.
    pub closed_exact: f64,
}

pub fn tail_series(tau: f64, m_max: u32) -> Result<TailSeries> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (0, 1), got {tau}"
        )));
    }
    let partial = (1..=m_max)
        .map(|m| {
            let k = f64::from(m) + 0.5;
            k * k * tau.powi(m as i32)
        })
        .sum();
    let q = 1.0 - tau;
    Ok(TailSeries {
        tau,
        m_max,
        partial,
        closed_compact: 3.0 * tau * (tau + 3.0) / (4.0 * q * q),
        closed_exact: tau * (1.0 + tau) / q.powi(3) + tau / (q * q) + tau / (4.0 * q),
    })
}

/// Large-β envelope `1/4 ≤ Var(γ_n) ≲ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEnvelope {
    pub beta: f64,
    pub tau: f64,
    pub lower: f64,
    /// `τ A(τ) cosh(τ²/(1-τ)) / (2 sinh 2τ) · (1 + 3τ(τ+3)/(1-τ)²)`.
    pub upper: f64,
    /// Same prefactor with the exact tail sum: `… · (1 + 4 Σ(m+1/2)²τ^m)`.
    pub upper_exact_series: f64,
    /// `β ≥ ASYMPTOTIC_BETA`; below that the bound is only indicative.
    pub asymptotic_regime: bool,
}

/// `A(τ) = cosh(τ²/(1-τ)) cosh(τ(1+τ)) - sinh(τ²) sinh(τ(1+τ))`.
fn a_factor(tau: f64) -> f64 {
    let c = (tau * tau / (1.0 - tau)).cosh();
    c * (tau * (1.0 + tau)).cosh() - (tau * tau).sinh() * (tau * (1.0 + tau)).sinh()
}

pub fn variance_envelope(beta: f64) -> Result<VarianceEnvelope> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let tau = (-beta).exp();
    let q = 1.0 - tau;
    // τ / (2 sinh 2τ) → 1/4 as τ → 0; evaluated without cancellation
    let ratio = if tau > 0.0 {
        tau / (2.0 * (2.0 * tau).sinh())
    } else {
        0.25
    };
    let prefactor = ratio * a_factor(tau) * (tau * tau / q).cosh();
    let exact = if tau > 0.0 {
        tail_series(tau, 0)?.closed_exact
    } else {
        0.0
    };
    Ok(VarianceEnvelope {
        beta,
        tau,
        lower: 0.25,
        upper: prefactor * (1.0 + 3.0 * tau * (tau + 3.0) / (q * q)),
        upper_exact_series: prefactor * (1.0 + 4.0 * exact),
        asymptotic_regime: beta >= ASYMPTOTIC_BETA,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_reference_values() {
        let s = tail_series(0.1, 30).unwrap();
        assert!((s.partial - 0.302126).abs() < 5e-7, "{}", s.partial);
        assert!((s.closed_compact - 0.287037).abs() < 5e-7);
        assert!((s.closed_exact - s.partial).abs() < 1e-12);
        assert!((s.closed_exact - s.closed_compact).abs() > 1e-2);
    }

    #[test]
    fn series_small_tau_leading_term() {
        let tau = 1e-8;
        let s = tail_series(tau, 40).unwrap();
        for v in [s.partial, s.closed_compact, s.closed_exact] {
            assert!((v / tau - 2.25).abs() < 1e-6);
        }
    }

    #[test]
    fn series_domain() {
        assert!(tail_series(0.0, 5).is_err());
        assert!(tail_series(1.0, 5).is_err());
        assert!(tail_series(f64::NAN, 5).is_err());
    }

    #[test]
    fn envelope_limits() {
        let far = variance_envelope(60.0).unwrap();
        assert!((far.upper - 0.25).abs() < 1e-20);
        assert_eq!(variance_envelope(1e4).unwrap().upper, 0.25);
        let five = variance_envelope(5.0).unwrap();
        assert!(five.upper >= 0.25 && five.asymptotic_regime);
        assert!(five.upper_exact_series > five.upper);
        let hot = variance_envelope(0.1).unwrap();
        assert!(!hot.asymptotic_regime && hot.upper.is_finite());
        assert!(variance_envelope(0.0).is_err());
        assert!(variance_envelope(-1.0).is_err());
    }

    #[test]
    fn envelope_first_order() {
        // upper ≈ 1/4 + 9τ/4 for small τ
        let e = variance_envelope(12.0).unwrap();
        assert!(((e.upper - 0.25) / e.tau - 2.25).abs() < 1e-3);
    }
}
