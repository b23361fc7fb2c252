//! Invariant suite run by `pspchain verify`: oracle agreement, symmetry
//! identities, PSP conditions and probability bounds on small volumes.

use serde::Serialize;

use crate::chain::{energy, BoundaryCondition, CouplingFamily, SpinConfiguration, Volume};
use crate::error::Result;
use crate::kernel::PackedChain;
use crate::partition::{brute_force_partition, closed_form_partition, recursive_partition};
use crate::psp::{
    contour_probability, decomposition_check, majority_class, maximizers, necessary_conditions,
    psp, psp_distribution, psp_moments, ContourQuery, InterfaceIndex,
};

/// Every check the suite must run. A missing id means a check was dropped.
pub const REQUIRED_CHECKS: &[&str] = &[
    "reflection-symmetric-couplings",
    "partition-oracles-agree",
    "boundary-flip-invariance",
    "mixed-energy-swap-invariance",
    "psp-swap-antisymmetry",
    "majority-class-swap",
    "psp-law-symmetric",
    "psp-mean-zero",
    "psp-law-normalized",
    "psp-necessary-conditions",
    "contour-wall-bound",
    "crystal-below-rarefied",
    "variance-at-least-quarter",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub max_n: usize,
    pub partition_betas: &'static [f64],
    pub psp_betas: &'static [f64],
    pub decomposition_betas: &'static [f64],
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            max_n: 4,
            partition_betas: &[0.25, 1.0, 4.0],
            psp_betas: &[0.5, 1.0, 2.0],
            decomposition_betas: &[1.0, 2.0, 4.0],
        }
    }
}

/// The ids in `REQUIRED_CHECKS` that `outcomes` does not cover.
pub fn missing_checks(outcomes: &[CheckOutcome]) -> Vec<&'static str> {
    REQUIRED_CHECKS
        .iter()
        .copied()
        .filter(|id| !outcomes.iter().any(|o| o.id == *id))
        .collect()
}

pub fn run_suite(family: &CouplingFamily, cfg: SuiteConfig) -> Vec<CheckOutcome> {
    type Check = fn(&CouplingFamily, &SuiteConfig) -> Result<(bool, String)>;
    let checks: [(&'static str, Check); 13] = [
        ("reflection-symmetric-couplings", reflection_symmetric),
        ("partition-oracles-agree", partition_oracles),
        ("boundary-flip-invariance", boundary_flip),
        ("mixed-energy-swap-invariance", energy_swap),
        ("psp-swap-antisymmetry", psp_swap),
        ("majority-class-swap", class_swap),
        ("psp-law-symmetric", law_symmetric),
        ("psp-mean-zero", mean_zero),
        ("psp-law-normalized", normalized),
        ("psp-necessary-conditions", necessary),
        ("contour-wall-bound", contour_bound),
        ("crystal-below-rarefied", crystal_bound),
        ("variance-at-least-quarter", variance_floor),
    ];
    checks
        .iter()
        .map(|&(id, check)| match check(family, &cfg) {
            Ok((passed, detail)) => CheckOutcome { id, passed, detail },
            Err(e) => CheckOutcome {
                id,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn configs(n: usize) -> impl Iterator<Item = SpinConfiguration> {
    (0..1u64 << (2 * n + 1)).map(move |b| SpinConfiguration::from_packed(n, b).expect("fits"))
}

fn reflection_symmetric(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let hi = c.max_n as i64 + 1;
    let report = f.validate_reflection(-hi..=hi)?;
    Ok((
        report.holds(),
        format!(
            "{} indices scanned, {} violations",
            report.scanned,
            report.violations.len()
        ),
    ))
}

fn partition_oracles(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &beta in c.partition_betas {
        let rec = recursive_partition(f, beta, c.max_n)?;
        for n in 0..=c.max_n {
            let closed = closed_form_partition(f, beta, n)?;
            let v = Volume::new(n);
            let plus = brute_force_partition(f, beta, v, BoundaryCondition::PLUS)?;
            let mixed = brute_force_partition(f, beta, v, BoundaryCondition::PM)?;
            worst = worst
                .max(closed.log_distance(&rec[n]))
                .max(closed.plus.log_distance(plus))
                .max(closed.mixed.log_distance(mixed));
        }
    }
    Ok((worst <= 1e-10, format!("max |Δ log Z| = {worst:.3e}")))
}

fn boundary_flip(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &beta in c.partition_betas {
        for n in 0..=c.max_n {
            let v = Volume::new(n);
            for (a, b) in [
                (BoundaryCondition::PLUS, BoundaryCondition::MINUS),
                (BoundaryCondition::PM, BoundaryCondition::MP),
            ] {
                let za = brute_force_partition(f, beta, v, a)?;
                let zb = brute_force_partition(f, beta, v, b)?;
                worst = worst.max(za.log_distance(zb));
            }
        }
    }
    Ok((worst <= 1e-12, format!("max relative gap = {worst:.3e}")))
}

fn energy_swap(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut bad = 0usize;
    let mut total = 0usize;
    for n in 0..=c.max_n {
        for s in configs(n) {
            total += 1;
            let h = energy(&s, f, BoundaryCondition::PM)?;
            if h != energy(&s.swapped(), f, BoundaryCondition::PM)? {
                bad += 1;
            }
        }
    }
    Ok((
        bad == 0,
        format!("{bad} of {total} configurations change energy"),
    ))
}

fn psp_swap(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut bad = 0usize;
    let mut total = 0usize;
    for n in 0..=c.max_n {
        let chain = PackedChain::new(f, Volume::new(n))?;
        for s in configs(n) {
            total += 1;
            let g = psp(&s);
            let packed = chain.psp_twice(s.packed()?);
            if psp(&s.swapped()) != g.negated() || packed != g.twice() {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("{bad} of {total} configurations fail")))
}

fn class_swap(_: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut bad = 0usize;
    for n in 0..=c.max_n {
        for s in configs(n) {
            if majority_class(&s) == majority_class(&s.swapped()) {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("{bad} configurations keep their class")))
}

fn law_symmetric(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &beta in c.psp_betas {
        for n in 0..=c.max_n {
            worst = worst.max(psp_distribution(f, beta, Volume::new(n))?.symmetry_defect());
        }
    }
    Ok((worst <= 1e-12, format!("max |P(θ) - P(-θ)| = {worst:.3e}")))
}

fn mean_zero(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &beta in c.psp_betas {
        for n in 0..=c.max_n {
            let m = psp_moments(&psp_distribution(f, beta, Volume::new(n))?);
            worst = worst.max(m.mean.abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |mean| = {worst:.3e}")))
}

fn normalized(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &beta in c.psp_betas {
        for n in 0..=c.max_n {
            let d = psp_distribution(f, beta, Volume::new(n))?;
            worst = worst.max((d.total_probability() - 1.0).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |Σ P - 1| = {worst:.3e}")))
}

fn necessary(_: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut bad = 0usize;
    let mut total = 0usize;
    for n in 0..=c.max_n {
        for s in configs(n) {
            total += 1;
            if !necessary_conditions(&s, psp(&s))?.satisfied {
                bad += 1;
            }
        }
    }
    let reference = SpinConfiguration::new(vec![-1, -1, 1, -1, 1])?;
    let expected = [
        InterfaceIndex::from_twice(-1)?,
        InterfaceIndex::from_twice(3)?,
    ];
    let reference_ok = maximizers(&reference) == expected
        && psp(&reference) == expected[1]
        && necessary_conditions(&reference, expected[0])?.satisfied;
    Ok((
        bad == 0 && reference_ok,
        format!("{bad} of {total} PSPs fail; reference configuration ok = {reference_ok}"),
    ))
}

fn contour_bound(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut bad = 0usize;
    let mut total = 0usize;
    let mut tightest: f64 = 0.0;
    for &beta in c.psp_betas {
        for n in 0..=c.max_n {
            for q in ContourQuery::all(n) {
                let p = contour_probability(f, beta, Volume::new(n), q)?;
                total += 1;
                tightest = tightest.max(p.probability / p.bound);
                if p.probability > p.bound {
                    bad += 1;
                }
            }
        }
    }
    Ok((
        bad == 0,
        format!("{bad} of {total} sets exceed the bound; max ratio {tightest:.4}"),
    ))
}

fn crystal_bound(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut ok = true;
    let mut joint: f64 = 0.0;
    let mut gap: f64 = 0.0;
    for &beta in c.decomposition_betas {
        for n in 0..=c.max_n {
            let r = decomposition_check(f, beta, Volume::new(n))?;
            ok &= r.bounds_hold();
            joint = joint.max(r.max_joint_error());
            gap = gap.max(r.max_product_gap());
        }
    }
    Ok((
        ok && joint <= 1e-12,
        format!("bounds hold = {ok}; joint error {joint:.3e}; block-product gap {gap:.3e}"),
    ))
}

fn variance_floor(f: &CouplingFamily, c: &SuiteConfig) -> Result<(bool, String)> {
    let mut lowest = f64::INFINITY;
    for &beta in c.psp_betas.iter().chain(c.decomposition_betas) {
        for n in 0..=c.max_n {
            let m = psp_moments(&psp_distribution(f, beta, Volume::new(n))?);
            lowest = lowest.min(m.variance);
        }
    }
    Ok((lowest >= 0.25 - 1e-12, format!("min Var = {lowest:.15}")))
}
