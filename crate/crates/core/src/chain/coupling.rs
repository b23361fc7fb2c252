//! Coupling families `n ↦ I_n` and their validators.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a [`CouplingTable`] answers queries for indices it does not store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extension {
    /// Fall back to the mirrored index `1 - k`, so `I_k = I_{1-k}`.
    Reflect,
    /// Any unstored index is an error.
    Strict,
}

/// Explicit coupling values keyed by bond index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    entries: BTreeMap<i64, f64>,
    extension: Extension,
}

impl CouplingTable {
    pub fn new(entries: BTreeMap<i64, f64>, extension: Extension) -> Result<Self> {
        if let Some((k, v)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling at index {k} is not finite ({v})"
            )));
        }
        Ok(Self { entries, extension })
    }

    pub fn entries(&self) -> &BTreeMap<i64, f64> {
        &self.entries
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    fn get(&self, index: i64) -> Result<f64> {
        if let Some(&v) = self.entries.get(&index) {
            return Ok(v);
        }
        match self.extension {
            Extension::Reflect => self
                .entries
                .get(&(1 - index))
                .copied()
                .ok_or(Error::CouplingOutOfRange { index }),
            Extension::Strict => Err(Error::CouplingOutOfRange { index }),
        }
    }

    /// Reads a two-column `index,value` CSV. A non-numeric first row is
    /// treated as a header and skipped.
    pub fn from_csv_path(path: &Path, extension: Extension) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file, extension).map_err(|reason| Error::Table {
            path: path.to_path_buf(),
            reason,
        })
    }

    fn from_csv_reader<R: std::io::Read>(
        reader: R,
        extension: Extension,
    ) -> std::result::Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut entries = BTreeMap::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            if record.len() != 2 {
                return Err(format!(
                    "row {} has {} columns, expected 2",
                    row + 1,
                    record.len()
                ));
            }
            let index = record[0].parse::<i64>();
            let value = record[1].parse::<f64>();
            match (index, value) {
                (Ok(k), Ok(v)) => {
                    if entries.insert(k, v).is_some() {
                        return Err(format!("index {k} appears twice"));
                    }
                }
                _ if row == 0 => continue,
                _ => return Err(format!("row {} is not `integer,real`", row + 1)),
            }
        }
        if entries.is_empty() {
            return Err("table has no entries".into());
        }
        CouplingTable::new(entries, extension).map_err(|e| e.to_string())
    }
}

/// The map `n ↦ I_n` giving the penalty on bond `(n-1, n)` when its spins disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingFamily {
    /// `I_n = value` everywhere (the homogeneous Ising chain).
    Constant {
        value: f64,
    },
    /// `I_n = |n|`.
    AbsoluteValue,
    /// Sullivan-type growth: `I_n = n` for `n > 0`, `I_n = 1 - n` for `n <= 0`.
    Sullivan,
    Table(CouplingTable),
}

impl CouplingFamily {
    pub fn constant(value: f64) -> Self {
        CouplingFamily::Constant { value }
    }

    pub fn value(&self, index: i64) -> Result<f64> {
        match self {
            CouplingFamily::Constant { value } => Ok(*value),
            CouplingFamily::AbsoluteValue => Ok(index.unsigned_abs() as f64),
            CouplingFamily::Sullivan => Ok(if index > 0 {
                index as f64
            } else {
                (1 - index) as f64
            }),
            CouplingFamily::Table(t) => t.get(index),
        }
    }

    /// Couplings `I_lo ..= I_hi` in index order.
    pub fn values(&self, lo: i64, hi: i64) -> Result<Vec<f64>> {
        (lo..=hi).map(|k| self.value(k)).collect()
    }

    /// Bond couplings for the volume `[-n, n]`: entry `j` is `I_{j-n}`,
    /// covering the left boundary bond `I_{-n}` through the right one `I_{n+1}`.
    pub fn bond_couplings(&self, n: usize) -> Result<Vec<f64>> {
        let n = n as i64;
        self.values(-n, n + 1)
    }

    /// Scans `I_k + I_{k+r} >= r` for `k` in `indices` and `1 <= r <= r_max`.
    pub fn validate_growth(
        &self,
        indices: std::ops::RangeInclusive<i64>,
        r_max: u32,
    ) -> Result<ValidationReport<GrowthViolation>> {
        let mut report = ValidationReport::default();
        for k in indices {
            let base = self.value(k)?;
            for r in 1..=i64::from(r_max) {
                let sum = base + self.value(k + r)?;
                report.scanned += 1;
                if sum < r as f64 {
                    report.violations.push(GrowthViolation {
                        index: k,
                        gap: r,
                        sum,
                    });
                }
            }
        }
        Ok(report)
    }

    /// Lists every `k` in `indices` with `I_k != I_{1-k}`.
    pub fn validate_reflection(
        &self,
        indices: std::ops::RangeInclusive<i64>,
    ) -> Result<ValidationReport<ReflectionViolation>> {
        let mut report = ValidationReport::default();
        for k in indices {
            let here = self.value(k)?;
            let mirror = self.value(1 - k)?;
            report.scanned += 1;
            if here != mirror {
                report.violations.push(ReflectionViolation {
                    index: k,
                    here,
                    mirror,
                });
            }
        }
        Ok(report)
    }

    /// Fails with [`Error::SymmetryViolated`] unless `I_k = I_{1-k}` on `indices`.
    pub fn require_reflection(&self, indices: std::ops::RangeInclusive<i64>) -> Result<()> {
        let report = self.validate_reflection(indices)?;
        if report.holds() {
            Ok(())
        } else {
            Err(Error::SymmetryViolated {
                indices: report.violations.iter().map(|v| v.index).collect(),
            })
        }
    }

    /// Partial sums of `exp(-2 β I_k)` for `k = 1..=terms`.
    pub fn summability(&self, beta: f64, terms: usize) -> Result<SummabilityReport> {
        if terms == 0 {
            return Err(Error::InvalidParameter(
                "summability needs at least one term".into(),
            ));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let mut partial_sums = Vec::with_capacity(terms);
        let mut increments = Vec::with_capacity(terms);
        let mut acc = 0.0;
        for k in 1..=terms as i64 {
            let term = (-2.0 * beta * self.value(k)?).exp();
            acc += term;
            increments.push(term);
            partial_sums.push(acc);
        }
        let tail_ratio = match increments.as_slice() {
            [.., prev, last] if *prev > 0.0 => Some(last / prev),
            _ => None,
        };
        Ok(SummabilityReport {
            partial_sums,
            tail_ratio,
        })
    }
}

impl fmt::Display for CouplingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingFamily::Constant { value } => write!(f, "const:{value}"),
            CouplingFamily::AbsoluteValue => f.write_str("abs"),
            CouplingFamily::Sullivan => f.write_str("sullivan25"),
            CouplingFamily::Table(t) => {
                write!(f, "table[{} entries", t.entries.len())?;
                if t.extension == Extension::Reflect {
                    f.write_str(";sym8")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl FromStr for CouplingFamily {
    type Err = Error;

    /// Accepts `const:<I>`, `abs`, `sullivan25`, and `table:<path>[;sym8]`.
    fn from_str(spec: &str) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidFamily {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        match spec {
            "abs" => return Ok(CouplingFamily::AbsoluteValue),
            "sullivan25" => return Ok(CouplingFamily::Sullivan),
            _ => {}
        }
        if let Some(raw) = spec.strip_prefix("const:") {
            let value: f64 = raw
                .parse()
                .map_err(|_| invalid("constant is not a number"))?;
            if !value.is_finite() {
                return Err(invalid("constant must be finite"));
            }
            return Ok(CouplingFamily::constant(value));
        }
        if let Some(rest) = spec.strip_prefix("table:") {
            let (path, extension) = match rest.strip_suffix(";sym8") {
                Some(p) => (p, Extension::Reflect),
                None => (rest, Extension::Strict),
            };
            if path.is_empty() {
                return Err(invalid("missing table path"));
            }
            return CouplingTable::from_csv_path(&PathBuf::from(path), extension)
                .map(CouplingFamily::Table);
        }
        Err(invalid(
            "expected const:<I>, abs, sullivan25 or table:<path>[;sym8]",
        ))
    }
}

/// Outcome of a finite-window condition scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport<V> {
    pub scanned: usize,
    pub violations: Vec<V>,
}

impl<V> Default for ValidationReport<V> {
    fn default() -> Self {
        Self {
            scanned: 0,
            violations: Vec::new(),
        }
    }
}

impl<V> ValidationReport<V> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthViolation {
    pub index: i64,
    pub gap: i64,
    /// `I_index + I_{index+gap}`, which fell below `gap`.
    pub sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectionViolation {
    pub index: i64,
    pub here: f64,
    pub mirror: f64,
}

/// Partial sums of `exp(-2 β I_k)`, the series whose finiteness decides
/// whether the half-line chain has a phase transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub partial_sums: Vec<f64>,
    /// Ratio of the last two increments; `None` if the second-to-last was zero.
    pub tail_ratio: Option<f64>,
}

impl SummabilityReport {
    /// Ratio-test cutoff below which the series is reported as convergent.
    pub const CONVERGENT_RATIO: f64 = 0.99;

    pub fn last(&self) -> f64 {
        *self.partial_sums.last().expect("at least one term")
    }

    /// Heuristic: geometric-or-faster decay of the increments.
    pub fn looks_convergent(&self) -> bool {
        self.tail_ratio.is_none_or(|r| r < Self::CONVERGENT_RATIO)
    }
}
