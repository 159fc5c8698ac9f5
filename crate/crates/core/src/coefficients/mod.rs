//! Coefficient and weight sequences and the Weyl-multiplier conditions.
//!
//! Four series decide the convergence theorems:
//!
//! * `L = sum_{n>=1} |a_n|^2 log2^2(n+1)` (a.e. convergence),
//! * `sum_k (sum_{n in M_k} |a_n|^2 log2^2 n)^{1/2}` over the blocks
//!   `M_k = (nu_k, nu_{k+1}]`, `nu_k = 2^(2^k)` (unconditional convergence),
//! * `sum_{n>=2} |a_n|^2 log2^2(n) w_n` and `sum_{n>=2} 1/(n log2(n) w_n)`
//!   (the Weyl-multiplier form of unconditional convergence).
//!
//! Partial sums are computed with compensated summation. Convergence is only
//! ever *classified* for the parametric families, by exponent rules;
//! explicit finite lists always report [`Classification::UnknownFromTruncation`].

mod condensation;
mod conditions;

pub use condensation::{condensation_chain, orlicz_reduction, BlockTerm, CondensationReport, ReductionReport};
pub use conditions::{orlicz_conditions, tandori_blocks, tandori_sum, weyl_l, TandoriBlocks, MAX_TRUNCATION};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Partial sums are recorded for every index up to this many terms and at
/// power-of-two checkpoints beyond.
pub const DENSE_PARTIALS: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceForm {
    /// `a_1, a_2, ...`; zero past the end of the list.
    Explicit(Vec<f64>),
    /// `a_n = c n^(-alpha) log2(n+1)^(-beta)`.
    PowerLog { c: f64, alpha: f64, beta: f64 },
}

/// A coefficient sequence `a = (a_n)`. Conditions only see `|a_n|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub form: SequenceForm,
    #[serde(default = "default_length_hint")]
    pub length_hint: u64,
}

fn default_length_hint() -> u64 {
    DENSE_PARTIALS
}

impl SequenceSpec {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let s = Self {
            length_hint: values.len() as u64,
            form: SequenceForm::Explicit(values),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn power_log(c: f64, alpha: f64, beta: f64) -> Result<Self> {
        let s = Self {
            form: SequenceForm::PowerLog { c, alpha, beta },
            length_hint: default_length_hint(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.form {
            SequenceForm::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::Sequence("explicit sequence is empty".into()));
                }
                if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                    return Err(Error::Sequence(format!("a_{} is not finite", i + 1)));
                }
            }
            SequenceForm::PowerLog { c, alpha, beta } => {
                if !(c.is_finite() && *c >= 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return Err(Error::Sequence(format!(
                        "PowerLog needs finite exponents and c >= 0, got c={c}, alpha={alpha}, beta={beta}"
                    )));
                }
            }
        }
        if self.length_hint == 0 {
            return Err(Error::Sequence("length_hint must be positive".into()));
        }
        Ok(())
    }

    /// `|a_n|` for `n >= 1`.
    #[inline]
    pub fn magnitude(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        match &self.form {
            SequenceForm::Explicit(v) => v.get((n - 1) as usize).map_or(0.0, |x| x.abs()),
            SequenceForm::PowerLog { c, alpha, beta } => {
                let nf = n as f64;
                c * nf.powf(-alpha) * ((nf + 1.0).log2()).powf(-beta)
            }
        }
    }

    /// `a_1..a_count` (signed for explicit lists).
    pub fn values(&self, count: usize) -> Vec<f64> {
        match &self.form {
            SequenceForm::Explicit(v) => (0..count).map(|i| v.get(i).copied().unwrap_or(0.0)).collect(),
            SequenceForm::PowerLog { .. } => (1..=count as u64).map(|n| self.magnitude(n)).collect(),
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.form, SequenceForm::Explicit(_))
    }

    /// Index of the last explicitly listed term.
    pub fn explicit_len(&self) -> Option<u64> {
        match &self.form {
            SequenceForm::Explicit(v) => Some(v.len() as u64),
            SequenceForm::PowerLog { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightForm {
    /// `w_1, w_2, ...`; evaluating past the end is an error.
    Explicit(Vec<f64>),
    /// `w_n = max(w_1, f(n))` with `f(n) = max(1, log2(n + shift))^gamma`.
    LogPower { gamma: f64, shift: f64 },
}

/// A positive nondecreasing weight sequence `w = (w_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub form: WeightForm,
}

impl WeightSpec {
    pub fn log_power(gamma: f64) -> Result<Self> {
        Self::log_power_shifted(gamma, 0.0)
    }

    pub fn log_power_shifted(gamma: f64, shift: f64) -> Result<Self> {
        let w = Self {
            form: WeightForm::LogPower { gamma, shift },
        };
        w.validate()?;
        Ok(w)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let w = Self {
            form: WeightForm::Explicit(values),
        };
        w.validate()?;
        Ok(w)
    }

    /// Positivity and monotonicity. Explicit lists are checked entry by
    /// entry; the `LogPower` form is nondecreasing by construction.
    pub fn validate(&self) -> Result<()> {
        match &self.form {
            WeightForm::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::Weight("explicit weight list is empty".into()));
                }
                if let Some(i) = v.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::Weight(format!("w_{} = {} is not positive", i + 1, v[i])));
                }
                if let Some(i) = v.windows(2).position(|p| p[1] < p[0]) {
                    return Err(Error::Weight(format!(
                        "weights decrease at n = {}: w_{} = {} > w_{} = {}",
                        i + 2,
                        i + 1,
                        v[i],
                        i + 2,
                        v[i + 1]
                    )));
                }
                Ok(())
            }
            WeightForm::LogPower { gamma, shift } => {
                if !(gamma.is_finite() && shift.is_finite() && *shift >= 0.0) {
                    return Err(Error::Weight(format!(
                        "LogPower needs finite gamma and shift >= 0, got gamma={gamma}, shift={shift}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn log_power_raw(gamma: f64, log2_arg: f64) -> f64 {
        log2_arg.max(1.0).powf(gamma)
    }

    /// `w_n` for `n >= 1`.
    pub fn value(&self, n: u64) -> Result<f64> {
        match &self.form {
            WeightForm::Explicit(v) => v
                .get((n - 1) as usize)
                .copied()
                .ok_or_else(|| Error::Weight(format!("explicit weight has {} entries, w_{n} requested", v.len()))),
            WeightForm::LogPower { gamma, shift } => {
                let w1 = Self::log_power_raw(*gamma, (1.0 + shift).log2());
                Ok(w1.max(Self::log_power_raw(*gamma, (n as f64 + shift).log2())))
            }
        }
    }

    /// `w` at the index `2^e`, for exponents far beyond `u64`.
    pub fn value_at_pow2(&self, e: f64) -> Result<f64> {
        match &self.form {
            WeightForm::Explicit(_) => {
                if e > 63.0 {
                    return Err(Error::Weight(format!("explicit weight too short for index 2^{e}")));
                }
                self.value(1u64 << (e as u32))
            }
            WeightForm::LogPower { gamma, shift } => {
                let w1 = Self::log_power_raw(*gamma, (1.0 + shift).log2());
                // log2(2^e + shift) = e + log2(1 + shift 2^-e)
                let arg = e + (shift * (-e).exp2()).ln_1p() / std::f64::consts::LN_2;
                Ok(w1.max(Self::log_power_raw(*gamma, arg)))
            }
        }
    }

    pub fn explicit_len(&self) -> Option<u64> {
        match &self.form {
            WeightForm::Explicit(v) => Some(v.len() as u64),
            WeightForm::LogPower { .. } => None,
        }
    }

    /// Growth exponent `g` with `w_n ~ (log n)^g`; `None` for explicit lists.
    pub(crate) fn effective_gamma(&self) -> Option<f64> {
        match &self.form {
            WeightForm::Explicit(_) => None,
            WeightForm::LogPower { gamma, .. } => Some(gamma.max(0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    /// `sum |a_n|^2 log2^2(n+1)`.
    MR3,
    /// Blocked sum over `M_k`.
    Tandori7,
    /// `sum |a_n|^2 log2^2(n) w_n`.
    Orlicz8,
    /// `sum 1/(n log2(n) w_n)`.
    Orlicz9,
    /// `sum 1/(n w_(2^n))`.
    CondensedDyadic,
    /// `sum 1/w_(nu_n)`.
    CondensedDoubleDyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Converges,
    Diverges,
    UnknownFromTruncation,
}

impl Classification {
    pub fn from_bool(converges: bool) -> Self {
        if converges {
            Classification::Converges
        } else {
            Classification::Diverges
        }
    }
}

/// Running partial sums of one nonnegative series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    /// Index (term count, block index, or condensation exponent) at which
    /// each partial sum was recorded.
    pub checkpoints: Vec<u64>,
    pub partial_sums: Vec<f64>,
    /// The last partial sum.
    pub total: f64,
    pub classification: Classification,
    pub truncation_length: u64,
    /// True when the truncation covers every listed term of an explicit
    /// sequence, so `total` is the full sum of the zero-extended sequence.
    pub support_exhausted: bool,
}

/// Records partial sums densely up to [`DENSE_PARTIALS`] and at powers of two
/// (plus the final index) beyond.
#[derive(Debug, Default)]
pub(crate) struct PartialRecorder {
    sum: crate::summation::NeumaierSum,
    checkpoints: Vec<u64>,
    partials: Vec<f64>,
}

impl PartialRecorder {
    pub fn push(&mut self, index: u64, term: f64, is_last: bool) {
        self.sum.add(term);
        if index <= DENSE_PARTIALS || index.is_power_of_two() || is_last {
            self.checkpoints.push(index);
            self.partials.push(self.sum.value());
        }
    }

    pub fn push_always(&mut self, index: u64, term: f64) {
        self.sum.add(term);
        self.checkpoints.push(index);
        self.partials.push(self.sum.value());
    }

    pub fn finish(
        self,
        condition_id: ConditionId,
        classification: Classification,
        truncation_length: u64,
        support_exhausted: bool,
    ) -> ConditionReport {
        let total = self.sum.value();
        ConditionReport {
            condition_id,
            checkpoints: self.checkpoints,
            partial_sums: self.partials,
            total,
            classification,
            truncation_length,
            support_exhausted,
        }
    }
}

/// Exponent rules for the series used by the classifiers. Each is a textbook
/// test applied to the asymptotic form of the terms.
pub mod rules {
    /// `sum n^-p (log n)^-q` converges iff `p > 1`, or `p = 1` and `q > 1`.
    pub fn bertrand(p: f64, q: f64) -> bool {
        p > 1.0 || (p == 1.0 && q > 1.0)
    }

    /// `sum n^-p` converges iff `p > 1`.
    pub fn p_series(p: f64) -> bool {
        p > 1.0
    }

    /// `sum r^n` (`r >= 0`) converges iff `r < 1`.
    pub fn geometric(r: f64) -> bool {
        r < 1.0
    }
}
