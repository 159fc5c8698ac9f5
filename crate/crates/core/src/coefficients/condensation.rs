use super::conditions::{block_sums, orlicz_conditions, tandori_blocks, TandoriBlocks};
use super::{rules, Classification, ConditionId, ConditionReport, PartialRecorder, SequenceSpec, WeightSpec};
use crate::error::{Error, Result};
use crate::slack::{holds, DEFAULT_SLACK};
use crate::summation::neumaier;
use serde::{Deserialize, Serialize};

/// Cap on the exponent of the uncondensed series' truncation `2^terms`.
const LOG_SERIES_MAX_EXP: u32 = 24;

/// Largest accepted condensation exponent.
pub const MAX_CONDENSATION_TERMS: u32 = 1000;

/// The three equivalent series for a weight `w`:
/// `sum_{n>=2} 1/(n log2(n) w_n)`, `sum_{n>=1} 1/(n w_(2^n))` and
/// `c = sum_{n>=0} 1/w_(nu_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensationReport {
    /// Summed over `2 <= n <= 2^min(terms, 24)`.
    pub log_series: ConditionReport,
    /// Summed over `1 <= n <= terms`.
    pub dyadic: ConditionReport,
    /// Summed over `0 <= n <= terms`.
    pub double_dyadic: ConditionReport,
    /// Last partial of the double-dyadic series.
    pub c_estimate: f64,
}

impl CondensationReport {
    pub fn classifications(&self) -> [Classification; 3] {
        [
            self.log_series.classification,
            self.dyadic.classification,
            self.double_dyadic.classification,
        ]
    }

    pub fn agree(&self) -> bool {
        let [a, b, c] = self.classifications();
        a == b && b == c
    }
}

/// Evaluates the condensation chain up to exponent `terms`.
///
/// Each `LogPower` classification comes from its own rule: Bertrand for the
/// log series, the p-series test for the dyadic series and the geometric
/// test for the double-dyadic one.
pub fn condensation_chain(w: &WeightSpec, terms: u32) -> Result<CondensationReport> {
    w.validate()?;
    if terms == 0 || terms > MAX_CONDENSATION_TERMS {
        return Err(Error::Sequence(format!(
            "condensation terms must be in 1..={MAX_CONDENSATION_TERMS}, got {terms}"
        )));
    }
    if let Some(len) = w.explicit_len() {
        // nu_terms = 2^(2^terms) must be listed
        let need_ok = terms <= 5 && len >= 1u64 << (1u32 << terms).min(63);
        if !need_ok {
            return Err(Error::Weight(format!(
                "explicit weight with {len} entries is too short for condensed indices up to nu_{terms}"
            )));
        }
    }
    let g = w.effective_gamma();

    let log_end = 1u64 << terms.min(LOG_SERIES_MAX_EXP);
    let mut r1 = PartialRecorder::default();
    for n in 2..=log_end {
        let nf = n as f64;
        r1.push(n, 1.0 / (nf * nf.log2() * w.value(n)?), n == log_end);
    }
    let c1 = g.map_or(Classification::UnknownFromTruncation, |g| {
        Classification::from_bool(rules::bertrand(1.0, 1.0 + g))
    });

    let mut r2 = PartialRecorder::default();
    for n in 1..=terms {
        r2.push_always(n as u64, 1.0 / (n as f64 * w.value_at_pow2(n as f64)?));
    }
    let c2 = g.map_or(Classification::UnknownFromTruncation, |g| {
        Classification::from_bool(rules::p_series(1.0 + g))
    });

    let mut r3 = PartialRecorder::default();
    for n in 0..=terms {
        // log2(nu_n) = 2^n
        r3.push_always(n as u64, 1.0 / w.value_at_pow2((n as f64).exp2())?);
    }
    let c3 = g.map_or(Classification::UnknownFromTruncation, |g| {
        Classification::from_bool(rules::geometric((-g).exp2()))
    });

    let double_dyadic = r3.finish(ConditionId::CondensedDoubleDyadic, c3, terms as u64, false);
    Ok(CondensationReport {
        log_series: r1.finish(ConditionId::Orlicz9, c1, log_end, false),
        dyadic: r2.finish(ConditionId::CondensedDyadic, c2, terms as u64, false),
        c_estimate: double_dyadic.total,
        double_dyadic,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    pub k: usize,
    pub first: u64,
    pub last: u64,
    /// `A_k = sum_{n in M_k} |a_n|^2 log2^2 n`.
    pub a_k: f64,
    /// `w_(nu_k)`.
    pub weight_at_nu: f64,
}

/// The Cauchy-Schwarz chain reducing the Weyl-multiplier conditions to the
/// blocked condition, evaluated on a truncated range:
///
/// `(sum_k A_k^(1/2))^2 <= c * sum_k A_k w_(nu_k) <= c * sum_{n=3}^T |a_n|^2 log2^2(n) w_n`
///
/// with `c = sum_k 1/w_(nu_k)` over the same blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub truncation: u64,
    pub blocks: TandoriBlocks,
    pub terms: Vec<BlockTerm>,
    pub c_partial: f64,
    pub sum_sqrt_a: f64,
    /// `(sum_k A_k^(1/2))^2`.
    pub lhs: f64,
    /// `c * sum_k A_k w_(nu_k)`.
    pub middle: f64,
    /// `c * sum_{n=3}^T |a_n|^2 log2^2(n) w_n`.
    pub rhs: f64,
    pub slack: f64,
    pub cauchy_schwarz_holds: bool,
    pub monotone_step_holds: bool,
    pub all_hold: bool,
    pub orlicz8: ConditionReport,
    pub orlicz9: ConditionReport,
    /// `Converges` when both Weyl-multiplier conditions are classified
    /// convergent; otherwise unknown.
    pub classification: Classification,
}

pub fn orlicz_reduction(a: &SequenceSpec, w: &WeightSpec, truncation: u64) -> Result<ReductionReport> {
    a.validate()?;
    w.validate()?;
    let blocks = tandori_blocks(truncation)?;
    let (orlicz8, orlicz9) = orlicz_conditions(a, w, truncation)?;
    let sums = block_sums(a, &blocks);
    let mut terms = Vec::with_capacity(sums.len());
    for (k, (&(first, last), &a_k)) in blocks.blocks.iter().zip(&sums).enumerate() {
        let nu = blocks.nu[k];
        let weight_at_nu = w.value(nu)?;
        // monotonicity is what licenses w_(nu_k) <= w_n on M_k
        let w_last = w.value(last)?;
        if w_last < weight_at_nu {
            return Err(Error::Weight(format!(
                "weight decreases on block M_{k}: w_{nu} > w_{last}"
            )));
        }
        terms.push(BlockTerm {
            k,
            first,
            last,
            a_k,
            weight_at_nu,
        });
    }
    let c_partial = neumaier(terms.iter().map(|t| 1.0 / t.weight_at_nu));
    let sum_sqrt_a = neumaier(terms.iter().map(|t| t.a_k.sqrt()));
    let lhs = sum_sqrt_a * sum_sqrt_a;
    let middle = c_partial * neumaier(terms.iter().map(|t| t.a_k * t.weight_at_nu));
    let end = a.explicit_len().map_or(truncation, |l| l.min(truncation));
    let mut tail = Vec::with_capacity(end.saturating_sub(2) as usize);
    for n in 3..=end {
        let m = a.magnitude(n);
        let l = (n as f64).log2();
        tail.push(m * m * l * l * w.value(n)?);
    }
    let rhs = c_partial * neumaier(tail);
    let slack = DEFAULT_SLACK;
    let cauchy_schwarz_holds = holds(lhs, middle, slack);
    let monotone_step_holds = holds(middle, rhs, slack);
    let classification =
        if orlicz8.classification == Classification::Converges && orlicz9.classification == Classification::Converges {
            Classification::Converges
        } else {
            Classification::UnknownFromTruncation
        };
    Ok(ReductionReport {
        truncation,
        blocks,
        terms,
        c_partial,
        sum_sqrt_a,
        lhs,
        middle,
        rhs,
        slack,
        cauchy_schwarz_holds,
        monotone_step_holds,
        all_hold: cauchy_schwarz_holds && monotone_step_holds,
        orlicz8,
        orlicz9,
        classification,
    })
}
