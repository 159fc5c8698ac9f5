use super::{
    rules, Classification, ConditionId, ConditionReport, PartialRecorder, SequenceForm, SequenceSpec, WeightSpec,
};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest supported truncation length.
pub const MAX_TRUNCATION: u64 = 1 << 32;

fn check_truncation(t: u64, min: u64) -> Result<()> {
    if t > MAX_TRUNCATION {
        return Err(Error::TruncationTooLarge(t));
    }
    if t < min {
        return Err(Error::Sequence(format!("truncation must be >= {min}, got {t}")));
    }
    Ok(())
}

/// Last index worth visiting: explicit lists are zero past their end.
fn effective_end(a: &SequenceSpec, t: u64) -> u64 {
    a.explicit_len().map_or(t, |len| len.min(t))
}

fn exhausted(a: &SequenceSpec, t: u64) -> bool {
    a.explicit_len().is_some_and(|len| t >= len)
}

fn log2_sq(x: f64) -> f64 {
    let l = x.log2();
    l * l
}

/// Partial sums of `L = sum_{n=1}^{T} |a_n|^2 log2^2(n+1)`.
///
/// `PowerLog` terms behave like `n^(-2 alpha) (log n)^(2 - 2 beta)`, so the
/// series converges iff `2 alpha > 1`, or `2 alpha = 1` and `2 beta - 2 > 1`.
pub fn weyl_l(a: &SequenceSpec, truncation: u64) -> Result<ConditionReport> {
    a.validate()?;
    check_truncation(truncation, 1)?;
    let end = effective_end(a, truncation);
    let mut rec = PartialRecorder::default();
    for n in 1..=end {
        let m = a.magnitude(n);
        rec.push(n, m * m * log2_sq(n as f64 + 1.0), n == truncation);
    }
    if end < truncation {
        rec.push_always(truncation, 0.0);
    }
    let class = match a.form {
        SequenceForm::Explicit(_) => Classification::UnknownFromTruncation,
        SequenceForm::PowerLog { c: 0.0, .. } => Classification::Converges,
        SequenceForm::PowerLog { alpha, beta, .. } => {
            Classification::from_bool(rules::bertrand(2.0 * alpha, 2.0 * beta - 2.0))
        }
    };
    Ok(rec.finish(ConditionId::MR3, class, truncation, exhausted(a, truncation)))
}

/// Thresholds `nu_k = 2^(2^k)` and blocks `M_k = {nu_k + 1, ..., nu_{k+1}}`
/// cut at the truncation length. Indices 1 and 2 belong to no block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TandoriBlocks {
    /// Every `nu_k <= truncation`.
    pub nu: Vec<u64>,
    /// Inclusive `(first, last)` of each nonempty `M_k`, the last one possibly partial.
    pub blocks: Vec<(u64, u64)>,
    pub k_max: usize,
    /// Set when `nu_{k+1} = nu_k^2` no longer fits in 64 bits.
    pub capped: bool,
    pub truncation: u64,
}

impl TandoriBlocks {
    /// `N(k) = nu_{k+1} - nu_k`, the length of the full block.
    pub fn full_len(&self, k: usize) -> Option<u128> {
        let nu = *self.nu.get(k)? as u128;
        Some(nu * nu - nu)
    }

    /// Block index containing the 1-based index `n`, if any.
    pub fn block_of(&self, n: u64) -> Option<usize> {
        self.blocks.iter().position(|&(lo, hi)| lo <= n && n <= hi)
    }
}

pub fn tandori_blocks(truncation: u64) -> Result<TandoriBlocks> {
    if truncation < 3 {
        return Err(Error::NoTandoriBlock(truncation));
    }
    check_truncation(truncation, 3)?;
    let mut nu = vec![2u64];
    let mut blocks = Vec::new();
    let mut capped = false;
    loop {
        let cur = *nu.last().unwrap();
        let next = cur.checked_mul(cur);
        if cur < truncation {
            blocks.push((cur + 1, next.map_or(truncation, |x| x.min(truncation))));
        }
        match next {
            Some(x) if x <= truncation => nu.push(x),
            Some(_) => break,
            None => {
                capped = true;
                break;
            }
        }
    }
    Ok(TandoriBlocks {
        k_max: blocks.len() - 1,
        nu,
        blocks,
        capped,
        truncation,
    })
}

/// `A_k = sum_{n in M_k} |a_n|^2 log2^2 n` for every block.
pub(crate) fn block_sums(a: &SequenceSpec, blocks: &TandoriBlocks) -> Vec<f64> {
    let end = effective_end(a, blocks.truncation);
    blocks
        .blocks
        .iter()
        .map(|&(lo, hi)| {
            crate::summation::neumaier((lo..=hi.min(end)).map(|n| {
                let m = a.magnitude(n);
                m * m * log2_sq(n as f64)
            }))
        })
        .collect()
}

/// Partial sums over `k` of `A_k^(1/2)`.
///
/// `PowerLog` classification: with `2 alpha > 1` the blocks decay doubly
/// exponentially; with `2 alpha = 1`, `A_k ~ 2^(k (3 - 2 beta))`, so the sum
/// converges iff `beta > 3/2` (exactly when some `w = log^gamma`, `gamma > 0`,
/// satisfies both Weyl-multiplier conditions) and otherwise `A_k` stays
/// bounded below; with `2 alpha < 1` the blocks grow.
pub fn tandori_sum(a: &SequenceSpec, truncation: u64) -> Result<ConditionReport> {
    a.validate()?;
    let blocks = tandori_blocks(truncation)?;
    let sums = block_sums(a, &blocks);
    let mut rec = PartialRecorder::default();
    for (k, s) in sums.iter().enumerate() {
        rec.push_always(k as u64, s.sqrt());
    }
    let class = match a.form {
        SequenceForm::Explicit(_) => Classification::UnknownFromTruncation,
        SequenceForm::PowerLog { c: 0.0, .. } => Classification::Converges,
        SequenceForm::PowerLog { alpha, beta, .. } => {
            let p = 2.0 * alpha;
            // (8)+(9) route: some gamma > 0 with bertrand(p, 2 beta - 2 - gamma)
            let route = p > 1.0 || (p == 1.0 && 2.0 * beta - 2.0 > 1.0);
            // A_k bounded below by a positive constant
            let stuck = p < 1.0 || (p == 1.0 && 2.0 * beta - 2.0 <= 1.0);
            if route {
                Classification::Converges
            } else if stuck {
                Classification::Diverges
            } else {
                Classification::UnknownFromTruncation
            }
        }
    };
    Ok(rec.finish(ConditionId::Tandori7, class, truncation, exhausted(a, truncation)))
}

/// Partial sums of `sum_{n=2}^{T} |a_n|^2 log2^2(n) w_n` and
/// `sum_{n=2}^{T} 1/(n log2(n) w_n)`.
pub fn orlicz_conditions(
    a: &SequenceSpec,
    w: &WeightSpec,
    truncation: u64,
) -> Result<(ConditionReport, ConditionReport)> {
    a.validate()?;
    w.validate()?;
    check_truncation(truncation, 2)?;
    if let Some(len) = w.explicit_len() {
        if len < truncation {
            return Err(Error::Weight(format!(
                "explicit weight has {len} entries, truncation needs {truncation}"
            )));
        }
    }
    let end = effective_end(a, truncation);
    let mut r8 = PartialRecorder::default();
    let mut r9 = PartialRecorder::default();
    for n in 2..=truncation {
        let wn = w.value(n)?;
        let nf = n as f64;
        let last = n == truncation;
        if n <= end {
            let m = a.magnitude(n);
            r8.push(n, m * m * log2_sq(nf) * wn, last);
        } else if last {
            r8.push_always(n, 0.0);
        }
        r9.push(n, 1.0 / (nf * nf.log2() * wn), last);
    }
    let gamma = w.effective_gamma();
    let class8 = match (&a.form, gamma) {
        (SequenceForm::PowerLog { c, .. }, _) if *c == 0.0 => Classification::Converges,
        (SequenceForm::PowerLog { alpha, beta, .. }, Some(g)) => {
            Classification::from_bool(rules::bertrand(2.0 * alpha, 2.0 * beta - 2.0 - g))
        }
        _ => Classification::UnknownFromTruncation,
    };
    let class9 = match gamma {
        Some(g) => Classification::from_bool(rules::bertrand(1.0, 1.0 + g)),
        None => Classification::UnknownFromTruncation,
    };
    Ok((
        r8.finish(ConditionId::Orlicz8, class8, truncation, exhausted(a, truncation)),
        r9.finish(ConditionId::Orlicz9, class9, truncation, false),
    ))
}
