//! Binary decomposition of a prefix `(0, j]` into dyadic blocks and the
//! pointwise bound it yields.

use crate::error::{Error, Result};
use crate::scalar::{fiber_norm_sq, Scalar};
use crate::summation::NeumaierSum;
use serde::{Deserialize, Serialize};

/// Largest `r` accepted by [`dyadic_pointwise_bound`] (the padded length is `2^r`).
pub const MAX_POINTWISE_R: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicDecomposition {
    pub j: u64,
    pub r: u32,
    /// `bits[k]` is the digit of weight `2^(r-k)`.
    pub bits: Vec<u8>,
    /// Half-open ranges `(lo, hi]`, consecutive from 0 to `j`.
    pub blocks: Vec<(u64, u64)>,
}

impl DyadicDecomposition {
    /// Blocks as `"(0,4] (4,5]"`.
    pub fn display_blocks(&self) -> String {
        self.blocks
            .iter()
            .map(|(lo, hi)| format!("({lo},{hi}]"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn dyadic_decomposition(j: u64, r: u32) -> Result<DyadicDecomposition> {
    if r > 62 || j == 0 || j > 1u64 << r {
        return Err(Error::DyadicRange { j, r });
    }
    let bits: Vec<u8> = (0..=r).map(|k| ((j >> (r - k)) & 1) as u8).collect();
    let mut blocks = Vec::new();
    let mut lo = 0;
    for (k, &b) in bits.iter().enumerate() {
        if b == 1 {
            let hi = lo + (1u64 << (r - k as u32));
            blocks.push((lo, hi));
            lo = hi;
        }
    }
    Ok(DyadicDecomposition { j, r, bits, blocks })
}

/// Both sides of the pointwise dyadic bound
///
/// `|sum_{n<=j} h_n|^2 <= (r+1) sum_{k=0}^r sum_{p<2^k} |sum_{n in (p 2^(r-k), (p+1) 2^(r-k)]} h_n|^2`
///
/// with `h` zero-padded to length `2^r`.
pub fn dyadic_pointwise_bound<S: Scalar>(h: &[Vec<S>], r: u32) -> Result<(f64, f64)> {
    let j = h.len() as u64;
    if r > MAX_POINTWISE_R || j == 0 || j > 1u64 << r {
        return Err(Error::DyadicRange { j, r });
    }
    let d = h[0].len();
    if let Some(bad) = h.iter().find(|v| v.len() != d) {
        return Err(Error::Length {
            needed: d,
            have: bad.len(),
        });
    }
    // finest level: blocks of length 1
    let mut level: Vec<Vec<S>> = h.to_vec();
    level.resize(1 << r, vec![S::zero(); d]);
    let mut total = NeumaierSum::new();
    loop {
        for v in &level {
            total.add(fiber_norm_sq(v));
        }
        if level.len() == 1 {
            break;
        }
        level = level
            .chunks(2)
            .map(|pair| pair[0].iter().zip(&pair[1]).map(|(x, y)| *x + *y).collect())
            .collect();
    }
    let lhs = fiber_norm_sq(&level[0]);
    Ok((lhs, (r as f64 + 1.0) * total.value()))
}
