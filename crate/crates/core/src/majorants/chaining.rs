//! Dyadic chaining of the majorant.
//!
//! With `chi_k = sum_{n=2^k}^{2^(k+1)-1} a_n phi_n`, the majorant over the
//! dyadic prefixes `D_k = sum_{n<2^k}` is controlled by `sum_k |chi_k|_2`,
//! and the oscillation inside block `k` by
//! `S_k°(x) = max_{2^k<=j<2^(k+1)} |sum_{n=2^k}^j a_n phi_n(x)|`.

use super::{check_len, MajorantProfile};
use crate::direct_integral::System;
use crate::error::{Error, Result};
use crate::scalar::{fiber_norm_sq, Scalar};
use crate::slack::holds;
use crate::summation::{neumaier, NeumaierSum};
use serde::{Deserialize, Serialize};

/// One inequality `lhs <= rhs` as evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lhs: f64,
    pub rhs: f64,
}

impl Bound {
    pub fn holds(&self, slack: f64) -> bool {
        holds(self.lhs, self.rhs, slack)
    }

    pub fn ratio(&self) -> f64 {
        crate::slack::ratio(self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainingDiagnostics {
    /// `N = 2^(K+1) - 1`.
    pub k_max: u32,
    /// `|chi_k|_2` for `k = 0..=K`.
    pub chi_norms: Vec<f64>,
    /// `sum_{n=2^k}^{2^(k+1)-1} |a_n|^2` for `k = 0..=K`.
    pub chi_coeff_sq: Vec<f64>,
    /// `|S_k°|_2` for `k = 1..=K`.
    pub s_circ_norms: Vec<f64>,
    /// `|sup_k S_k°|_2`.
    pub s_circ_l2: f64,
    /// `|max_k |D_k||_2` over the dyadic prefixes ending at `2^k - 1`.
    pub s_star_dyadic_l2: f64,
    /// `|S_N*|_2`.
    pub majorant_l2: f64,
    /// `sum_{n<=N} |a_n|^2 log2^2(n+1)`.
    pub l_truncated: f64,
    /// `sum_k |chi_k|_2 <= 2 L^(1/2)`.
    pub bound_15: Bound,
    /// `|S*_dyadic|_2 <= sum_k |chi_k|_2`.
    pub bound_19: Bound,
    /// `sum_k |S_k°|_2^2 <= 4 L`.
    pub bound_20: Bound,
    /// `|S_N*|_2 <= 4 L^(1/2)`.
    pub bound_4: Bound,
    /// `|S_N*|_2 <= |S*_dyadic|_2 + |S°|_2`.
    pub triangle: Bound,
    /// `|S°|_2^2 <= sum_k |S_k°|_2^2`.
    pub s_circ_square: Bound,
}

impl ChainingDiagnostics {
    /// The bounds with their names, in a fixed order.
    pub fn bounds(&self) -> [(&'static str, Bound); 6] {
        [
            ("bound_15", self.bound_15),
            ("bound_19", self.bound_19),
            ("bound_20", self.bound_20),
            ("bound_4", self.bound_4),
            ("triangle", self.triangle),
            ("s_circ_square", self.s_circ_square),
        ]
    }

    /// Largest relative deviation `| |chi_k|^2 - sum |a_n|^2 | / sum |a_n|^2`.
    pub fn parseval_deviation(&self) -> f64 {
        self.chi_norms
            .iter()
            .zip(&self.chi_coeff_sq)
            .map(|(c, s)| {
                let d = (c * c - s).abs();
                if *s == 0.0 {
                    d
                } else {
                    d / s
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Index bookkeeping for a 1-based position `n`: block `k` with
/// `2^k <= n < 2^(k+1)`.
fn block_of(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

pub fn chaining_diagnostics<S: Scalar>(system: &System<S>, a: &[S], n: usize) -> Result<ChainingDiagnostics> {
    check_len(system, a, n)?;
    if !(n + 1).is_power_of_two() {
        return Err(Error::NotDyadicComplete(n));
    }
    let k_max = block_of(n);
    let blocks = k_max as usize + 1;
    let atoms = system.fibers.len();
    let space = &system.space;

    let mut majorant = vec![0.0; atoms];
    let mut argmax = vec![1; atoms];
    let mut dyadic = vec![0.0; atoms];
    let mut s_circ = vec![0.0; atoms];
    // [k][atom]
    let mut s_circ_k = vec![vec![0.0; atoms]; blocks];
    let mut chi_sq = vec![vec![0.0; atoms]; blocks];

    let mut prefix: Vec<S> = Vec::new();
    let mut part: Vec<S> = Vec::new();
    for i in 0..atoms {
        let d = system.fibers.dim(i);
        prefix.clear();
        prefix.resize(d, S::zero());
        part.clear();
        part.resize(d, S::zero());
        for j in 1..=n {
            let c = a[j - 1];
            let block = system.phi(j - 1).block(i);
            for ((p, q), y) in prefix.iter_mut().zip(part.iter_mut()).zip(block) {
                let t = c * *y;
                *p += t;
                *q += t;
            }
            let v = fiber_norm_sq(&prefix).sqrt();
            if v > majorant[i] {
                majorant[i] = v;
                argmax[i] = j;
            }
            let k = block_of(j) as usize;
            let w = fiber_norm_sq(&part);
            if k >= 1 {
                let w = w.sqrt();
                s_circ_k[k][i] = f64::max(s_circ_k[k][i], w);
                s_circ[i] = f64::max(s_circ[i], w);
            }
            if (j + 1).is_power_of_two() {
                dyadic[i] = f64::max(dyadic[i], v);
                chi_sq[k][i] = w;
                part.iter_mut().for_each(|x| *x = S::zero());
            }
        }
    }

    let weighted = |vals: &[f64]| -> f64 {
        neumaier(
            vals.iter()
                .enumerate()
                .filter(|(i, _)| space.weight(*i) > 0.0)
                .map(|(i, v)| space.weight(i) * v),
        )
    };
    let chi_norms: Vec<f64> = chi_sq.iter().map(|c| weighted(c).sqrt()).collect();
    let chi_coeff_sq: Vec<f64> = (0..blocks)
        .map(|k| neumaier(a[(1 << k) - 1..(1 << (k + 1)) - 1].iter().map(|c| c.abs_sq())))
        .collect();
    let s_circ_norms: Vec<f64> = s_circ_k[1..]
        .iter()
        .map(|v| weighted(&v.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt())
        .collect();
    let profile = MajorantProfile::from_values(system, majorant, argmax);
    let s_star_dyadic_l2 = space.l2_norm_of_profile(&dyadic);
    let s_circ_l2 = space.l2_norm_of_profile(&s_circ);

    let mut l = NeumaierSum::new();
    for (j, c) in a[..n].iter().enumerate() {
        let lg = ((j + 2) as f64).log2();
        l.add(c.abs_sq() * lg * lg);
    }
    let l_truncated = l.value();
    let root_l = l_truncated.sqrt();
    let chi_sum = neumaier(chi_norms.iter().copied());
    let s_circ_sq_sum = neumaier(s_circ_norms.iter().map(|x| x * x));

    Ok(ChainingDiagnostics {
        k_max,
        bound_15: Bound {
            lhs: chi_sum,
            rhs: 2.0 * root_l,
        },
        bound_19: Bound {
            lhs: s_star_dyadic_l2,
            rhs: chi_sum,
        },
        bound_20: Bound {
            lhs: s_circ_sq_sum,
            rhs: 4.0 * l_truncated,
        },
        bound_4: Bound {
            lhs: profile.l2_norm,
            rhs: 4.0 * root_l,
        },
        triangle: Bound {
            lhs: profile.l2_norm,
            rhs: s_star_dyadic_l2 + s_circ_l2,
        },
        s_circ_square: Bound {
            lhs: s_circ_l2 * s_circ_l2,
            rhs: s_circ_sq_sum,
        },
        chi_norms,
        chi_coeff_sq,
        s_circ_norms,
        s_circ_l2,
        s_star_dyadic_l2,
        majorant_l2: profile.l2_norm,
        l_truncated,
    })
}
