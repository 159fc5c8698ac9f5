//! Oscillation of a rearranged series restricted to one Tandori block.
//!
//! For block `M_k` and plan `sigma`, let `S_q = sum_{n<=q} eps_n a_sigma(n) phi_sigma(n)`
//! where `eps_n = 1` iff `sigma(n) in M_k`. Then
//! `delta_k(x) = sup_{p<=q} |S_q(x) - S_(p-1)(x)|`, which is the diameter of
//! the point set `{0, S_1(x), .., S_N(x)}` in the fiber.

use super::{check_len, positions, Bound, PermutationPlan};
use crate::coefficients::tandori_blocks;
use crate::direct_integral::System;
use crate::error::{Error, Result};
use crate::scalar::{fiber_norm_sq, Field, Scalar};
use crate::slack::holds;
use crate::summation::NeumaierSum;
use serde::{Deserialize, Serialize};

/// Above this many distinct prefix points at one atom the diameter is
/// replaced by the one-sided bound `2 sup_q |S_q|`.
pub const EXACT_DELTA_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    Exact,
    OneSidedBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBlockDiagnostics {
    pub k: usize,
    /// `M_k` intersected with `1..=N`, inclusive.
    pub block: (u64, u64),
    pub delta_profile: Vec<f64>,
    pub delta_l2: f64,
    /// `2 sup_q |S_q(x)|` per atom.
    pub one_sided_profile: Vec<f64>,
    /// `delta_k <= 2 sup_q |S_q|` at every atom.
    pub one_sided_holds: bool,
    /// `8 (sum_{n in M_k} |a_n|^2 log2^2 n)^(1/2)`.
    pub rhs_24: f64,
    pub bound_24: Bound,
    /// Number of positions `n` with `eps_n = 1`.
    pub indicator_count: usize,
    /// `OneSidedBound` if any atom exceeded [`EXACT_DELTA_LIMIT`].
    pub mode: DeltaMode,
}

pub fn tandori_delta<S: Scalar>(
    system: &System<S>,
    a: &[S],
    plan: &PermutationPlan,
    k: usize,
    n: usize,
) -> Result<DeltaBlockDiagnostics> {
    check_len(system, a, n)?;
    if plan.len() != n {
        return Err(Error::Permutation(format!(
            "plan has length {}, expected {n}",
            plan.len()
        )));
    }
    plan.check()?;
    let blocks = tandori_blocks(n as u64)?;
    let &(lo, hi) = blocks.blocks.get(k).ok_or(Error::IndexOutOfRange {
        index: k,
        max: blocks.blocks.len().saturating_sub(1),
    })?;
    let (lo, hi) = (lo as usize, hi as usize);
    let in_block = |f: usize| (lo..=hi).contains(&(f + 1));

    let order = plan.zero_based();
    let pos = positions(&order, system.len());
    let incidence = system.incidence();
    let atoms = system.fibers.len();
    let real_line = S::FIELD == Field::Real;

    let mut delta_profile = vec![0.0; atoms];
    let mut one_sided_profile = vec![0.0; atoms];
    let mut mode = DeltaMode::Exact;
    let mut points: Vec<S> = Vec::new();
    let mut steps: Vec<usize> = Vec::new();
    for i in 0..atoms {
        let d = system.fibers.dim(i);
        steps.clear();
        steps.extend(
            incidence[i]
                .iter()
                .copied()
                .filter(|&f| f < n && in_block(f))
                .map(|f| pos[f]),
        );
        steps.sort_unstable();
        // distinct consecutive prefix points, starting from S_0 = 0
        points.clear();
        points.resize(d, S::zero());
        let mut sup = 0.0f64;
        for &step in &steps {
            let f = order[step];
            let last = points.len() - d;
            let mut next: Vec<S> = points[last..].to_vec();
            for (x, y) in next.iter_mut().zip(system.phi(f).block(i)) {
                *x += a[f] * *y;
            }
            if next[..] != points[last..] {
                sup = sup.max(fiber_norm_sq(&next).sqrt());
                points.extend(next);
            }
        }
        one_sided_profile[i] = 2.0 * sup;
        let m = points.len() / d;
        delta_profile[i] = if d == 1 && real_line {
            let re = points.iter().map(|x| x.real());
            let (min, max) = re.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            max - min
        } else if m <= EXACT_DELTA_LIMIT {
            diameter(&points, d)
        } else {
            mode = DeltaMode::OneSidedBound;
            one_sided_profile[i]
        };
    }

    let delta_l2 = system.space.l2_norm_of_profile(&delta_profile);
    let one_sided_holds = (0..atoms)
        .filter(|&i| system.space.weight(i) > 0.0)
        .all(|i| holds(delta_profile[i], one_sided_profile[i], crate::slack::DEFAULT_SLACK));
    let mut a_k = NeumaierSum::new();
    for m in lo..=hi {
        let l = (m as f64).log2();
        a_k.add(a[m - 1].abs_sq() * l * l);
    }
    let rhs_24 = 8.0 * a_k.value().sqrt();
    Ok(DeltaBlockDiagnostics {
        k,
        block: (lo as u64, hi as u64),
        delta_l2,
        one_sided_profile,
        one_sided_holds,
        rhs_24,
        bound_24: Bound {
            lhs: delta_l2,
            rhs: rhs_24,
        },
        indicator_count: order.iter().filter(|&&f| in_block(f)).count(),
        mode,
        delta_profile,
    })
}

/// Largest pairwise distance among `points.len() / d` fiber vectors.
fn diameter<S: Scalar>(points: &[S], d: usize) -> f64 {
    let m = points.len() / d;
    let mut best = 0.0f64;
    for s in 0..m {
        let p = &points[s * d..(s + 1) * d];
        for t in s + 1..m {
            let q = &points[t * d..(t + 1) * d];
            let dist: f64 = p.iter().zip(q).map(|(x, y)| (*x - *y).abs_sq()).sum();
            best = best.max(dist);
        }
    }
    best.sqrt()
}
