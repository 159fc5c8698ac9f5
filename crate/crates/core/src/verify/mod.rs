//! Seeded trial harness.
//!
//! Each trial draws a system, a length `N` and coefficients from its own
//! sub-seed, evaluates the requested inequalities and returns a list of
//! evaluations. Trials run in parallel and are merged in trial order, so a
//! report depends only on the configuration, never on the thread count.
//!
//! Sub-seed of trial `t`: the SplitMix64 finalizer applied to
//! `seed + 0x9E3779B97F4A7C15 * (t + 1)` (wrapping).

mod exhaustive;
mod oracle;
mod riesz;

pub use exhaustive::{exhaustive_permutation_check, ExhaustiveResult, EXHAUSTIVE_MAX_N};
pub use oracle::{oracle_majorant, ORACLE_BUDGET};
pub use riesz::{apply_mix, riesz_mix};

use crate::coefficients::{
    condensation_chain, orlicz_reduction, tandori_blocks, Classification, SequenceSpec, WeightForm, WeightSpec,
    MAX_TRUNCATION,
};
use crate::direct_integral::{Element, System};
use crate::error::{Error, Result};
use crate::majorants::{
    adversarial_permutation, chaining_diagnostics, dyadic_pointwise_bound, majorant, tandori_delta,
    AdversarialStrategy, Bound, PermutationPlan, PlanProvenance,
};
use crate::scalar::{Field, Scalar, C64};
use crate::slack::{ratio, DEFAULT_SLACK};
use crate::summation::neumaier;
use crate::systems::{generate, SystemKind, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Streaming and brute-force majorants must agree to this absolute tolerance.
pub const ORACLE_TOL: f64 = 1e-13;
/// Relative tolerance of `|chi_k|_2^2 = sum |a_n|^2`.
pub const PARSEVAL_TOL: f64 = 1e-10;
/// A mixed system whose lower Riesz bound falls to this is rejected as singular.
pub const RIESZ_SINGULAR_FLOOR: f64 = 1e-6;
/// Trials on the Rademacher kind use at most this many functions (grid `2^N`).
pub const RADEMACHER_TRIAL_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Lemma1,
    Eq12,
    Thm1,
    Eq15,
    Eq20,
    Eq24,
    OrliczChain,
    ExhaustivePerm,
    RieszRatio,
    Oracle,
}

impl CheckId {
    pub const ALL: [CheckId; 10] = [
        CheckId::Lemma1,
        CheckId::Eq12,
        CheckId::Thm1,
        CheckId::Eq15,
        CheckId::Eq20,
        CheckId::Eq24,
        CheckId::OrliczChain,
        CheckId::ExhaustivePerm,
        CheckId::RieszRatio,
        CheckId::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Lemma1 => "lemma1",
            CheckId::Eq12 => "eq12",
            CheckId::Thm1 => "thm1",
            CheckId::Eq15 => "eq15",
            CheckId::Eq20 => "eq20",
            CheckId::Eq24 => "eq24",
            CheckId::OrliczChain => "orlicz_chain",
            CheckId::ExhaustivePerm => "exhaustive_perm",
            CheckId::RieszRatio => "riesz_ratio",
            CheckId::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        CheckId::ALL.into_iter().find(|c| c.name() == key).ok_or_else(|| {
            let known: Vec<_> = CheckId::ALL.iter().map(|c| c.name()).collect();
            Error::Config(format!("unknown check '{s}' (known: {})", known.join(", ")))
        })
    }
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}
fn default_shuffles() -> usize {
    20
}
fn default_condition() -> f64 {
    4.0
}
fn default_orlicz_truncation() -> u64 {
    65536
}
fn default_exhaustive_n() -> usize {
    7
}

/// A trial ensemble.
///
/// `system_spec` is the base system. When `kinds` is nonempty, trial `t`
/// uses `kinds[t % kinds.len()]`; `n_range` and `fiber_dims` (inclusive)
/// make `N` and the fiber dimension per-trial draws. Fiber dimensions only
/// apply to `random_qr` and `tensor_vector`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub system_spec: SystemSpec,
    #[serde(default)]
    pub kinds: Vec<SystemKind>,
    #[serde(default)]
    pub n_range: Option<[usize; 2]>,
    #[serde(default)]
    pub fiber_dims: Option<[usize; 2]>,
    /// `None`: standard normals scaled by `1/n`.
    #[serde(default)]
    pub coeff_spec: Option<SequenceSpec>,
    /// Weight for the reduction chain; `None` means `LogPower` with `gamma = 1.5`.
    #[serde(default)]
    pub weight_spec: Option<WeightSpec>,
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub checks: Vec<CheckId>,
    /// Relative slack per check; missing entries use 1e-12.
    #[serde(default)]
    pub tolerances: BTreeMap<CheckId, f64>,
    /// Leading functions used by the exhaustive permutation check.
    #[serde(default = "default_exhaustive_n")]
    pub exhaustive_n: usize,
    #[serde(default = "default_shuffles")]
    pub n_shuffles: usize,
    #[serde(default = "default_condition")]
    pub riesz_condition: f64,
    #[serde(default = "default_orlicz_truncation")]
    pub orlicz_truncation: u64,
}

impl TrialConfig {
    pub fn new(system_spec: SystemSpec, n_trials: usize, seed: u64, checks: Vec<CheckId>) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            system_spec,
            kinds: Vec::new(),
            n_range: None,
            fiber_dims: None,
            coeff_spec: None,
            weight_spec: None,
            n_trials,
            seed,
            checks,
            tolerances: BTreeMap::new(),
            exhaustive_n: default_exhaustive_n(),
            n_shuffles: default_shuffles(),
            riesz_condition: default_condition(),
            orlicz_truncation: default_orlicz_truncation(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn slack(&self, check: CheckId) -> f64 {
        self.tolerances.get(&check).copied().unwrap_or(DEFAULT_SLACK)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.n_trials == 0 {
            return bad("n_trials must be >= 1".into());
        }
        if let Some([lo, hi]) = self.n_range {
            if lo == 0 || lo > hi {
                return bad(format!("n_range [{lo}, {hi}] is empty or starts at 0"));
            }
        } else {
            self.system_spec.validate()?;
        }
        if let Some([lo, hi]) = self.fiber_dims {
            if lo == 0 || lo > hi {
                return bad(format!("fiber_dims [{lo}, {hi}] is empty or starts at 0"));
            }
        }
        if self.exhaustive_n == 0 || self.exhaustive_n > EXHAUSTIVE_MAX_N {
            return bad(format!("exhaustive_n must be in 1..={EXHAUSTIVE_MAX_N}"));
        }
        if !(self.riesz_condition >= 1.0 && self.riesz_condition.is_finite()) {
            return bad(format!(
                "riesz_condition must be finite and >= 1, got {}",
                self.riesz_condition
            ));
        }
        if self.orlicz_truncation < 3 || self.orlicz_truncation > MAX_TRUNCATION {
            return bad(format!("orlicz_truncation must be in 3..={MAX_TRUNCATION}"));
        }
        for (c, s) in &self.tolerances {
            if !(s.is_finite() && *s > -1.0) {
                return bad(format!("slack for {} must be finite and > -1, got {s}", c.name()));
            }
        }
        if let Some(a) = &self.coeff_spec {
            a.validate()?;
        }
        if let Some(w) = &self.weight_spec {
            w.validate()?;
        }
        Ok(())
    }

    fn has(&self, check: CheckId) -> bool {
        self.checks.contains(&check)
    }

    fn needs_trials(&self) -> bool {
        self.checks.iter().any(|c| *c != CheckId::OrliczChain)
    }
}

/// Everything needed to rerun one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproducer {
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    pub spec: Option<SystemSpec>,
    pub n: Option<usize>,
    pub detail: String,
    pub lhs: f64,
    pub rhs: f64,
}

/// Aggregate of one quantity within a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelOutcome {
    pub label: String,
    /// What `worst_value` measures.
    pub metric: String,
    pub evaluations: usize,
    pub failures: usize,
    pub passed: bool,
    /// Largest metric value; failing evaluations rank first.
    pub worst_value: f64,
    pub worst: Option<Reproducer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckId,
    pub slack: f64,
    pub passed: bool,
    pub labels: Vec<LabelOutcome>,
    /// Smallest lower and largest upper Riesz bound seen (`riesz_ratio` only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub riesz_bounds: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl CheckOutcome {
    pub fn label(&self, label: &str) -> Option<&LabelOutcome> {
        self.labels.iter().find(|l| l.label == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvFingerprint {
    pub crate_version: String,
    pub arch: String,
    pub os: String,
    pub pointer_width: u32,
    pub float_format: String,
    pub rounding: String,
}

impl EnvFingerprint {
    pub fn current() -> Self {
        Self {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            arch: std::env::consts::ARCH.to_string(),
            os: std::env::consts::OS.to_string(),
            pointer_width: usize::BITS,
            float_format: "ieee754 binary64".to_string(),
            rounding: "round to nearest, ties to even (assumed)".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub passed: bool,
    pub n_trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub config: TrialConfig,
    pub environment: EnvFingerprint,
    /// Timing; the only field that varies between identical runs.
    pub wall_time_s: f64,
}

impl VerifyReport {
    pub fn check(&self, id: CheckId) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.check == id)
    }

    /// Deterministic JSON: the report with `wall_time_s` zeroed.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        Ok(serde_json::to_string_pretty(&r)?)
    }
}

/// SplitMix64 finalizer of `seed + golden * (trial + 1)`.
pub fn sub_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul((trial as u64).wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
struct Evaluation {
    check: CheckId,
    label: &'static str,
    metric: &'static str,
    value: f64,
    holds: bool,
    lhs: f64,
    rhs: f64,
    detail: String,
    riesz: Option<[f64; 2]>,
}

impl Evaluation {
    fn bound(check: CheckId, label: &'static str, b: Bound, slack: f64, detail: String) -> Self {
        Self {
            check,
            label,
            metric: "lhs/rhs",
            value: ratio(b.lhs, b.rhs),
            holds: b.holds(slack),
            lhs: b.lhs,
            rhs: b.rhs,
            detail,
            riesz: None,
        }
    }
}

struct TrialOutcome {
    trial: usize,
    seed: u64,
    spec: SystemSpec,
    n: usize,
    evals: Vec<Evaluation>,
}

/// The system spec used by trial `trial`.
pub fn trial_spec(cfg: &TrialConfig, trial: usize) -> SystemSpec {
    let seed = sub_seed(cfg.seed, trial);
    trial_spec_with(cfg, trial, seed, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn trial_spec_with(cfg: &TrialConfig, trial: usize, seed: u64, rng: &mut ChaCha8Rng) -> SystemSpec {
    let base = &cfg.system_spec;
    let kind = if cfg.kinds.is_empty() {
        base.kind
    } else {
        cfg.kinds[trial % cfg.kinds.len()]
    };
    let mut n = match cfg.n_range {
        Some([lo, hi]) => rng.random_range(lo..=hi),
        None => base.n_functions,
    };
    let mut d = match cfg.fiber_dims {
        Some([lo, hi]) => rng.random_range(lo..=hi),
        None => base.fiber_dim,
    };
    if kind == SystemKind::Rademacher {
        n = n.min(RADEMACHER_TRIAL_MAX_N);
    }
    if !matches!(kind, SystemKind::RandomQr | SystemKind::TensorVector) {
        d = 1;
    }
    let spec = if kind == base.kind && n == base.n_functions && d == base.fiber_dim && base.validate().is_ok() {
        base.clone()
    } else {
        SystemSpec::minimal(kind, n).with_fiber_dim(d)
    };
    spec.with_seed(seed).with_field(base.field)
}

fn draw_coefficients<S: Scalar>(cfg: &TrialConfig, n: usize, rng: &mut ChaCha8Rng) -> Vec<S> {
    match &cfg.coeff_spec {
        Some(spec) => spec.values(n).into_iter().map(S::from_real).collect(),
        None => (1..=n)
            .map(|k| S::sample_normal(rng) * S::from_real(1.0 / k as f64))
            .collect(),
    }
}

/// `(2 + log2 N) |b|_2`.
fn lemma1_rhs<S: Scalar>(b: &[S]) -> f64 {
    let n = b.len() as f64;
    (2.0 + n.log2()) * neumaier(b.iter().map(|c| c.abs_sq())).sqrt()
}

/// Appends zero functions and zero coefficients up to `2^(K+1) - 1`.
fn pad_dyadic<S: Scalar>(system: &System<S>, b: &[S]) -> Result<(System<S>, Vec<S>)> {
    let n = b.len();
    let target = (n + 1).next_power_of_two() - 1;
    let mut elements: Vec<Element<S>> = system.elements()[..n].to_vec();
    elements.resize(target, Element::zeros(&system.fibers));
    let mut padded = b.to_vec();
    padded.resize(target, S::zero());
    Ok((
        System::new(system.space.clone(), system.fibers.clone(), elements)?,
        padded,
    ))
}

fn run_trial<S: Scalar>(cfg: &TrialConfig, trial: usize) -> Result<TrialOutcome> {
    let seed = sub_seed(cfg.seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = trial_spec_with(cfg, trial, seed, &mut rng);
    let system: System<S> = generate(&spec)?;
    let n = spec.n_functions;
    let b: Vec<S> = draw_coefficients(cfg, n, &mut rng);
    let mut evals = Vec::new();

    let needs_majorant = cfg.has(CheckId::Lemma1) || cfg.has(CheckId::Oracle);
    let profile = if needs_majorant {
        Some(majorant(&system, &b, n)?)
    } else {
        None
    };

    if cfg.has(CheckId::Lemma1) {
        let lhs = profile.as_ref().expect("computed above").l2_norm;
        let bound = Bound {
            lhs,
            rhs: lemma1_rhs(&b),
        };
        evals.push(Evaluation::bound(
            CheckId::Lemma1,
            "lemma1",
            bound,
            cfg.slack(CheckId::Lemma1),
            String::new(),
        ));
    }

    if cfg.has(CheckId::Oracle) {
        let streaming = profile.as_ref().expect("computed above");
        // trials over the materialization budget are skipped
        if let Ok(brute) = oracle_majorant(&system, &b, n) {
            let mut dev = (streaming.l2_norm - brute.l2_norm).abs();
            for (x, y) in streaming.values.iter().zip(&brute.values) {
                dev = dev.max((x - y).abs());
            }
            if dev.is_nan() {
                dev = f64::INFINITY;
            }
            let argmax_ok = streaming.argmax_prefix == brute.argmax_prefix;
            evals.push(Evaluation {
                check: CheckId::Oracle,
                label: "oracle",
                metric: "max abs deviation",
                value: dev,
                holds: dev <= ORACLE_TOL && argmax_ok,
                lhs: dev,
                rhs: ORACLE_TOL,
                detail: if argmax_ok {
                    String::new()
                } else {
                    "argmax mismatch".to_string()
                },
                riesz: None,
            });
        }
    }

    if cfg.has(CheckId::Eq12) {
        let slack = cfg.slack(CheckId::Eq12);
        let r = (n as u64).next_power_of_two().trailing_zeros();
        let mut worst: Option<Evaluation> = None;
        for i in 0..system.fibers.len() {
            let h: Vec<Vec<S>> = (0..n)
                .map(|k| system.phi(k).block(i).iter().map(|x| b[k] * *x).collect())
                .collect();
            let (lhs, rhs) = dyadic_pointwise_bound(&h, r)?;
            let e = Evaluation::bound(
                CheckId::Eq12,
                "eq12",
                Bound { lhs, rhs },
                slack,
                format!("atom {i}, r {r}"),
            );
            if worst.as_ref().is_none_or(|w| rank(&e) > rank(w)) {
                worst = Some(e);
            }
            if let Some(w) = &worst {
                if !w.holds {
                    // one failing atom is enough to reproduce
                    break;
                }
            }
        }
        evals.extend(worst);
    }

    if cfg.has(CheckId::Thm1) || cfg.has(CheckId::Eq15) || cfg.has(CheckId::Eq20) {
        let (padded_sys, padded_b) = pad_dyadic(&system, &b)?;
        let np = padded_b.len();
        let c = chaining_diagnostics(&padded_sys, &padded_b, np)?;
        let detail = format!("padded N {np}, K {}", c.k_max);
        if cfg.has(CheckId::Thm1) {
            let s = cfg.slack(CheckId::Thm1);
            for (label, b) in [
                ("bound_4", c.bound_4),
                ("bound_19", c.bound_19),
                ("triangle", c.triangle),
                ("s_circ_square", c.s_circ_square),
            ] {
                evals.push(Evaluation::bound(CheckId::Thm1, label, b, s, detail.clone()));
            }
            let dev = c.parseval_deviation();
            evals.push(Evaluation {
                check: CheckId::Thm1,
                label: "parseval",
                metric: "max relative deviation",
                value: dev,
                holds: dev <= PARSEVAL_TOL,
                lhs: dev,
                rhs: PARSEVAL_TOL,
                detail: detail.clone(),
                riesz: None,
            });
        }
        if cfg.has(CheckId::Eq15) {
            evals.push(Evaluation::bound(
                CheckId::Eq15,
                "eq15",
                c.bound_15,
                cfg.slack(CheckId::Eq15),
                detail.clone(),
            ));
        }
        if cfg.has(CheckId::Eq20) {
            evals.push(Evaluation::bound(
                CheckId::Eq20,
                "eq20",
                c.bound_20,
                cfg.slack(CheckId::Eq20),
                detail,
            ));
        }
    }

    if cfg.has(CheckId::Eq24) && n >= 5 {
        let slack = cfg.slack(CheckId::Eq24);
        let mut plans = vec![PermutationPlan::identity(n)];
        for s in 0..cfg.n_shuffles {
            plans.push(PermutationPlan::seeded_shuffle(n, sub_seed(seed, s)));
        }
        plans.push(adversarial_permutation(
            &system,
            &b,
            n,
            AdversarialStrategy::GreedyMaxPrefix,
            seed,
        )?);
        plans.push(adversarial_permutation(
            &system,
            &b,
            n,
            AdversarialStrategy::BlockReversal,
            seed,
        )?);
        let blocks = tandori_blocks(n as u64)?.blocks.len();
        for plan in &plans {
            for k in 0..blocks {
                let d = tandori_delta(&system, &b, plan, k, n)?;
                let detail = format!("plan {}, k {k}, mode {:?}", plan_name(plan), d.mode);
                evals.push(Evaluation::bound(
                    CheckId::Eq24,
                    "eq24",
                    d.bound_24,
                    slack,
                    detail.clone(),
                ));
                evals.push(Evaluation {
                    check: CheckId::Eq24,
                    label: "one_sided",
                    metric: "pointwise delta within 2 sup |S_q|",
                    value: if d.one_sided_holds { 0.0 } else { 1.0 },
                    holds: d.one_sided_holds,
                    lhs: d.delta_l2,
                    rhs: system.space.l2_norm_of_profile(&d.one_sided_profile),
                    detail,
                    riesz: None,
                });
            }
        }
    }

    if cfg.has(CheckId::ExhaustivePerm) {
        let m = n.min(cfg.exhaustive_n);
        let r = exhaustive_permutation_check(&system, &b, m, cfg.slack(CheckId::ExhaustivePerm))?;
        evals.push(Evaluation {
            check: CheckId::ExhaustivePerm,
            label: "exhaustive_perm",
            metric: "max over plans of lhs/rhs",
            value: r.worst_ratio(),
            holds: r.all_hold,
            lhs: r.worst_l2,
            rhs: r.rhs,
            detail: format!(
                "leading {m} functions, {} plans, worst sigma {:?}",
                r.plans, r.worst_sigma
            ),
            riesz: None,
        });
    }

    if cfg.has(CheckId::RieszRatio) {
        let mut mix_rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, usize::MAX));
        let t = riesz_mix::<S>(n, cfg.riesz_condition, &mut mix_rng);
        let mixed = apply_mix(&system, &t)?;
        let gram = mixed.gram()?;
        let m = majorant(&mixed, &b, n)?;
        let denom = ((n + 1) as f64).log2() * neumaier(b.iter().map(|c| c.abs_sq())).sqrt();
        let value = ratio(m.l2_norm, denom);
        let (lo, hi) = (gram.riesz_lower, gram.riesz_upper);
        evals.push(Evaluation {
            check: CheckId::RieszRatio,
            label: "riesz_ratio",
            metric: "|S_N*|_2 / (log2(N+1) |b|_2)",
            value,
            holds: value.is_finite() && lo > RIESZ_SINGULAR_FLOOR,
            lhs: m.l2_norm,
            rhs: denom,
            detail: format!("mix condition {}, riesz bounds [{lo:e}, {hi:e}]", cfg.riesz_condition),
            riesz: Some([lo, hi]),
        });
    }

    Ok(TrialOutcome {
        trial,
        seed,
        spec,
        n,
        evals,
    })
}

fn plan_name(plan: &PermutationPlan) -> String {
    match plan.provenance {
        PlanProvenance::Identity => "identity".into(),
        PlanProvenance::Explicit => "explicit".into(),
        PlanProvenance::SeededShuffle { seed } => format!("shuffle({seed})"),
        PlanProvenance::GreedyAdversarial => "greedy_max_prefix".into(),
        PlanProvenance::BlockReversal => "block_reversal".into(),
    }
}

/// Failures first, then larger values; NaN ranks as infinity.
fn rank(e: &Evaluation) -> (bool, f64) {
    let v = if e.value.is_nan() { f64::INFINITY } else { e.value };
    (!e.holds, v)
}

/// Evaluations that do not depend on a trial.
fn global_evaluations(cfg: &TrialConfig) -> Result<Vec<Evaluation>> {
    let mut evals = Vec::new();
    if cfg.has(CheckId::Eq24) {
        let slack = cfg.slack(CheckId::Eq24);
        // 4 + 2 log2(nu (nu - 1)) <= 8 log2 nu for every stored nu_k
        for &nu in &tandori_blocks(MAX_TRUNCATION)?.nu {
            let nf = nu as f64;
            let bound = Bound {
                lhs: 4.0 + 2.0 * (nf.log2() + (nf - 1.0).log2()),
                rhs: 8.0 * nf.log2(),
            };
            evals.push(Evaluation::bound(
                CheckId::Eq24,
                "arithmetic",
                bound,
                slack,
                format!("nu {nu}"),
            ));
        }
    }
    if cfg.has(CheckId::OrliczChain) {
        let slack = cfg.slack(CheckId::OrliczChain);
        let a = cfg
            .coeff_spec
            .clone()
            .unwrap_or(SequenceSpec::power_log(1.0, 1.0, 2.0)?);
        let w = match &cfg.weight_spec {
            Some(w) => w.clone(),
            None => WeightSpec::log_power(1.5)?,
        };
        let r = orlicz_reduction(&a, &w, cfg.orlicz_truncation)?;
        let detail = format!("truncation {}", cfg.orlicz_truncation);
        let cs = Bound {
            lhs: r.lhs,
            rhs: r.middle,
        };
        let mono = Bound {
            lhs: r.middle,
            rhs: r.rhs,
        };
        evals.push(Evaluation::bound(
            CheckId::OrliczChain,
            "cauchy_schwarz",
            cs,
            slack,
            detail.clone(),
        ));
        evals.push(Evaluation::bound(
            CheckId::OrliczChain,
            "monotone_step",
            mono,
            slack,
            detail,
        ));
        if matches!(w.form, WeightForm::LogPower { .. }) {
            let c = condensation_chain(&w, 10)?;
            let agree = c.agree() && c.classifications()[0] != Classification::UnknownFromTruncation;
            evals.push(Evaluation {
                check: CheckId::OrliczChain,
                label: "condensation_agreement",
                metric: "classifications disagree",
                value: if agree { 0.0 } else { 1.0 },
                holds: agree,
                lhs: 0.0,
                rhs: 0.0,
                detail: format!("{:?}", c.classifications()),
                riesz: None,
            });
        }
    }
    Ok(evals)
}

struct Accumulator {
    outcome: LabelOutcome,
    key: Option<(bool, f64)>,
}

fn merge(cfg: &TrialConfig, global: Vec<Evaluation>, trials: Vec<TrialOutcome>) -> Vec<CheckOutcome> {
    let mut checks: Vec<CheckId> = cfg.checks.clone();
    checks.sort();
    checks.dedup();
    let mut per_check: BTreeMap<CheckId, (Vec<Accumulator>, Option<[f64; 2]>)> =
        checks.iter().map(|c| (*c, (Vec::new(), None))).collect();

    let mut absorb = |e: Evaluation, origin: Option<&TrialOutcome>| {
        let (accs, riesz) = per_check
            .get_mut(&e.check)
            .expect("evaluations only for requested checks");
        if let Some([lo, hi]) = e.riesz {
            *riesz = Some(match *riesz {
                None => [lo, hi],
                Some([l, h]) => [l.min(lo), h.max(hi)],
            });
        }
        let idx = match accs.iter().position(|a| a.outcome.label == e.label) {
            Some(i) => i,
            None => {
                accs.push(Accumulator {
                    outcome: LabelOutcome {
                        label: e.label.to_string(),
                        metric: e.metric.to_string(),
                        evaluations: 0,
                        failures: 0,
                        passed: true,
                        worst_value: 0.0,
                        worst: None,
                    },
                    key: None,
                });
                accs.len() - 1
            }
        };
        let acc = &mut accs[idx];
        acc.outcome.evaluations += 1;
        if !e.holds {
            acc.outcome.failures += 1;
            acc.outcome.passed = false;
        }
        let key = rank(&e);
        if acc.key.is_none_or(|k| key > k) {
            acc.key = Some(key);
            acc.outcome.worst_value = e.value;
            acc.outcome.worst = Some(Reproducer {
                trial: origin.map(|t| t.trial),
                seed: origin.map(|t| t.seed),
                spec: origin.map(|t| t.spec.clone()),
                n: origin.map(|t| t.n),
                detail: e.detail,
                lhs: e.lhs,
                rhs: e.rhs,
            });
        }
    };
    for e in global {
        absorb(e, None);
    }
    for t in &trials {
        for e in t.evals.iter().cloned() {
            absorb(e, Some(t));
        }
    }

    checks
        .iter()
        .map(|c| {
            let (accs, riesz) = per_check.remove(c).expect("initialized");
            let labels: Vec<LabelOutcome> = accs.into_iter().map(|a| a.outcome).collect();
            let mut notes = Vec::new();
            if *c == CheckId::Eq24 {
                notes.push(
                    "greedy and block-reversal plans are heuristics; they bound the worst rearrangement from below"
                        .into(),
                );
            }
            if *c == CheckId::ExhaustivePerm {
                notes.push(format!(
                    "all orderings of the leading min(N, {}) functions",
                    cfg.exhaustive_n
                ));
            }
            if *c == CheckId::RieszRatio {
                notes.push("no threshold asserted; fails only on non-finite ratios or singular mixes".into());
            }
            if labels.is_empty() {
                notes.push("no applicable evaluations".into());
            }
            CheckOutcome {
                check: *c,
                slack: cfg.slack(*c),
                passed: labels.iter().all(|l| l.passed),
                labels,
                riesz_bounds: riesz,
                notes,
            }
        })
        .collect()
}

/// Runs every requested check on the global rayon pool.
pub fn run_suite(cfg: &TrialConfig) -> Result<VerifyReport> {
    run_suite_with_threads(cfg, None)
}

/// Runs every requested check; `threads` sizes a dedicated pool.
pub fn run_suite_with_threads(cfg: &TrialConfig, threads: Option<usize>) -> Result<VerifyReport> {
    cfg.validate()?;
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(cfg))
        }
        None => run_inner(cfg),
    }
}

fn run_inner(cfg: &TrialConfig) -> Result<VerifyReport> {
    let start = Instant::now();
    let global = global_evaluations(cfg)?;
    let trials = if cfg.needs_trials() {
        let results: Vec<Result<TrialOutcome>> = (0..cfg.n_trials)
            .into_par_iter()
            .map(|t| match cfg.system_spec.field {
                Field::Real => run_trial::<f64>(cfg, t),
                Field::Complex => run_trial::<C64>(cfg, t),
            })
            .collect();
        results.into_iter().collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let checks = merge(cfg, global, trials);
    Ok(VerifyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        passed: checks.iter().all(|c| c.passed),
        n_trials: cfg.n_trials,
        seed: cfg.seed,
        checks,
        config: cfg.clone(),
        environment: EnvFingerprint::current(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn run_only(cfg: &TrialConfig, ids: &[CheckId]) -> Result<VerifyReport> {
    if !ids.iter().any(|c| cfg.has(*c)) {
        return Err(Error::Config(format!("config does not request {}", ids[0].name())));
    }
    let mut sub = cfg.clone();
    sub.checks.retain(|c| ids.contains(c));
    run_suite(&sub)
}

/// `|S_N*|_2 <= (2 + log2 N) |b|_2` on every trial.
pub fn check_lemma1(cfg: &TrialConfig) -> Result<VerifyReport> {
    run_only(cfg, &[CheckId::Lemma1])
}

/// `|S_N*|_2 <= 4 L^(1/2)` plus the chaining bounds requested alongside it.
pub fn check_theorem1(cfg: &TrialConfig) -> Result<VerifyReport> {
    run_only(cfg, &[CheckId::Thm1, CheckId::Eq15, CheckId::Eq20])
}

/// The Tandori block bound over the standard plan family.
pub fn check_eq24(cfg: &TrialConfig) -> Result<VerifyReport> {
    run_only(cfg, &[CheckId::Eq24])
}

/// Majorant ratio on seeded Riesz mixes.
pub fn check_riesz_ratio(cfg: &TrialConfig) -> Result<VerifyReport> {
    run_only(cfg, &[CheckId::RieszRatio])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(checks: Vec<CheckId>) -> TrialConfig {
        let mut c = TrialConfig::new(SystemSpec::minimal(SystemKind::RandomQr, 16), 6, 1, checks);
        c.kinds = SystemKind::ALL.to_vec();
        c.n_range = Some([1, 16]);
        c.fiber_dims = Some([1, 3]);
        c
    }

    #[test]
    fn sub_seeds_differ_and_are_stable() {
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
        assert_eq!(sub_seed(1, 0), sub_seed(1, 0));
    }

    #[test]
    fn empty_checks_pass() {
        let r = run_suite(&cfg(vec![])).unwrap();
        assert!(r.passed && r.checks.is_empty());
    }

    #[test]
    fn all_checks_pass_small() {
        let r = run_suite(&cfg(CheckId::ALL.to_vec())).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!(r.checks.len(), CheckId::ALL.len());
    }

    #[test]
    fn negative_slack_fails_with_reproducer() {
        let mut c = cfg(vec![CheckId::Lemma1]);
        c.tolerances.insert(CheckId::Lemma1, -0.99);
        c.coeff_spec = Some(SequenceSpec::explicit(vec![1.0; 16]).unwrap());
        c.kinds = vec![SystemKind::StandardBasis];
        c.n_range = Some([1, 1]);
        let r = run_suite(&c).unwrap();
        assert!(!r.passed);
        let w = r.check(CheckId::Lemma1).unwrap().labels[0].worst.clone().unwrap();
        assert!(w.seed.is_some() && w.spec.is_some() && w.trial.is_some());
    }

    #[test]
    fn thread_count_does_not_change_report() {
        let c = cfg(vec![CheckId::Lemma1, CheckId::Eq24, CheckId::Thm1]);
        let a = run_suite_with_threads(&c, Some(1)).unwrap();
        let b = run_suite_with_threads(&c, Some(3)).unwrap();
        assert_eq!(a.to_json_without_timing().unwrap(), b.to_json_without_timing().unwrap());
    }

    #[test]
    fn check_ids_parse() {
        assert_eq!("thm1".parse::<CheckId>().unwrap(), CheckId::Thm1);
        assert_eq!("orlicz-chain".parse::<CheckId>().unwrap(), CheckId::OrliczChain);
        assert!("nope".parse::<CheckId>().is_err());
    }

    #[test]
    fn single_check_entry_points() {
        let c = cfg(vec![CheckId::Lemma1]);
        assert!(check_lemma1(&c).unwrap().passed);
        assert!(check_eq24(&c).is_err());
    }

    #[test]
    fn unperturbed_riesz_ratio_matches_majorant_bound_scaling() {
        let mut c = cfg(vec![CheckId::Lemma1, CheckId::RieszRatio]);
        c.riesz_condition = 1.0;
        c.n_trials = 1;
        let r = run_suite(&c).unwrap();
        let l = r.check(CheckId::Lemma1).unwrap().labels[0].worst_value;
        let rr = r.check(CheckId::RieszRatio).unwrap().labels[0].worst_value;
        let n = r.check(CheckId::Lemma1).unwrap().labels[0]
            .worst
            .as_ref()
            .unwrap()
            .n
            .unwrap() as f64;
        let scale = (2.0 + n.log2()) / (n + 1.0).log2();
        assert!((rr - l * scale).abs() <= 1e-12 * rr.max(1.0));
    }
}
