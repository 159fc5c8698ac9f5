//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or input error.

use crate::coefficients::{
    condensation_chain, orlicz_reduction, tandori_blocks, tandori_sum, weyl_l, CondensationReport, ReductionReport,
    SequenceSpec, WeightForm, WeightSpec,
};
use crate::direct_integral::io::{
    read_csv, read_json, read_scalar_column, scalars_from_pairs, write_csv, write_json, AnySystem,
};
use crate::error::{Error, Result};
use crate::majorants::{
    adversarial_permutation, dyadic_decomposition, permuted_majorant, AdversarialStrategy, MajorantProfile,
    PermutationPlan,
};
use crate::scalar::{Field, Scalar};
use crate::systems::{generate_any, SystemKind, SystemSpec};
use crate::verify::{run_suite_with_threads, CheckId, TrialConfig};
use crate::System;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "orthoseries",
    version,
    about = "Orthogonal series in discrete direct integrals: generators, condition checkers, majorants and a seeded verification harness"
)]
pub struct Cli {
    /// Seed for every random draw (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for `verify` (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanArg {
    Identity,
    Shuffle,
    Greedy,
    Reversal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an orthonormal system and write it as JSON or CSV.
    GenOns(GenOnsArgs),
    /// Weyl sum `L = sum |a_n|^2 log2^2(n+1)`.
    CheckMr(SeqArgs),
    /// Tandori block condition over `M_k = (nu_k, nu_(k+1)]`.
    CheckTandori(SeqArgs),
    /// Weyl-multiplier conditions for a weight and their reduction to the block condition.
    CheckOrlicz(OrliczArgs),
    /// Majorant of partial sums for a stored system and coefficient list.
    Majorant(MajorantArgs),
    /// Binary decomposition of `(0, j]` into dyadic blocks.
    Decompose(DecomposeArgs),
    /// Run the trial harness from a JSON config.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenOnsArgs {
    /// JSON system spec; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Number of functions.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub fiber_dim: Option<usize>,
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    RandomQr,
    Rademacher,
    Haar,
    StandardBasis,
    TensorVector,
    VaryingDim,
}

impl From<KindArg> for SystemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::RandomQr => SystemKind::RandomQr,
            KindArg::Rademacher => SystemKind::Rademacher,
            KindArg::Haar => SystemKind::Haar,
            KindArg::StandardBasis => SystemKind::StandardBasis,
            KindArg::TensorVector => SystemKind::TensorVector,
            KindArg::VaryingDim => SystemKind::VaryingDim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "sequence")]
pub struct SeqSource {
    /// `C,alpha,beta` for `a_n = C n^-alpha log2(n+1)^-beta`.
    #[arg(long, value_name = "C,ALPHA,BETA")]
    pub powerlog: Option<String>,
    /// One value per line.
    #[arg(long, value_name = "FILE")]
    pub explicit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeqArgs {
    #[command(flatten)]
    pub seq: SeqSource,
    /// Truncation length.
    #[arg(long, default_value_t = 65536)]
    pub trunc: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "weight")]
pub struct WeightSource {
    /// `gamma[,shift]` for `w_n = max(1, log2(n + shift))^gamma`.
    #[arg(long, value_name = "GAMMA[,SHIFT]", allow_hyphen_values = true)]
    pub logpower: Option<String>,
    /// Explicit nondecreasing weights, one per line.
    #[arg(long, value_name = "FILE")]
    pub weight_explicit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrliczArgs {
    #[command(flatten)]
    pub seq: SeqSource,
    #[command(flatten)]
    pub weight: WeightSource,
    #[arg(long, default_value_t = 65536)]
    pub trunc: u64,
    /// Terms of the condensation chain (LogPower weights only).
    #[arg(long, default_value_t = 10)]
    pub condensation_terms: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MajorantArgs {
    /// System file (`.json` or `.csv`).
    #[arg(long)]
    pub system: PathBuf,
    /// Coefficients, one `re` or `re,im` per line.
    #[arg(long, conflicts_with = "powerlog")]
    pub coeffs: Option<PathBuf>,
    /// `C,alpha,beta` coefficients instead of a file.
    #[arg(long, value_name = "C,ALPHA,BETA")]
    pub powerlog: Option<String>,
    /// Number of terms (default: all available).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value = "identity")]
    pub plan: PlanArg,
    /// Orthonormality tolerance reported as `ons_valid`.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub j: u64,
    pub r: u32,
    /// Print the full decomposition as JSON instead of the block list.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated subset of checks to run instead of the config's list.
    #[arg(long, value_delimiter = ',')]
    pub check: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::GenOns(a) => gen_ons(a, cli.seed),
        Command::CheckMr(a) => {
            let seq = sequence(&a.seq)?;
            emit_json(&weyl_l(&seq, a.trunc)?, a.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::CheckTandori(a) => {
            let seq = sequence(&a.seq)?;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                report: crate::coefficients::ConditionReport,
                blocks: crate::coefficients::TandoriBlocks,
            }
            let out = Out {
                report: tandori_sum(&seq, a.trunc)?,
                blocks: tandori_blocks(a.trunc)?,
            };
            emit_json(&out, a.out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::CheckOrlicz(a) => check_orlicz(a),
        Command::Majorant(a) => majorant_cmd(a, cli.seed.unwrap_or(0)),
        Command::Decompose(a) => {
            let d = dyadic_decomposition(a.j, a.r)?;
            if a.json {
                emit_json(&d, None)?;
            } else {
                emit_text(&d.display_blocks(), None)?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify(a) => verify_cmd(a, cli.seed, cli.threads),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => Error::Parse(format!("{}: {other}", path.display())),
    })
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit_text(&text, out)
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(text.as_bytes())?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}

fn parse_floats(s: &str, what: &str, min: usize, max: usize) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{what}: '{}' is not a number", p.trim())))
        })
        .collect::<Result<_>>()?;
    if parts.len() < min || parts.len() > max {
        return Err(Error::Parse(format!(
            "{what}: expected {min}..={max} comma-separated numbers, got {}",
            parts.len()
        )));
    }
    Ok(parts)
}

fn powerlog(s: &str) -> Result<SequenceSpec> {
    let p = parse_floats(s, "--powerlog", 3, 3)?;
    SequenceSpec::power_log(p[0], p[1], p[2])
}

fn real_column(path: &Path) -> Result<Vec<f64>> {
    let pairs = with_path(path, read_scalar_column(open(path)?))?;
    with_path(path, scalars_from_pairs::<f64>(&pairs))
}

fn sequence(src: &SeqSource) -> Result<SequenceSpec> {
    match (&src.powerlog, &src.explicit) {
        (Some(p), _) => powerlog(p),
        (None, Some(path)) => SequenceSpec::explicit(real_column(path)?),
        (None, None) => Err(Error::Config("one of --powerlog or --explicit is required".into())),
    }
}

fn weight(src: &WeightSource) -> Result<WeightSpec> {
    match (&src.logpower, &src.weight_explicit) {
        (Some(s), _) => {
            let p = parse_floats(s, "--logpower", 1, 2)?;
            match p[..] {
                [g] => WeightSpec::log_power(g),
                [g, shift] => WeightSpec::log_power_shifted(g, shift),
                _ => unreachable!("length checked"),
            }
        }
        (None, Some(path)) => WeightSpec::explicit(real_column(path)?),
        (None, None) => Err(Error::Config(
            "one of --logpower or --weight-explicit is required".into(),
        )),
    }
}

fn gen_ons(a: &GenOnsArgs, seed: Option<u64>) -> Result<i32> {
    let mut spec = match &a.config {
        Some(p) => with_path(
            p,
            serde_json::from_reader::<_, SystemSpec>(open(p)?).map_err(Error::from),
        )?,
        None => {
            let kind = a
                .kind
                .ok_or_else(|| Error::Config("--kind is required without --config".into()))?;
            let n =
                a.n.ok_or_else(|| Error::Config("--n is required without --config".into()))?;
            SystemSpec::minimal(kind.into(), n)
        }
    };
    if a.config.is_some() {
        if let Some(k) = a.kind {
            spec.kind = k.into();
        }
        if let Some(n) = a.n {
            spec.n_functions = n;
        }
    }
    if let Some(d) = a.fiber_dim {
        spec = spec.with_fiber_dim(d);
    }
    if let Some(r) = a.resolution {
        spec.resolution = r;
    }
    if let Some(f) = a.field {
        spec.field = match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        };
    }
    if a.config.is_none() || seed.is_some() {
        spec.seed = seed.unwrap_or(0);
    }
    log::info!("generating {:?} with {} functions", spec.kind, spec.n_functions);
    let sys = generate_any(&spec)?;
    let mut buf = Vec::new();
    match (&sys, a.format) {
        (AnySystem::Real(s), Format::Json) => write_json(s, &mut buf)?,
        (AnySystem::Complex(s), Format::Json) => write_json(s, &mut buf)?,
        (AnySystem::Real(s), Format::Csv) => write_csv(s, &mut buf)?,
        (AnySystem::Complex(s), Format::Csv) => write_csv(s, &mut buf)?,
    }
    let text = String::from_utf8(buf).expect("writers emit UTF-8");
    emit_text(text.trim_end(), a.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct OrliczOutput {
    #[serde(flatten)]
    reduction: ReductionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    condensation: Option<CondensationReport>,
}

fn check_orlicz(a: &OrliczArgs) -> Result<i32> {
    let seq = sequence(&a.seq)?;
    let w = weight(&a.weight)?;
    let reduction = orlicz_reduction(&seq, &w, a.trunc)?;
    let condensation = match w.form {
        WeightForm::LogPower { .. } => Some(condensation_chain(&w, a.condensation_terms)?),
        WeightForm::Explicit(_) => None,
    };
    let ok = reduction.all_hold;
    emit_json(
        &OrliczOutput {
            reduction,
            condensation,
        },
        a.out.as_deref(),
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn read_system(path: &Path) -> Result<AnySystem> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let reader = open(path)?;
    with_path(path, if is_csv { read_csv(reader) } else { read_json(reader) })
}

#[derive(Serialize)]
struct MajorantOutput {
    ons_valid: bool,
    max_identity_dev: f64,
    n: usize,
    plan: PermutationPlan,
    profile: MajorantProfile,
}

fn majorant_cmd(a: &MajorantArgs, seed: u64) -> Result<i32> {
    match read_system(&a.system)? {
        AnySystem::Real(s) => majorant_typed(&s, a, seed),
        AnySystem::Complex(s) => majorant_typed(&s, a, seed),
    }
}

fn majorant_typed<S: Scalar>(sys: &System<S>, a: &MajorantArgs, seed: u64) -> Result<i32> {
    let coeffs: Vec<S> = match (&a.coeffs, &a.powerlog) {
        (Some(path), _) => {
            let pairs = with_path(path, read_scalar_column(open(path)?))?;
            with_path(path, crate::direct_integral::io::scalars_from_pairs(&pairs))?
        }
        (None, Some(p)) => powerlog(p)?.values(sys.len()).into_iter().map(S::from_real).collect(),
        (None, None) => return Err(Error::Config("one of --coeffs or --powerlog is required".into())),
    };
    let n = a.n.unwrap_or(coeffs.len().min(sys.len()));
    let (ons_valid, gram) = sys.validate(a.tol)?;
    let plan = match a.plan {
        PlanArg::Identity => PermutationPlan::identity(n),
        PlanArg::Shuffle => PermutationPlan::seeded_shuffle(n, seed),
        PlanArg::Greedy => adversarial_permutation(sys, &coeffs, n, AdversarialStrategy::GreedyMaxPrefix, seed)?,
        PlanArg::Reversal => adversarial_permutation(sys, &coeffs, n, AdversarialStrategy::BlockReversal, seed)?,
    };
    let profile = permuted_majorant(sys, &coeffs, &plan, n)?;
    match a.format {
        Format::Json => emit_json(
            &MajorantOutput {
                ons_valid,
                max_identity_dev: gram.max_identity_dev(),
                n,
                plan,
                profile,
            },
            a.out.as_deref(),
        )?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["atom", "weight", "value", "argmax_prefix"])?;
            for (i, (v, j)) in profile.values.iter().zip(&profile.argmax_prefix).enumerate() {
                w.write_record([
                    i.to_string(),
                    crate::direct_integral::io::fmt_f64(sys.space.weight(i)),
                    crate::direct_integral::io::fmt_f64(*v),
                    j.to_string(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            let text = String::from_utf8(bytes).expect("csv writer emits UTF-8");
            emit_text(text.trim_end(), a.out.as_deref())?;
        }
    }
    Ok(EXIT_OK)
}

fn verify_cmd(a: &VerifyArgs, seed: Option<u64>, threads: Option<usize>) -> Result<i32> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| Error::Parse(format!("{}: {e}", a.config.display())))?;
    let mut cfg = with_path(&a.config, TrialConfig::from_json(&text))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(list) = &a.check {
        cfg.checks = list.iter().map(|s| s.parse::<CheckId>()).collect::<Result<_>>()?;
    }
    log::info!(
        "verify: {} trials, seed {}, {} checks",
        cfg.n_trials,
        cfg.seed,
        cfg.checks.len()
    );
    let report = run_suite_with_threads(&cfg, threads)?;
    log::info!("verify finished in {:.2} s", report.wall_time_s);
    emit_json(&report, a.out.as_deref())?;
    for c in &report.checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        eprintln!("{status} {}", c.check.name());
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(dispatch(["orthoseries", "decompose", "5", "3", "--bogus"]), EXIT_USAGE);
    }

    #[test]
    fn decompose_ok_and_range_error() {
        assert_eq!(dispatch(["orthoseries", "decompose", "5", "3"]), EXIT_OK);
        assert_eq!(dispatch(["orthoseries", "decompose", "9", "3"]), EXIT_USAGE);
    }

    #[test]
    fn float_lists() {
        assert_eq!(parse_floats("1, 1,2", "x", 3, 3).unwrap(), vec![1.0, 1.0, 2.0]);
        assert!(parse_floats("1,a,2", "x", 3, 3).is_err());
        assert!(parse_floats("1,2", "x", 3, 3).is_err());
    }
}
