//! Command-line front end. [`run`] parses arguments, prints one JSON report on
//! stdout and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, woven, or certificate applicable |
//! | 1 | not woven, or certificate not applicable |
//! | 2 | bad input or unmet precondition |
//! | 3 | numerical failure |
//!
//! A report is printed exactly when the code is 0 or 1.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::certificates::{self as cert, CertificateName, CertificateResult, Direction, DualVariant};
use crate::duality::{canonical_dual, canonical_parseval, random_dual};
use crate::error::Error;
use crate::frame::Frame;
use crate::io::{self, DualEntry, DualListing, ExcessSummary, IoError, Report, ReportResult, SearchSummary, WeavingSummary};
use crate::rng::SeededRng;
use crate::weaving::{counterexample_search, exhaustive_multi_with, exhaustive_pair_with, Threads};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "woven", version, about = "Frame bounds, dual frames and woven-frame checks for finite frames")]
struct Cli {
    /// Omit the timestamp so identical runs print identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads for exhaustive enumeration (default: all cores).
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal frame bounds.
    Bounds { frame: PathBuf },
    /// Excess and a maximal independent subset.
    Excess { frame: PathBuf },
    /// Canonical dual, canonical Parseval frame and seeded random duals.
    Dual {
        frame: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Coefficients of the kernel perturbation are uniform on [-X, X].
        #[arg(long, value_name = "X", default_value_t = 1.0)]
        scale: f64,
        #[arg(long, value_name = "K", default_value_t = 1)]
        count: usize,
    },
    /// Decide whether two frames are woven.
    #[command(group(ArgGroup::new("mode").required(true).args(["exhaustive", "cert"])))]
    Weave {
        phi: PathBuf,
        psi: PathBuf,
        /// Check all 2^n weavings.
        #[arg(long)]
        exhaustive: bool,
        /// Use a pair certificate: synthesis_proximity, bessel_union,
        /// canonical_pair or canonical_parseval.
        #[arg(long, value_name = "NAME")]
        cert: Option<CertificateName>,
    },
    /// Check all m^n weavings of m frames.
    WeaveMulti {
        #[arg(required = true, num_args = 2..)]
        frames: Vec<PathBuf>,
        #[arg(long, required = true)]
        exhaustive: bool,
    },
    /// Evaluate one certificate.
    Certify(CertifyArgs),
    /// Look for random frame pairs that are not woven.
    Search {
        #[arg(long, value_name = "D")]
        dim: usize,
        #[arg(long, value_name = "N")]
        count: usize,
        #[arg(long, value_name = "T")]
        trials: usize,
        #[arg(long, value_name = "S", default_value_t = 0)]
        seed: u64,
    },
}

/// Positional frame files per certificate:
///
/// * 1 frame: canonical_dual_self, operator_multiplier, redundant_small_norm, dual_family
/// * 2 frames: synthesis_proximity, dual_transfer, parseval_dual_pair,
///   perturbed_duals, canonical_pair, canonical_parseval, scalar_weaving
/// * 3 frames: transitive_bridge
/// * 4 frames (Φ, Ψ, Φᵈ, Ψᵈ): duals_to_frames
/// * 1 or more: bessel_union
#[derive(Args, Debug)]
struct CertifyArgs {
    name: CertificateName,
    #[arg(required = true)]
    frames: Vec<PathBuf>,
    /// Perturbation sequence in frame-file layout; for operator_multiplier a
    /// matrix file `{"matrix": [[..]]}`.
    #[arg(long, value_name = "FILE")]
    u: Option<PathBuf>,
    /// Second perturbation sequence.
    #[arg(long, value_name = "FILE")]
    v: Option<PathBuf>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated scalars for the first frame.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alpha: Option<Vec<f64>>,
    /// Comma-separated scalars for the second frame.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    beta: Option<Vec<f64>>,
    /// shared_inverse or canonical_duals.
    #[arg(long)]
    variant: Option<DualVariant>,
    /// originals_to_duals or duals_to_originals.
    #[arg(long)]
    direction: Option<Direction>,
}

#[derive(Debug)]
enum Failure {
    Io(IoError),
    Core(Error),
    Usage(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Io(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io(e) => e.fmt(f),
            Failure::Core(e) => e.fmt(f),
            Failure::Usage(m) => f.write_str(m),
        }
    }
}

struct Outcome {
    report: Report,
    code: i32,
    note: Option<String>,
}

struct Ctx {
    timestamp: Option<u64>,
    threads: Threads,
    inputs: Vec<String>,
}

impl Ctx {
    fn frame(&mut self, p: &Path) -> Result<Frame, Failure> {
        self.inputs.push(p.display().to_string());
        Ok(io::read_frame(p)?)
    }

    fn finish(self, command: &str, result: ReportResult, code: i32, note: Option<String>) -> Outcome {
        Outcome { report: Report::new(command, self.inputs, self.timestamp, result), code, note }
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli) {
        Ok(o) => {
            if out.write_all(o.report.to_json().as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            if let Some(n) = o.note {
                let _ = writeln!(err, "woven: {n}");
            }
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "woven: error: {f}");
            f.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<Outcome, Failure> {
    let threads = match cli.threads {
        None => Threads::Auto,
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(k) => Threads::Fixed(k),
    };
    let timestamp = (!cli.deterministic)
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
    let mut ctx = Ctx { timestamp, threads, inputs: Vec::new() };

    match cli.command {
        Command::Bounds { frame } => {
            let f = ctx.frame(&frame)?;
            let b = f.bounds()?;
            let note = (!b.is_positive()).then(|| "lower bound is zero: the vectors do not span".to_owned());
            Ok(ctx.finish("bounds", ReportResult::Bounds(b), EXIT_OK, note))
        }
        Command::Excess { frame } => {
            let f = ctx.frame(&frame)?;
            let e = ExcessSummary::from(&f.excess()?);
            Ok(ctx.finish("excess", ReportResult::Excess(e), EXIT_OK, None))
        }
        Command::Dual { frame, seed, scale, count } => {
            let f = ctx.frame(&frame)?;
            f.frame_bounds_checked()?;
            let canonical = canonical_dual(&f)?;
            let mut rng = SeededRng::new(seed);
            let mut duals = Vec::with_capacity(count);
            for _ in 0..count {
                let s = rng.split();
                let (dual, u) = random_dual(&f, s, scale)?;
                duals.push(DualEntry { seed: s, dual, perturbation: u.vectors() });
            }
            let listing = DualListing {
                canonical_parseval: canonical_parseval(&f)?,
                canonical,
                excess: f.excess()?.excess,
                scale,
                duals,
            };
            Ok(ctx.finish("dual", ReportResult::Dual(listing), EXIT_OK, None))
        }
        Command::Weave { phi, psi, exhaustive: _, cert } => {
            let a = ctx.frame(&phi)?;
            let b = ctx.frame(&psi)?;
            match cert {
                None => {
                    let v = exhaustive_pair_with(&a, &b, ctx.threads)?;
                    Ok(weaving_outcome(ctx, "weave", WeavingSummary::from_verdict(&v, 2)))
                }
                Some(name) => {
                    let r = match name {
                        CertificateName::SynthesisProximity => cert::cert_synthesis_proximity(&a, &b)?,
                        CertificateName::BesselUnion => cert::cert_bessel_union(&[a, b])?,
                        CertificateName::CanonicalPair => {
                            cert::cert_canonical_pair(&a, &b, Direction::DualsToOriginals)?
                        }
                        CertificateName::CanonicalParseval => cert::cert_canonical_parseval(&a, &b)?,
                        other => {
                            return Err(Failure::Usage(format!(
                                "certificate {other} does not conclude about the given pair; use `certify {other}`"
                            )))
                        }
                    };
                    Ok(certificate_outcome(ctx, "weave", r))
                }
            }
        }
        Command::WeaveMulti { frames, exhaustive: _ } => {
            let fs = frames.iter().map(|p| ctx.frame(p)).collect::<Result<Vec<_>, _>>()?;
            let v = exhaustive_multi_with(&fs, ctx.threads)?;
            Ok(weaving_outcome(ctx, "weave-multi", WeavingSummary::from_verdict(&v, fs.len())))
        }
        Command::Certify(args) => {
            let r = certify(&mut ctx, args)?;
            Ok(certificate_outcome(ctx, "certify", r))
        }
        Command::Search { dim, count, trials, seed } => {
            let found = counterexample_search(dim, count, trials, seed)?;
            let summary = SearchSummary {
                dim,
                count,
                trials,
                seed,
                counterexamples: found.iter().map(Into::into).collect(),
            };
            let note = format!("{} of {trials} pairs not woven", summary.counterexamples.len());
            Ok(ctx.finish("search", ReportResult::Search(summary), EXIT_OK, Some(note)))
        }
    }
}

fn weaving_outcome(ctx: Ctx, command: &str, s: WeavingSummary) -> Outcome {
    let (code, note) = match &s.witness {
        None => (EXIT_OK, None),
        Some(w) => {
            let detail = match &w.sigma {
                Some(sigma) => format!("sigma = {sigma:?}"),
                None => format!("assignment = {:?}", w.assignment),
            };
            (EXIT_NEGATIVE, Some(format!("not woven: the weaving with {detail} is not a frame")))
        }
    };
    ctx.finish(command, ReportResult::Weaving(s), code, note)
}

fn certificate_outcome(ctx: Ctx, command: &str, r: CertificateResult) -> Outcome {
    let (code, note) = if r.applicable {
        (EXIT_OK, None)
    } else {
        let why = r.failed_condition.clone().unwrap_or_default();
        (EXIT_NEGATIVE, Some(format!("{} not applicable: {why}", r.name)))
    };
    ctx.finish(command, ReportResult::Certificate(r), code, note)
}

fn certify(ctx: &mut Ctx, a: CertifyArgs) -> Result<CertificateResult, Failure> {
    use CertificateName as N;
    let name = a.name;
    let (frames_wanted, opts): (Option<usize>, &[&str]) = match name {
        N::SynthesisProximity | N::CanonicalDualSelf | N::CanonicalParseval => {
            (Some(if name == N::CanonicalDualSelf { 1 } else { 2 }), &[])
        }
        N::OperatorMultiplier | N::DualFamily => (Some(1), &["u"]),
        N::RedundantSmallNorm => (Some(1), &["u", "eps"]),
        N::TransitiveBridge => (Some(3), &[]),
        N::BesselUnion => (None, &[]),
        N::DualTransfer => (Some(2), &["u"]),
        N::ParsevalDualPair => (Some(2), &["u", "v"]),
        N::PerturbedDuals => (Some(2), &["u", "v", "variant?"]),
        N::DualsToFrames => (Some(4), &[]),
        N::CanonicalPair => (Some(2), &["direction?"]),
        N::ScalarWeaving => (Some(2), &["alpha", "beta"]),
    };
    if let Some(k) = frames_wanted {
        if a.frames.len() != k {
            return Err(Failure::Usage(format!("{name} takes {k} frame file(s), got {}", a.frames.len())));
        }
    }
    let given = [
        ("u", a.u.is_some()),
        ("v", a.v.is_some()),
        ("eps", a.eps.is_some()),
        ("alpha", a.alpha.is_some()),
        ("beta", a.beta.is_some()),
        ("variant", a.variant.is_some()),
        ("direction", a.direction.is_some()),
    ];
    for (opt, present) in given {
        let required = opts.contains(&opt);
        let optional = opts.iter().any(|o| o.strip_suffix('?') == Some(opt));
        if present && !required && !optional {
            return Err(Failure::Usage(format!("{name} does not take --{opt}")));
        }
        if !present && required {
            return Err(Failure::Usage(format!("{name} requires --{opt}")));
        }
    }

    let fs = a.frames.iter().map(|p| ctx.frame(p)).collect::<Result<Vec<_>, _>>()?;
    let mut pert = |p: &Option<PathBuf>| -> Result<_, Failure> {
        let p = p.as_ref().expect("checked above");
        ctx.inputs.push(p.display().to_string());
        Ok(io::read_perturbation(p)?)
    };
    let r = match name {
        N::SynthesisProximity => cert::cert_synthesis_proximity(&fs[0], &fs[1])?,
        N::OperatorMultiplier => {
            let p = a.u.as_ref().expect("checked above");
            ctx.inputs.push(p.display().to_string());
            cert::cert_operator_multiplier(&fs[0], &io::read_matrix(p)?)?
        }
        N::TransitiveBridge => cert::cert_transitive_bridge_frames(&fs[0], &fs[1], &fs[2])?,
        N::BesselUnion => cert::cert_bessel_union(&fs)?,
        N::RedundantSmallNorm => {
            let u = pert(&a.u)?;
            cert::cert_redundant_small_norm(&fs[0], &u, a.eps.expect("checked above"))?
        }
        N::DualTransfer => {
            let u = pert(&a.u)?;
            cert::cert_dual_transfer(&fs[0], &fs[1], &u)?
        }
        N::CanonicalDualSelf => cert::cert_canonical_dual_self(&fs[0])?,
        N::DualFamily => {
            let u = pert(&a.u)?;
            cert::cert_dual_family(&fs[0], &u)?
        }
        N::ParsevalDualPair => {
            let u = pert(&a.u)?;
            let v = pert(&a.v)?;
            cert::cert_parseval_dual_pair(&fs[0], &fs[1], &u, &v)?
        }
        N::PerturbedDuals => {
            let u = pert(&a.u)?;
            let v = pert(&a.v)?;
            cert::cert_perturbed_duals(&fs[0], &fs[1], &u, &v, a.variant.unwrap_or_default())?
        }
        N::DualsToFrames => cert::cert_duals_to_frames(&fs[0], &fs[1], &fs[2], &fs[3])?,
        N::CanonicalPair => {
            cert::cert_canonical_pair(&fs[0], &fs[1], a.direction.unwrap_or(Direction::OriginalsToDuals))?
        }
        N::CanonicalParseval => cert::cert_canonical_parseval(&fs[0], &fs[1])?,
        N::ScalarWeaving => {
            let alpha = a.alpha.as_deref().expect("checked above");
            let beta = a.beta.as_deref().expect("checked above");
            cert::cert_scalar_weaving(&fs[0], &fs[1], alpha, beta)?
        }
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("woven").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn exit_codes_by_failure_kind() {
        assert_eq!(Failure::Core(Error::NoConvergence { sweeps: 100 }).exit_code(), EXIT_NUMERICAL);
        assert_eq!(Failure::Core(Error::NoRedundancy).exit_code(), EXIT_INPUT);
        assert_eq!(Failure::Usage("x".into()).exit_code(), EXIT_INPUT);
    }

    fn write(dir: &Path, name: &str, body: &str) -> String {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p.display().to_string()
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&[]).0, EXIT_INPUT);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["bounds", "/nonexistent/phi.json"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn certify_option_checks() {
        let dir = tempfile::tempdir().unwrap();
        let phi = write(dir.path(), "phi.json", r#"{"dim":2,"vectors":[[1,0],[0,1]]}"#);
        let (code, out, err) = run_args(&["certify", "operator_multiplier", &phi]);
        assert_eq!(code, EXIT_INPUT);
        assert!(out.is_empty());
        assert!(err.contains("requires --u"), "{err}");
        let (code, _, err) = run_args(&["certify", "canonical_dual_self", &phi, "--eps", "0.1"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("does not take --eps"), "{err}");
        let (code, _, _) = run_args(&["certify", "canonical_dual_self", &phi, &phi]);
        assert_eq!(code, EXIT_INPUT);
        let (code, out, _) = run_args(&["--deterministic", "certify", "canonical_dual_self", &phi]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("\"canonical_dual_self\""));
    }

    #[test]
    fn weave_requires_a_mode() {
        let dir = tempfile::tempdir().unwrap();
        let phi = write(dir.path(), "phi.json", r#"{"dim":1,"vectors":[[1]]}"#);
        assert_eq!(run_args(&["weave", &phi, &phi]).0, EXIT_INPUT);
        assert_eq!(run_args(&["weave", &phi, &phi, "--exhaustive", "--cert", "bessel_union"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["weave", &phi, &phi, "--cert", "dual_family"]).0, EXIT_INPUT);
        assert_eq!(run_args(&["weave", &phi, &phi, "--exhaustive"]).0, EXIT_OK);
    }
}
