//! Command-line driver: reads a JSON problem file, runs the requested
//! computation (divergence evaluation, forward or reverse projection, MMPLE
//! fit, or a parametric scan), and prints one JSON result document to
//! standard output. Scan series go to a separate two-column text file for
//! plotting. Exit codes: 0 success, 2 malformed input, 3 infeasible
//! constraints, 4 iteration budget exhausted.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use ialpha::divergence::relative_alpha_entropy;
use ialpha::families::{BinomialFamily, LinearFamily, ParametricFamily, PowerLawFamily};
use ialpha::forward::{forward_project, pythagorean_check, SolverOptions, Status};
use ialpha::measures::{Alphabet, AlphaParam, ProbMeasure};
use ialpha::oracle::ThetaRange;
use ialpha::reverse::{
    mmple_fit, parametric_reverse_scan, reverse_project, ReverseCase, ReverseOutcome, SampleSet,
    ScanOutcome, ThetaReport,
};
use ialpha::AlphaError;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "ialpha",
    about = "Relative alpha-entropy divergences and projections on finite alphabets"
)]
struct Args {
    /// Problem description (JSON)
    #[arg(long)]
    input: PathBuf,
    /// Computation to run; overrides the problem file's `mode`
    #[arg(long)]
    mode: Option<String>,
    /// Override the problem file's alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Write the scan series (columns: theta..., value) to this path
    #[arg(long)]
    scan_out: Option<PathBuf>,
    /// Stationarity tolerance of the projection solver
    #[arg(long)]
    kkt_tol: Option<f64>,
    /// Seed for multistart initialization (echoed in the output)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of solver starts
    #[arg(long)]
    multistart: Option<usize>,
    /// Newton iteration budget
    #[arg(long)]
    max_iters: Option<usize>,
    /// Fallback (projected-gradient) iteration budget
    #[arg(long)]
    fallback_iters: Option<usize>,
    /// Override the step of every grid range in the problem file
    #[arg(long)]
    grid_step: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlphabetSpec {
    Size(usize),
    Labels(Vec<String>),
}

impl AlphabetSpec {
    fn size(&self) -> usize {
        match self {
            AlphabetSpec::Size(n) => *n,
            AlphabetSpec::Labels(l) => l.len(),
        }
    }
}

#[derive(Deserialize)]
struct ConstraintSpec {
    f: Vec<f64>,
    #[serde(default)]
    rhs: f64,
}

#[derive(Deserialize, Clone, Copy)]
struct GridRange {
    lo: f64,
    hi: f64,
    step: f64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FamilySpec {
    PowerLaw,
    Binomial { trials: usize },
}

#[derive(Deserialize)]
struct ProblemFile {
    alphabet: AlphabetSpec,
    alpha: f64,
    r: Vec<f64>,
    #[serde(default)]
    constraints: Vec<ConstraintSpec>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    p: Option<Vec<f64>>,
    #[serde(default)]
    q: Option<Vec<f64>>,
    #[serde(default)]
    p_hat: Option<Vec<f64>>,
    /// Sample CSV path, resolved relative to the problem file
    #[serde(default)]
    samples: Option<String>,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    grid: Option<Vec<GridRange>>,
    #[serde(default)]
    family: Option<FamilySpec>,
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn malformed(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind: "malformed_input",
            message: message.into(),
        }
    }
}

impl From<AlphaError> for Failure {
    fn from(e: AlphaError) -> Self {
        let (code, kind) = match e {
            AlphaError::Infeasible => (3, "infeasible"),
            AlphaError::NotConverged { .. } => (4, "not_converged"),
            _ => (2, "invalid_input"),
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(doc) => {
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable document"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            let doc = json!({ "error": { "kind": f.kind, "message": f.message } });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable document"));
            ExitCode::from(f.code)
        }
    }
}

fn run(args: &Args) -> Result<Value, Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::malformed(format!("cannot read {}: {e}", args.input.display())))?;
    let file: ProblemFile =
        serde_json::from_str(&text).map_err(|e| Failure::malformed(format!("bad problem file: {e}")))?;

    let mode = args
        .mode
        .clone()
        .or_else(|| file.mode.clone())
        .ok_or_else(|| Failure::malformed("no mode given (problem file `mode` or --mode)"))?;
    let alpha_raw = args.alpha.unwrap_or(file.alpha);
    let alpha = AlphaParam::new(alpha_raw).map_err(Failure::from)?;
    let n = file.alphabet.size();
    let alphabet = Alphabet::new(n).map_err(Failure::from)?;
    let r = measure(&file.r, n, "r")?;

    let seed = args.seed.unwrap_or(0);
    let mut opts = SolverOptions::default();
    opts.rng_seed = seed;
    if let Some(t) = args.kkt_tol {
        opts.kkt_tol = t;
    }
    if let Some(m) = args.multistart {
        opts.multistart_count = m;
    }
    if let Some(m) = args.max_iters {
        opts.max_newton_iters = m;
    }
    if let Some(m) = args.fallback_iters {
        opts.max_fallback_iters = m;
    }

    // ∑Pf = rhs is stored homogeneously as ∑P(f − rhs·1) = 0
    let rows: Vec<Vec<f64>> = file
        .constraints
        .iter()
        .map(|cons| {
            if cons.f.len() != n {
                return Err(Failure::malformed(format!(
                    "constraint length {} does not match alphabet size {n}",
                    cons.f.len()
                )));
            }
            Ok(cons.f.iter().map(|v| v - cons.rhs).collect())
        })
        .collect::<Result<_, _>>()?;

    let base = json!({
        "mode": mode,
        "alpha": alpha_raw,
        "objective": if alpha_raw == 1.0 { "kullback_leibler" } else { "relative_alpha_entropy" },
        "seed": seed,
    });

    match mode.as_str() {
        "divergence" => {
            let p = measure(required(&file.p, "p")?, n, "p")?;
            let q = measure(required(&file.q, "q")?, n, "q")?;
            let d = relative_alpha_entropy(&p, &q, alpha).map_err(Failure::from)?;
            Ok(merge(
                base,
                json!({
                    "p": p.weights(),
                    "q": q.weights(),
                    "divergence": divergence_doc(d.is_finite(), d.value()),
                }),
            ))
        }
        "forward" => {
            let l = LinearFamily::new(rows, alphabet).map_err(Failure::from)?;
            let res = forward_project(&l, &r, alpha, &opts).map_err(Failure::from)?;
            if res.status != Status::Converged {
                return Err(Failure {
                    code: 4,
                    kind: "not_converged",
                    message: format!("projection stopped with status {:?}", res.status),
                });
            }
            let value = relative_alpha_entropy(&res.q, &r, alpha).map_err(Failure::from)?;
            let pythagorean = match &file.p {
                Some(pw) => {
                    let p = measure(pw, n, "p")?;
                    let (lhs, rhs) = pythagorean_check(&p, &res, &r, alpha).map_err(Failure::from)?;
                    json!({ "p": p.weights(), "lhs": lhs, "rhs": rhs, "difference": lhs - rhs })
                }
                None => Value::Null,
            };
            Ok(merge(
                base,
                json!({
                    "q": res.q.weights(),
                    "theta_star": res.theta_star,
                    "z": res.z,
                    "active_support": res.active_support,
                    "kkt_residual": res.kkt_residual,
                    "pythagorean_gap_bound": res.pythagorean_gap_bound,
                    "value": value.value(),
                    "status": "converged",
                    "pythagorean": pythagorean,
                }),
            ))
        }
        "reverse" => {
            let m = PowerLawFamily::new(alpha, r, rows).map_err(Failure::from)?;
            let p_hat = measure(required(&file.p_hat, "p_hat")?, n, "p_hat")?;
            let out = reverse_project(&m, &p_hat, &opts).map_err(Failure::from)?;
            ensure_converged(&out)?;
            Ok(merge(base, reverse_doc(&out)))
        }
        "mmple" => {
            let c = *required(&file.c, "c")?;
            let m = PowerLawFamily::new(alpha, r, rows).map_err(Failure::from)?;
            let samples = load_samples(&file, &args.input, m.alphabet())?;
            let fit = mmple_fit(&m, &samples, c, &opts).map_err(Failure::from)?;
            ensure_converged(&fit.outcome)?;
            let mut doc = reverse_doc(&fit.outcome);
            let extra = json!({
                "c": c,
                "sample_count": samples.len(),
                "p_hat": samples.empirical().weights(),
                "mean_power_likelihood": fit.mean_power_likelihood,
            });
            doc = merge(doc, extra);
            Ok(merge(base, doc))
        }
        "scan" => {
            let grid = scan_grid(&file, args)?;
            let target = match &file.p_hat {
                Some(w) => measure(w, n, "p_hat")?,
                None => r.clone(),
            };
            let scan = match file.family.as_ref().unwrap_or(&FamilySpec::PowerLaw) {
                FamilySpec::PowerLaw => {
                    let m = PowerLawFamily::new(alpha, r, rows).map_err(Failure::from)?;
                    parametric_reverse_scan(&m, &target, alpha, &grid).map_err(Failure::from)?
                }
                FamilySpec::Binomial { trials } => {
                    let fam = BinomialFamily::new(*trials).map_err(Failure::from)?;
                    if fam.alphabet().size() != n {
                        return Err(Failure::malformed(format!(
                            "binomial family on {} symbols does not match alphabet size {n}",
                            fam.alphabet().size()
                        )));
                    }
                    parametric_reverse_scan(&fam, &target, alpha, &grid).map_err(Failure::from)?
                }
            };
            let series_path = match &args.scan_out {
                Some(path) => {
                    write_series(path, &scan)?;
                    Value::String(path.display().to_string())
                }
                None => Value::Null,
            };
            let minima: Vec<Value> = scan
                .minima
                .iter()
                .map(|m| json!({ "theta": m.theta, "value": m.value }))
                .collect();
            Ok(merge(
                base,
                json!({
                    "minima": minima,
                    "series_len": scan.series.len(),
                    "series_path": series_path,
                }),
            ))
        }
        other => Err(Failure::malformed(format!(
            "unknown mode `{other}` (expected divergence, forward, reverse, mmple, or scan)"
        ))),
    }
}

fn required<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    field
        .as_ref()
        .ok_or_else(|| Failure::malformed(format!("mode requires the `{name}` block")))
}

fn measure(weights: &[f64], n: usize, name: &str) -> Result<ProbMeasure, Failure> {
    if weights.len() != n {
        return Err(Failure::malformed(format!(
            "`{name}` has {} entries, alphabet has {n}",
            weights.len()
        )));
    }
    ProbMeasure::normalized(weights.to_vec(), Alphabet::new(n).map_err(Failure::from)?)
        .map_err(|e| Failure::malformed(format!("`{name}`: {e}")))
}

fn load_samples(
    file: &ProblemFile,
    input: &Path,
    alphabet: std::sync::Arc<Alphabet>,
) -> Result<SampleSet, Failure> {
    let rel = required(&file.samples, "samples")?;
    let path = input.parent().unwrap_or_else(|| Path::new(".")).join(rel);
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::malformed(format!("cannot read samples {}: {e}", path.display())))?;
    SampleSet::parse_csv(&text, alphabet).map_err(Failure::from)
}

fn scan_grid(file: &ProblemFile, args: &Args) -> Result<Vec<ThetaRange>, Failure> {
    let ranges = required(&file.grid, "grid")?;
    if ranges.is_empty() {
        return Err(Failure::malformed("`grid` must list at least one range"));
    }
    Ok(ranges
        .iter()
        .map(|g| ThetaRange {
            lo: g.lo,
            hi: g.hi,
            step: args.grid_step.unwrap_or(g.step),
        })
        .collect())
}

fn ensure_converged(out: &ReverseOutcome) -> Result<(), Failure> {
    if out.projection.status != Status::Converged {
        return Err(Failure {
            code: 4,
            kind: "not_converged",
            message: format!(
                "underlying projection stopped with status {:?}",
                out.projection.status
            ),
        });
    }
    Ok(())
}

fn reverse_doc(out: &ReverseOutcome) -> Value {
    let case = match out.case {
        ReverseCase::InFamily => "in_family",
        ReverseCase::InClosureOnly => "in_closure_only",
        ReverseCase::RequiresExtension => "requires_extension",
    };
    let theta = match &out.theta {
        ThetaReport::Member(t) => json!({ "kind": "member", "values": t }),
        ThetaReport::BoundaryLimit(t) => json!({ "kind": "boundary_limit", "values": t }),
        ThetaReport::Extended(t) => json!({ "kind": "extended", "values": t }),
    };
    json!({
        "case": case,
        "q": out.q.weights(),
        "theta": theta,
        "divergence": divergence_doc(out.divergence.is_finite(), out.divergence.value()),
        "l_tilde": { "rows": out.l_tilde.rows() },
        "kkt_residual": out.projection.kkt_residual,
        "extended_member_check": out.extended_member_check,
        "status": "converged",
    })
}

fn divergence_doc(finite: bool, value: f64) -> Value {
    json!({
        "finite": finite,
        "value": if finite { Value::from(value) } else { Value::Null },
    })
}

fn write_series(path: &Path, scan: &ScanOutcome) -> Result<(), Failure> {
    let mut text = String::new();
    for (theta, value) in &scan.series {
        for t in theta {
            text.push_str(&format!("{t} "));
        }
        text.push_str(&format!("{value}\n"));
    }
    fs::write(path, text)
        .map_err(|e| Failure::malformed(format!("cannot write {}: {e}", path.display())))
}

/// Overlay `extra`'s fields onto `base` (both must be objects).
fn merge(base: Value, extra: Value) -> Value {
    let (Value::Object(mut b), Value::Object(e)) = (base, extra) else {
        unreachable!("documents are JSON objects");
    };
    b.extend(e);
    Value::Object(b)
}
