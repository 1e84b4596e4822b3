use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use sketchsvd::bounds::{
    budget_gap_dependent, budget_lanczos_random, budget_lanczos_warm,
    budget_power_gap_independent, GapTarget, IterationBudget,
};
use sketchsvd::harness::mm::format_matrix_market;
use sketchsvd::harness::report::write_json;
use sketchsvd::harness::{
    emit_report, read_matrix_market, run_campaign_with, synth_matrix, write_matrix_market,
    CampaignConfig, Claim, Execution, MethodChoice, ReportFormat, SpectrumKind, SpectrumSpec,
};
use sketchsvd::linalg::singular_values;
use sketchsvd::solvers::{randomized_svd, Method};

#[derive(Parser)]
#[command(name = "sketchsvd", version, about = "Randomized truncated SVD with iteration budgets and bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank-k approximation of a Matrix Market file.
    Svd(SvdArgs),
    /// Monte-Carlo campaign for one claim; exits 0 iff the pass rate meets the required rate.
    Verify(VerifyArgs),
    /// Iteration budgets for the given parameters.
    Budget(BudgetArgs),
    /// Writes a synthetic matrix with a prescribed spectrum in Matrix Market format.
    Spectrum(SpectrumArgs),
}

type AppResult<T> = Result<T, String>;

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {}", path.display(), e.message()))
}

/// Fills every unset field of `self` from `base`.
macro_rules! merge {
    ($self:ident, $base:ident; $($field:ident),*) => {
        Self { $($field: $self.$field.or($base.$field),)* ..$self }
    };
}

fn parse_spectrum(text: &str) -> Result<SpectrumKind, String> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let nums = |s: &str| -> Result<Vec<f64>, String> {
        s.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("invalid number `{t}`")))
            .collect()
    };
    let one = |s: &str| -> Result<f64, String> {
        s.trim().parse::<f64>().map_err(|_| format!("invalid number `{s}`"))
    };
    Ok(match kind {
        "geometric" => SpectrumKind::Geometric { ratio: one(rest)? },
        "polynomial" => SpectrumKind::Polynomial { exponent: one(rest)? },
        "step" => {
            let (pos, ratio) = rest
                .split_once(':')
                .ok_or("step needs `step:<position>:<ratio>`")?;
            let gap_position = pos.trim().parse().map_err(|_| format!("invalid position `{pos}`"))?;
            SpectrumKind::Step { gap_position, gap_ratio: one(ratio)? }
        }
        "explicit" => SpectrumKind::Explicit { values: nums(rest)? },
        other => return Err(format!("unknown spectrum `{other}` (geometric, polynomial, step, explicit)")),
    })
}

fn write_text(out: Option<&Path>, text: &str) -> AppResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    }
}

fn json_text<T: Serialize>(value: &T) -> AppResult<String> {
    let mut buf = Vec::new();
    write_json(value, &mut buf).map_err(|e| e.to_string())?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

fn csv_text<T: Serialize>(rows: &[T]) -> AppResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

// ---- svd ----

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SvdArgs {
    /// Matrix Market input.
    matrix: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// Sketch width; defaults to 2k capped at min(m, n).
    #[arg(long)]
    p: Option<usize>,
    /// power or lanczos.
    #[arg(long)]
    method: Option<Method>,
    /// Power steps or Krylov degree; derived from epsilon and alpha when omitted.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    format: Option<ReportFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the rank-k approximation to this Matrix Market file.
    #[arg(long)]
    approx_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl SvdArgs {
    fn merged(self) -> AppResult<Self> {
        match &self.config {
            Some(path) => {
                let base: Self = read_toml(path)?;
                Ok(merge!(self, base; matrix, k, p, method, iterations, epsilon, alpha, seed, format, out, approx_out))
            }
            None => Ok(self),
        }
    }
}

#[derive(Serialize)]
struct SvdSummary {
    rows: usize,
    cols: usize,
    k: usize,
    p: usize,
    method: Method,
    iterations: usize,
    seed: u64,
    spectral_err_sq: f64,
    frobenius_err_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    singular_values: Option<Vec<f64>>,
}

fn run_svd(args: SvdArgs) -> AppResult<bool> {
    let args = args.merged()?;
    let path = args.matrix.ok_or("missing matrix file")?;
    let m = read_matrix_market(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (rows, cols) = m.shape();
    let k = args.k.ok_or("missing --k")?;
    let p = args.p.unwrap_or((2 * k).min(rows.min(cols)));
    let method = args.method.unwrap_or(Method::Lanczos);
    let seed = args.seed.unwrap_or(0);
    let iterations = match args.iterations {
        Some(t) => t,
        None => {
            let epsilon = args.epsilon.unwrap_or(0.25);
            let alpha = args.alpha.unwrap_or(1.0);
            let budget = match method {
                Method::Lanczos => budget_lanczos_random(cols, p, k, epsilon, alpha),
                Method::Power => budget_power_gap_independent(cols, p, k, epsilon, alpha),
            };
            budget
                .map_err(|e| format!("cannot derive a budget ({e}); pass --iterations or a smaller --alpha"))?
                .count
        }
    };
    let res = randomized_svd(&m, k, p, method, iterations, seed).map_err(|e| e.to_string())?;
    if let Some(out) = &args.approx_out {
        write_matrix_market(out, &res.approx_k).map_err(|e| format!("{}: {e}", out.display()))?;
    }
    let mut summary = SvdSummary {
        rows,
        cols,
        k,
        p,
        method,
        iterations,
        seed,
        spectral_err_sq: res.spectral_err_sq,
        frobenius_err_sq: res.frobenius_err_sq,
        singular_values: None,
    };
    let text = match args.format.unwrap_or(ReportFormat::Json) {
        ReportFormat::Csv => csv_text(&[&summary])?,
        ReportFormat::Json => {
            let mut s = singular_values(&res.approx_k).map_err(|e| e.to_string())?;
            s.truncate(k);
            summary.singular_values = Some(s);
            json_text(&summary)?
        }
    };
    write_text(args.out.as_deref(), &text)?;
    Ok(true)
}

// ---- verify ----

#[derive(Args)]
struct VerifyArgs {
    /// lanczos-random, power-random, gap-dependent, initialization or lanczos-warm.
    #[arg(long)]
    claim: Option<Claim>,
    /// power, lanczos or both.
    #[arg(long)]
    method: Option<MethodChoice>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rows of the synthetic matrix.
    #[arg(long)]
    m: Option<usize>,
    /// Columns of the synthetic matrix.
    #[arg(long)]
    n: Option<usize>,
    /// geometric:<ratio>, polynomial:<exponent>, step:<position>:<ratio> or explicit:<v1,v2,...>.
    #[arg(long, value_parser = parse_spectrum)]
    spectrum: Option<SpectrumKind>,
    /// Matrix Market file used instead of a synthetic matrix.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    slack: Option<f64>,
    #[arg(long)]
    confidence_z: Option<f64>,
    #[arg(long)]
    format: Option<ReportFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Campaign TOML file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
}

impl VerifyArgs {
    fn campaign(&self) -> AppResult<CampaignConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                CampaignConfig::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => CampaignConfig::new(
                self.claim.ok_or("missing --claim (or --config)")?,
                self.k.ok_or("missing --k")?,
                self.p.ok_or("missing --p")?,
                self.epsilon.ok_or("missing --epsilon")?,
            ),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => { $(if let Some(v) = self.$flag.clone() { c.$field = v; })* };
        }
        set!(claim => claim, method => method, k => k, p => p, epsilon => epsilon, alpha => alpha,
             trials => trials, seed => seed, m => m, n => n, spectrum => spectrum,
             slack => slack, confidence_z => confidence_z);
        if let Some(path) = &self.matrix {
            c.matrix_path = Some(path.clone());
        }
        Ok(c)
    }
}

fn run_verify(args: VerifyArgs) -> AppResult<bool> {
    let config = args.campaign()?;
    let execution = if args.sequential { Execution::Sequential } else { Execution::Parallel };
    let report = run_campaign_with(&config, execution).map_err(|e| e.to_string())?;
    emit_report(&report, args.format.unwrap_or(ReportFormat::Json), args.out.as_deref())
        .map_err(|e| e.to_string())?;
    let a = &report.aggregate;
    eprintln!(
        "{}: {}/{} passed, rate {:.3} (required {:.3})",
        if a.overall_pass { "PASS" } else { "FAIL" },
        a.passed,
        a.total,
        a.pass_rate,
        a.required_rate
    );
    Ok(a.overall_pass)
}

// ---- budget ----

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BudgetArgs {
    /// Number of columns of the matrix.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// power, lanczos or both.
    #[arg(long)]
    method: Option<MethodChoice>,
    /// Tangent of the start block's angle; adds the warm-start budget.
    #[arg(long)]
    beta: Option<f64>,
    /// sigma_k; together with --sigma-p1 adds gap-dependent budgets.
    #[arg(long)]
    sigma_k: Option<f64>,
    /// sigma_(p+1).
    #[arg(long)]
    sigma_p1: Option<f64>,
    #[arg(long)]
    format: Option<ReportFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl BudgetArgs {
    fn merged(self) -> AppResult<Self> {
        match &self.config {
            Some(path) => {
                let base: Self = read_toml(path)?;
                Ok(merge!(self, base; n, k, p, epsilon, alpha, method, beta, sigma_k, sigma_p1, format, out))
            }
            None => Ok(self),
        }
    }
}

fn budgets(args: &BudgetArgs) -> AppResult<Vec<IterationBudget>> {
    let epsilon = args.epsilon.ok_or("missing --epsilon")?;
    let choice = args.method.unwrap_or_default();
    let wants = |m: Method| matches!((choice, m), (MethodChoice::Both, _) | (MethodChoice::Power, Method::Power) | (MethodChoice::Lanczos, Method::Lanczos));
    let err = |e: sketchsvd::Error| e.to_string();
    let mut out = Vec::new();
    let random = args.n.is_some() || args.k.is_some() || args.p.is_some();
    if random {
        let n = args.n.ok_or("missing --n")?;
        let k = args.k.ok_or("missing --k")?;
        let p = args.p.ok_or("missing --p")?;
        let alpha = args.alpha.ok_or("missing --alpha")?;
        if wants(Method::Lanczos) {
            out.push(budget_lanczos_random(n, p, k, epsilon, alpha).map_err(err)?);
        }
        if wants(Method::Power) {
            out.push(budget_power_gap_independent(n, p, k, epsilon, alpha).map_err(err)?);
        }
        match (args.sigma_k, args.sigma_p1) {
            (Some(sk), Some(sp)) => {
                for target in [GapTarget::Angle, GapTarget::Norm] {
                    for method in [Method::Power, Method::Lanczos].into_iter().filter(|m| wants(*m)) {
                        out.push(budget_gap_dependent(sk, sp, n, p, k, epsilon, alpha, method, target).map_err(err)?);
                    }
                }
            }
            (None, None) => {}
            _ => return Err("--sigma-k and --sigma-p1 must be given together".into()),
        }
    }
    if let Some(beta) = args.beta {
        if wants(Method::Lanczos) {
            out.push(budget_lanczos_warm(beta, epsilon).map_err(err)?);
        }
    }
    if out.is_empty() {
        return Err("nothing to compute: pass --n, --k, --p and --alpha, or --beta".into());
    }
    Ok(out)
}

fn run_budget(args: BudgetArgs) -> AppResult<bool> {
    let args = args.merged()?;
    let rows = budgets(&args)?;
    let text = match args.format.unwrap_or(ReportFormat::Json) {
        ReportFormat::Json => json_text(&rows)?,
        ReportFormat::Csv => csv_text(&rows)?,
    };
    write_text(args.out.as_deref(), &text)?;
    Ok(true)
}

// ---- spectrum ----

#[derive(Args, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SpectrumArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// geometric:<ratio>, polynomial:<exponent>, step:<position>:<ratio> or explicit:<v1,v2,...>.
    #[arg(long)]
    spectrum: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix Market output; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl SpectrumArgs {
    fn merged(self) -> AppResult<Self> {
        match &self.config {
            Some(path) => {
                let base: Self = read_toml(path)?;
                Ok(merge!(self, base; m, n, spectrum, seed, out))
            }
            None => Ok(self),
        }
    }
}

fn run_spectrum(args: SpectrumArgs) -> AppResult<bool> {
    let args = args.merged()?;
    let kind = match &args.spectrum {
        Some(s) => parse_spectrum(s)?,
        None => SpectrumKind::default(),
    };
    let spec = SpectrumSpec {
        kind,
        m: args.m.ok_or("missing --m")?,
        n: args.n.ok_or("missing --n")?,
        seed: args.seed.unwrap_or(0),
    };
    let synth = synth_matrix(&spec).map_err(|e| e.to_string())?;
    write_text(args.out.as_deref(), &format_matrix_market(&synth.matrix))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Svd(a) => run_svd(a),
        Command::Verify(a) => run_verify(a),
        Command::Budget(a) => run_budget(a),
        Command::Spectrum(a) => run_spectrum(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
