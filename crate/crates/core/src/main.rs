use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::Value;

use ham_eigen::driver::{
    continuation, diagonalize_oracle, emit_report, iterate, sweep_c0, ContinuationPlan, EigenRow, PassRow, ReportFormat, SolveReport,
    SweepGrid,
};
use ham_eigen::ham::{run_ham, HamConfig, OrderRow};
use ham_eigen::oscillator::{ApplyMode, BasisSpec, WaveVector};
use ham_eigen::pade::{pade_table, PadeRow};
use ham_eigen::perturbation::perturb_solve;
use ham_eigen::{format_scalar, make_context, Error, PrecisionContext, Result};

/// Homotopy analysis eigensolver for the quartic anharmonic oscillator.
///
/// CSV tables by subcommand: solve and perturb write `order,e_hat,residual`;
/// sweep writes `c0,order,e_hat,residual`; iterate writes
/// `pass,e_hat,residual`; continue writes `beta,e_hat,c0,n_s`; oracle writes
/// `index,eigenvalue`. With `--pade` the `m,value,degenerate` table goes to
/// `<stem>.pade.csv` next to `--out`, or after a blank line on stdout.
///
/// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "ham-eigen", version, verbatim_doc_comment)]
struct Cli {
    /// JSON object supplying values for any flag; flags given on the command
    /// line take precedence
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the homotopy series to a fixed order
    Solve(SolveArgs),
    /// Scan the convergence-control parameter c0
    Sweep(SweepArgs),
    /// Restart fixed-order solves from their own output
    Iterate(IterateArgs),
    /// Follow the eigenpair through increasing beta
    Continue(ContinueArgs),
    /// Rayleigh-Schrodinger perturbation series
    Perturb(PerturbArgs),
    /// Lowest eigenvalues of the truncated matrix by bisection
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Significant decimal digits of working precision
    #[arg(long, default_value_t = 50)]
    digits: u32,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Index of the eigenstate
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    /// Convergence-control parameter (decimal or p/q)
    #[arg(long, allow_hyphen_values = true)]
    c0: String,
    #[arg(long)]
    order: usize,
    /// Truncation order N_s of the basis
    #[arg(long)]
    ns: usize,
    /// How (H - E) psi is formed: truncated or extended
    #[arg(long, default_value = "truncated")]
    residual_mode: String,
    /// Also report diagonal Pade approximants of the energy series
    #[arg(long)]
    pade: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long)]
    ns: usize,
    #[arg(long, allow_hyphen_values = true)]
    c0_start: String,
    #[arg(long, allow_hyphen_values = true)]
    c0_end: String,
    #[arg(long)]
    c0_step: String,
    /// Orders sampled at every grid point, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    orders: Vec<usize>,
    #[arg(long, default_value = "truncated")]
    residual_mode: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct IterateArgs {
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long, allow_hyphen_values = true)]
    c0: String,
    #[arg(long)]
    ns: usize,
    /// Order of every pass
    #[arg(long)]
    m: usize,
    /// Number of passes
    #[arg(long)]
    passes: usize,
    #[arg(long, default_value = "truncated")]
    residual_mode: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ContinueArgs {
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// JSON list of stages: [{"beta", "c0", "ns", "order", "passes"}, ...]
    #[arg(long, value_name = "PATH")]
    plan: PathBuf,
    /// A stage is converged once its residual is below 10^-(2 * this)
    #[arg(long, default_value_t = 10)]
    digits_wanted: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PerturbArgs {
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long)]
    order: usize,
    #[arg(long)]
    ns: usize,
    #[arg(long, default_value = "truncated")]
    residual_mode: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long)]
    ns: usize,
    /// Number of eigenvalues, lowest first
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[command(flatten)]
    common: Common,
}

const SUBCOMMANDS: [&str; 6] = ["solve", "sweep", "iterate", "continue", "perturb", "oracle"];

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match merge_config_file(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut cmd = Cli::command();
    for name in SUBCOMMANDS {
        cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
    }
    let cli = match cmd.try_get_matches_from(argv).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // reader went away, e.g. `| head`
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn broken_pipe(e: &Error) -> bool {
    let kind = match e {
        Error::Io(e) => Some(e.kind()),
        Error::Csv(e) => match e.kind() {
            csv::ErrorKind::Io(e) => Some(e.kind()),
            _ => None,
        },
        Error::Json(e) => e.io_error_kind(),
        _ => None,
    };
    kind == Some(std::io::ErrorKind::BrokenPipe)
}

/// Splices flags from `--config <file>` in front of the subcommand's own
/// flags, so that later (command-line) occurrences win.
fn merge_config_file(argv: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(it.next().ok_or_else(|| Error::Config("--config needs a path".into()))?);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("cannot read config file {path}: {e}")))?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)? else {
        return Err(Error::Config("config file must hold a JSON object".into()));
    };
    let mut injected = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => injected.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => injected.push(format!("{flag}={s}")),
            Value::Number(n) => injected.push(format!("{flag}={n}")),
            Value::Array(items) => {
                let joined: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                injected.push(format!("{flag}={}", joined.join(",")));
            }
            Value::Object(_) => return Err(Error::Config(format!("config key '{key}' holds an object"))),
        }
    }
    // without a subcommand clap reports the error
    if let Some(i) = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) {
        let tail = rest.split_off(i + 1);
        rest.extend(injected);
        rest.extend(tail);
    }
    Ok(rest)
}

struct Output {
    ctx: PrecisionContext,
    out: Option<PathBuf>,
    format: ReportFormat,
    report: SolveReport,
    started: Instant,
}

impl Output {
    fn new(command: &str, common: &Common) -> Result<Self> {
        let ctx = make_context(common.digits)?;
        let format = common.format.parse()?;
        let mut report = SolveReport { command: command.into(), ..Default::default() };
        report.config.insert("digits".into(), common.digits.to_string());
        Ok(Self { ctx, out: common.out.clone(), format, report, started: Instant::now() })
    }

    fn echo(&mut self, key: &str, value: impl ToString) {
        self.report.config.insert(key.into(), value.to_string());
    }

    fn digits(&self) -> usize {
        self.ctx.digits() as usize
    }

    fn fmt(&self, x: &ham_eigen::Real) -> String {
        format_scalar(x, self.digits())
    }

    fn finish(mut self) -> Result<()> {
        self.report.wallclock_ms = self.started.elapsed().as_millis() as u64;
        emit_report(&self.report, self.format, self.out.as_deref())
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Iterate(a) => run_iterate(a),
        Command::Continue(a) => run_continue(a),
        Command::Perturb(a) => perturb(a),
        Command::Oracle(a) => oracle(a),
    }
}

fn ham_config(ctx: &PrecisionContext, n: usize, beta: &str, c0: &str, order: usize, ns: usize, mode: ApplyMode) -> Result<HamConfig> {
    let spec = BasisSpec::new(ns, ctx.parse(beta)?)?;
    Ok(HamConfig::new(n, ctx.parse(c0)?, order, spec)?.with_residual_mode(mode))
}

fn solve(a: SolveArgs) -> Result<()> {
    let mut out = Output::new("solve", &a.common)?;
    let mode: ApplyMode = a.residual_mode.parse()?;
    for (k, v) in
        [("n", a.n.to_string()), ("beta", a.beta.clone()), ("c0", a.c0.clone()), ("order", a.order.to_string()), ("ns", a.ns.to_string())]
    {
        out.echo(k, v);
    }
    out.report.residual_mode = Some(mode.as_str().into());
    out.report.pade_requested = a.pade;

    let config = ham_config(&out.ctx, a.n, &a.beta, &a.c0, a.order, a.ns, mode)?;
    let state = run_ham(&out.ctx, &config, WaveVector::unit(&out.ctx, config.spec.dim(), a.n))?;
    out.report.orders =
        state.records.iter().map(|r| OrderRow { order: r.order, e_hat: out.fmt(&r.e_hat), residual: out.fmt(&r.residual) }).collect();
    out.report.e_hat = Some(out.fmt(&state.e_hat));
    if a.pade {
        out.report.pade = pade_table(&out.ctx, &state.e_terms, a.order / 2)?
            .iter()
            .map(|p| PadeRow { m: p.m, value: out.fmt(&p.value), degenerate: p.degenerate })
            .collect();
    }
    out.finish()
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut out = Output::new("sweep", &a.common)?;
    let mode: ApplyMode = a.residual_mode.parse()?;
    let orders: Vec<String> = a.orders.iter().map(usize::to_string).collect();
    for (k, v) in [
        ("n", a.n.to_string()),
        ("beta", a.beta.clone()),
        ("ns", a.ns.to_string()),
        ("c0_start", a.c0_start.clone()),
        ("c0_end", a.c0_end.clone()),
        ("c0_step", a.c0_step.clone()),
        ("orders", orders.join(",")),
    ] {
        out.echo(k, v);
    }
    out.report.residual_mode = Some(mode.as_str().into());

    let ctx = &out.ctx;
    let grid = SweepGrid::new(ctx.parse(&a.c0_start)?, ctx.parse(&a.c0_end)?, ctx.parse(&a.c0_step)?, a.orders.clone())?;
    let first = grid.points()?.remove(0);
    let base = ham_config(ctx, a.n, &a.beta, "1", 1, a.ns, mode)?;
    let base = HamConfig { c0: first, ..base };
    let result = sweep_c0(ctx, &base, &grid, &WaveVector::unit(ctx, base.spec.dim(), a.n))?;
    let digits = out.digits();
    out.report.sweep = result.rows.iter().map(|p| p.to_row(digits)).collect();
    out.report.best_c0 = Some(out.fmt(&result.best_c0));
    out.finish()
}

fn run_iterate(a: IterateArgs) -> Result<()> {
    let mut out = Output::new("iterate", &a.common)?;
    let mode: ApplyMode = a.residual_mode.parse()?;
    for (k, v) in [
        ("n", a.n.to_string()),
        ("beta", a.beta.clone()),
        ("c0", a.c0.clone()),
        ("ns", a.ns.to_string()),
        ("m", a.m.to_string()),
        ("passes", a.passes.to_string()),
    ] {
        out.echo(k, v);
    }
    out.report.residual_mode = Some(mode.as_str().into());

    let config = ham_config(&out.ctx, a.n, &a.beta, &a.c0, a.m, a.ns, mode)?;
    let result = iterate(&out.ctx, &config, a.passes, WaveVector::unit(&out.ctx, config.spec.dim(), a.n))?;
    out.report.passes =
        result.passes.iter().map(|p| PassRow { pass: p.pass, e_hat: out.fmt(&p.e_hat), residual: out.fmt(&p.residual) }).collect();
    out.report.e_hat = Some(out.fmt(&result.state.e_hat));
    out.finish()
}

fn run_continue(a: ContinueArgs) -> Result<()> {
    let mut out = Output::new("continue", &a.common)?;
    out.echo("n", a.n);
    out.echo("plan", a.plan.display());
    out.echo("digits_wanted", a.digits_wanted);
    let plan = read_plan(&a.plan)?;
    match continuation(&out.ctx, &plan, a.n, a.digits_wanted) {
        Ok(result) => {
            out.report.e_hat = result.rows.last().map(|r| r.e_hat.clone());
            out.report.continuation = result.rows;
            out.finish()
        }
        Err(Error::StageFailure { stage, beta, target, achieved, completed }) => {
            // keep what converged before reporting the failure
            out.report.continuation = completed.clone();
            out.finish()?;
            Err(Error::StageFailure { stage, beta, target, achieved, completed })
        }
        Err(e) => Err(e),
    }
}

fn read_plan(path: &Path) -> Result<ContinuationPlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read plan {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn perturb(a: PerturbArgs) -> Result<()> {
    let mut out = Output::new("perturb", &a.common)?;
    let mode: ApplyMode = a.residual_mode.parse()?;
    for (k, v) in [("n", a.n.to_string()), ("beta", a.beta.clone()), ("order", a.order.to_string()), ("ns", a.ns.to_string())] {
        out.echo(k, v);
    }
    out.report.residual_mode = Some(mode.as_str().into());
    let beta = out.ctx.parse(&a.beta)?;
    let state = perturb_solve(&out.ctx, a.n, &beta, a.order, a.ns, mode)?;
    out.report.orders = state
        .e_partial
        .iter()
        .zip(&state.residuals)
        .enumerate()
        .map(|(k, (e, r))| OrderRow { order: k, e_hat: out.fmt(e), residual: out.fmt(r) })
        .collect();
    out.report.e_hat = Some(out.fmt(state.e_hat()));
    out.finish()
}

fn oracle(a: OracleArgs) -> Result<()> {
    let mut out = Output::new("oracle", &a.common)?;
    for (k, v) in [("beta", a.beta.clone()), ("ns", a.ns.to_string()), ("count", a.count.to_string())] {
        out.echo(k, v);
    }
    let spec = BasisSpec::new(a.ns, out.ctx.parse(&a.beta)?)?;
    let values = diagonalize_oracle(&out.ctx, &spec, a.count)?;
    out.report.eigenvalues = values.iter().enumerate().map(|(index, v)| EigenRow { index, eigenvalue: out.fmt(v) }).collect();
    out.report.e_hat = values.first().map(|v| out.fmt(v));
    out.finish()
}
