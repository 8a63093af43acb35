//! Command-line front end: one flag grammar shared by every subcommand,
//! JSON reports (CSV as a projection) and CI-friendly exit codes.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::enumerate::Enumerator;
use crate::error::{Error, Result};
use crate::lattice::{Domain, Point};
use crate::mcsampler::{estimate_green_mc, Strategy};
use crate::observables::{
    correlation_length_with, eps_threshold, error_amplitude_with, halfspace_avg_lower_check_with, sharp_length_with,
    SHARP_THRESHOLD,
};
use crate::srw::{
    coupling_merge_stats, exit_time_mean, gambler_ruin_curve, green_exact, halfspace_visits, RandomSource,
};
use crate::verifier::{
    check_bootstrap_conditions_with, check_iterated_decay_with, check_simon_lieb_reversed_with,
    check_simon_lieb_upper_with, check_weight_sandwich, measure_harnack_ratio, Verdict,
};
use crate::walks::ModelParams;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILS: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Flags shared by all subcommands. Each command reads the ones it needs.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct Flags {
    /// Lattice dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Self-avoidance strength in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// `start:stop:step`, inclusive of `stop`.
    #[arg(long = "beta-grid")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[arg(long = "S", allow_hyphen_values = true)]
    #[serde(rename = "S", skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    #[arg(long = "Lambda", allow_hyphen_values = true)]
    #[serde(rename = "Lambda", skip_serializing_if = "Option::is_none")]
    pub big_lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    /// Length cutoff.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    /// Spatial window radius.
    #[arg(long = "R")]
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    /// Scale parameter (half-space index, box radius, ...).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[arg(long = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub big_l: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long = "C")]
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Comma-separated distances for the correlation length fit.
    #[arg(long = "n-list")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[arg(long = "max-len")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    /// Monte Carlo proposal: uniform or nonreversing.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    /// Comma-separated outputs of `scan`: chi, L, xi.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
}

#[derive(Parser, Debug)]
#[command(name = "wsaw", version, about = "Weakly self-avoiding walk laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enclosure of G^Λ(x, y).
    Green(Flags),
    /// Enclosure of φ_β(S).
    Phi(Flags),
    /// Enclosure of the susceptibility on Z^d.
    Chi(Flags),
    /// Bounds on the bubble diagram.
    Bubble(Flags),
    /// Sharp length L_β, or L_β(ε) with --epsilon.
    SharpLength(Flags),
    /// Correlation length fit.
    Xi(Flags),
    /// Error amplitude E^{S,Λ}.
    ErrorAmplitude(Flags),
    /// Inequality checks.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Simple random walk baselines.
    Srw {
        #[command(subcommand)]
        op: SrwCommand,
    },
    /// Monte Carlo estimate of a length-truncated walk sum.
    Mc(Flags),
    /// Harnack ratio of the random walk Green function.
    Harnack(Flags),
    /// Tabulate χ, L_β and ξ over a β grid.
    Scan(Flags),
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    SlUpper(Flags),
    SlReversed(Flags),
    Weights(Flags),
    Bootstrap(Flags),
    IteratedDecay(Flags),
    AvgLower(Flags),
}

#[derive(Subcommand, Debug)]
pub enum SrwCommand {
    Green(Flags),
    Ruin(Flags),
    Halfspace(Flags),
    Coupling(Flags),
    ExitTime(Flags),
}

/// A parsed invocation: the command path and its flags.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub flags: Flags,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> RunConfig {
        let (command, flags) = match cli.command {
            Command::Green(f) => ("green", f),
            Command::Phi(f) => ("phi", f),
            Command::Chi(f) => ("chi", f),
            Command::Bubble(f) => ("bubble", f),
            Command::SharpLength(f) => ("sharp-length", f),
            Command::Xi(f) => ("xi", f),
            Command::ErrorAmplitude(f) => ("error-amplitude", f),
            Command::Verify { check } => match check {
                VerifyCommand::SlUpper(f) => ("verify sl-upper", f),
                VerifyCommand::SlReversed(f) => ("verify sl-reversed", f),
                VerifyCommand::Weights(f) => ("verify weights", f),
                VerifyCommand::Bootstrap(f) => ("verify bootstrap", f),
                VerifyCommand::IteratedDecay(f) => ("verify iterated-decay", f),
                VerifyCommand::AvgLower(f) => ("verify avg-lower", f),
            },
            Command::Srw { op } => match op {
                SrwCommand::Green(f) => ("srw green", f),
                SrwCommand::Ruin(f) => ("srw ruin", f),
                SrwCommand::Halfspace(f) => ("srw halfspace", f),
                SrwCommand::Coupling(f) => ("srw coupling", f),
                SrwCommand::ExitTime(f) => ("srw exit-time", f),
            },
            Command::Mc(f) => ("mc", f),
            Command::Harnack(f) => ("harnack", f),
            Command::Scan(f) => ("scan", f),
        };
        RunConfig {
            command: command.to_string(),
            flags,
        }
    }
}

/// Result of a successful run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

/// Exit code for an error: usage errors are 1, everything else 3.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch { .. }
        | Error::OutsideDomain { .. }
        | Error::NotAdjacent { .. }
        | Error::EndpointMismatch(_)
        | Error::UnboundedEdgeSet(_)
        | Error::InvalidDomainSpec { .. }
        | Error::InvalidPoint(_)
        | Error::InvalidParameter(_) => EXIT_USAGE,
        Error::Singular(_)
        | Error::TooLarge(_)
        | Error::Undecidable(_)
        | Error::DegenerateFit(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_RUNTIME,
    }
}

fn need<T>(v: Option<T>, flag: &str, command: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("`{command}` requires --{flag}")))
}

struct Ctx<'a> {
    f: &'a Flags,
    cmd: &'a str,
}

impl Ctx<'_> {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.f.d, self.f.lambda, self.beta()?)
    }

    fn beta(&self) -> Result<f64> {
        need(self.f.beta, "beta", self.cmd)
    }

    fn cutoff(&self) -> Result<usize> {
        need(self.f.cutoff, "N", self.cmd)
    }

    fn enumerator(&self) -> Result<Enumerator> {
        Enumerator::new(self.f.lambda, self.cutoff()?)
    }

    fn domain(&self, value: &Option<String>, flag: &str) -> Result<Domain> {
        Domain::parse(need(value.as_deref(), flag, self.cmd)?, self.f.d)
    }

    fn point(&self, value: &Option<String>, flag: &str) -> Result<Point> {
        Point::parse(need(value.as_deref(), flag, self.cmd)?, self.f.d)
    }

    fn point_or_origin(&self, value: &Option<String>) -> Result<Point> {
        match value {
            Some(s) => Point::parse(s, self.f.d),
            None => Ok(Point::origin(self.f.d)),
        }
    }

    fn rng(&self) -> RandomSource {
        RandomSource::new(self.f.seed)
    }
}

fn beta_c_bracket(d: usize) -> Value {
    json!({ "lower": 1.0 / (2 * d) as f64, "upper": "1/mu_c(d)" })
}

/// Inclusive grid `start, start + step, ...` up to `stop`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("beta grid `{spec}` must be start:stop:step with step > 0"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    let [a, b, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(bad());
    }
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

fn parse_list(spec: &str) -> Result<Vec<u64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("`{s}` in --n-list is not a non-negative integer")))
        })
        .collect()
}

/// Runs every `x` of `lambda` (or the single `--x`) through `check`.
fn per_x<F>(ctx: &Ctx, lambda: &Domain, check: F) -> Result<(Value, i32)>
where
    F: Fn(&Point) -> Result<crate::verifier::VerdictReport>,
{
    let xs = match &ctx.f.x {
        Some(s) => vec![Point::parse(s, ctx.f.d)?],
        None => lambda
            .points()
            .ok_or_else(|| Error::InvalidParameter("--x is required when Lambda is infinite".into()))?,
    };
    let reports = xs.iter().map(check).collect::<Result<Vec<_>>>()?;
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let fails = count(Verdict::Fails);
    let code = if fails > 0 { EXIT_FAILS } else { EXIT_OK };
    let value = if reports.len() == 1 {
        serde_json::to_value(&reports[0])?
    } else {
        json!({
            "holds": count(Verdict::Holds),
            "fails": fails,
            "inconclusive": count(Verdict::Inconclusive),
            "reports": reports,
        })
    };
    Ok((value, code))
}

fn dispatch(cfg: &RunConfig) -> Result<(Value, i32)> {
    let f = &cfg.flags;
    let ctx = Ctx { f, cmd: &cfg.command };
    if f.d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&f.lambda) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0,1], got {}", f.lambda)));
    }
    let ok = |v: Value| Ok((v, EXIT_OK));
    match cfg.command.as_str() {
        "green" => {
            let p = ctx.params()?;
            let dom = ctx.domain(&f.domain, "domain")?;
            let x = ctx.point_or_origin(&f.from)?;
            let en = ctx.enumerator()?;
            let row = en.row(p.beta, &dom, &x)?;
            match &f.to {
                Some(to) => {
                    let y = Point::parse(to, f.d)?;
                    ok(serde_json::to_value(en.green(p.beta, &dom, &x, &y)?)?)
                }
                None => {
                    let entries: Vec<Value> = row
                        .entries()
                        .into_iter()
                        .map(|(y, e)| json!({ "to": y.to_string(), "value": e }))
                        .collect();
                    ok(json!({ "from": x.to_string(), "entries": entries }))
                }
            }
        }
        "phi" => {
            let p = ctx.params()?;
            let s = ctx.domain(if f.s.is_some() { &f.s } else { &f.domain }, "S")?;
            ok(serde_json::to_value(ctx.enumerator()?.phi(p.beta, &s)?)?)
        }
        "chi" => {
            let p = ctx.params()?;
            let chi = ctx.enumerator()?.chi(p.beta, p.d)?;
            ok(json!({ "chi": chi, "beta_c_bracket": beta_c_bracket(p.d) }))
        }
        "bubble" => {
            let p = ctx.params()?;
            let r = need(f.window, "R", &cfg.command)?;
            ok(serde_json::to_value(ctx.enumerator()?.bubble(p.beta, p.d, r)?)?)
        }
        "sharp-length" => {
            let p = ctx.params()?;
            let threshold = match f.epsilon {
                Some(eps) => eps_threshold(eps)?,
                None => SHARP_THRESHOLD,
            };
            let r = sharp_length_with(&ctx.enumerator()?, p.beta, p.d, threshold, f.kmax.unwrap_or(8))?;
            ok(json!({ "sharp_length": r, "beta_c_bracket": beta_c_bracket(p.d) }))
        }
        "xi" => {
            let p = ctx.params()?;
            let n = ctx.cutoff()?;
            let list = match &f.n_list {
                Some(s) => parse_list(s)?,
                None => (1..=(n as u64 / 2).max(2)).collect(),
            };
            ok(serde_json::to_value(correlation_length_with(&ctx.enumerator()?, p.beta, p.d, &list)?)?)
        }
        "error-amplitude" => {
            let p = ctx.params()?;
            let s = ctx.domain(&f.s, "S")?;
            let l = ctx.domain(&f.big_lambda, "Lambda")?;
            let r = error_amplitude_with(&ctx.enumerator()?, p.beta, &s, &l)?;
            let per_u: Vec<Value> = r
                .per_u
                .iter()
                .map(|(u, e)| json!({ "u": u.to_string(), "value": e }))
                .collect();
            ok(json!({ "per_u": per_u, "total": r.total }))
        }
        "verify sl-upper" | "verify sl-reversed" => {
            let p = ctx.params()?;
            let s = ctx.domain(&f.s, "S")?;
            let l = ctx.domain(&f.big_lambda, "Lambda")?;
            let en = ctx.enumerator()?;
            if cfg.command == "verify sl-upper" {
                per_x(&ctx, &l, |x| check_simon_lieb_upper_with(&en, p.beta, &s, &l, x))
            } else {
                per_x(&ctx, &l, |x| check_simon_lieb_reversed_with(&en, p.beta, &s, &l, x))
            }
        }
        "verify weights" => {
            let p = ModelParams::new(f.d, f.lambda, f.beta.unwrap_or(0.0))?;
            let r = check_weight_sandwich(&p, f.trials.unwrap_or(1000), f.max_len.unwrap_or(12), &ctx.rng())?;
            let code = if r.violations + r.exact_violations + r.disjoint_not_equal > 0 {
                EXIT_FAILS
            } else {
                EXIT_OK
            };
            Ok((serde_json::to_value(r)?, code))
        }
        "verify bootstrap" => {
            let p = ctx.params()?;
            let c = need(f.c, "C", &cfg.command)?;
            let r = check_bootstrap_conditions_with(&ctx.enumerator()?, p.beta, p.d, c, f.nmax.unwrap_or(3))?;
            let code = if r.any_fail() { EXIT_FAILS } else { EXIT_OK };
            Ok((serde_json::to_value(r)?, code))
        }
        "verify iterated-decay" => {
            let p = ctx.params()?;
            let x = ctx.point(&f.x, "x")?;
            let r = check_iterated_decay_with(&ctx.enumerator()?, p.beta, &x, f.kmax.unwrap_or(8))?;
            let code = if r.verdict.is_fail() { EXIT_FAILS } else { EXIT_OK };
            Ok((serde_json::to_value(r)?, code))
        }
        "verify avg-lower" => {
            let p = ctx.params()?;
            let n = need(f.n, "n", &cfg.command)?;
            let r = halfspace_avg_lower_check_with(&ctx.enumerator()?, p.beta, p.d, n, f.epsilon.unwrap_or(0.8))?;
            let code = if r.verdict.is_fail() { EXIT_FAILS } else { EXIT_OK };
            Ok((serde_json::to_value(r)?, code))
        }
        "srw green" => {
            let beta = ctx.beta()?;
            let dom = ctx.domain(&f.domain, "domain")?;
            let g = green_exact(f.d, beta, &dom)?;
            match (&f.from, &f.to) {
                (Some(a), Some(b)) => {
                    let (x, y) = (Point::parse(a, f.d)?, Point::parse(b, f.d)?);
                    let v = g.get(&x, &y).ok_or_else(|| Error::OutsideDomain {
                        point: if g.get(&x, &x).is_none() { x.clone() } else { y.clone() },
                        domain: dom.to_string(),
                    })?;
                    ok(json!({ "from": x.to_string(), "to": y.to_string(), "value": v }))
                }
                _ => {
                    let x = ctx.point_or_origin(&f.from)?;
                    let entries: Vec<Value> = g
                        .points
                        .iter()
                        .filter_map(|y| g.get(&x, y).map(|v| json!({ "to": y.to_string(), "value": v })))
                        .collect();
                    if entries.is_empty() {
                        return Err(Error::OutsideDomain {
                            point: x,
                            domain: dom.to_string(),
                        });
                    }
                    ok(json!({ "from": x.to_string(), "entries": entries }))
                }
            }
        }
        "srw ruin" => {
            let n = f.n.unwrap_or(0);
            let steps = need(f.steps, "steps", &cfg.command)?;
            let curve = gambler_ruin_curve(f.d, n, steps)?;
            let value = *curve.last().expect("curve starts at time 0");
            // sample the curve at powers of two and at the end
            let mut trace = Vec::new();
            let mut t = 1u64;
            while t < steps {
                trace.push(json!({ "steps": t, "value": curve[t as usize] }));
                t *= 2;
            }
            trace.push(json!({ "steps": steps, "value": value }));
            ok(json!({ "value": value, "trace": trace }))
        }
        "srw halfspace" => {
            let x = ctx.point(&f.x, "x")?;
            let steps = need(f.steps, "steps", &cfg.command)?;
            ok(json!({ "visits": halfspace_visits(f.d, &x, steps)? }))
        }
        "srw coupling" => {
            let u = ctx.point(&f.from, "from")?;
            let v = ctx.point(&f.to, "to")?;
            let r = coupling_merge_stats(
                &u,
                &v,
                need(f.horizon, "horizon", &cfg.command)?,
                f.trials.unwrap_or(10_000),
                &ctx.rng(),
            )?;
            ok(json!({ "rng": RandomSource::ALGORITHM, "stats": r }))
        }
        "srw exit-time" => {
            let l = need(f.big_l, "L", &cfg.command)?;
            let x = ctx.point_or_origin(&f.x)?;
            let r = exit_time_mean(f.d, l, &x, f.trials.unwrap_or(10_000), &ctx.rng())?;
            ok(json!({ "rng": RandomSource::ALGORITHM, "exit_time": r }))
        }
        "mc" => {
            let p = ctx.params()?;
            let dom = ctx.domain(&f.domain, "domain")?;
            let x = ctx.point_or_origin(&f.from)?;
            let y = ctx.point(&f.to, "to")?;
            let strategy: Strategy = f.strategy.as_deref().unwrap_or("uniform").parse()?;
            let r = estimate_green_mc(
                &p,
                &dom,
                &x,
                &y,
                need(f.nmax, "nmax", &cfg.command)? as usize,
                f.samples.unwrap_or(10_000),
                &ctx.rng(),
                strategy,
            )?;
            ok(json!({ "rng": RandomSource::ALGORITHM, "estimate": r }))
        }
        "harnack" => {
            let beta = ctx.beta()?;
            let x = ctx.point(&f.x, "x")?;
            let r = measure_harnack_ratio(
                f.d,
                f.lambda,
                beta,
                need(f.n, "n", &cfg.command)?,
                f.alpha.unwrap_or(1.0),
                &x,
                need(f.window, "R", &cfg.command)?,
            )?;
            ok(serde_json::to_value(r)?)
        }
        "scan" => scan(&ctx),
        other => Err(Error::InvalidParameter(format!("unknown command `{other}`"))),
    }
}

fn scan(ctx: &Ctx) -> Result<(Value, i32)> {
    let f = ctx.f;
    let grid = parse_grid(need(f.beta_grid.as_deref(), "beta-grid", ctx.cmd)?)?;
    let emit = f.emit.as_deref().unwrap_or("chi,L,xi");
    let wants: Vec<&str> = emit.split(',').map(str::trim).collect();
    if let Some(bad) = wants.iter().find(|w| !["chi", "L", "xi"].contains(w)) {
        return Err(Error::InvalidParameter(format!("unknown --emit entry `{bad}`")));
    }
    let en = ctx.enumerator()?;
    let n = en.cutoff();
    let list: Vec<u64> = match &f.n_list {
        Some(s) => parse_list(s)?,
        None => (1..=(n as u64 / 2).max(2)).collect(),
    };
    let mut rows = Vec::new();
    for &beta in &grid {
        ModelParams::new(f.d, f.lambda, beta)?;
        let mut row = json!({ "beta": beta });
        if wants.contains(&"chi") {
            row["chi"] = serde_json::to_value(en.chi(beta, f.d)?)?;
        }
        if wants.contains(&"L") {
            row["sharp_length"] = serde_json::to_value(sharp_length_with(&en, beta, f.d, SHARP_THRESHOLD, f.kmax.unwrap_or(8))?)?;
        }
        if wants.contains(&"xi") {
            row["xi"] = match correlation_length_with(&en, beta, f.d, &list) {
                Ok(fit) => serde_json::to_value(fit)?,
                Err(e @ Error::DegenerateFit(_)) => json!({ "error": e.to_string() }),
                Err(e) => return Err(e),
            };
        }
        rows.push(row);
    }
    Ok((json!({ "rows": rows, "beta_c_bracket": beta_c_bracket(f.d) }), EXIT_OK))
}

/// Runs one configuration inside a pool of the requested size.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let start = Instant::now();
    let work = || dispatch(cfg);
    let (result, exit_code) = match cfg.flags.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build a pool of {t} threads: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "instance": cfg.flags,
        "result": result,
        "run": {
            "threads": cfg.flags.threads.unwrap_or_else(rayon::current_num_threads),
            "wall_time_s": start.elapsed().as_secs_f64(),
        },
    });
    Ok(Outcome { report, exit_code })
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

/// CSV projection of a report. `scan` gives one row per β with fixed
/// columns; other commands give `field,value` pairs of the result.
pub fn to_csv(report: &Value) -> String {
    let mut s = String::new();
    let result = &report["result"];
    if report["command"] == "scan" {
        s.push_str("beta,chi_lower,chi_upper,chi_rigorous,L,L_status,xi,xi_slope\n");
        for row in result["rows"].as_array().into_iter().flatten() {
            let status = &row["sharp_length"]["outcome"];
            let l = status.get("k").cloned().unwrap_or(Value::Null);
            let cells = [
                &row["beta"],
                &row["chi"]["lower"],
                &row["chi"]["upper"],
                &row["chi"]["rigorous"],
                &l,
                &status["status"],
                &row["xi"]["xi"],
                &row["xi"]["slope"],
            ];
            let line: Vec<String> = cells.iter().map(|v| csv_field(v)).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        return s;
    }
    s.push_str("field,value\n");
    let mut out = Vec::new();
    flatten("", result, &mut out);
    for (k, v) in out {
        let _ = writeln!(s, "{},{}", csv_field(&Value::String(k)), csv_field(&v));
    }
    s
}

fn render(report: &Value, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
        Format::Csv => to_csv(report),
    })
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = RunConfig::from(cli);
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let text = match render(&outcome.report, cfg.flags.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_RUNTIME;
        }
    };
    match &cfg.flags.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write report to {}: {e}", path.display());
                return EXIT_RUNTIME;
            }
        }
        None => print!("{text}"),
    }
    outcome.exit_code
}
