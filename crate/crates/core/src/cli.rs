//! Batch front end. Every command resolves one [`RunConfig`], runs a single
//! computation and writes one JSON document.
//!
//! Parameters come from flags and, optionally, a JSON file given by
//! `--config`; a flag always wins over the file. Complex values are written
//! `re` or `re,im`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bethe::{bethe_solve, q_equivalence_baxter, BetheOptions, SpinSet};
use crate::conformance::{elliptic_suite, structural_suite};
use crate::elliptic::{log2pi, ModularData};
use crate::error::{Error, Result};
use crate::perturbative::{conjecture_scaling, gap_check, induced_transfer, solve_excited, SolverOptions};
use crate::precision::Context;
use crate::thermo::{delta_f_solve, free_energy, ThermoOptions};
use crate::tropical::{enumerate_states, tropical_t, tropical_tq_residual};

/// Version of the JSON layout written by every command.
pub const SCHEMA: &str = "liouville-q/1";

/// Exit status when a verification suite has a relation above tolerance.
pub const EXIT_VERIFY_FAILED: i32 = 100;

#[derive(Debug, Parser)]
#[command(name = "liouville-q", version, about = "Q-operator spectra of the eight-vertex chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Seeded identity suites for the special functions and lattice structures.
    Verify,
    /// Catalogue of tropical states for given N, m, v.
    Spectrum,
    /// Perturbative solution of the Liouville equation for one state.
    Solve,
    /// Thermodynamic-limit fixed point.
    Thermo,
    /// Bethe roots on the spin set.
    Bethe,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamArgs {
    /// Number of sites.
    #[arg(long = "N", global = true)]
    #[serde(rename = "N")]
    pub sites: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "complex_text")]
    pub v: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "complex_text")]
    pub y: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "complex_text")]
    pub p: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "complex_text")]
    pub q: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "complex_text")]
    pub tau: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "complex_text")]
    pub eta: Option<String>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Highest perturbative degree D.
    #[arg(long, global = true)]
    pub order: Option<i32>,
    /// Fourier modes K of the thermodynamic fixed point.
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "precision-bits", global = true)]
    #[serde(rename = "precision-bits", alias = "precision_bits")]
    pub precision_bits: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random points per suite for `verify`.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Index into the state catalogue for `solve`.
    #[arg(long, global = true)]
    pub state: Option<usize>,
    /// JSON file with any of the parameters above, keyed by flag name.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn complex_text<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    use serde::de::Error as _;
    Ok(match Value::deserialize(d)? {
        Value::Null => None,
        Value::Number(x) => Some(x.to_string()),
        Value::String(s) => Some(s),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => Some(format!("{},{}", a[0], a[1])),
        other => return Err(D::Error::custom(format!("expected a number, \"re,im\" or [re, im], found {other}"))),
    })
}

/// Parses `re` or `re,im`.
pub fn parse_complex(text: &str) -> Result<C> {
    let bad = || Error::Config(format!("cannot read {text:?} as a complex number; use re or re,im"));
    let mut parts = text.split(',').map(str::trim);
    let re: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(C::new(re, im))
}

impl ParamArgs {
    /// Fills every unset field from `base`. The spectral parameter and the
    /// nomes are taken as groups, so a flag in one form replaces a file
    /// entry in the other form instead of clashing with it.
    fn or(self, mut base: ParamArgs) -> ParamArgs {
        if self.v.is_some() || self.y.is_some() {
            base.v = None;
            base.y = None;
        }
        if self.p.is_some() || self.q.is_some() || self.tau.is_some() || self.eta.is_some() {
            (base.p, base.q, base.tau, base.eta) = (None, None, None, None);
        }
        ParamArgs {
            sites: self.sites.or(base.sites),
            v: self.v.or(base.v),
            y: self.y.or(base.y),
            p: self.p.or(base.p),
            q: self.q.or(base.q),
            tau: self.tau.or(base.tau),
            eta: self.eta.or(base.eta),
            m: self.m.or(base.m),
            n: self.n.or(base.n),
            order: self.order.or(base.order),
            modes: self.modes.or(base.modes),
            tol: self.tol.or(base.tol),
            precision_bits: self.precision_bits.or(base.precision_bits),
            seed: self.seed.or(base.seed),
            points: self.points.or(base.points),
            out: self.out.or(base.out),
            state: self.state.or(base.state),
            config: self.config,
        }
    }
}

/// Fully resolved parameters, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "N")]
    pub sites: usize,
    /// Spectral parameter, when the command takes one.
    pub v: Option<C>,
    pub p: Option<C>,
    pub q: Option<C>,
    pub tau: Option<C>,
    pub eta: Option<C>,
    pub m: usize,
    pub n: usize,
    pub order: i32,
    pub modes: usize,
    pub tol: Option<f64>,
    pub precision_bits: u32,
    pub seed: u64,
    pub points: Option<usize>,
    pub state: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn exclusive(a: &Option<String>, b: &Option<String>, what: &str) -> Result<()> {
    if a.is_some() && b.is_some() {
        return Err(Error::Config(format!("give {what}, not both")));
    }
    Ok(())
}

fn opt_c(s: &Option<String>) -> Result<Option<C>> {
    s.as_deref().map(parse_complex).transpose()
}

impl RunConfig {
    /// Merges the optional config file under the flags, checks that only one
    /// parameter form is used, and applies per-command defaults.
    pub fn resolve(command: Command, flags: ParamArgs) -> Result<RunConfig> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
                serde_json::from_str::<ParamArgs>(&text)
                    .map_err(|e| Error::Config(format!("parsing {}: {e}", path.display())))?
            }
            None => ParamArgs::default(),
        };
        let a = flags.or(file);
        exclusive(&a.v, &a.y, "either --v or --y")?;
        let multiplicative = a.p.is_some() || a.q.is_some();
        let additive = a.tau.is_some() || a.eta.is_some();
        if multiplicative && additive {
            return Err(Error::Config("give the nomes either as --p/--q or as --tau/--eta, not both".into()));
        }
        let (mut p, mut q, mut tau, mut eta) = (opt_c(&a.p)?, opt_c(&a.q)?, opt_c(&a.tau)?, opt_c(&a.eta)?);
        if multiplicative && (p.is_none() || q.is_none()) || additive && (tau.is_none() || eta.is_none()) {
            return Err(Error::Config("both nomes are needed: --p with --q, or --tau with --eta".into()));
        }
        // fill in the other form so that reports carry both
        if let (Some(pp), Some(qq)) = (p, q) {
            tau = Some(log2pi(qq)?);
            eta = Some(log2pi(pp)?);
        } else if let (Some(t), Some(e)) = (tau, eta) {
            let md = ModularData::from_additive(C::new(0.0, 0.0), C::new(0.0, 0.0), t, e)?;
            p = Some(md.p);
            q = Some(md.q);
        }
        let v = match (opt_c(&a.v)?, opt_c(&a.y)?) {
            (Some(v), _) => Some(v),
            (None, Some(y)) => Some(crate::elliptic::expi2pi(y)),
            (None, None) => None,
        };

        let mut cfg = RunConfig {
            command,
            sites: a.sites.unwrap_or(2),
            v,
            p,
            q,
            tau,
            eta,
            m: a.m.unwrap_or(0),
            n: a.n.unwrap_or(0),
            order: a.order.unwrap_or(4),
            modes: a.modes.unwrap_or(12),
            tol: a.tol,
            precision_bits: a.precision_bits.unwrap_or(53),
            seed: a.seed.unwrap_or(42),
            points: a.points,
            state: a.state.unwrap_or(0),
            out: a.out,
        };
        match command {
            Command::Verify => {}
            Command::Spectrum | Command::Solve => {
                cfg.v.get_or_insert(C::new(0.5, 0.0));
            }
            Command::Thermo => {
                if a.sites.is_none() {
                    cfg.sites = 4;
                }
                cfg.v.get_or_insert(C::new(0.7, 0.0));
                if cfg.p.is_none() {
                    let nome = C::new(0.2, 0.0);
                    cfg.p = Some(nome);
                    cfg.q = Some(nome);
                    cfg.tau = Some(log2pi(nome)?);
                    cfg.eta = Some(log2pi(nome)?);
                }
            }
            Command::Bethe => {
                if cfg.v.is_some() {
                    return Err(Error::Config("bethe places y on the spin set; drop --v/--y".into()));
                }
                if a.m.is_none() && a.n.is_none() {
                    cfg.m = 1;
                }
                if cfg.tau.is_none() {
                    let (t, e) = (C::new(0.0, 0.6), C::new(0.13, 0.45));
                    let md = ModularData::from_additive(C::new(0.0, 0.0), C::new(0.0, 0.0), t, e)?;
                    cfg.tau = Some(t);
                    cfg.eta = Some(e);
                    cfg.p = Some(md.p);
                    cfg.q = Some(md.q);
                }
            }
        }
        Ok(cfg)
    }

    pub fn context(&self) -> Result<Context> {
        if self.precision_bits == 53 {
            Ok(Context::double())
        } else {
            Context::with_bits(self.precision_bits)
        }
    }

    fn real(&self, name: &str, z: Option<C>) -> Result<f64> {
        let z = z.ok_or_else(|| Error::Config(format!("{name} is required")))?;
        if z.im != 0.0 {
            return Err(Error::Config(format!("{} needs a real {name}, got {z}", self.command_name())));
        }
        Ok(z.re)
    }

    fn command_name(&self) -> &'static str {
        match self.command {
            Command::Verify => "verify",
            Command::Spectrum => "spectrum",
            Command::Solve => "solve",
            Command::Thermo => "thermo",
            Command::Bethe => "bethe",
        }
    }
}

/// A finished command: the JSON document and the process exit status.
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

fn envelope(cfg: &RunConfig, ctx: &Context, body: Value) -> Value {
    let mut doc = serde_json::json!({
        "schema": SCHEMA,
        "command": cfg.command_name(),
        "config": cfg,
        "policy": ctx,
    });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn error_value(e: &Error) -> Value {
    serde_json::json!({ "code": e.code(), "kind": e.kind(), "message": e.to_string() })
}

fn verify(cfg: &RunConfig, ctx: &Context) -> Result<(Value, i32)> {
    let elliptic = elliptic_suite(cfg.seed, cfg.points.unwrap_or(100), 0.3, cfg.tol.unwrap_or(1e-12), ctx)?;
    let structural = structural_suite(cfg.seed, cfg.points.unwrap_or(20), cfg.tol.unwrap_or(1e-8), ctx)?;
    let failing: Vec<String> = [&elliptic, &structural]
        .iter()
        .flat_map(|s| s.failing().into_iter().map(move |r| format!("{}: {r}", s.suite)))
        .collect();
    let code = if failing.is_empty() { 0 } else { EXIT_VERIFY_FAILED };
    let body = serde_json::json!({
        "passed": failing.is_empty(),
        "failing": failing,
        "max_residual": { "elliptic": elliptic.max_residual(), "structural": structural.max_residual() },
        "suites": [to_value(&elliptic), to_value(&structural)],
    });
    Ok((body, code))
}

fn spectrum(cfg: &RunConfig) -> Result<Value> {
    let v = cfg.v.expect("default applied");
    let states = enumerate_states(cfg.sites, cfg.m, v)?;
    let samples = [C::new(0.7, 0.3), C::new(-1.3, 0.4), C::new(0.2, -0.9)];
    let mut rows = Vec::with_capacity(states.len());
    for (index, s) in states.iter().enumerate() {
        let t = tropical_t(s)?;
        let tq = samples.iter().map(|&u| tropical_tq_residual(s, &t, u).norm()).fold(0.0, f64::max);
        rows.push(serde_json::json!({
            "index": index,
            "state": to_value(s),
            "p_polynomial": to_value(&s.p_polynomial()),
            "h_polynomial": to_value(&s.h_polynomial()),
            "t": to_value(&t),
            "tq_residual": tq,
        }));
    }
    Ok(serde_json::json!({ "count": states.len(), "states": rows }))
}

fn solve(cfg: &RunConfig, ctx: &Context) -> Result<Value> {
    let v = cfg.v.expect("default applied");
    let states = enumerate_states(cfg.sites, cfg.m, v)?;
    let state = states.get(cfg.state).ok_or_else(|| {
        Error::Config(format!("--state {} out of range: N = {}, m = {} has {} states", cfg.state, cfg.sites, cfg.m, states.len()))
    })?;
    let mut opts = SolverOptions { degree: cfg.order, nomes: cfg.p.zip(cfg.q), ..SolverOptions::default() };
    if let Some(t) = cfg.tol {
        opts.consistency_tol = t;
    }
    let sol = solve_excited(state, &opts, ctx)?;
    let transfer = match induced_transfer(&sol, 1e-10) {
        Ok(t) => serde_json::json!({ "independent": t.independent_count(), "result": to_value(&t) }),
        Err(e) => serde_json::json!({ "error": error_value(&e) }),
    };
    Ok(serde_json::json!({
        "states": states.len(),
        "solution": to_value(&sol),
        "certificate": to_value(&sol.liouville_certificate()),
        "order_sequence": to_value(&sol.order_sequence()),
        "pq_asymmetry": sol.pq_asymmetry(),
        "conjecture": to_value(&conjecture_scaling(&sol)),
        "gap": to_value(&gap_check(&sol)),
        "transfer": transfer,
    }))
}

fn thermo(cfg: &RunConfig, ctx: &Context) -> Result<Value> {
    let v = cfg.real("v", cfg.v)?;
    let p = cfg.real("p", cfg.p)?;
    let q = cfg.real("q", cfg.q)?;
    let mut opts = ThermoOptions { modes: cfg.modes, ..ThermoOptions::default() };
    opts.points = opts.points.max(4 * cfg.modes);
    if let Some(t) = cfg.tol {
        opts.tol = t;
    }
    let sol = delta_f_solve(cfg.sites, v, p, q, &opts, ctx)?;
    let samples: Vec<Value> = [C::new(1.0, 0.0), C::new(1.5, 0.0), C::from_polar(1.2, 0.7)]
        .iter()
        .map(|&u| match free_energy(u, v, p, q, 1e-16) {
            Ok(f) => to_value(&f),
            Err(e) => serde_json::json!({ "u": to_value(&u), "error": error_value(&e) }),
        })
        .collect();
    Ok(serde_json::json!({
        "warnings": to_value(&sol.warnings),
        "solution": to_value(&sol),
        "free_energy": samples,
    }))
}

fn bethe(cfg: &RunConfig, ctx: &Context) -> Result<Value> {
    let (tau, eta) = (cfg.tau.expect("default applied"), cfg.eta.expect("default applied"));
    let opts = BetheOptions { seed: cfg.seed, tol: cfg.tol.unwrap_or(1e-13), ..BetheOptions::default() };
    let report = bethe_solve(SpinSet { m: cfg.m, n: cfg.n }, cfg.sites, tau, eta, &opts, ctx)?;
    // branches whose factorised Q fails the TQ equation at fresh points are
    // reported but not tested for the theta-product form
    let valid: Vec<usize> = report
        .branches
        .iter()
        .enumerate()
        .filter(|(_, b)| b.q_check.as_ref().is_some_and(|c| c.fresh_point_residual < 1e-8))
        .map(|(i, _)| i)
        .collect();
    let equivalence: Vec<Value> = valid
        .iter()
        .map(|&i| match q_equivalence_baxter(&report.branches[i].roots, cfg.sites, tau, eta, ctx) {
            Ok(r) => serde_json::json!({ "branch": i, "result": to_value(&r) }),
            Err(e) => serde_json::json!({ "branch": i, "error": error_value(&e) }),
        })
        .collect();
    Ok(serde_json::json!({ "report": to_value(&report), "valid_branches": valid, "equivalence": equivalence }))
}

/// Runs one resolved command. Errors are folded into the report so that a
/// failed run still leaves a JSON document behind.
pub fn execute(cfg: &RunConfig) -> Outcome {
    let ctx = match cfg.context() {
        Ok(c) => c,
        Err(e) => {
            return Outcome {
                report: envelope(cfg, &Context::double(), serde_json::json!({ "error": error_value(&e) })),
                exit_code: e.code(),
            }
        }
    };
    let result = match cfg.command {
        Command::Verify => verify(cfg, &ctx),
        Command::Spectrum => spectrum(cfg).map(|b| (b, 0)),
        Command::Solve => solve(cfg, &ctx).map(|b| (b, 0)),
        Command::Thermo => thermo(cfg, &ctx).map(|b| (b, 0)),
        Command::Bethe => bethe(cfg, &ctx).map(|b| (b, 0)),
    };
    match result {
        Ok((body, exit_code)) => Outcome { report: envelope(cfg, &ctx, body), exit_code },
        Err(e) => Outcome {
            report: envelope(cfg, &ctx, serde_json::json!({ "error": error_value(&e) })),
            exit_code: e.code(),
        },
    }
}

/// Writes floats as `{:.16e}`, i.e. 17 significant digits, so that every
/// value round-trips exactly and output does not depend on shortest-repr
/// heuristics.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Serialises `value` with [`SeventeenDigits`]; non-finite floats become `null`.
pub fn render(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value.serialize(&mut ser).expect("serialising to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Entry point for the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Error::Config(String::new()).code() } else { 0 };
        }
    };
    let cfg = match RunConfig::resolve(cli.command, cli.params) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let outcome = execute(&cfg);
    let text = render(&outcome.report);
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("writing {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return Error::Config(msg).code();
    }
    if let Some(err) = outcome.report.get("error") {
        eprintln!("error: {}", err["message"].as_str().unwrap_or("unknown"));
    }
    outcome.exit_code
}
