//! The `polyens` command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::asymptotics::{limit_report, CoefficientProfile, ProfileJson};
use crate::charpoly::{moment_gap, zeros};
use crate::config::{AnyEnsemble, EnsembleConfig, CLASSICAL_NAMES};
use crate::error::{Error, Result};
use crate::measure::DEFAULT_NEGATIVITY_TOLERANCE;
use crate::recurrence::RecurrenceTable;
use crate::report::{emit, fmt_f64, render_json, Csv, Meta, DEFAULT_SEED};
use crate::sampler::{sample_replicas, PointConfiguration, SamplerConfig, SamplerMode};
use crate::scalar::Scalar;
use crate::variance::{cumulants, limiting_variance, variance_power, variance_upper_bound, BivariateLimit};
use crate::verify::{run_selected, VerifyOptions, CRITERIA};

/// Exit code for a failed acceptance run.
pub const EXIT_ACCEPTANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "polyens", version, about = "Moments, zeros, variances and exact samples of polynomial ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw exact samples; one CSV row per replica.
    Sample {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "auto")]
        mode: SamplerMode,
        #[arg(long, default_value_t = DEFAULT_NEGATIVITY_TOLERANCE)]
        negativity_tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean empirical moments as CSV.
    Moments {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 8)]
        lmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zeros of the average characteristic polynomial as CSV.
    Zeros {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap between mean moments and zero moments, with its bound, as CSV.
    Gap {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 4)]
        lmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact, bounding, limiting and Monte Carlo variance of Σ x_i^l as JSON.
    Variance {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 1)]
        power: usize,
        /// Monte Carlo replicas.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-N moments against the limit of a coefficient profile, as CSV.
    Limit {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = 8)]
        lmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite; JSON report on stdout or --out.
    Verify {
        /// Skip the long Monte Carlo checks.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,
        /// Run only these criteria (comma separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    /// Config file, or a classical name (gue, chebyshev, uniform-circle).
    #[arg(long)]
    pub ensemble: String,
    /// Number of points; overrides the config.
    #[arg(long = "N")]
    pub n: Option<usize>,
}

impl EnsembleArgs {
    fn resolve(&self, pad: usize) -> Result<EnsembleConfig> {
        let path = Path::new(&self.ensemble);
        let mut cfg = if path.is_file() {
            EnsembleConfig::from_json_str(&fs::read_to_string(path)?)?
        } else if CLASSICAL_NAMES.contains(&self.ensemble.as_str()) {
            let n = self.n.ok_or_else(|| Error::Config(format!("--N is required with --ensemble {}", self.ensemble)))?;
            EnsembleConfig::classical(&self.ensemble, n)?
        } else if self.ensemble.ends_with(".json") {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("config file {} not found", self.ensemble),
            )));
        } else {
            return Err(Error::UnknownName(self.ensemble.clone()));
        };
        if let Some(n) = self.n {
            cfg.set_n(n);
        }
        cfg.ensure_pad(pad);
        Ok(cfg)
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let kind = if e.exit_code() == 1 { "usage" } else { "numerical" };
            eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("POLYENS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run_config(command: &str, cfg: &EnsembleConfig, extra: Value) -> Value {
    json!({ "command": command, "ensemble": cfg.to_value(), "options": extra })
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Sample {
            ensemble,
            replicas,
            seed,
            mode,
            negativity_tolerance,
            out,
        } => {
            let cfg = ensemble.resolve(0)?;
            let sampler = SamplerConfig {
                mode,
                seed,
                negativity_tolerance,
                ..SamplerConfig::default()
            };
            let meta = Meta::new(
                &run_config("sample", &cfg, json!({ "replicas": replicas, "mode": mode, "negativity_tolerance": negativity_tolerance })),
                Some(seed),
            );
            let csv = match cfg.build()? {
                AnyEnsemble::Real(e) => sample_csv(sample_replicas(e.kernel(), &sampler, replicas)?, e.n()),
                AnyEnsemble::Complex(e) => sample_csv(sample_replicas(e.kernel(), &sampler, replicas)?, e.n()),
            };
            emit(out.as_deref(), &csv.render(&meta))?;
        }
        Command::Moments { ensemble, lmax, out } => {
            let cfg = ensemble.resolve(lmax)?;
            let t = cfg.table()?;
            let meta = Meta::new(&run_config("moments", &cfg, json!({ "lmax": lmax })), None);
            let mut csv = Csv::new(["l", "mean_moment"]);
            for l in 0..=lmax {
                csv.push(vec![l.to_string(), fmt_f64(t.mean_moment(l)?)]);
            }
            emit(out.as_deref(), &csv.render(&meta))?;
        }
        Command::Zeros { ensemble, out } => {
            let cfg = ensemble.resolve(0)?;
            let z = zeros(&cfg.table()?)?;
            let meta = Meta::new(&run_config("zeros", &cfg, json!({})), None);
            let mut csv = Csv::new(["index", "re", "im"]);
            for (i, z) in z.zeros().iter().enumerate() {
                csv.push(vec![i.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
            }
            emit(out.as_deref(), &csv.render(&meta))?;
        }
        Command::Gap { ensemble, lmax, out } => {
            let cfg = ensemble.resolve(lmax)?;
            let t = cfg.table()?;
            let meta = Meta::new(&run_config("gap", &cfg, json!({ "lmax": lmax })), None);
            let mut csv = Csv::new(["l", "mean_moment", "zero_moment", "gap", "bound"]);
            for l in 1..=lmax {
                let g = moment_gap(&t, l)?;
                csv.push(vec![
                    l.to_string(),
                    fmt_f64(g.mean_moment),
                    fmt_f64(g.zero_moment),
                    fmt_f64(g.gap),
                    fmt_f64(g.bound),
                ]);
            }
            emit(out.as_deref(), &csv.render(&meta))?;
        }
        Command::Variance {
            ensemble,
            power,
            mc,
            seed,
            out,
        } => {
            if power == 0 {
                return Err(Error::Parameter("--power must be at least 1".into()));
            }
            let cfg = ensemble.resolve(power + 1)?;
            let t = cfg.table()?;
            let exact = variance_power(&t, power)?;
            let bound = variance_upper_bound(&t, power)?;
            let limit = limiting_value(&t, power)?;
            let monte_carlo = match mc {
                Some(replicas) => Some(monte_carlo_variance(&cfg, power, replicas, seed)?),
                None => None,
            };
            let meta = Meta::new(
                &run_config("variance", &cfg, json!({ "power": power, "mc": mc })),
                mc.map(|_| seed),
            );
            let body = json!({
                "power": power,
                "N": t.n(),
                "exact": exact,
                "bound": bound,
                "limit": limit,
                "monte_carlo": monte_carlo,
            });
            emit(out.as_deref(), &render_json(&meta, body))?;
        }
        Command::Limit {
            ensemble,
            profile,
            lmax,
            out,
        } => {
            let cfg = ensemble.resolve(lmax)?;
            let t = cfg.table()?;
            let profile_json: ProfileJson = serde_json::from_str(&fs::read_to_string(&profile)?)
                .map_err(|e| Error::Config(format!("profile {}: {e}", profile.display())))?;
            let p = CoefficientProfile::try_from(profile_json.clone())?;
            let meta = Meta::new(
                &run_config("limit", &cfg, json!({ "lmax": lmax, "profile": profile_json })),
                None,
            );
            let mut csv = Csv::new(["l", "finite", "limit", "gap"]);
            for row in limit_report(&t, &p, lmax)? {
                csv.push(vec![row.l.to_string(), fmt_f64(row.finite), fmt_f64(row.limit), fmt_f64(row.gap)]);
            }
            emit(out.as_deref(), &csv.render(&meta))?;
        }
        Command::Verify { quick, seed, only, out } => {
            let ids: Vec<usize> = if only.is_empty() {
                CRITERIA.iter().map(|c| c.0).collect()
            } else {
                only
            };
            let report = run_selected(VerifyOptions { quick, seed }, &ids);
            for c in &report.criteria {
                eprintln!("{}", c.line());
            }
            let meta = Meta::new(&json!({ "command": "verify", "quick": quick, "criteria": ids }), Some(seed));
            let body = json!({ "passed": report.passed(), "quick": quick, "criteria": report.criteria });
            emit(out.as_deref(), &render_json(&meta, body))?;
            if !report.passed() {
                return Ok(EXIT_ACCEPTANCE);
            }
        }
    }
    Ok(0)
}

fn sample_csv<S: Scalar>(samples: Vec<PointConfiguration<S>>, n: usize) -> Csv {
    let mut columns = vec!["replica".to_string()];
    columns.extend((1..=n).map(|i| format!("x{i}")));
    columns.push("log_density".into());
    let mut csv = Csv::new(columns);
    for (r, s) in samples.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(s.points.iter().map(|x| x.render()));
        row.push(fmt_f64(s.log_density));
        csv.push(row);
    }
    csv
}

/// Limiting variance with `(a, b)` frozen at index N-1; OP tables only.
fn limiting_value(t: &RecurrenceTable, power: usize) -> Result<Option<f64>> {
    let Some((a, b)) = t.op_coefficients() else {
        return Ok(None);
    };
    let n = t.n();
    let limit = BivariateLimit::new(a[n - 1], b[n - 1])?;
    Ok(Some(limiting_variance(|x| x.powi(power as i32), &limit)))
}

fn monte_carlo_variance(cfg: &EnsembleConfig, power: usize, replicas: usize, seed: u64) -> Result<Value> {
    let sampler = SamplerConfig {
        seed,
        ..SamplerConfig::default()
    };
    let stats: Vec<f64> = match cfg.build()? {
        AnyEnsemble::Real(e) => sample_replicas(e.kernel(), &sampler, replicas)?
            .iter()
            .map(|s| s.points.iter().map(|x| x.powi(power as i32)).sum())
            .collect(),
        AnyEnsemble::Complex(_) => {
            return Err(Error::Unsupported("Monte Carlo variance of real powers needs a real ensemble".into()))
        }
    };
    let c = cumulants(&stats)?;
    Ok(json!({ "replicas": replicas, "estimate": c.kappa[1], "se": c.se[1] }))
}
