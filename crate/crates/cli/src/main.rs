//! `maxclade`: exact tables, distributions, constants, simulations and the
//! acceptance suite from the command line.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use maxclade::exact::{
    alpha_closed, alpha_series_from, build_f_dist, count_moments, e_big_f_ct_lambda, e_f_ct_lambda,
    e_f_ct_lambda_displayed, e_fk_ct, e_fk_ct_lambda, format_sig17, genfunc_residual,
    kummer_1f1_unit, ExactTables,
};
use maxclade::mc::{normality, run_experiment, CapPolicy, Model, SimConfig, Stat};
use maxclade::verify::{run_suite, Scale, VerifyOptions, DEFAULT_SEED};
use maxclade::Error;

use output::{write_output, Table};

#[derive(Parser, Debug)]
#[command(
    name = "maxclade",
    version,
    about = "Maximal clades in random binary search trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Worker threads
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Master seed
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write to this file (atomically) instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// μ, ν, ψ and the variance tables of G and G'
    Exact {
        #[arg(long, default_value_t = 1000)]
        nmax: u64,
        /// Small-clade cutoff for the G' columns [default: ceil(sqrt(nmax))]
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// Exact law of F and its moments
    Dist {
        #[arg(long, default_value_t = 64)]
        cap: usize,
        /// Absolute-moment orders
        #[arg(long = "p", default_values_t = [2.5, 3.0])]
        p: Vec<f64>,
        /// Cutoff for the X^N variance rows [default: ceil(sqrt(n)) per row]
        #[arg(long)]
        cutoff: Option<usize>,
    },
    /// Constants, series and the clock-tree formulas
    Constants {
        /// Truncation of the α series and of the generating function check
        #[arg(long, default_value_t = 1_000_000)]
        nmax: u64,
        #[arg(long, default_value_t = 3.0)]
        lambda: f64,
    },
    /// Monte Carlo experiment
    Simulate(SimulateArgs),
    /// Run the acceptance suite
    Verify {
        /// Reduced replicate counts, same tolerances
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::BstSplit)]
    model: ModelArg,
    #[arg(long, default_value_t = 100)]
    n: u64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Node cap for the clock model
    #[arg(long, default_value_t = SimConfig::default().cap)]
    cap: u64,
    /// Drop clock trees that reach the cap instead of failing
    #[arg(long)]
    discard_capped: bool,
    /// Small-clade cutoff N [default: ceil(sqrt(n))]
    #[arg(long)]
    cutoff: Option<u64>,
    #[arg(long, default_value_t = SimConfig::default().chain_depth)]
    chain_depth: usize,
    /// Replicates
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    /// Statistics, comma separated (size, height, F, f, X_N, large_clades,
    /// tail_event, G, H, G_small, G_large, H_small, H_large, F_k, f_k)
    #[arg(long, value_delimiter = ',', default_values_t = [Stat::F, Stat::XSmall])]
    stats: Vec<Stat>,
    /// Directory for raw values, one single-column CSV per statistic
    #[arg(long)]
    raw: Option<PathBuf>,
    /// Standardized histograms as CSV
    #[arg(long)]
    hist: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    bins: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    BstSplit,
    BstInsert,
    CtClock,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::BstSplit => Model::BstSplit,
            ModelArg::BstInsert => Model::BstInsert,
            ModelArg::CtClock => Model::CtClock,
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Domain(_) | Error::CapTooLarge { .. } => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn echo(command: &str, config: Value) -> Value {
    let meta = json!({ "command": command, "config": config });
    eprintln!("{meta}");
    meta
}

fn ceil_sqrt(n: u64) -> u64 {
    maxclade::mc::experiment::ceil_sqrt(n)
}

fn exact(g: &Global, nmax: u64, cutoff: Option<u64>) -> Outcome {
    let cutoff = cutoff.unwrap_or_else(|| ceil_sqrt(nmax));
    if cutoff > nmax {
        return Err(Failure::Usage(format!(
            "cutoff {cutoff} exceeds nmax {nmax}"
        )));
    }
    let meta = echo(
        "exact",
        json!({ "nmax": nmax, "cutoff": cutoff, "threads": g.threads }),
    );
    let t = ExactTables::build_with_psi(nmax);
    let cut = t.cutoff_tables(cutoff, nmax)?;
    let var_g = t.var_g_all();
    let var_g_cut = cut.var_g_small_all();
    let mut table = Table::new(&[
        "n",
        "mu",
        "nu",
        "psi",
        "psi_over_k",
        "var_g",
        "nu_cut",
        "psi_cut",
        "var_g_cut",
    ]);
    for n in 0..=nmax as usize {
        let psi = t.psi()[n];
        table.row(vec![
            n.to_string(),
            format_sig17(t.mu()[n]),
            format_sig17(t.nu()[n]),
            format_sig17(psi),
            if n == 0 {
                String::new()
            } else {
                format_sig17(psi / n as f64)
            },
            format_sig17(var_g[n]),
            format_sig17(cut.nu_small[n]),
            format_sig17(cut.psi_small[n]),
            format_sig17(var_g_cut[n]),
        ]);
    }
    write_output(g, &table.render(g.format, meta))
}

fn dist(g: &Global, cap: usize, ps: &[f64], cutoff: Option<usize>) -> Outcome {
    let meta = echo(
        "dist",
        json!({ "cap": cap, "p": ps, "cutoff": cutoff.map_or(json!("ceil(sqrt(n))"), |c| json!(c)), "threads": g.threads }),
    );
    let d = build_f_dist(cap)?;
    let all = count_moments(&d, cap, None)?;
    let mut table = Table::new(&["n", "kind", "arg", "value"]);
    let mut push = |n: usize, kind: &str, arg: String, v: f64| {
        table.row(vec![n.to_string(), kind.into(), arg, format_sig17(v)]);
    };
    for n in 0..=cap {
        for (m, &p) in d.pmf(n).iter().enumerate() {
            push(n, "pmf", m.to_string(), p);
        }
        push(n, "mean", String::new(), d.mean(n)?);
        for k in 2..=6 {
            push(n, "central", k.to_string(), d.central_moment(n, k)?);
        }
        for &p in ps {
            push(n, "abs_central", p.to_string(), d.abs_central_moment(n, p)?);
            push(n, "f_abs", p.to_string(), d.f_abs_moment(n, p)?);
            push(n, "sum_f_abs", p.to_string(), d.sum_f_abs(n, p)?);
        }
        let c = cutoff
            .unwrap_or_else(|| ceil_sqrt(n as u64) as usize)
            .min(n);
        push(n, "var_count", String::new(), all.variance[n]);
        let small = count_moments(&d, n, Some(c))?;
        push(n, "var_count_small", c.to_string(), small.variance[n]);
    }
    write_output(g, &table.render(g.format, meta))
}

fn constants(g: &Global, nmax: u64, lambda: f64) -> Outcome {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Failure::Usage(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let meta = echo("constants", json!({ "nmax": nmax, "lambda": lambda }));
    let t = ExactTables::build(nmax);
    let alpha = alpha_closed();
    let series = alpha_series_from(&t, nmax);
    let chain: f64 = (1..=30u64)
        .map(|k| if k % 2 == 1 { e_fk_ct(k) } else { -e_fk_ct(k) })
        .sum();
    let mut table = Table::new(&["name", "value"]);
    let mut push = |name: String, v: f64| table.row(vec![name, format_sig17(v)]);
    push("alpha_closed".into(), alpha);
    push(format!("alpha_series({nmax})"), series);
    push(
        format!("abs_diff_alpha_series({nmax})"),
        (series - alpha).abs(),
    );
    push("alternating_chain_sum(30)".into(), chain);
    for k in 1..=4 {
        push(format!("e_fk_ct({k})"), e_fk_ct(k));
    }
    for z in [-2.0, -1.0, 1.0] {
        push(
            format!("1F1(1;{lambda};{z})"),
            kummer_1f1_unit(lambda, z)?.value,
        );
    }
    for k in 1..=4 {
        push(
            format!("e_fk_ct_lambda({k},{lambda})"),
            e_fk_ct_lambda(k, lambda)?,
        );
    }
    push(format!("e_f_ct_lambda({lambda})"), e_f_ct_lambda(lambda)?);
    push(
        format!("e_f_ct_lambda_displayed({lambda})"),
        e_f_ct_lambda_displayed(lambda)?,
    );
    if lambda > 1.0 {
        push(
            format!("e_big_f_ct_lambda({lambda})"),
            e_big_f_ct_lambda(lambda)?,
        );
        push(
            format!("genfunc_residual({lambda},{nmax})"),
            genfunc_residual(lambda, nmax, &t)?,
        );
    }
    write_output(g, &table.render(g.format, meta))
}

fn simulate(g: &Global, a: &SimulateArgs) -> Outcome {
    let cfg = SimConfig {
        model: a.model.into(),
        n: a.n,
        lambda: a.lambda,
        cap: a.cap,
        cap_policy: if a.discard_capped {
            CapPolicy::Discard
        } else {
            CapPolicy::Fail
        },
        cutoff: a.cutoff,
        chain_depth: a.chain_depth,
        replicates: a.samples,
        seed: g.seed,
        workers: g.threads,
        stats: a.stats.clone(),
        store_raw: Some(
            a.raw.is_some() || a.hist.is_some() || a.samples <= maxclade::mc::experiment::RAW_LIMIT,
        ),
        ..Default::default()
    };
    cfg.validate()?;
    let resolved = cfg.resolved();
    let mut meta = echo(
        "simulate",
        serde_json::to_value(&resolved).expect("config serializes"),
    );
    let tables = match cfg.model {
        Model::CtClock => None,
        _ if cfg.stats.iter().any(|s| s.needs_nu()) => Some(ExactTables::build(cfg.n)),
        _ => None,
    };
    let res = run_experiment(&cfg, tables.as_ref())?;
    meta["discarded"] = json!(res.discarded);
    meta["spot_checked"] = json!(res.spot_checked);

    let mut table = Table::new(&[
        "stat", "count", "mean", "m2", "m3", "m4", "m5", "m6", "min", "max", "ks", "skew", "kurt",
    ]);
    for (stat, s) in &res.summaries {
        let ks = s
            .raw
            .as_deref()
            .and_then(|raw| normality(raw, s.mean, s.std_dev()).ok())
            .map(|d| format_sig17(d.ks))
            .unwrap_or_default();
        let mut row = vec![stat.to_string(), s.count.to_string(), format_sig17(s.mean)];
        row.extend((2..=6).map(|p| format_sig17(s.central_moment(p))));
        row.extend([
            format_sig17(s.min),
            format_sig17(s.max),
            ks,
            format_sig17(s.skewness()),
            format_sig17(s.excess_kurtosis()),
        ]);
        table.row(row);
    }
    if let Some(dir) = &a.raw {
        output::write_raw(dir, &res)?;
    }
    if let Some(path) = &a.hist {
        output::write_histograms(path, &res, a.bins)?;
    }
    write_output(g, &table.render(g.format, meta))
}

fn verify(g: &Global, quick: bool) -> Outcome {
    let opts = VerifyOptions {
        scale: if quick { Scale::Quick } else { Scale::Full },
        workers: g.threads,
        seed: g.seed,
    };
    echo(
        "verify",
        json!({ "quick": quick, "threads": g.threads, "seed": g.seed }),
    );
    let mut lines = String::new();
    let reports = run_suite(&opts, |r| {
        println!("{r}");
        lines.push_str(&r.line());
        lines.push('\n');
    });
    if let Some(path) = &g.out {
        output::atomic_write(path, lines.as_bytes())?;
    }
    if reports.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    if g.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    // Exact convolutions use the global pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(g.threads)
        .build_global();
    match &cli.command {
        Command::Exact { nmax, cutoff } => exact(g, *nmax, *cutoff),
        Command::Dist { cap, p, cutoff } => dist(g, *cap, p, *cutoff),
        Command::Constants { nmax, lambda } => constants(g, *nmax, *lambda),
        Command::Simulate(a) => simulate(g, a),
        Command::Verify { quick } => verify(g, *quick),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
