//! The acceptance checks, shared by the `verify` command and the test suite.
//!
//! Each criterion runs a set of named checks and reports pass or fail with the
//! measured values. [`Scale::Quick`] only lowers replicate counts; every
//! tolerance stays the same.

pub mod enumerate;

use std::fmt;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{
    alpha_closed, alpha_series, build_f_dist, count_moments, ct_lambda_size_pmf, e_f_ct_lambda,
    e_fk_ct, expected_large_clades, expected_zk, genfunc_residual, ExactTables, FDist,
};
use crate::functionals::{
    count_chains, count_f, count_f_small, count_f_small_by_tolls, maximal_green, toll_f, tolls,
};
use crate::mc::{
    chi_square_pvalue, normality, run_experiment, tail_event_rate, CapPolicy, Model, SimConfig,
    Stat,
};
use crate::rng::RngStream;
use crate::stream::{stream_bst, StreamConfig};
use crate::tree::{gen_bst_insert, gen_bst_split};

pub const CRITERIA: u32 = 12;
pub const DEFAULT_SEED: u64 = 20_130_520;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Quick,
    Full,
}

impl Scale {
    /// Replicate count for a check specified with `full` replicates.
    fn replicates(self, full: u64, quick: u64) -> u64 {
        match self {
            Scale::Full => full,
            Scale::Quick => quick,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub scale: Scale,
    pub workers: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            scale: Scale::Full,
            workers: 1,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// One line: status, id, title and every check, failing ones marked.
    pub fn line(&self) -> String {
        let details: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let mark = if c.passed { "" } else { "FAILED " };
                format!("{mark}{}: {}", c.name, c.detail)
            })
            .collect();
        format!(
            "[{}] criterion {:>2} {} ({}/{} checks, {:.1} s): {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len(),
            self.elapsed.as_secs_f64(),
            details.join("; ")
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

/// Tables shared between criteria, built on first use.
#[derive(Default)]
pub struct Context {
    nu_table: OnceLock<ExactTables>,
    fdist: OnceLock<FDist>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    fn nu_table(&self) -> &ExactTables {
        self.nu_table.get_or_init(|| ExactTables::build(100_000))
    }

    fn fdist(&self) -> &FDist {
        self.fdist
            .get_or_init(|| build_f_dist(512).expect("cap within limit"))
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "constants",
        2 => "oracle equivalence",
        3 => "integer identities",
        4 => "root-green probability",
        5 => "mean",
        6 => "variance of G",
        7 => "cutoff variance",
        8 => "half-variance normalization",
        9 => "higher moments",
        10 => "large-clade rarity",
        11 => "samplers",
        12 => "performance",
        _ => "unknown",
    }
}

fn fmt_rel(a: f64, b: f64) -> String {
    format!("{a:.6} vs {b:.6} ({:+.3}%)", 100.0 * (a / b - 1.0))
}

/// Criterion seed: independent streams per criterion and sub-experiment.
fn seed(opts: &VerifyOptions, id: u32, part: u64) -> u64 {
    opts.seed ^ ((id as u64) << 40) ^ (part << 32)
}

fn sim(opts: &VerifyOptions, id: u32, part: u64) -> SimConfig {
    SimConfig {
        seed: seed(opts, id, part),
        workers: opts.workers,
        ..Default::default()
    }
}

fn criterion_1() -> Result<Vec<Check>> {
    let start = Instant::now();
    let alpha = alpha_closed();
    let series = alpha_series(1_000_000);
    let alt: f64 = (1..=30u64)
        .map(|k| if k % 2 == 1 { e_fk_ct(k) } else { -e_fk_ct(k) })
        .sum();
    let secs = start.elapsed().as_secs_f64();
    Ok(vec![
        check(
            "alpha series",
            (series - alpha).abs() < 2e-5,
            format!("|series(1e6) - alpha| = {:.3e}", (series - alpha).abs()),
        ),
        check(
            "chain sum",
            (alt - alpha).abs() < 1e-12,
            format!("|sum - alpha| = {:.3e}", (alt - alpha).abs()),
        ),
        check("runtime", secs < 2.0, format!("{secs:.3} s")),
    ])
}

fn criterion_2() -> Result<Vec<Check>> {
    let nmax = 10;
    let oracle = enumerate::enumerate(nmax);
    let tables = ExactTables::build(nmax as u64);
    let dist = build_f_dist(nmax)?;
    let (mut nu_err, mut law_err, mut zk_err) = (0.0f64, 0.0f64, 0.0f64);
    for e in &oracle[1..] {
        let n = e.n;
        nu_err = nu_err.max((tables.nu()[n] - e.mean_f()).abs());
        let pmf = dist.pmf(n);
        for m in 0..pmf.len().max(e.f_law.len() + 1) {
            let exact = pmf.get(m).copied().unwrap_or(0.0);
            law_err = law_err.max((exact - e.f_prob(m as u64)).abs());
        }
        if n >= 2 {
            for k in 1..=n as u64 {
                zk_err = zk_err.max((expected_zk(n as u64, k) - e.zk(k)).abs());
            }
        }
    }
    let e3 = &oracle[3];
    let anchors = [
        ("nu_3", tables.nu()[3], 4.0 / 3.0),
        ("nu_4", tables.nu()[4], 1.5),
        ("mu_4", tables.mu()[4], -1.0 / 6.0),
        ("P(F_3=2)", e3.f_prob(2), 1.0 / 3.0),
        ("E Z_3,1", e3.zk(1), 4.0 / 3.0),
        ("E Z_3,1 exact", expected_zk(3, 1), 4.0 / 3.0),
    ];
    let worst_anchor = anchors
        .iter()
        .map(|(_, a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        check("nu", nu_err < 1e-12, format!("max error {nu_err:.1e}")),
        check("F law", law_err < 1e-12, format!("max error {law_err:.1e}")),
        check("Z_n,k", zk_err < 1e-12, format!("max error {zk_err:.1e}")),
        check(
            "anchors",
            worst_anchor < 1e-12,
            format!("max error {worst_anchor:.1e}"),
        ),
    ])
}

#[derive(Default, Clone, Copy)]
struct IdentityFailures {
    toll_sum: u64,
    chains_any: u64,
    chains_rooted: u64,
    small: u64,
    partition: u64,
}

impl IdentityFailures {
    fn add(self, o: Self) -> Self {
        Self {
            toll_sum: self.toll_sum + o.toll_sum,
            chains_any: self.chains_any + o.chains_any,
            chains_rooted: self.chains_rooted + o.chains_rooted,
            small: self.small + o.small,
            partition: self.partition + o.partition,
        }
    }
}

fn identity_replicate(stream: RngStream) -> Result<IdentityFailures> {
    let mut rng = stream.rng();
    let n: u32 = rng.random_range(1..=200);
    let tree = if stream.index.is_multiple_of(2) {
        gen_bst_split(n, &mut rng)
    } else {
        gen_bst_insert(n, &mut rng)
    };
    let cutoff = rng.random_range(0..=n as u64);
    let f = count_f(tree.whole()) as i128;
    let chains = count_chains(&tree, crate::functionals::MAX_CHAIN_DEPTH)?;
    let complete = !chains.overflow && chains.any.last() == Some(&0);
    let external: u64 = maximal_green(&tree).iter().map(|&k| k as u64 + 1).sum();
    Ok(IdentityFailures {
        toll_sum: (tolls(&tree).iter().map(|&t| t as i128).sum::<i128>() != f) as u64,
        chains_any: (!complete || chains.alternating_any() != f) as u64,
        chains_rooted: (!complete || chains.alternating_rooted() != toll_f(tree.whole()) as i128)
            as u64,
        small: (count_f_small(&tree, cutoff) as i64 != count_f_small_by_tolls(&tree, cutoff))
            as u64,
        partition: (external != n as u64 + 1) as u64,
    })
}

fn criterion_3(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let trees = opts.scale.replicates(100_000, 10_000);
    let s = seed(opts, 3, 0);
    let pool = pool(opts.workers)?;
    let fails = pool.install(|| {
        (0..trees)
            .into_par_iter()
            .map(|r| identity_replicate(RngStream::new(s, r)))
            .try_reduce(IdentityFailures::default, |a, b| Ok(a.add(b)))
    })?;
    let line = |name: &str, k: u64| check(name, k == 0, format!("{k} failures in {trees} trees"));
    Ok(vec![
        line("F = sum f", fails.toll_sum),
        line("F = alternating F_k", fails.chains_any),
        line("f = alternating f_k", fails.chains_rooted),
        line("X^N = sum f'", fails.small),
        line("partition", fails.partition),
    ])
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

fn criterion_4(opts: &VerifyOptions, ctx: &Context) -> Result<Vec<Check>> {
    let dist = ctx.fdist();
    let worst = (2..=512usize)
        .map(|n| (dist.pmf(n)[1] - 2.0 / n as f64).abs())
        .fold(0.0, f64::max);
    let mut checks = vec![check(
        "exact",
        worst < 1e-12,
        format!("max |P(F=1) - 2/n| over 2..512 = {worst:.1e}"),
    )];
    let r = opts.scale.replicates(100_000, 10_000);
    for (part, n) in [(0, 100u64), (1, 1000)] {
        let cfg = SimConfig {
            n,
            replicates: r,
            stats: vec![Stat::F],
            store_raw: Some(true),
            ..sim(opts, 4, part)
        };
        let res = run_experiment(&cfg, None)?;
        let raw = res.raw(Stat::F).expect("raw kept");
        let hits = raw.iter().filter(|&&x| x == 1.0).count() as f64;
        let p = 2.0 / n as f64;
        let rate = hits / raw.len() as f64;
        let se = (p * (1.0 - p) / raw.len() as f64).sqrt();
        checks.push(check(
            &format!("MC n={n}"),
            (rate - p).abs() <= 4.0 * se,
            format!("rate {rate:.5} vs {p:.5}, {:.2} SE", (rate - p) / se),
        ));
    }
    Ok(checks)
}

fn criterion_5(ctx: &Context) -> Result<Vec<Check>> {
    let t = ctx.nu_table();
    let alpha = alpha_closed();
    let dev = |n: usize| (t.nu()[n] - alpha * n as f64).abs();
    let max_upto = |lo: usize, hi: usize| (lo..=hi).map(dev).fold(0.0, f64::max);
    let early = max_upto(1, 10_000);
    let late = max_upto(10_001, 100_000);
    let total = early.max(late);
    let slope = (t.nu()[100_000] / 1e5 - alpha).abs();
    Ok(vec![
        check(
            "bounded",
            total < 1.0,
            format!("max |nu_n - alpha n| = {total:.6}"),
        ),
        check(
            "non-growing",
            late <= early,
            format!("max over (1e4, 1e5] = {late:.6}, over [1, 1e4] = {early:.6}"),
        ),
        check(
            "slope",
            slope < 1e-4,
            format!("|nu/n - alpha| = {slope:.3e}"),
        ),
    ])
}

/// One run at `n = 10^4`, `N = 100` serves criteria 6 and 7. Half of `Var G`
/// comes from rare large clades, so the quick scale keeps all `10^5`
/// replicates here.
struct VarianceRun {
    tables: ExactTables,
    var_g: f64,
    var_g_small: f64,
    var_x_small: f64,
}

fn variance_run(opts: &VerifyOptions) -> Result<VarianceRun> {
    let n = 10_000;
    let mut tables = ExactTables::build(n);
    tables.build_psi(n)?;
    let cfg = SimConfig {
        n,
        cutoff: Some(100),
        replicates: 100_000,
        stats: vec![Stat::G, Stat::GSmall, Stat::XSmall],
        store_raw: Some(false),
        ..sim(opts, 6, 0)
    };
    let res = run_experiment(&cfg, Some(&tables))?;
    let var = |s| res.get(s).expect("requested").variance();
    Ok(VarianceRun {
        var_g: var(Stat::G),
        var_g_small: var(Stat::GSmall),
        var_x_small: var(Stat::XSmall),
        tables,
    })
}

fn criterion_6(run: &VarianceRun) -> Result<Vec<Check>> {
    let alpha = alpha_closed();
    let exact = run.tables.var_g(10_000)?;
    let r = |n: u64| -> Result<f64> {
        let nf = n as f64;
        Ok(run.tables.var_g(n)? / (4.0 * alpha * alpha * nf * nf.ln()))
    };
    let (r3, r4) = (r(1000)?, r(10_000)?);
    Ok(vec![
        check(
            "exact vs MC",
            (exact / run.var_g - 1.0).abs() < 0.05,
            format!("var_G {}", fmt_rel(exact, run.var_g)),
        ),
        check(
            "trend",
            (r4 - 1.0).abs() < (r3 - 1.0).abs() && r4 > 0.5 && r4 < 1.5,
            format!("r(1e3) = {r3:.4}, r(1e4) = {r4:.4}"),
        ),
    ])
}

fn criterion_7(run: &VarianceRun, ctx: &Context) -> Result<Vec<Check>> {
    let exact = run.tables.var_g_small(10_000, 100)?;
    let ratio = run.var_x_small / exact;
    let var_x_small = count_moments(ctx.fdist(), 10_000, Some(100))?.variance[10_000];
    Ok(vec![
        check(
            "exact vs MC",
            (exact / run.var_g_small - 1.0).abs() < 0.05,
            format!("var_G' {}", fmt_rel(exact, run.var_g_small)),
        ),
        check(
            "X^N vs G'",
            ratio > 0.8 && ratio < 1.2,
            format!(
                "Var X^N / var_G' = {ratio:.4} (exact {:.4})",
                var_x_small / exact
            ),
        ),
    ])
}

fn criterion_8(opts: &VerifyOptions, ctx: &Context) -> Result<Vec<Check>> {
    let n = 100_000u64;
    let cfg = SimConfig {
        n,
        replicates: opts.scale.replicates(20_000, 5_000),
        stats: vec![Stat::F, Stat::XSmall],
        store_raw: Some(true),
        ..sim(opts, 8, 0)
    };
    let res = run_experiment(&cfg, None)?;
    let (f, x) = (
        res.get(Stat::F).expect("F"),
        res.get(Stat::XSmall).expect("X^N"),
    );
    let ratio = f.variance() / x.variance();
    let alpha = alpha_closed();
    let scale = (2.0 * alpha * alpha * n as f64 * (n as f64).ln()).sqrt();
    let dx = normality(x.raw.as_deref().expect("raw"), x.mean, x.std_dev())?;
    let df = normality(
        f.raw.as_deref().expect("raw"),
        ctx.nu_table().nu()[n as usize],
        scale,
    )?;
    let cutoff = res.config.resolved_cutoff();
    let exact_ratio = count_moments(ctx.fdist(), n as usize, None)?.variance[n as usize]
        / count_moments(ctx.fdist(), n as usize, Some(cutoff as usize))?.variance[n as usize];
    Ok(vec![
        check(
            "variance ratio",
            ratio > 1.4 && ratio < 2.6,
            format!("Var X / Var X^N = {ratio:.4}, exact {exact_ratio:.4} (N = {cutoff})"),
        ),
        check("X^N normal", dx.ks < 0.03, format!("KS = {:.4}", dx.ks)),
        check(
            "half variance",
            df.variance > 1.4 && df.variance < 2.6 && df.ks > dx.ks,
            format!("standardized Var X = {:.4}, KS = {:.4}", df.variance, df.ks),
        ),
    ])
}

fn criterion_9(ctx: &Context) -> Result<Vec<Check>> {
    let dist = ctx.fdist();
    let alpha = alpha_closed();
    let grid = [64usize, 128, 256, 512];
    let p = 2.5;
    let mut third = Vec::new();
    let mut sum_f = Vec::new();
    let mut abs_p = Vec::new();
    let mut negative = true;
    let mut positive = true;
    for &n in &grid {
        let nf = n as f64;
        let m3 = dist.central_moment(n, 3)?;
        negative &= m3 < 0.0;
        third.push(m3 / (-6.0 * alpha.powi(3) * nf * nf));
        sum_f.push(dist.sum_f_abs(n, 3.0)? / (6.0 * alpha.powi(3) * nf * nf));
        let a = dist.abs_central_moment(n, p)?;
        positive &= a > 0.0;
        abs_p.push(a / (2.0 * p / (p - 2.0) * alpha.powf(p) * nf.powf(p - 1.0)));
    }
    let approaching = |r: &[f64]| (r[3] - 1.0).abs() < (r[0] - 1.0).abs();
    let show = |r: &[f64]| {
        r.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Ok(vec![
        check(
            "third moment",
            negative && approaching(&third),
            format!("ratios {}", show(&third)),
        ),
        check(
            "sum |f|^3",
            approaching(&sum_f),
            format!("ratios {}", show(&sum_f)),
        ),
        check(
            "abs moment p=2.5",
            positive && approaching(&abs_p),
            format!("ratios {}", show(&abs_p)),
        ),
    ])
}

/// `⌈√(n ln ln n)⌉`.
pub fn large_clade_cutoff(n: u64) -> u64 {
    let nf = n as f64;
    (nf * nf.ln().ln()).sqrt().ceil() as u64
}

fn criterion_10(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let r = opts.scale.replicates(100_000, 10_000);
    let rate = |part, n| {
        tail_event_rate(&SimConfig {
            n,
            cutoff: Some(large_clade_cutoff(n)),
            replicates: r,
            ..sim(opts, 10, part)
        })
    };
    let big = rate(0, 10_000)?;
    let small = rate(1, 1_000)?;
    debug_assert!((big.bound - expected_large_clades(10_000, big.cutoff)).abs() < 1e-12);
    Ok(vec![
        check(
            "Markov bound",
            big.rate <= big.bound + 4.0 * big.se,
            format!(
                "rate {:.4} (SE {:.4}) <= bound {:.4}, N = {}",
                big.rate, big.se, big.bound, big.cutoff
            ),
        ),
        check(
            "decreasing",
            big.rate < small.rate,
            format!(
                "rate(1e4) = {:.4} < rate(1e3) = {:.4} (N = {})",
                big.rate, small.rate, small.cutoff
            ),
        ),
    ])
}

fn size_histogram(sizes: &[f64], top: usize) -> Vec<u64> {
    let mut h = vec![0u64; top];
    for &s in sizes {
        let s = s as usize;
        if (1..=top).contains(&s) {
            h[s - 1] += 1;
        }
    }
    h
}

fn criterion_11(opts: &VerifyOptions, ctx: &Context) -> Result<Vec<Check>> {
    let r = opts.scale.replicates(1_000_000, 100_000);
    let clock = |part, lambda: f64, stats: Vec<Stat>| {
        run_experiment(
            &SimConfig {
                model: Model::CtClock,
                lambda,
                cap_policy: CapPolicy::Discard,
                replicates: r,
                chain_depth: 4,
                stats,
                store_raw: Some(true),
                ..sim(opts, 11, part)
            },
            None,
        )
    };
    let mut checks = Vec::new();

    let mut stats = vec![Stat::Size];
    stats.extend((1..=4).map(Stat::RootChain));
    let one = clock(0, 1.0, stats)?;
    let sizes = one.raw(Stat::Size).expect("raw");
    let expected: Vec<f64> = (1..=20u64)
        .map(|n| ct_lambda_size_pmf(1.0, n))
        .collect::<Result<_>>()?;
    let (chi, p) = chi_square_pvalue(&size_histogram(sizes, 20), &expected, sizes.len() as u64);
    checks.push(check(
        "size law lambda=1",
        p > 0.001,
        format!(
            "chi2 = {chi:.2}, p = {p:.4}, {} discarded over cap",
            one.discarded
        ),
    ));
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for k in 1..=4 {
        let s = one.get(Stat::RootChain(k)).expect("requested");
        let z = (s.mean - e_fk_ct(k as u64)) / s.std_error();
        worst = worst.max(z.abs());
        detail.push(format!("f_{k} {:.5} vs {:.5}", s.mean, e_fk_ct(k as u64)));
    }
    checks.push(check(
        "chain means",
        worst <= 4.0,
        format!("{}; max {worst:.2} SE", detail.join(", ")),
    ));

    let two = clock(1, 2.0, vec![Stat::Size])?;
    let sizes = two.raw(Stat::Size).expect("raw");
    let expected: Vec<f64> = (1..=10u64)
        .map(|n| ct_lambda_size_pmf(2.0, n))
        .collect::<Result<_>>()?;
    let (chi, p) = chi_square_pvalue(&size_histogram(sizes, 10), &expected, sizes.len() as u64);
    checks.push(check(
        "size law lambda=2",
        p > 0.001,
        format!("chi2 = {chi:.2}, p = {p:.4}"),
    ));

    let resid = genfunc_residual(3.0, 100_000, ctx.nu_table())?;
    checks.push(check(
        "generating function",
        resid < 1e-3,
        format!("residual {resid:.3e}"),
    ));
    let d = (e_f_ct_lambda(1.0)? - alpha_closed()).abs();
    checks.push(check(
        "E f at rate 1",
        d < 1e-12,
        format!("|E f - alpha| = {d:.1e}"),
    ));
    Ok(checks)
}

/// Wall-clock time of the criteria runs that criterion 12 bounds.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteTimes {
    pub quick: Option<Duration>,
    pub full: Option<Duration>,
}

pub const QUICK_LIMIT: Duration = Duration::from_secs(300);
pub const FULL_LIMIT: Duration = Duration::from_secs(3600);
pub const REPLICATE_LIMIT: Duration = Duration::from_millis(50);

/// Median time of one `n = 10^6` replicate with `F`, `X^N` and the census.
pub fn time_large_replicate(seed: u64, runs: u64) -> Result<Duration> {
    let n = 1_000_000;
    let cfg = StreamConfig {
        cutoff: 1000,
        census: true,
        ..Default::default()
    };
    let mut times = Vec::with_capacity(runs as usize);
    for r in 0..runs {
        let start = Instant::now();
        let s = stream_bst(n, RngStream::new(seed, r), cfg)?;
        times.push(start.elapsed());
        std::hint::black_box(s);
    }
    times.sort();
    Ok(times[times.len() / 2])
}

pub fn criterion_12(opts: &VerifyOptions, times: SuiteTimes) -> CriterionReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    match time_large_replicate(seed(opts, 12, 0), 5) {
        Ok(t) => checks.push(check(
            "n=1e6 replicate",
            t < REPLICATE_LIMIT,
            format!("{:.1} ms (median of 5)", t.as_secs_f64() * 1e3),
        )),
        Err(e) => checks.push(check("n=1e6 replicate", false, e.to_string())),
    }
    if let Some(q) = times.quick {
        checks.push(check(
            "quick suite",
            q < QUICK_LIMIT,
            format!("{:.1} s on {} worker(s)", q.as_secs_f64(), opts.workers),
        ));
    }
    if let Some(f) = times.full {
        checks.push(check(
            "full suite",
            f < FULL_LIMIT,
            format!("{:.1} s on {} worker(s)", f.as_secs_f64(), opts.workers),
        ));
    }
    CriterionReport {
        id: 12,
        title: title(12),
        checks,
        elapsed: start.elapsed(),
    }
}

fn report(id: u32, start: Instant, checks: Result<Vec<Check>>) -> CriterionReport {
    let checks = checks.unwrap_or_else(|e| vec![check("error", false, e.to_string())]);
    CriterionReport {
        id,
        title: title(id),
        checks,
        elapsed: start.elapsed(),
    }
}

/// Runs criteria 1 to 11, calling `each` as every report is ready.
pub fn run_criteria<F: FnMut(&CriterionReport)>(
    opts: &VerifyOptions,
    ctx: &Context,
    mut each: F,
) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let mut emit = |r: CriterionReport| {
        each(&r);
        out.push(r);
    };
    let t = Instant::now();
    emit(report(1, t, criterion_1()));
    let t = Instant::now();
    emit(report(2, t, criterion_2()));
    let t = Instant::now();
    emit(report(3, t, criterion_3(opts)));
    let t = Instant::now();
    emit(report(4, t, criterion_4(opts, ctx)));
    let t = Instant::now();
    emit(report(5, t, criterion_5(ctx)));
    let t = Instant::now();
    match variance_run(opts) {
        Ok(run) => {
            let shared = t.elapsed();
            let mut r6 = report(6, t, criterion_6(&run));
            let t7 = Instant::now();
            let mut r7 = report(7, t7, criterion_7(&run, ctx));
            // the simulation is shared; charge half to each
            r6.elapsed -= shared / 2;
            r7.elapsed += shared / 2;
            emit(r6);
            emit(r7);
        }
        Err(e) => {
            emit(report(6, t, Err(e.clone())));
            emit(report(7, t, Err(e)));
        }
    }
    let t = Instant::now();
    emit(report(8, t, criterion_8(opts, ctx)));
    let t = Instant::now();
    emit(report(9, t, criterion_9(ctx)));
    let t = Instant::now();
    emit(report(10, t, criterion_10(opts)));
    let t = Instant::now();
    emit(report(11, t, criterion_11(opts, ctx)));
    out
}

/// Runs all twelve criteria at `opts.scale`; criterion 12 bounds the time of
/// this run.
pub fn run_suite<F: FnMut(&CriterionReport)>(
    opts: &VerifyOptions,
    mut each: F,
) -> Vec<CriterionReport> {
    let start = Instant::now();
    let ctx = Context::new();
    let mut reports = run_criteria(opts, &ctx, &mut each);
    let elapsed = start.elapsed();
    let times = match opts.scale {
        Scale::Quick => SuiteTimes {
            quick: Some(elapsed),
            full: None,
        },
        Scale::Full => SuiteTimes {
            quick: None,
            full: Some(elapsed),
        },
    };
    let r12 = criterion_12(opts, times);
    each(&r12);
    reports.push(r12);
    reports
}
