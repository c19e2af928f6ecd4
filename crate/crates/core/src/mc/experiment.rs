//! Replicated experiments: sample trees, evaluate functionals, summarize.
//!
//! Replicate `r` always draws from `RngStream::new(seed, r)`. Replicates are
//! grouped in blocks of [`BLOCK`] consecutive indices; blocks run on a pool of
//! `workers` threads and are merged in block order, so the output does not
//! depend on the number of workers.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{expected_large_clades, ExactTables};
use crate::functionals::{
    clade_census, count_chains, count_f, count_f_small, maximal_green, MAX_CHAIN_DEPTH,
};
use crate::mc::moments::MomentSummary;
use crate::rng::RngStream;
use crate::stream::{RandomSplits, StreamConfig, StreamEvaluator, StreamStats, TreeSplits};
use crate::tree::{gen_bst_insert, gen_bst_split, sample_ct_clock, BinaryTree, DEFAULT_CLOCK_CAP};

pub const BLOCK: u64 = 1000;
pub const DEFAULT_CHAIN_DEPTH: usize = 20;
pub const DEFAULT_SPOT_CHECK: u64 = 100;
/// Raw values are kept by default up to this many replicates.
pub const RAW_LIMIT: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// Binary search tree drawn split by split, never materialized.
    BstSplit,
    /// Binary search tree built by inserting a random permutation.
    BstInsert,
    /// Branching-process tree stopped by an exponential clock.
    CtClock,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::BstSplit => "bst-split",
            Model::BstInsert => "bst-insert",
            Model::CtClock => "ct-clock",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bst-split" => Ok(Model::BstSplit),
            "bst-insert" => Ok(Model::BstInsert),
            "ct-clock" => Ok(Model::CtClock),
            _ => Err(Error::InvalidConfig(format!("unknown model {s:?}"))),
        }
    }
}

/// Per-replicate statistics that an experiment can record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stat {
    Size,
    Height,
    /// Number of maximal clades `F`.
    F,
    /// Root toll `f(T)`.
    Toll,
    /// Maximal small clades `X^N`.
    XSmall,
    /// Clades with more than `N` nodes below them.
    LargeClades,
    /// Indicator of `F ≠ X^N`.
    TailEvent,
    G,
    H,
    GSmall,
    GLarge,
    HSmall,
    HLarge,
    /// `F_k`, green chains of length `k` anywhere.
    Chain(usize),
    /// `f_k`, green chains of length `k` starting at the root.
    RootChain(usize),
}

impl Stat {
    pub fn needs_nu(self) -> bool {
        matches!(
            self,
            Stat::G | Stat::H | Stat::GSmall | Stat::GLarge | Stat::HSmall | Stat::HLarge
        )
    }

    pub fn chain_order(self) -> Option<usize> {
        match self {
            Stat::Chain(k) | Stat::RootChain(k) => Some(k),
            _ => None,
        }
    }

    fn value(self, s: &StreamStats) -> f64 {
        let gh = || s.gh.expect("G/H parts requested");
        let chains = || s.chains.as_ref().expect("chains requested");
        match self {
            Stat::Size => s.size as f64,
            Stat::Height => s.height as f64,
            Stat::F => s.f as f64,
            Stat::Toll => s.toll_root as f64,
            Stat::XSmall => s.f_small as f64,
            Stat::LargeClades => s.large_green as f64,
            Stat::TailEvent => (s.f != s.f_small) as u8 as f64,
            Stat::G => gh().g,
            Stat::H => gh().h,
            Stat::GSmall => gh().g_small,
            Stat::GLarge => gh().g_large,
            Stat::HSmall => gh().h_small,
            Stat::HLarge => gh().h_large,
            Stat::Chain(k) => chains().any[k - 1] as f64,
            Stat::RootChain(k) => chains().rooted[k - 1] as f64,
        }
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stat::Size => f.write_str("size"),
            Stat::Height => f.write_str("height"),
            Stat::F => f.write_str("F"),
            Stat::Toll => f.write_str("f"),
            Stat::XSmall => f.write_str("X_N"),
            Stat::LargeClades => f.write_str("large_clades"),
            Stat::TailEvent => f.write_str("tail_event"),
            Stat::G => f.write_str("G"),
            Stat::H => f.write_str("H"),
            Stat::GSmall => f.write_str("G_small"),
            Stat::GLarge => f.write_str("G_large"),
            Stat::HSmall => f.write_str("H_small"),
            Stat::HLarge => f.write_str("H_large"),
            Stat::Chain(k) => write!(f, "F_{k}"),
            Stat::RootChain(k) => write!(f, "f_{k}"),
        }
    }
}

impl FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fixed = [
            Stat::Size,
            Stat::Height,
            Stat::F,
            Stat::Toll,
            Stat::XSmall,
            Stat::LargeClades,
            Stat::TailEvent,
            Stat::G,
            Stat::H,
            Stat::GSmall,
            Stat::GLarge,
            Stat::HSmall,
            Stat::HLarge,
        ];
        if let Some(st) = fixed.into_iter().find(|st| st.to_string() == s) {
            return Ok(st);
        }
        let order = |rest: &str| rest.parse::<usize>().ok().filter(|&k| k >= 1);
        match s.split_once('_') {
            Some(("F", rest)) => order(rest).map(Stat::Chain),
            Some(("f", rest)) => order(rest).map(Stat::RootChain),
            _ => None,
        }
        .ok_or_else(|| Error::InvalidConfig(format!("unknown statistic {s:?}")))
    }
}

/// What to do when a clock tree outgrows the node cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapPolicy {
    /// Abort with [`Error::CapExceeded`] naming the replicate.
    Fail,
    /// Drop the replicate and count it in [`ExperimentResult::discarded`].
    Discard,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub model: Model,
    /// Tree size for the binary search tree models.
    pub n: u64,
    /// Clock rate for `ct-clock`.
    pub lambda: f64,
    /// Node cap for `ct-clock`.
    pub cap: u64,
    pub cap_policy: CapPolicy,
    /// Small-clade cutoff `N`; `None` means `⌈√n⌉` for the search tree models
    /// and no cutoff for `ct-clock`.
    pub cutoff: Option<u64>,
    pub chain_depth: usize,
    pub replicates: u64,
    pub seed: u64,
    pub workers: usize,
    #[serde(serialize_with = "stat_names")]
    pub stats: Vec<Stat>,
    /// `None` keeps raw values when `replicates ≤ RAW_LIMIT`.
    pub store_raw: Option<bool>,
    /// Every replicate whose index is a multiple of this is rebuilt and
    /// checked against the tree functionals; 0 disables the check.
    pub spot_check: u64,
}

fn stat_names<S: serde::Serializer>(stats: &[Stat], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(stats.iter().map(|st| st.to_string()))
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            model: Model::BstSplit,
            n: 100,
            lambda: 1.0,
            cap: DEFAULT_CLOCK_CAP,
            cap_policy: CapPolicy::Fail,
            cutoff: None,
            chain_depth: DEFAULT_CHAIN_DEPTH,
            replicates: 1000,
            seed: 0,
            workers: 1,
            stats: vec![Stat::F, Stat::XSmall],
            store_raw: None,
            spot_check: DEFAULT_SPOT_CHECK,
        }
    }
}

/// `⌈√n⌉`.
pub fn ceil_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

impl SimConfig {
    pub fn resolved_cutoff(&self) -> u64 {
        match (self.cutoff, self.model) {
            (Some(c), _) => c,
            (None, Model::CtClock) => u64::MAX,
            (None, _) => ceil_sqrt(self.n),
        }
    }

    pub fn keeps_raw(&self) -> bool {
        self.store_raw.unwrap_or(self.replicates <= RAW_LIMIT)
    }

    /// Largest chain order among the requested statistics.
    pub fn chain_orders(&self) -> usize {
        self.stats
            .iter()
            .filter_map(|s| s.chain_order())
            .max()
            .unwrap_or(0)
    }

    /// The same configuration with every default made explicit.
    pub fn resolved(&self) -> SimConfig {
        SimConfig {
            cutoff: Some(self.resolved_cutoff()),
            store_raw: Some(self.keeps_raw()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.stats.is_empty() {
            return bad("no statistics requested".into());
        }
        if self.chain_depth > MAX_CHAIN_DEPTH {
            return bad(format!("chain depth must be at most {MAX_CHAIN_DEPTH}"));
        }
        if self.chain_orders() > self.chain_depth {
            return bad(format!(
                "chain statistic of order {} exceeds chain depth {}",
                self.chain_orders(),
                self.chain_depth
            ));
        }
        match self.model {
            Model::BstSplit | Model::BstInsert => {
                if self.n > u32::MAX as u64 {
                    return bad(format!("n must fit in 32 bits, got {}", self.n));
                }
                if let Some(c) = self.cutoff {
                    if c > self.n {
                        return bad(format!("cutoff {c} exceeds n = {}", self.n));
                    }
                }
            }
            Model::CtClock => {
                if !(self.lambda > 0.0 && self.lambda.is_finite()) {
                    return bad(format!("clock rate must be positive, got {}", self.lambda));
                }
                if self.cap == 0 || self.cap > u32::MAX as u64 {
                    return bad(format!("cap must be in 1..=2^32-1, got {}", self.cap));
                }
            }
        }
        Ok(())
    }

    /// Identity string used as the summary key.
    fn identity(&self, stat: Stat) -> String {
        match self.model {
            Model::CtClock => format!(
                "{stat}|{}|lambda={}|cap={}|N={}",
                self.model,
                self.lambda,
                self.cap,
                self.resolved_cutoff()
            ),
            _ => format!(
                "{stat}|{}|n={}|N={}",
                self.model,
                self.n,
                self.resolved_cutoff()
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: SimConfig,
    #[serde(serialize_with = "summary_map")]
    pub summaries: Vec<(Stat, MomentSummary)>,
    /// Replicates dropped under [`CapPolicy::Discard`].
    pub discarded: u64,
    /// Replicates rebuilt and checked against the tree functionals.
    pub spot_checked: u64,
}

fn summary_map<S: serde::Serializer>(
    v: &[(Stat, MomentSummary)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(v.iter().map(|(k, m)| (k.to_string(), m)))
}

impl ExperimentResult {
    pub fn get(&self, stat: Stat) -> Option<&MomentSummary> {
        self.summaries
            .iter()
            .find(|(s, _)| *s == stat)
            .map(|(_, m)| m)
    }

    /// Raw values of `stat`, when kept.
    pub fn raw(&self, stat: Stat) -> Option<&[f64]> {
        self.get(stat)?.raw.as_deref()
    }
}

struct BlockOutput {
    summaries: Vec<MomentSummary>,
    discarded: u64,
    spot_checked: u64,
}

fn violation(r: u64, detail: String) -> Error {
    Error::IdentityViolation {
        replicate: r,
        detail,
    }
}

/// Rebuilds `tree` through the tree functionals and compares with `s`.
fn spot_check(r: u64, tree: &BinaryTree, s: &StreamStats, cutoff: u64) -> Result<()> {
    let f = count_f(tree.whole());
    if f != s.f || s.toll_sum != f as i64 {
        return Err(violation(
            r,
            format!("F = {f}, streamed {}, Σf = {}", s.f, s.toll_sum),
        ));
    }
    let small = count_f_small(tree, cutoff);
    if small != s.f_small || s.toll_small_sum != small as i64 {
        return Err(violation(
            r,
            format!(
                "X^N = {small}, streamed {}, Σf' = {}",
                s.f_small, s.toll_small_sum
            ),
        ));
    }
    let tops = maximal_green(tree);
    let external: u64 = tops.iter().map(|&k| k as u64 + 1).sum();
    if tops.len() as u64 != f || (!tree.is_empty() && external != tree.len() as u64 + 1) {
        return Err(violation(
            r,
            format!("maximal clades cover {external} external nodes"),
        ));
    }
    let tail = clade_census(tree).tail(cutoff);
    if tail != s.large_green {
        return Err(violation(
            r,
            format!("large clades {tail}, streamed {}", s.large_green),
        ));
    }
    if let Some(ch) = &s.chains {
        let direct = count_chains(tree, ch.depth)?;
        if &direct != ch {
            return Err(violation(r, "chain counts differ".into()));
        }
    }
    Ok(())
}

fn run_block(cfg: &SimConfig, nu: Option<&[f64]>, block: u64) -> Result<BlockOutput> {
    let cutoff = cfg.resolved_cutoff();
    let keep_raw = cfg.keeps_raw();
    let mut eval = StreamEvaluator::new(StreamConfig {
        cutoff,
        chain_depth: cfg.chain_orders(),
        nu,
        census: false,
    })?;
    let mut out = BlockOutput {
        summaries: cfg
            .stats
            .iter()
            .map(|&st| MomentSummary::new(cfg.identity(st), keep_raw))
            .collect(),
        discarded: 0,
        spot_checked: 0,
    };
    let start = block * BLOCK;
    let end = (start + BLOCK).min(cfg.replicates);
    for r in start..end {
        let stream = RngStream::new(cfg.seed, r);
        let mut rng = stream.rng();
        let check = cfg.spot_check > 0 && r % cfg.spot_check == 0;
        let (stats, tree) = match cfg.model {
            Model::BstSplit => {
                let s = eval.run(cfg.n, &mut RandomSplits(&mut rng))?;
                let tree = check.then(|| gen_bst_split(cfg.n as u32, &mut stream.rng()));
                (s, tree)
            }
            Model::BstInsert => {
                let t = gen_bst_insert(cfg.n as u32, &mut rng);
                (eval.run(t.len() as u64, &mut TreeSplits::new(&t))?, Some(t))
            }
            Model::CtClock => match sample_ct_clock(cfg.lambda, &mut rng, cfg.cap) {
                Ok(t) => (eval.run(t.len() as u64, &mut TreeSplits::new(&t))?, Some(t)),
                Err(Error::CapExceeded { cap, .. }) => match cfg.cap_policy {
                    CapPolicy::Fail => {
                        return Err(Error::CapExceeded {
                            cap,
                            replicate: Some(r),
                        })
                    }
                    CapPolicy::Discard => {
                        out.discarded += 1;
                        continue;
                    }
                },
                Err(e) => return Err(e),
            },
        };
        if check {
            if let Some(t) = &tree {
                spot_check(r, t, &stats, cutoff)?;
                out.spot_checked += 1;
            }
        }
        for (summary, st) in out.summaries.iter_mut().zip(&cfg.stats) {
            summary.push(st.value(&stats));
        }
    }
    Ok(out)
}

/// Runs `cfg.replicates` independent replicates. `tables` must cover the
/// tree sizes when any G/H statistic is requested.
pub fn run_experiment(cfg: &SimConfig, tables: Option<&ExactTables>) -> Result<ExperimentResult> {
    cfg.validate()?;
    let nu = if cfg.stats.iter().any(|s| s.needs_nu()) {
        let t = tables
            .ok_or_else(|| Error::InvalidConfig("G/H statistics need a prebuilt ν table".into()))?;
        if matches!(cfg.model, Model::BstSplit | Model::BstInsert) && t.nmax() < cfg.n {
            return Err(Error::TableTooShort {
                needed: cfg.n,
                have: t.nmax(),
            });
        }
        Some(t.nu())
    } else {
        None
    };
    let blocks = cfg.replicates.div_ceil(BLOCK);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let outputs: Vec<Result<BlockOutput>> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| run_block(cfg, nu, b))
            .collect()
    });

    let mut result = ExperimentResult {
        config: cfg.resolved(),
        summaries: cfg
            .stats
            .iter()
            .map(|&st| (st, MomentSummary::new(cfg.identity(st), cfg.keeps_raw())))
            .collect(),
        discarded: 0,
        spot_checked: 0,
    };
    for out in outputs {
        let out = out?;
        for ((_, acc), s) in result.summaries.iter_mut().zip(&out.summaries) {
            acc.merge(s)?;
        }
        result.discarded += out.discarded;
        result.spot_checked += out.spot_checked;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEventRate {
    pub cutoff: u64,
    pub replicates: u64,
    /// Fraction of replicates with `F ≠ X^N`.
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub se: f64,
    /// `Σ_{k>N} E Z_{n,k}`, which bounds `P(F ≠ X^N)`.
    pub bound: f64,
}

/// Frequency of a maximal clade above the cutoff, for the search tree models.
pub fn tail_event_rate(cfg: &SimConfig) -> Result<TailEventRate> {
    if cfg.model == Model::CtClock {
        return Err(Error::InvalidConfig(
            "tail event rate needs a fixed tree size".into(),
        ));
    }
    let cfg = SimConfig {
        stats: vec![Stat::TailEvent],
        store_raw: Some(false),
        ..cfg.clone()
    };
    let res = run_experiment(&cfg, None)?;
    let s = res.get(Stat::TailEvent).expect("requested");
    let rate = s.mean;
    let cutoff = cfg.resolved_cutoff();
    Ok(TailEventRate {
        cutoff,
        replicates: s.count,
        rate,
        se: (rate * (1.0 - rate) / s.count as f64).sqrt(),
        bound: expected_large_clades(cfg.n, cutoff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_names_round_trip() {
        for st in [
            Stat::F,
            Stat::XSmall,
            Stat::GSmall,
            Stat::HLarge,
            Stat::Chain(3),
            Stat::RootChain(12),
        ] {
            assert_eq!(st.to_string().parse::<Stat>().unwrap(), st);
        }
        assert!("F_0".parse::<Stat>().is_err());
        assert!("Q".parse::<Stat>().is_err());
        assert_eq!("ct-clock".parse::<Model>().unwrap(), Model::CtClock);
    }

    #[test]
    fn cutoff_defaults() {
        assert_eq!(ceil_sqrt(100), 10);
        assert_eq!(ceil_sqrt(101), 11);
        assert_eq!(ceil_sqrt(100_000), 317);
        assert_eq!(ceil_sqrt(0), 0);
        let cfg = SimConfig {
            n: 10_000,
            ..Default::default()
        };
        assert_eq!(cfg.resolved_cutoff(), 100);
        let ct = SimConfig {
            model: Model::CtClock,
            ..Default::default()
        };
        assert_eq!(ct.resolved_cutoff(), u64::MAX);
    }

    #[test]
    fn invalid_configs() {
        let ok = SimConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SimConfig {
                replicates: 0,
                ..ok.clone()
            },
            SimConfig {
                cutoff: Some(101),
                ..ok.clone()
            },
            SimConfig {
                chain_depth: 65,
                ..ok.clone()
            },
            SimConfig {
                stats: vec![Stat::Chain(21)],
                ..ok.clone()
            },
            SimConfig {
                model: Model::CtClock,
                lambda: 0.0,
                ..ok.clone()
            },
            SimConfig {
                workers: 0,
                ..ok.clone()
            },
        ] {
            assert!(
                matches!(bad.validate(), Err(Error::InvalidConfig(_))),
                "{bad:?}"
            );
        }
        let gh = SimConfig {
            stats: vec![Stat::G],
            ..ok.clone()
        };
        assert!(run_experiment(&gh, None).is_err());
        let short = ExactTables::build(50);
        assert!(matches!(
            run_experiment(&gh, Some(&short)),
            Err(Error::TableTooShort { .. })
        ));
    }

    #[test]
    fn n2_is_constant() {
        let cfg = SimConfig {
            n: 2,
            replicates: 500,
            seed: 5,
            ..Default::default()
        };
        let res = run_experiment(&cfg, None).unwrap();
        let f = res.get(Stat::F).unwrap();
        assert_eq!((f.mean, f.variance(), f.min, f.max), (1.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn workers_do_not_change_output() {
        let base = SimConfig {
            n: 300,
            replicates: 2_500,
            seed: 9,
            stats: vec![Stat::F, Stat::XSmall, Stat::Chain(2), Stat::G],
            chain_depth: 4,
            ..Default::default()
        };
        let t = ExactTables::build(300);
        let one = run_experiment(&base, Some(&t)).unwrap();
        for w in [2, 8] {
            let other = run_experiment(
                &SimConfig {
                    workers: w,
                    ..base.clone()
                },
                Some(&t),
            )
            .unwrap();
            assert_eq!(one.summaries, other.summaries);
        }
        assert_eq!(one.spot_checked, 25);
    }

    #[test]
    fn models_agree_on_mean() {
        let t = ExactTables::build(60);
        for model in [Model::BstSplit, Model::BstInsert] {
            let cfg = SimConfig {
                model,
                n: 60,
                replicates: 20_000,
                seed: 1,
                ..Default::default()
            };
            let f = run_experiment(&cfg, None).unwrap();
            let s = f.get(Stat::F).unwrap();
            assert!((s.mean - t.nu()[60]).abs() < 4.0 * s.std_error(), "{model}");
        }
    }

    #[test]
    fn clock_cap_policies() {
        let cfg = SimConfig {
            model: Model::CtClock,
            cap: 5,
            replicates: 200,
            stats: vec![Stat::Size],
            ..Default::default()
        };
        match run_experiment(&cfg, None) {
            Err(Error::CapExceeded {
                cap: 5,
                replicate: Some(_),
            }) => {}
            other => panic!("{other:?}"),
        }
        let res = run_experiment(
            &SimConfig {
                cap_policy: CapPolicy::Discard,
                ..cfg
            },
            None,
        )
        .unwrap();
        let s = res.get(Stat::Size).unwrap();
        assert!(res.discarded > 0);
        assert_eq!(s.count + res.discarded, 200);
        assert!(s.max <= 5.0);
    }

    #[test]
    fn tail_rate_vanishes_at_full_cutoff() {
        let cfg = SimConfig {
            n: 500,
            cutoff: Some(500),
            replicates: 2_000,
            ..Default::default()
        };
        let t = tail_event_rate(&cfg).unwrap();
        assert_eq!((t.rate, t.se, t.bound), (0.0, 0.0, 0.0));
    }
}
