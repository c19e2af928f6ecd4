//! Distributional checks of the tree samplers.

use std::collections::HashMap;

use maxclade::exact::{ct_lambda_size_pmf, e_big_f_ct_lambda, e_fk_ct_lambda, ExactTables};
use maxclade::mc::{chi_square_pvalue, run_experiment, CapPolicy, Model, SimConfig, Stat};
use maxclade::tree::{gen_bst_insert, gen_bst_split, sample_ct_clock, sample_ct_size};
use maxclade::verify::enumerate::shape_codes;
use maxclade::{BinaryTree, RngStream};

/// Shape index and probability for every shape of each size up to 6.
struct ShapeLaw {
    index: Vec<HashMap<Vec<u32>, usize>>,
    probs: Vec<Vec<f64>>,
}

impl ShapeLaw {
    fn new() -> Self {
        let codes = shape_codes(6);
        let index = codes
            .iter()
            .map(|cs| {
                cs.iter()
                    .cloned()
                    .enumerate()
                    .map(|(i, c)| (c, i))
                    .collect()
            })
            .collect();
        let probs = codes
            .iter()
            .map(|cs| {
                cs.iter()
                    .map(|c| BinaryTree::from_left_sizes(c).unwrap().bst_probability())
                    .collect()
            })
            .collect();
        Self { index, probs }
    }

    fn pvalue(&self, n: usize, trees: &[BinaryTree]) -> f64 {
        let mut counts = vec![0u64; self.probs[n].len()];
        for t in trees {
            counts[self.index[n][&t.left_sizes()]] += 1;
        }
        chi_square_pvalue(&counts, &self.probs[n], trees.len() as u64).1
    }
}

#[test]
fn shape_law_of_both_generators() {
    let law = ShapeLaw::new();
    for n in 1..=6u32 {
        for insert in [false, true] {
            let mut rng = RngStream::new(11 + insert as u64, n as u64).rng();
            let trees: Vec<BinaryTree> = (0..1_000_000)
                .map(|_| {
                    if insert {
                        gen_bst_insert(n, &mut rng)
                    } else {
                        gen_bst_split(n, &mut rng)
                    }
                })
                .collect();
            let p = law.pvalue(n as usize, &trees);
            assert!(p > 1e-3, "n = {n}, insert = {insert}: p = {p}");
        }
    }
}

#[test]
fn clock_tree_given_its_size_is_a_search_tree() {
    let law = ShapeLaw::new();
    let mut rng = RngStream::new(12, 0).rng();
    let mut by_size: Vec<Vec<BinaryTree>> = vec![Vec::new(); 7];
    for _ in 0..1_000_000 {
        if let Ok(t) = sample_ct_clock(1.0, &mut rng, 6) {
            by_size[t.len()].push(t);
        }
    }
    assert!(by_size[6].len() > 30_000);
    for n in 1..=6 {
        let p = law.pvalue(n, &by_size[n]);
        assert!(p > 1e-3, "n = {n}: p = {p} over {} trees", by_size[n].len());
    }
    // n = 3: the balanced shape has probability 1/3
    let balanced = by_size[3].iter().filter(|t| t.left_sizes()[0] == 1).count() as f64;
    let share = balanced / by_size[3].len() as f64;
    let se = (2.0 / 9.0 / by_size[3].len() as f64).sqrt();
    assert!((share - 1.0 / 3.0).abs() < 4.0 * se, "{share}");
}

#[test]
fn split_and_insert_agree_on_f() {
    let n = 60;
    let run = |model| {
        let cfg = SimConfig {
            model,
            n,
            replicates: 40_000,
            seed: 5,
            stats: vec![Stat::F],
            ..Default::default()
        };
        run_experiment(&cfg, None)
            .unwrap()
            .get(Stat::F)
            .unwrap()
            .clone()
    };
    let (a, b) = (run(Model::BstSplit), run(Model::BstInsert));
    let nu = ExactTables::build(n).nu()[n as usize];
    let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
    assert!((a.mean - b.mean).abs() < 4.0 * se);
    assert!((a.mean - nu).abs() < 4.0 * a.std_error());
    assert!((b.mean - nu).abs() < 4.0 * b.std_error());
}

#[test]
fn clock_size_tail() {
    let mut rng = RngStream::new(3, 0).rng();
    let draws = 200_000u64;
    let mut counts = vec![0u64; 30];
    for _ in 0..draws {
        let s = sample_ct_size(&mut rng) as usize;
        assert!(s >= 1);
        if s <= 30 {
            counts[s - 1] += 1;
        }
    }
    let probs: Vec<f64> = (1..=30)
        .map(|n| ct_lambda_size_pmf(1.0, n).unwrap())
        .collect();
    let (_, p) = chi_square_pvalue(&counts, &probs, draws);
    assert!(p > 1e-3, "p = {p}");
}

/// The λ-tree chain expectations, including the overall factor λ.
#[test]
fn clock_chain_means_at_rate_two() {
    let lambda = 2.0;
    let mut stats = vec![Stat::Toll, Stat::F];
    stats.extend((1..=4).map(Stat::RootChain));
    let cfg = SimConfig {
        model: Model::CtClock,
        lambda,
        cap: 1_000_000,
        cap_policy: CapPolicy::Discard,
        chain_depth: 4,
        replicates: 200_000,
        seed: 17,
        stats,
        ..Default::default()
    };
    let res = run_experiment(&cfg, None).unwrap();
    for k in 1..=4 {
        let s = res.get(Stat::RootChain(k)).unwrap();
        let exact = e_fk_ct_lambda(k as u64, lambda).unwrap();
        assert!(
            (s.mean - exact).abs() < 4.0 * s.std_error(),
            "k = {k}: {} vs {exact}",
            s.mean
        );
    }
    let f = res.get(Stat::F).unwrap();
    let exact = e_big_f_ct_lambda(lambda).unwrap();
    assert!(
        (f.mean - exact).abs() < 4.0 * f.std_error(),
        "{} vs {exact}",
        f.mean
    );
}
