use std::path::PathBuf;
use std::process::{Command, Output};

fn maxclade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxclade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("maxclade-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn exact_small_table() {
    let out = stdout(&maxclade(&["exact", "--nmax", "4"]));
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,mu,nu,psi,psi_over_k,var_g,nu_cut,psi_cut,var_g_cut"
    );
    let row4: Vec<f64> = out
        .lines()
        .find(|l| l.starts_with("4,"))
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((row4[1] + 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(row4[2], 1.5);
    assert_eq!(out.lines().count(), 6);
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--n",
        "100",
        "--samples",
        "1000",
        "--seed",
        "7",
        "--threads",
        "1",
    ];
    let a = stdout(&maxclade(&args));
    let b = stdout(&maxclade(&args));
    assert_eq!(a, b);
    assert!(a.starts_with("stat,count,mean,m2,m3,m4,m5,m6,min,max,ks,skew,kurt\n"));
    let mut threaded = args.to_vec();
    threaded[8] = "3";
    assert_eq!(a, stdout(&maxclade(&threaded)));
}

#[test]
fn config_is_echoed_with_defaults_resolved() {
    let o = maxclade(&[
        "simulate",
        "--n",
        "400",
        "--samples",
        "10",
        "--format",
        "json",
    ]);
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("\"cutoff\":20"), "{err}");
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metadata"]["config"]["cutoff"], 20);
    assert_eq!(v["metadata"]["config"]["chain_depth"], 20);
    assert_eq!(v["rows"][0]["stat"], "F");
    assert_eq!(v["rows"][0]["count"], 10);
}

#[test]
fn constants_report_alpha() {
    let out = stdout(&maxclade(&["constants", "--nmax", "1000"]));
    let alpha = out
        .lines()
        .find(|l| l.starts_with("alpha_closed,"))
        .unwrap();
    assert!(
        alpha.starts_with("alpha_closed,0.2161661791908468"),
        "{alpha}"
    );
    assert!(out.contains("abs_diff_alpha_series(1000),"));
}

#[test]
fn dist_rows() {
    let out = stdout(&maxclade(&["dist", "--cap", "4", "--p", "3"]));
    assert!(out.starts_with("n,kind,arg,value\n"));
    assert!(out.contains("\n3,pmf,2,0.33333333333333331\n"), "{out}");
    assert!(out.contains("\n4,mean,,1.5000000000000000\n"));
    assert!(out.contains("\n3,central,2,0.22222222222222221\n"));
}

#[test]
fn outputs_written_atomically() {
    let dir = scratch("out");
    let path = dir.join("sim.csv");
    let raw = dir.join("raw");
    let hist = dir.join("hist.csv");
    let o = maxclade(&[
        "simulate",
        "--samples",
        "50",
        "--out",
        path.to_str().unwrap(),
        "--raw",
        raw.to_str().unwrap(),
        "--hist",
        hist.to_str().unwrap(),
        "--stats",
        "F,f_2",
        "--chain-depth",
        "2",
    ]);
    assert!(stdout(&o).is_empty());
    let table = std::fs::read_to_string(&path).unwrap();
    assert_eq!(table.lines().count(), 3);
    let f = std::fs::read_to_string(raw.join("F.csv")).unwrap();
    assert_eq!(f.lines().next(), Some("F"));
    assert_eq!(f.lines().count(), 51);
    assert!(f.lines().skip(1).all(|l| l.parse::<u64>().is_ok()));
    assert!(raw.join("f_2.csv").exists());
    assert!(std::fs::read_to_string(&hist)
        .unwrap()
        .starts_with("stat,lo,hi,count,density\n"));
    let leftovers = std::fs::read_dir(&dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .ends_with(".tmp")
        })
        .count();
    assert_eq!(leftovers, 0);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["simulate", "--bogus"][..],
        &["simulate", "--n", "10", "--cutoff", "11"],
        &["simulate", "--model", "yule"],
        &["simulate", "--stats", "Q"],
        &["dist", "--cap", "600"],
        &["exact", "--nmax", "4", "--cutoff", "5"],
        &["simulate", "--threads", "0"],
    ] {
        assert_eq!(maxclade(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn clock_model_runs() {
    let out = stdout(&maxclade(&[
        "simulate",
        "--model",
        "ct-clock",
        "--lambda",
        "2",
        "--samples",
        "200",
        "--stats",
        "size,f",
        "--discard-capped",
        "--cap",
        "1000",
    ]));
    assert!(out.contains("\nsize,200,"));
}
