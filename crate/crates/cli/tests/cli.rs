use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dszog")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

const ONE_DIM: &str = "task=analytic\nanalytic_case=one_dim\nmethod=dszog\nbeta=1000\nrepeats=3\nmax_iters=3000\nmetric_every=250\n";

#[test]
fn analytic_repeats_and_summary_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", ONE_DIM);
    let out = dir.path().join("out");
    let res = run(&[&cfg, "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let mut finals = Vec::new();
    for seed in 7..10 {
        let (h, rows) = csv(&out.join(format!("dszog/seed_{seed}/trace.csv")));
        assert!(out.join(format!("dszog/seed_{seed}/report.txt")).is_file());
        finals.push(rows.last().unwrap()[column(&h, "error")].parse::<f64>().unwrap());
    }
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let std = (finals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();

    let (h, rows) = csv(&out.join("summary.csv"));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row[column(&h, "method")], "dszog");
    assert_eq!(row[column(&h, "repeats")], "3");
    let got_mean: f64 = row[column(&h, "mean")].parse().unwrap();
    let got_std: f64 = row[column(&h, "std")].parse().unwrap();
    assert!((got_mean - mean).abs() <= 1e-12);
    assert!((got_std - std).abs() <= 1e-12);
    assert!(got_mean <= 1e-2, "mean final |w - 1| = {got_mean}");

    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "seeds=7,8,9"), "{manifest}");
    assert!(!out.join("plot_accuracy_vs_time.csv").exists());
}

#[test]
fn same_config_same_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.cfg",
        "task=fairness\ngen_n=200\ngen_d=8\ngen_r=2\nmethod=dszog,zopsgd\nmax_iters=200\nmetric_every=50\nbatch_cons_w=4\nbatch_cons_p=4\n",
    );
    let strip_wall = |path: &Path| {
        let (h, rows) = csv(path);
        let w = column(&h, "wall_s");
        rows.into_iter()
            .map(|mut r| {
                r.remove(w);
                r.join(",")
            })
            .collect::<Vec<_>>()
    };
    let outs: Vec<_> = ["o1", "o2"].iter().map(|n| dir.path().join(n)).collect();
    for o in &outs {
        assert!(run(&[&cfg, "--out", o.to_str().unwrap()]).status.success());
    }
    for m in ["dszog", "zopsgd"] {
        let a = strip_wall(&outs[0].join(m).join("seed_0/trace.csv"));
        let b = strip_wall(&outs[1].join(m).join("seed_0/trace.csv"));
        assert_eq!(a.len(), 5);
        assert_eq!(a, b);
    }
}

#[test]
fn plot_data_for_accuracy_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let mut data = String::new();
    for i in 0..60 {
        let y = if i % 3 == 0 { 1 } else { -1 };
        data.push_str(&format!("{y} 1:{} 3:{}\n", y as f64 + 0.1 * (i % 7) as f64, (i % 5) as f64 / 5.0));
    }
    fs::write(dir.path().join("toy.txt"), data).unwrap();
    let cfg = write_config(
        dir.path(),
        "p.cfg",
        "task=pairwise\ndataset=toy.txt\nsubsample=40\nmethod=dszog,full_gda\nrepeats=2\nmax_iters=60\nmetric_every=20\nout_dir=res\n",
    );
    let res = run(&[&cfg]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let out = dir.path().join("res");
    let (h, rows) = csv(&out.join("plot_accuracy_vs_time.csv"));
    assert_eq!(h, ["method", "seed", "wall_s", "test_accuracy"]);
    assert_eq!(rows.len(), 2 * 2 * 4);
    let keys: Vec<(String, u64, f64)> =
        rows.iter().map(|r| (r[0].clone(), r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)).then(a.2.total_cmp(&b.2)));
    assert_eq!(keys, sorted);
    for r in &rows {
        let acc: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }
}

#[test]
fn time_budget_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "t.cfg", "task=fairness\nmax_iters=100000000\nmetric_every=100000\ntime_budget_s=1\n");
    let out = dir.path().join("out");
    let res = run(&[&cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = fs::read_to_string(out.join("dszog/seed_0/report.txt")).unwrap();
    assert_eq!(report.lines().next(), Some("termination=TimeBudget"));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &format!("{ONE_DIM}out_dir=res\n"));
    let res = run(&[&cfg, "--dry-run"]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).starts_with("ok: task=analytic"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_errors_exit_one_with_a_single_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (name, body) in [
        ("unknown.cfg", "task=analytic\nanalytic_case=one_dim\nfoo=1\n"),
        ("range.cfg", "task=analytic\nanalytic_case=one_dim\neta_w=-1\n"),
        ("case.cfg", "task=analytic\nanalytic_case=nope\n"),
        ("nofile.cfg", "task=pairwise\ndataset=missing.txt\n"),
        ("zopsgd.cfg", "task=analytic\nanalytic_case=half_spaces\nmethod=zopsgd\n"),
    ] {
        let cfg = write_config(dir.path(), name, body);
        let res = run(&[&cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(1), "{name}");
        let err = String::from_utf8_lossy(&res.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{name}: {err}");
        assert!(!out.exists());
    }
    let res = run(&[dir.path().join("absent.cfg").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn occupied_output_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", ONE_DIM);
    let out = dir.path().join("out");
    fs::create_dir(&out).unwrap();
    fs::write(out.join("keep.txt"), "x").unwrap();
    let res = run(&[&cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn runtime_errors_exit_two_and_leave_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", ONE_DIM);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "not a directory").unwrap();
    let res = run(&[&cfg, "--out", blocker.join("out").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let names: Vec<String> =
        fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().all(|n| !n.contains("partial")), "{names:?}");
}
