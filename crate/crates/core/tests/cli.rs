use std::io::Write;
use std::process::{Command, Output, Stdio};

use seqcal::config::{RunConfig, TestKind};
use seqcal::format::fmt12;
use seqcal::uniform::kernel_betting_stream;
use seqcal::EProcess;

fn seqcal(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_seqcal"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn monitor_warmup_rows_are_neutral() {
    let o = seqcal(&["monitor", "--method", "beta"], "0.1\n0.4\n0.6\n0.8\n0.95\n");
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    for (i, l) in lines[1..].iter().enumerate() {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[0], (i + 1).to_string());
        assert_eq!(f[2], "1", "E_t of row {l}");
    }
}

#[test]
fn incompatible_method_fails_before_reading() {
    let o = seqcal(&["monitor", "--method", "betabinomial", "--hypothesis", "cuf", "--input", "/nonexistent/file"], "");
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not compatible"), "{err}");
}

#[test]
fn empty_input_gives_header_only() {
    let o = seqcal(&["monitor", "--method", "kernel"], "");
    assert!(o.status.success());
    assert_eq!(stdout(&o), "t,value,E_t,e_t,running_max,p_t,tau_h_statistic\n");
    let q = seqcal(&["monitor", "--method", "quantile-pair", "--lag", "2"], "");
    assert_eq!(stdout(&q), "t,z_u,z_l,E_t,e_t,running_max,p_t,tau_h_statistic\n");
}

#[test]
fn monitor_matches_library_stream() {
    let zs: Vec<f64> = (0..80).map(|i| ((i * 37 + 11) % 97) as f64 / 97.0).collect();
    let input: String = zs.iter().map(|z| format!("{z}\n")).collect();
    let o = seqcal(&["monitor", "--method", "kernel", "--lag", "2"], &input);
    assert!(o.status.success());
    let mut p = EProcess::new(2).unwrap();
    let expected: Vec<String> = kernel_betting_stream(&zs, 2)
        .unwrap()
        .into_iter()
        .map(|e| {
            let r = p.push(e).unwrap();
            format!("{},{},{},{}", fmt12(r.evalue), fmt12(r.e), fmt12(r.running_max), fmt12(r.p))
        })
        .collect();
    let text = stdout(&o);
    for (line, want) in text.lines().skip(1).zip(&expected) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[2..6].join(","), *want);
        assert!(!f[6].is_empty());
    }
    assert_eq!(text.lines().count(), 81);
}

#[test]
fn malformed_rows_are_reported_or_fatal() {
    let input = "value\n0.2\nfoo\n0.3\n";
    let o = seqcal(&["monitor", "--method", "grenander"], input);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(stdout(&o).lines().count(), 3);
    let strict = seqcal(&["monitor", "--method", "grenander", "--strict"], input);
    assert!(!strict.status.success());
    assert!(String::from_utf8_lossy(&strict.stderr).contains("line 3"));
}

#[test]
fn test_command_outputs() {
    let uniform: String = (0..360).map(|i| format!("{}\n", ((i * 7919) % 360) as f64 / 360.0 + 0.001)).collect();
    let o = seqcal(&["test", "--method", "ks"], &uniform);
    let line = stdout(&o);
    let f: Vec<&str> = line.trim().split(',').collect();
    assert_eq!((f[0], f[1]), ("ks", "360"));
    let p: f64 = f[3].parse().unwrap();
    assert!((0.001..=1.0).contains(&p));

    let o = seqcal(&["test", "--method", "beta"], &"0.99\n".repeat(360));
    let f: Vec<String> = stdout(&o).trim().split(',').map(String::from).collect();
    assert!(f[2].parse::<f64>().unwrap() >= 20.0);

    let o = seqcal(&["test", "--method", "quantile-pair", "--strict"], "0.3\n0.5\n");
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("two columns"));
}

#[test]
fn simulate_cardinality_and_rates() {
    let o = seqcal(&["simulate", "--method", "empirical", "--grid", "null", "--reps", "1"], "");
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "epsilon,delta,test,n,alpha,reps,reject_rate");
    assert_eq!(rows.len(), 2);
    let rate = rows[1].rsplit(',').next().unwrap();
    assert!(rate == "0" || rate == "1");
    assert!(String::from_utf8_lossy(&o.stderr).contains("null-cell rate"));

    let o = seqcal(&["simulate", "--method", "empirical,chisq", "--reps", "1", "--n", "30"], "");
    assert_eq!(stdout(&o).lines().count(), 1 + 242);
}

#[test]
fn simulate_unwritable_output_fails() {
    let o = seqcal(&["simulate", "--method", "beta", "--grid", "null", "--reps", "1", "--output", "/nonexistent/dir/x.csv"], "");
    assert!(!o.status.success());
}

#[test]
fn config_labels() {
    let c = RunConfig::new("bernstein".parse::<TestKind>().unwrap(), Some("quantile".parse().unwrap())).unwrap();
    assert_eq!(c.label(), "bernstein");
}
