use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use qnd_core::io::Device;
use qnd_core::qubit::qubit_observable;
use qnd_core::random::{random_channel, random_state, rng};
use qnd_core::{Channel, Instrument, Observable};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Value,
}

fn qnd(args: &[&str], stdin: Option<&str>) -> Run {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qnd"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    let out = child.wait_with_output().unwrap();
    let report = serde_json::from_slice(&out.stdout).expect("report is JSON");
    Run {
        code: out.status.code().unwrap(),
        report,
    }
}

fn write(dir: &TempDir, name: &str, device: impl Into<Device>) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, device.into().to_json()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn z() -> Observable {
    Observable::standard_basis(2)
}

fn x() -> Observable {
    qubit_observable([1.0, 0.0, 0.0]).unwrap()
}

#[test]
fn validate_reports_violations_and_syntax_errors() {
    let dir = TempDir::new().unwrap();
    let ok = write(&dir, "z.json", z());
    let r = qnd(&["validate", s(&ok)], None);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["status"], "ok");

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"kind":"observable","schema_version":1,
            "payload":{"dim":1,"effects":[[[[0.5,0.0]]],[[[0.7,0.0]]]]}}"#,
    )
    .unwrap();
    let r = qnd(&["validate", s(&bad)], None);
    assert_eq!(r.code, 1);
    let v = &r.report["result"]["violations"];
    assert_eq!(v[0]["kind"], "incomplete");

    let r = qnd(&["validate", "-"], Some("{\n \"kind\": \"observable\",\n oops }"));
    assert_eq!(r.code, 3);
    assert!(r.report["error"].as_str().unwrap().contains("line 3"));
}

#[test]
fn order_of_observables() {
    let dir = TempDir::new().unwrap();
    let coin = write(&dir, "coin.json", Observable::coin_toss(&[0.25, 0.75], 2).unwrap());
    let zp = write(&dir, "z.json", z());
    let xp = write(&dir, "x.json", x());
    let r = qnd(&["order", "obs", s(&coin), s(&zp)], None);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["status"], "feasible");
    let rows = r.report["witness"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let r = qnd(&["order", "obs", s(&xp), s(&zp)], None);
    assert_eq!(r.code, 1);
    let r = qnd(&["order", "obs", s(&zp), s(&xp)], None);
    assert_eq!(r.code, 1);
}

#[test]
fn order_of_channels() {
    let dir = TempDir::new().unwrap();
    let mut g = rng(5);
    let lambda = random_channel(&mut g, 2, 3, 2);
    let trash = Channel::trash_and_prepare(&random_state(&mut g, 2), 2).unwrap();
    let lp = write(&dir, "l.json", lambda);
    let tp = write(&dir, "t.json", trash);
    let r = qnd(&["order", "chan", s(&tp), s(&lp)], None);
    assert_eq!(r.code, 0, "{}", r.report);
    assert_eq!(r.report["witness"]["kind"], "channel");
    assert!(r.report["residuals"]["residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn compatibility() {
    let dir = TempDir::new().unwrap();
    let a = qubit_observable([0.0, 0.6, 0.0]).unwrap();
    let ap = write(&dir, "a.json", a.clone());
    let la = qnd(
        &["least-disturbing", s(&ap), "-o", s(&dir.path().join("la.json"))],
        None,
    );
    assert_eq!(la.code, 0);
    let r = qnd(&["compatible", s(&dir.path().join("la.json")), s(&ap)], None);
    assert_eq!(r.code, 0);
    assert!(r.report["witness"]["radon_nikodym"].is_object());

    let id = write(&dir, "id.json", Channel::identity(2));
    let zp = write(&dir, "z.json", z());
    assert_eq!(qnd(&["compatible", s(&id), s(&zp)], None).code, 1);

    let id3 = write(&dir, "id3.json", Channel::identity(3));
    let r = qnd(&["compatible", s(&id3), s(&zp)], None);
    assert_eq!(r.code, 3);
    assert!(r.report["error"].as_str().unwrap().contains("dimension"));
    assert_eq!(qnd(&["compatible", s(&zp), s(&zp)], None).code, 3);
}

#[test]
fn least_disturbing_round_trips_through_files() {
    let dir = TempDir::new().unwrap();
    for (k, a) in [z(), x(), Observable::coin_toss(&[0.5, 0.5], 2).unwrap()]
        .into_iter()
        .enumerate()
    {
        let ap = write(&dir, &format!("a{k}.json"), a.clone());
        let out = dir.path().join(format!("la{k}.json"));
        assert_eq!(qnd(&["least-disturbing", s(&ap), "-o", s(&out)], None).code, 0);
        assert_eq!(qnd(&["validate", s(&out)], None).code, 0);
        let ch = qnd_core::io::parse_device(&std::fs::read_to_string(&out).unwrap())
            .unwrap()
            .into_channel()
            .unwrap();
        assert!(ch.approx_eq(&qnd_core::least_disturbing_channel(&a), 1e-15));
    }
}

#[test]
fn degrade_emits_verified_channel() {
    let dir = TempDir::new().unwrap();
    let a = qubit_observable([0.3, 0.0, 0.5]).unwrap();
    let ip = write(&dir, "i.json", Instrument::lueders(&a).unwrap());
    let out = dir.path().join("e.json");
    let r = qnd(&["degrade", s(&ip), "-o", s(&out)], None);
    assert_eq!(r.code, 0);
    assert!(r.report["residuals"]["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(qnd(&["validate", s(&out)], None).code, 0);

    let lp = write(&dir, "ld.json", qnd_core::least_disturbing_instrument(&a));
    let r = qnd(&["degrade", s(&lp), "--seed", "3"], None);
    assert_eq!(r.code, 0);
    assert!(r.report["residuals"]["residual"].as_f64().unwrap() <= 1e-9);

    let zp = write(&dir, "z.json", z());
    let r = qnd(&["degrade", s(&ip), "--observable", s(&zp)], None);
    assert_eq!(r.code, 1);
    assert!(r.report["error"].as_str().unwrap().contains("claimed observable"));
}

#[test]
fn bounds() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (Observable::standard_basis(3), 1.0 / 16.0),
        (Observable::coin_toss(&[0.3, 0.7], 2).unwrap(), 0.0),
        (qubit_observable([0.0, 0.0, 0.6]).unwrap(), 0.0225),
    ];
    for (k, (a, expected)) in cases.into_iter().enumerate() {
        let p = write(&dir, &format!("b{k}.json"), a);
        let r = qnd(&["bound", s(&p)], None);
        assert_eq!(r.code, 0);
        assert!((r.report["result"]["bound"].as_f64().unwrap() - expected).abs() <= 1e-12);
    }
}

#[test]
fn stdin_and_determinism() {
    let text = Device::from(x()).to_json();
    let a = qnd(&["bound", "-"], Some(&text));
    let b = qnd(&["bound", "-"], Some(&text));
    assert_eq!(a.code, 0);
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timing_ms");
        v
    };
    assert_eq!(strip(a.report), strip(b.report));
}

#[test]
fn qubit_commands() {
    let r = qnd(&["qubit", "solve", "0.9", "0.7"], None);
    assert_eq!(r.code, 0);
    assert!((r.report["result"]["lambda_prime"].as_f64().unwrap() - 0.75).abs() <= 1e-12);
    assert_eq!(qnd(&["qubit", "solve", "0.6", "0.8"], None).code, 1);
    let r = qnd(&["qubit", "decompose", "0", "-1", "0"], None);
    assert!((r.report["result"]["lambda"].as_f64().unwrap() - 0.5).abs() <= 1e-12);
    let r = qnd(&["qubit", "observable", "0", "0", "0.6"], None);
    assert_eq!(r.report["witness"]["kind"], "observable");
    assert_eq!(qnd(&["qubit", "observable", "1", "1", "0"], None).code, 3);
}

#[test]
fn verbose_includes_trace_and_flags_propagate() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", Channel::identity(2));
    let la = write(&dir, "la.json", qnd_core::least_disturbing_channel(&z()));
    let r = qnd(
        &["--verbose", "--max-iters", "50", "order", "chan", s(&id), s(&la)],
        None,
    );
    assert!(r.report["trace"].is_array());
    assert_ne!(r.code, 0);
}
