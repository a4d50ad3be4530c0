use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use tempfile::TempDir;

const DEMO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../demo");

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_framestamp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn demo(name: &str) -> String {
    format!("{DEMO}/{name}")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let f = Fixture {
            dir: TempDir::new().unwrap(),
        };
        let o = run(&["keygen", "--out", p(&f.key()), "--seed", &"07".repeat(32)]);
        assert!(o.status.success(), "{o:?}");
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn key(&self) -> PathBuf {
        self.path("key")
    }

    fn pubkey(&self) -> PathBuf {
        self.path("key.pub")
    }

    fn record(&self, out: &str, frames: u32) -> PathBuf {
        self.record_log("optimal.json", out, frames)
    }

    fn record_log(&self, log: &str, out: &str, frames: u32) -> PathBuf {
        let out = self.path(out);
        let o = run(&[
            "record",
            "--inputs",
            &demo(log),
            "--key",
            p(&self.key()),
            "--out",
            p(&out),
            "--frames",
            &frames.to_string(),
        ]);
        assert!(o.status.success(), "{o:?}");
        out
    }

    fn verify(&self, bundle: &Path) -> Output {
        run(&["verify", "--bundle", p(bundle), "--pubkey", p(&self.pubkey())])
    }
}

#[test]
fn keygen_prints_key_and_paths() {
    let f = Fixture::new();
    let pk = std::fs::read_to_string(f.pubkey()).unwrap();
    assert_eq!(pk.trim().len(), 64);
    let o = run(&["keygen", "--out", p(&f.path("k2")), "--seed", &"07".repeat(32)]);
    assert!(stdout(&o).starts_with(&format!("keygen pk={} ", pk.trim())));
}

#[test]
fn record_then_verify_accepts() {
    let f = Fixture::new();
    let out = f.path("run.spdb");
    let o = run(&[
        "record",
        "--inputs",
        &demo("optimal.json"),
        "--key",
        p(&f.key()),
        "--out",
        p(&out),
    ]);
    let line = stdout(&o);
    assert!(line.starts_with("recorded mode=local frames=459 "), "{line}");
    assert!(line.contains("sha256="));
    let v = f.verify(&out);
    assert_eq!(stdout(&v).trim(), "ACCEPT");
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn verify_with_wrong_key_rejects() {
    let f = Fixture::new();
    let bundle = f.record("run.spdb", 10);
    let other = f.path("other");
    run(&["keygen", "--out", p(&other), "--seed", &"08".repeat(32)]);
    let v = run(&["verify", "--bundle", p(&bundle), "--pubkey", p(&f.path("other.pub"))]);
    assert_eq!(stdout(&v).trim(), "REJECT MalformedBundle");
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn splice_rejects_with_chain_break() {
    let f = Fixture::new();
    let a = f.record("a.spdb", 20);
    let b = f.record_log("misstep.json", "b.spdb", 20);
    let out = f.path("spliced.spdb");
    // Aligned seam: every signature holds, the states do not connect.
    let o = run(&[
        "attack", "splice", "--bundle", p(&a), "--bundle", p(&b), "--cut", "0..10", "--cut", "10..20", "--out",
        p(&out),
    ]);
    assert!(stdout(&o).starts_with("splice frames=20 "), "{o:?}");
    let v = f.verify(&out);
    assert_eq!(stdout(&v).trim(), "REJECT ChainBreak frame=10");
    assert_eq!(v.status.code(), Some(1));

    // Moved frames carry signatures over their original numbering.
    let o = run(&[
        "attack", "splice", "--bundle", p(&a), "--bundle", p(&a), "--cut", "0..10", "--cut", "15..20", "--out",
        p(&out),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&f.verify(&out)).trim(), "REJECT BadSignature frame=10");
}

#[test]
fn missing_file_is_an_error() {
    let f = Fixture::new();
    let v = f.verify(&f.path("nope.spdb"));
    assert_eq!(v.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&v.stderr).starts_with("error: "));
}

#[test]
fn garbage_bundle_is_malformed() {
    let f = Fixture::new();
    let junk = f.path("junk.spdb");
    std::fs::write(&junk, b"not a bundle").unwrap();
    let v = f.verify(&junk);
    assert_eq!(stdout(&v).trim(), "REJECT MalformedBundle");
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn skew_and_patch_are_rejected() {
    let f = Fixture::new();
    let skew = f.path("skew.spdb");
    let o = run(&[
        "attack",
        "skew",
        "--inputs",
        &demo("optimal.json"),
        "--key",
        p(&f.key()),
        "--factor",
        "2",
        "--out",
        p(&skew),
    ]);
    assert!(stdout(&o).starts_with("skew factor=2/1 "), "{o:?}");
    assert_eq!(stdout(&f.verify(&skew)).trim(), "REJECT TimingViolation frame=1");

    let patch = f.path("patch.spdb");
    let o = run(&[
        "attack",
        "patch",
        "--inputs",
        &demo("optimal.json"),
        "--key",
        p(&f.key()),
        "--set",
        "walk=144",
        "--out",
        p(&patch),
    ]);
    assert!(stdout(&o).starts_with("patch frames="), "{o:?}");
    assert!(stdout(&f.verify(&patch)).starts_with("REJECT ChainBreak frame="));

    let o = run(&[
        "attack", "patch", "--inputs", &demo("optimal.json"), "--key", p(&f.key()), "--set", "bogus=1", "--out",
        p(&patch),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn replay_edit_shortens_the_misstep_run() {
    let f = Fixture::new();
    let out = f.path("edited.json");
    let o = run(&[
        "attack",
        "replay-edit",
        "--inputs",
        &demo("misstep.json"),
        "--edits",
        &demo("misstep-edits.json"),
        "--out",
        p(&out),
    ]);
    let line = stdout(&o);
    assert!(line.contains("complete_at=479 edited_complete_at=459"), "{line}");

    // The edited log records and verifies like any honest run.
    let bundle = f.path("edited.spdb");
    let o = run(&["record", "--inputs", p(&out), "--key", p(&f.key()), "--out", p(&bundle)]);
    assert!(o.status.success());
    assert_eq!(stdout(&f.verify(&bundle)).trim(), "ACCEPT");
}

#[test]
fn metrics_one_line_per_log() {
    let o = run(&["metrics", "--inputs", &demo("optimal.json"), "--inputs", &demo("misstep.json")]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in lines {
        assert!(l.starts_with("metrics log="), "{l}");
        for field in ["count=", "mean=", "variance=", "entropy_bits="] {
            assert!(l.contains(field), "{l}");
        }
    }
}

#[test]
fn secgame_reports_win_rate() {
    let f = Fixture::new();
    let json = f.path("report.json");
    let o = run(&[
        "secgame", "thick", "--adversary", "extract", "--trials", "3", "--frames", "20", "--out", p(&json),
    ]);
    let line = stdout(&o);
    assert!(line.starts_with("secgame game=thick strategy=extract trials=3 wins=3 rate=1 "), "{line}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["wins"], 3);

    let o = run(&["secgame", "thin", "--adversary", "forger", "--trials", "3", "--frames", "20"]);
    assert!(stdout(&o).contains(" wins=0 "), "{o:?}");
    let o = run(&["secgame", "thin", "--adversary", "extract", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

struct Served(Child);

impl Drop for Served {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn record_through_server() {
    let f = Fixture::new();
    let mut child = bin()
        .args(["serve", "--key", p(&f.key()), "--listen", "127.0.0.1:0", "--epoch", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let _served = Served(child);
    assert!(line.starts_with("serving addr="), "{line}");
    let addr = line["serving addr=".len()..].split(' ').next().unwrap().to_owned();

    let thin = f.path("thin.spdb");
    let o = run(&[
        "record",
        "--inputs",
        &demo("optimal.json"),
        "--connect",
        &addr,
        "--frames",
        "40",
        "--out",
        p(&thin),
    ]);
    assert!(stdout(&o).starts_with("recorded mode=thin frames=40 "), "{o:?}");
    assert_eq!(stdout(&f.verify(&thin)).trim(), "ACCEPT");

    // Same key, same epoch: the local recording is byte-identical.
    let local = f.record("local.spdb", 40);
    assert_eq!(std::fs::read(&thin).unwrap(), std::fs::read(&local).unwrap());
}
