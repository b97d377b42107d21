use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn headpose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_headpose"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = headpose(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                files.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn missing_checkpoint_flag_is_named() {
    let out = headpose(&["eval", "--data-root", "nowhere", "--out", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--checkpoint"));
}

#[test]
fn missing_data_root_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("m.ck");
    let out = headpose(&["train", "--data-root", "/definitely/not/here", "--out", ck.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    assert!(!ck.exists());
}

#[test]
fn synth_gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    ok(&["synth-gen", "--n", "48", "--seed", "7", "--out", a.to_str().unwrap()]);
    ok(&["synth-gen", "--n", "48", "--seed", "7", "--out", b.to_str().unwrap()]);
    ok(&["synth-gen", "--n", "48", "--seed", "8", "--out", c.to_str().unwrap()]);
    let (ta, tb, tc) = (tree(&a), tree(&b), tree(&c));
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
}

#[test]
fn train_eval_predict_bench_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ck = dir.path().join("model.ck");
    let eval_dir = dir.path().join("eval");
    let data_s = data.to_str().unwrap();
    let ck_s = ck.to_str().unwrap();
    ok(&["synth-gen", "--n", "64", "--seed", "1", "--out", data_s]);
    ok(&["train", "--data-root", data_s, "--epochs", "1", "--batch-size", "8", "--lr", "0.01", "--out", ck_s]);
    assert!(ck.exists());
    let history = std::fs::read_to_string(ck.with_extension("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 2);

    let report = ok(&["eval", "--data-root", data_s, "--checkpoint", ck_s, "--out", eval_dir.to_str().unwrap()]);
    assert!(report.contains("pitch"));
    for file in ["frames.csv", "histogram.csv", "report.txt", "bench.txt"] {
        assert!(eval_dir.join(file).exists(), "{file} missing");
    }

    let bench = ok(&["bench", "--checkpoint", ck_s, "--frames", "5", "--runs", "1"]);
    assert!(bench.contains("fps") || bench.contains("frames/s"), "{bench}");
}
