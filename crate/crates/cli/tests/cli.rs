use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hcembed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcembed")).args(args).output().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("config.toml");
    fs::write(
        &path,
        r#"
seed = 5
linkage = "ward"

[data]
source = "btgm"
height = 2
margin = 6.0
dim = 8
per_cluster = 20

[eval]
sample_size = 50
repeats = 4
"#,
    )
    .unwrap();
    path.display().to_string()
}

#[test]
fn generate_cluster_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let config = small_config(dir.path());
    let gen = hcembed(&["generate", "--config", &config, "--out", &out]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    assert!(dir.path().join("points.emb").exists());
    assert!(dir.path().join("labels.csv").exists());

    let points = dir.path().join("points.emb").display().to_string();
    let cl = hcembed(&["cluster", "--input", &points, "--linkage", "average", "--out", &out]);
    assert!(cl.status.success(), "{}", String::from_utf8_lossy(&cl.stderr));
    let csv = fs::read_to_string(dir.path().join("dendrogram.csv")).unwrap();
    assert!(csv.starts_with("left,right,height,size\n"));
    assert_eq!(csv.lines().count(), 80);

    let tree = dir.path().join("dendrogram.csv").display().to_string();
    let labels = dir.path().join("labels.csv").display().to_string();
    let ev = hcembed(&["eval", "--dendrogram", &tree, "--labels", &labels, "--out", &out]);
    assert!(ev.status.success(), "{}", String::from_utf8_lossy(&ev.stderr));
    let json: serde_json::Value = serde_json::from_slice(&ev.stdout).unwrap();
    let dp = json["purity"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&dp));
    assert!(dir.path().join("eval.json").exists());
}

#[test]
fn embed_pca_and_rescale() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let config = small_config(dir.path());
    assert!(hcembed(&["generate", "--config", &config, "--out", &out])
        .status
        .success());
    let points = dir.path().join("points.emb").display().to_string();
    let pca = hcembed(&[
        "embed", "--input", &points, "--method", "pca", "--dim", "3", "--out", &out,
    ]);
    assert!(pca.status.success(), "{}", String::from_utf8_lossy(&pca.stderr));
    let resc = hcembed(&[
        "embed",
        "--input",
        &points,
        "--method",
        "rescale",
        "--components",
        "4",
        "--out",
        &out,
    ]);
    assert!(resc.status.success(), "{}", String::from_utf8_lossy(&resc.stderr));
    assert!(dir.path().join("gmm.json").exists());
    let missing = hcembed(&["embed", "--input", &points, "--method", "rescale", "--out", &out]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let mut snapshots = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let res = hcembed(&["pipeline", "--config", &config, "--out", &out.display().to_string()]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.file_name().unwrap() != "config.json")
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        snapshots.push(files);
    }
    assert!(!snapshots[0].is_empty());
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn exit_codes() {
    assert_eq!(hcembed(&["--help"]).status.code(), Some(0));
    assert_eq!(hcembed(&["cluster"]).status.code(), Some(1));
    assert_eq!(
        hcembed(&["cluster", "--input", "x.emb", "--linkage", "median"])
            .status
            .code(),
        Some(1)
    );

    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("bogus.emb");
    fs::write(&bogus, b"NOPE").unwrap();
    let res = hcembed(&[
        "cluster",
        "--input",
        &bogus.display().to_string(),
        "--out",
        &dir.path().display().to_string(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let absent = dir.path().join("absent.emb").display().to_string();
    assert_eq!(hcembed(&["cluster", "--input", &absent]).status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "unknown_key = 1\n").unwrap();
    assert_eq!(
        hcembed(&["pipeline", "--config", &bad.display().to_string()])
            .status
            .code(),
        Some(1)
    );
}
