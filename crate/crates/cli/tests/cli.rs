use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn jtm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jtm"))
        .args(args)
        .output()
        .expect("run jtm")
}

fn jtm_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jtm"))
        .args(args)
        .env(key, value)
        .output()
        .expect("run jtm")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn sample() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/wave_sample.jsonl")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

#[test]
fn encode_all_planes_writes_three_pngs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(&jtm(&[
        "encode",
        s(&sample()),
        "--plane",
        "all",
        "--out",
        s(&out),
    ]));
    let files = tree(&out);
    assert_eq!(files.len(), 4);
    for plane in ["front", "top", "side"] {
        let name = PathBuf::from(format!("wave_sample__t0_p0__{plane}.png"));
        assert!(files[&name].starts_with(b"\x89PNG"));
    }
    let manifest = String::from_utf8(files[&PathBuf::from("manifest.jsonl")].clone()).unwrap();
    assert_eq!(manifest.lines().count(), 3);
}

#[test]
fn encode_honours_level_and_view() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(&jtm(&[
        "encode",
        s(&sample()),
        "--level",
        "hue",
        "--theta",
        "15",
        "--psi",
        "-30",
        "--out",
        s(&out),
    ]));
    let files = tree(&out);
    assert_eq!(files.len(), 4);
    assert!(files.contains_key(Path::new("wave_sample__t15_p-30__side.png")));

    let full = tmp.path().join("full");
    ok(&jtm(&[
        "encode",
        s(&sample()),
        "--theta",
        "15",
        "--psi",
        "-30",
        "--out",
        s(&full),
    ]));
    let name = Path::new("wave_sample__t15_p-30__front.png");
    assert_ne!(files[name], tree(&full)[name]);
}

#[test]
fn bad_flag_values_exit_with_usage_status() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for args in [
        vec!["encode", s(&sample()), "--level", "sepia", "--out", s(&out)],
        vec!["encode", s(&sample()), "--plane", "back", "--out", s(&out)],
        vec!["encode", s(&sample()), "--size", "many", "--out", s(&out)],
        vec!["encode", s(&sample()), "--bogus"],
    ] {
        let o = jtm(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn missing_input_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = jtm(&[
        "encode",
        s(&tmp.path().join("nope.jsonl")),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

fn small_corpus(dir: &Path) {
    ok(&jtm(&[
        "synth",
        "--out",
        s(dir),
        "--set",
        "direction-magnitude",
        "--per-class",
        "1",
        "--seed",
        "3",
    ]));
}

#[test]
fn dataset_counts_and_rerun_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    small_corpus(&corpus);
    let out = tmp.path().join("tree");
    let stdout = ok(&jtm(&[
        "dataset",
        s(&corpus),
        "--out",
        s(&out),
        "--size",
        "32",
    ]));
    assert!(stdout.contains("total: 12"), "{stdout}");
    let first = tree(&out);
    assert_eq!(first.len(), 13);
    assert!(first.contains_key(Path::new(
        "train/top/sweep-accel/sweep-accel_000__t0_p0__top.png"
    )));
    ok(&jtm(&[
        "dataset",
        s(&corpus),
        "--out",
        s(&out),
        "--size",
        "32",
    ]));
    assert_eq!(tree(&out), first);

    let many = tmp.path().join("many");
    let stdout = ok(&jtm(&[
        "dataset",
        s(&corpus),
        "--out",
        s(&many),
        "--size",
        "16",
        "--views",
        "default",
    ]));
    assert!(stdout.contains(&format!("total: {}", 12 * 28)), "{stdout}");
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn fuse_identical_one_hot_files() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = "sample_id,a,b,c\ns1,1,0,0\ns2,0,0,1\ns3,0,1,0\n";
    let files: Vec<PathBuf> = (0..3)
        .map(|i| tmp.path().join(format!("p{i}.csv")))
        .collect();
    for f in &files {
        write(f, csv);
    }
    let pred = tmp.path().join("pred.csv");
    ok(&jtm(&[
        "fuse",
        s(&files[0]),
        s(&files[1]),
        s(&files[2]),
        "--method",
        "multiply",
        "--predictions",
        s(&pred),
    ]));
    assert_eq!(
        fs::read_to_string(&pred).unwrap(),
        "sample_id,predicted\ns1,a\ns2,c\ns3,b\n"
    );
}

#[test]
fn fuse_mismatched_headers_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    write(&a, "sample_id,x,y\ns1,0.5,0.5\n");
    write(&b, "sample_id,x,z\ns1,0.5,0.5\n");
    let o = jtm(&["fuse", s(&a), s(&b)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ID_MISMATCH"));
}

#[test]
fn fuse_matches_hand_computed_values() {
    let tmp = tempfile::tempdir().unwrap();
    let rows = [[0.5, 0.25], [0.75, 0.5], [0.125, 1.0]];
    let mut paths = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let p = tmp.path().join(format!("m{i}.csv"));
        write(&p, &format!("sample_id,x,y\ns1,{},{}\n", r[0], r[1]));
        paths.push(p);
    }
    let run = |method: &str| {
        let out = tmp.path().join(format!("{method}.csv"));
        ok(&jtm(&[
            "fuse",
            s(&paths[0]),
            s(&paths[1]),
            s(&paths[2]),
            "--method",
            method,
            "--out",
            s(&out),
        ]));
        fs::read_to_string(out).unwrap()
    };
    let prod = [0.5 * 0.75 * 0.125, 0.25 * 0.5 * 1.0];
    let avg = [(0.5 + 0.75 + 0.125) / 3.0, (0.25 + 0.5 + 1.0) / 3.0];
    assert_eq!(
        run("multiply"),
        format!("sample_id,x,y\ns1,{},{}\n", prod[0], prod[1])
    );
    assert_eq!(
        run("average"),
        format!("sample_id,x,y\ns1,{},{}\n", avg[0], avg[1])
    );
    assert_eq!(run("max"), "sample_id,x,y\ns1,0.75,1\n");
}

#[test]
fn ablate_reports_requested_levels_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "ablate".to_string(),
            "--levels".into(),
            "raw,hue,full".into(),
            "--per-class".into(),
            "4".into(),
            "--size".into(),
            "24".into(),
            "--out".into(),
            out.to_str().unwrap().to_string(),
        ]
    };
    let first: Vec<String> = args(&a);
    let stdout = ok(&jtm(&first.iter().map(String::as_str).collect::<Vec<_>>()));
    assert!(stdout.contains("hue"));
    let second: Vec<String> = args(&b);
    ok(&jtm_env(
        &second.iter().map(String::as_str).collect::<Vec<_>>(),
        "JTM_THREADS",
        "1",
    ));
    let report = fs::read_to_string(&a).unwrap();
    assert_eq!(report, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "level,front,top,side,fusion");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("raw,") && lines[3].starts_with("full,"));
}

#[test]
fn viewgrid_study_grid_is_five_by_five() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("grid.csv");
    let stdout = ok(&jtm(&[
        "viewgrid",
        "--step",
        "22.5",
        "--range",
        "45",
        "--set",
        "direction-magnitude",
        "--per-class",
        "2",
        "--size",
        "16",
        "--out",
        s(&out),
    ]));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 25 + 1);
    assert!(csv.contains("\n-22.5,45,"));
    // header, five theta rows, all-views line
    assert_eq!(stdout.lines().count(), 7);
}

#[test]
fn eval_writes_score_files_in_fusion_format() {
    let tmp = tempfile::tempdir().unwrap();
    let scores = tmp.path().join("scores");
    let report = tmp.path().join("report.csv");
    ok(&jtm(&[
        "eval",
        "--per-class",
        "4",
        "--size",
        "24",
        "--scores",
        s(&scores),
        "--out",
        s(&report),
    ]));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("method,accuracy\n"));
    assert_eq!(text.lines().count(), 7);
    let fused = tmp.path().join("fused.csv");
    ok(&jtm(&[
        "fuse",
        s(&scores.join("front.csv")),
        s(&scores.join("top.csv")),
        s(&scores.join("side.csv")),
        "--out",
        s(&fused),
    ]));
    let header = fs::read_to_string(&fused).unwrap();
    assert!(header.starts_with("sample_id,circle-cw,circle-ccw,"));
}

#[test]
fn config_file_is_validated_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.conf");
    write(&bad, "level = raw\ncolour = jet\n");
    let o = jtm(&[
        "--config",
        s(&bad),
        "encode",
        s(&sample()),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let conf = tmp.path().join("run.conf");
    write(
        &conf,
        "# small raw maps\nlevel = raw\nsize = 32\nplane = front\n",
    );
    let from_file = tmp.path().join("file");
    let from_flag = tmp.path().join("flag");
    let reference = tmp.path().join("ref");
    ok(&jtm(&[
        "--config",
        s(&conf),
        "encode",
        s(&sample()),
        "--out",
        s(&from_file),
    ]));
    ok(&jtm(&[
        "--config",
        s(&conf),
        "encode",
        s(&sample()),
        "--level",
        "full",
        "--out",
        s(&from_flag),
    ]));
    ok(&jtm(&[
        "encode",
        s(&sample()),
        "--level",
        "full",
        "--size",
        "32",
        "--plane",
        "front",
        "--out",
        s(&reference),
    ]));
    let name = Path::new("wave_sample__t0_p0__front.png");
    assert_eq!(tree(&from_file).len(), 2);
    assert_ne!(tree(&from_file)[name], tree(&from_flag)[name]);
    assert_eq!(tree(&from_flag)[name], tree(&reference)[name]);
}

#[test]
fn thread_cap_must_be_positive() {
    let o = jtm_env(&["colormap"], "JTM_THREADS", "0");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn colormap_table_has_256_rows() {
    let stdout = ok(&jtm(&["colormap", "--name", "jet"]));
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 257);
    assert_eq!(lines[0], "r,g,b");
}

#[test]
fn every_command_has_help() {
    for cmd in [
        "encode", "dataset", "fuse", "eval", "ablate", "viewgrid", "synth", "colormap",
    ] {
        let stdout = ok(&jtm(&[cmd, "--help"]));
        assert!(stdout.contains("--config"), "{cmd}");
    }
}
