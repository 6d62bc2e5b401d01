use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quietpath"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn offline_then_online_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&run(
            d,
            &["gen-map", "--zones", "8", "--seed", "4", "--out", "map.json"]
        )),
        0
    );
    let map = json(&d.join("map.json"));
    assert_eq!(map["zones"].as_array().unwrap().len(), 8);
    assert_eq!(
        code(&run(
            d,
            &["build-graph", "--map", "map.json", "--dl", "120", "--out", "base.qpg"]
        )),
        0
    );
    assert!(std::fs::read(d.join("base.qpg")).unwrap().starts_with(b"QPGRAPH"));

    let query = ["--graph", "base.qpg", "--start", "5,5", "--goal", "1990,1990"];
    let plan = run(
        d,
        &[
            &["plan"][..],
            &query,
            &["--dq", "5", "--out", "plan.json", "--svg", "plan.svg"],
        ]
        .concat(),
    );
    assert_eq!(code(&plan), 0, "{}", String::from_utf8_lossy(&plan.stderr));
    let p = json(&d.join("plan.json"));
    assert_eq!(p["valid"], true);
    assert_eq!(p["kind"], "upper_bound");
    let segs = p["segments"].as_array().unwrap();
    assert!(!segs.is_empty());
    for key in ["x0", "y0", "x1", "y1", "mode", "q_start", "q_end"] {
        assert!(segs[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(segs[0]["q_start"], 80.0);
    assert!(segs.last().unwrap()["q_end"].as_f64().unwrap() >= 50.0 - 1e-9);
    assert!(std::fs::read_to_string(d.join("plan.svg")).unwrap().starts_with("<svg"));

    assert_eq!(
        code(&run(
            d,
            &[&["lower-bound"][..], &query, &["--nl", "20", "--out", "lb.json"]].concat()
        )),
        0
    );
    assert_eq!(
        code(&run(
            d,
            &[&["baseline"][..], &query, &["--dq", "5", "--out", "bl.json"]].concat()
        )),
        0
    );
    let ub = p["cost"].as_f64().unwrap();
    let lb = json(&d.join("lb.json"))["cost"].as_f64().unwrap();
    let bl = json(&d.join("bl.json"))["cost"].as_f64().unwrap();
    assert!(lb <= ub + 1e-9 && ub <= bl + 1e-9, "{lb} {ub} {bl}");
}

fn blocked_map(dir: &Path) {
    // the quiet zone spans the map height and is 1000 wide: crossing it
    // electric-only would need twice the battery capacity
    let map = r#"{"name":"wall","bounds":[1200,1000],"zones":[
        {"id":0,"kind":"quiet","vertices":[[100,0],[1100,0],[1100,1000],[100,1000]]}]}"#;
    std::fs::write(dir.join("wall.json"), map).unwrap();
    let out = run(
        dir,
        &["build-graph", "--map", "wall.json", "--dl", "100", "--out", "wall.qpg"],
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn no_feasible_plan_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    blocked_map(dir.path());
    let args = [
        "plan", "--graph", "wall.qpg", "--start", "50,500", "--goal", "1150,500", "--out", "p.json",
    ];
    let out = run(dir.path(), &args);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("p.json").exists());
}

#[test]
fn invalid_input_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    blocked_map(d);
    let inside = [
        "plan", "--graph", "wall.qpg", "--start", "500,500", "--goal", "1150,500", "--out", "p.json",
    ];
    assert_eq!(code(&run(d, &inside)), 3);
    let bad_charge = [
        "plan", "--graph", "wall.qpg", "--start", "50,5", "--goal", "60,5", "--qinit", "101", "--out", "p.json",
    ];
    assert_eq!(code(&run(d, &bad_charge)), 3);
    assert_eq!(
        code(&run(
            d,
            &["plan", "--graph", "wall.qpg", "--start", "50", "--goal", "1,1", "--out", "p.json"]
        )),
        3
    );
    assert_eq!(
        code(&run(
            d,
            &["build-graph", "--map", "missing.json", "--dl", "10", "--out", "x.qpg"]
        )),
        3
    );
    std::fs::write(d.join("junk.qpg"), b"QPGRAPH\x09\x00").unwrap();
    let junk = [
        "lower-bound",
        "--graph",
        "junk.qpg",
        "--start",
        "1,1",
        "--goal",
        "2,2",
        "--out",
        "l.json",
    ];
    assert_eq!(code(&run(d, &junk)), 3);
    assert_eq!(code(&run(d, &["--help"])), 0);
}

#[test]
fn bench_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = r#"{"maps":[{"random":{"zones":3,"seed":2}}],"scenarios_per_map":2,"seed":9,
        "discretizations":[5,10],"delta_l":200.0,"min_dist":500.0}"#;
    std::fs::write(d.join("bench.json"), config).unwrap();
    let out = run(
        d,
        &[
            "bench",
            "--config",
            "bench.json",
            "--out",
            "report.csv",
            "--svg",
            "box.svg",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.starts_with("map,map_index,scenario,seed,discretization"));
    let svg = std::fs::read_to_string(d.join("box.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="box-group""#).count(), 2);
}
