use k3fm_cli::{run_from, Outcome};
use serde_json::Value;

fn run(args: &[&str]) -> Outcome {
    run_from(std::iter::once("k3fm").chain(args.iter().copied()))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn golden_files_are_byte_exact() {
    for (file, args) in [
        ("lagr_0_5.json", &["lagr", "--d", "0", "--t", "5", "--count", "--json"][..]),
        ("ht_6_6.json", &["ht", "--d", "6", "--t", "6", "--t-general", "--json"]),
        ("jac_6_4.json", &["jac", "--t", "6", "--k", "4", "--index", "--json"]),
    ] {
        let out = run(args);
        assert_eq!(out.code, 0);
        assert_eq!(out.stdout, golden(file), "{file}");
    }
}

#[test]
fn table_output_examples() {
    assert_eq!(run(&["lagr", "--d", "0", "--t", "5", "--count"]).stdout, "elements=8 subgroups=2\n");
    assert_eq!(run(&["ht", "--d", "6", "--t", "6", "--t-general"]).stdout, "NonJacobianPartnersExist\n");
    assert_eq!(run(&["ht", "--d", "6", "--t", "6"]).stdout, "Inconclusive\n");
    assert_eq!(run(&["jac", "--t", "6", "--k", "4", "--index"]).stdout, "3\n");
}

#[test]
fn json_round_trips() {
    let queries: &[&[&str]] = &[
        &["disc", "--d", "3", "--t", "12"],
        &["lagr", "--d", "6", "--t", "30", "--list"],
        &["pair", "--d", "2", "--t", "7", "--t-general"],
        &["involution", "--d", "0", "--t", "6"],
        &["genus", "--d", "1", "--t", "5"],
        &["fm", "--d", "0", "--t", "5"],
        &["de", "--d", "6", "--t", "12", "--verify"],
        &["jac", "--t", "12", "--classes"],
        &["overlattice", "--d", "0", "--t", "6", "--gen", "1/3,0", "--gen", "0,1/2"],
        &["caldararu", "--d", "1", "--t", "5", "--r", "0", "--x", "0", "--y", "1", "--s", "0"],
        &["sweep", "--t-min", "1", "--t-max", "6"],
    ];
    for q in queries {
        let out = run(&[*q, &["--json"][..]].concat());
        assert_eq!(out.code, 0, "{q:?}: {}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
        assert_eq!(again, out.stdout, "{q:?}");
        if q[0] == "sweep" {
            assert!(v.is_array());
        } else {
            assert!(v.is_object());
        }
    }
}

#[test]
fn invalid_input_exits_2_with_one_line() {
    for args in [
        &["lagr", "--d", "0", "--t", "0"][..],
        &["jac", "--t", "6", "--k", "4", "--index", "--canonical"],
        &["lagr", "--d", "0", "--t", "5", "--count", "--list"],
        &["lagr", "--d", "x", "--t", "5"],
        &["caldararu", "--d", "1", "--t", "5", "--r", "5", "--x", "1", "--y", "0", "--s", "1"],
        &["fm", "--d", "0", "--t", "5", "--g-order", "4"],
        &["jac", "--t", "7", "--classes", "--b-order", "4"],
        &["overlattice", "--d", "0", "--t", "5", "--gen", "1/5,1/5"],
    ] {
        let out = run(args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        assert!(out.stdout.is_empty());
        assert!(out.stderr.starts_with("error: "), "{}", out.stderr);
        assert_eq!(out.stderr.lines().count(), 1, "{args:?}: {}", out.stderr);
    }
}

#[test]
fn capacity_errors_exit_3_and_name_the_budget() {
    for args in [
        &["lagr", "--d", "0", "--t", "3001", "--list"][..],
        &["fm", "--d", "0", "--t", "101"],
        &["sweep", "--t-min", "101", "--t-max", "101", "--d-min", "0", "--d-max", "0"],
    ] {
        let out = run(args);
        assert_eq!(out.code, 3, "{args:?}: {}", out.stderr);
        assert!(out.stderr.contains("K3FM_BUDGET"), "{}", out.stderr);
    }
}

#[test]
fn help_goes_to_stdout() {
    let out = run(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("sweep"));
}

#[test]
fn sweep_t_3_to_10_verified() {
    let out = run(&["sweep", "--t-min", "3", "--t-max", "10", "--verify"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "d,t,m,omega_m,lagr_elements,lagr_subgroups,de,de_orbits,fm,ht_class");
    assert_eq!(lines.len() - 1, 52);
    let cells: Vec<(i64, i64)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<i64> = l.split(',').take(2).map(|x| x.parse().unwrap()).collect();
            (f[1], f[0])
        })
        .collect();
    let mut sorted = cells.clone();
    sorted.sort();
    assert_eq!(cells, sorted);
}

#[test]
fn empty_range_has_no_rows() {
    let out = run(&["sweep", "--t-min", "10", "--t-max", "3", "--jsonl"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, ""));
    let out = run(&["sweep", "--t-min", "10", "--t-max", "3", "--json"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "[]\n"));
    let out = run(&["sweep", "--t-min", "10", "--t-max", "3"]);
    assert_eq!(out.stdout.lines().count(), 1);
}

#[test]
fn sweep_formula_only_scales() {
    let out = run(&[
        "sweep", "--t-min", "510510", "--t-max", "510510", "--d-min", "510510", "--d-max", "510510",
        "--formula-only", "--jsonl",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let row: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(row["omega_m"], 7);
    assert_eq!(row["lagr_subgroups"], 128);
    assert_eq!(row["lagr_elements"], 92160 * 128);
    assert_eq!(row["fm"], Value::Null);
    assert_eq!(row["ht_class"], "NonJacobianPartnersExist");
}

#[test]
fn sweep_writes_to_file() {
    let path = std::env::temp_dir().join(format!("k3fm-sweep-{}.csv", std::process::id()));
    let out = run(&["sweep", "--t-min", "1", "--t-max", "4", "--out", path.to_str().unwrap()]);
    assert_eq!((out.code, out.stdout.as_str()), (0, ""));
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, run(&["sweep", "--t-min", "1", "--t-max", "4"]).stdout);
}

#[test]
fn explicit_group_generator() {
    // On A_{0,5} = (ℤ/5)², diag(2, 3) preserves q and squares to −id.
    let out = run(&["de", "--d", "0", "--t", "5", "--g-order", "4", "--g-gen", "2,0,0,3", "--json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["g_order"], 4);
    assert_eq!(v["de"], 2);
    assert_eq!(v["closed_form"], Value::Null);
    let bad = run(&["de", "--d", "0", "--t", "5", "--g-order", "4", "--g-gen", "2,0,0,2"]);
    assert_eq!(bad.code, 2);
}

#[test]
fn big_integers_render_as_strings() {
    let out = run(&["jac", "--t", "100000000000000000000", "--k", "3", "--index", "--json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["index"], "100000000000000000000");
    assert_eq!(v["k"], 3);
}
