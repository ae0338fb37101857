//! End-to-end checks of the command-line surface through `cli::run`.

use fexpo::cli::run;
use std::fs;
use std::path::PathBuf;

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fexpo-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn exponent_command_on_dsl_file() {
    let dir = workdir("exp");
    let graph = dir.join("path.wg");
    fs::write(&graph, "# weighted path graph\nv 1 1\nv 2 1\ne 1 2 1\n").unwrap();
    let code = run([
        "fexpo",
        "exponent",
        "--graph",
        graph.to_str().unwrap(),
        "--alpha",
        "4H-1",
        "--h",
        "0.6",
    ]);
    assert_eq!(code, 0);
    // invalid H rejected with a usage error
    let code = run([
        "fexpo",
        "exponent",
        "--graph",
        graph.to_str().unwrap(),
        "--h",
        "0.9",
    ]);
    assert_eq!(code, 1);
    // malformed graph file rejected
    let bad = dir.join("bad.wg");
    fs::write(&bad, "v 1 0\nv 1 0\n").unwrap();
    let code = run(["fexpo", "exponent", "--graph", bad.to_str().unwrap(), "--h", "0.6"]);
    assert_eq!(code, 1);
}

#[test]
fn rewrite_and_beta_slope_commands() {
    let dir = workdir("rw");
    let graph = dir.join("single.wg");
    fs::write(&graph, "v 1 1\n").unwrap();
    assert_eq!(
        run([
            "fexpo",
            "rewrite",
            "--graph",
            graph.to_str().unwrap(),
            "--alpha",
            "0",
        ]),
        0
    );
    assert_eq!(
        run([
            "fexpo",
            "rewrite",
            "--graph",
            graph.to_str().unwrap(),
            "--op",
            "ibp",
            "--target",
            "1",
        ]),
        0
    );

    let tree = dir.join("tree.wg");
    fs::write(&tree, "v 1 0\nv 2 0\ne 1 2 1\n").unwrap();
    let csv = dir.join("slope.csv");
    let code = run([
        "fexpo",
        "--no-timestamp",
        "beta-slope",
        "--graph",
        tree.to_str().unwrap(),
        "--h",
        "0.6",
        "--nmin",
        "64",
        "--nmax",
        "512",
        "--t",
        "1.0",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let body = fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("n,value\n"), "{body}");
    assert_eq!(body.lines().count(), 5); // header + 4 grid sizes
}

#[test]
fn simulate_expand_compare_pipeline() {
    let dir = workdir("pipe");
    let samples = dir.join("qv.csv");
    let code = run([
        "fexpo",
        "--no-timestamp",
        "simulate-fou",
        "--h",
        "0.6",
        "--n",
        "64",
        "--paths",
        "2000",
        "--substeps",
        "2",
        "--seed",
        "5",
        "--method",
        "circulant",
        "--out",
        samples.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let body = fs::read_to_string(&samples).unwrap();
    assert!(body.starts_with("path_id,v_n,z_n\n"));
    assert_eq!(body.lines().count(), 2001);

    // identical invocations are byte-identical without the timestamp line
    let samples2 = dir.join("qv2.csv");
    run([
        "fexpo",
        "--no-timestamp",
        "simulate-fou",
        "--h",
        "0.6",
        "--n",
        "64",
        "--paths",
        "2000",
        "--substeps",
        "2",
        "--seed",
        "5",
        "--method",
        "circulant",
        "--out",
        samples2.to_str().unwrap(),
    ]);
    assert_eq!(body, fs::read_to_string(&samples2).unwrap());

    // expansion density table
    let dens = dir.join("dens.csv");
    let code = run([
        "fexpo",
        "--no-timestamp",
        "expand-fou",
        "--h",
        "0.6",
        "--n",
        "64",
        "--points",
        "11",
        "--out",
        dens.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(fs::read_to_string(&dens).unwrap().lines().count(), 12);

    // compare consumes the z_n column? it reads the first column, so feed a
    // single-column file of z values
    let zfile = dir.join("z.csv");
    let zcol: String = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&zfile, zcol).unwrap();
    let code = run([
        "fexpo",
        "compare",
        "--samples",
        zfile.to_str().unwrap(),
        "--h",
        "0.6",
        "--n",
        "64",
        "--bootstrap",
        "50",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn regression_and_chaos_check_exit_codes() {
    assert_eq!(run(["fexpo", "regression"]), 0);
    assert_eq!(run(["fexpo", "chaos-check", "--trials", "25", "--seed", "3"]), 0);
}
