use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sensorplace::synthetic::SyntheticField;
use sensorplace_cli::io::read_matrix;

struct Run {
    code: i32,
    stderr: String,
}

fn sensorplace(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_sensorplace"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let k = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[k].clone()).collect()
}

fn synthetic(dir: &Path, h: usize, w: usize) {
    let hs = h.to_string();
    let ws = w.to_string();
    let args = [
        "generate-synthetic",
        "--height",
        &hs,
        "--width",
        &ws,
        "--train",
        "60",
        "--test",
        "10",
        "--seed",
        "5",
    ];
    assert_eq!(sensorplace(dir, &args).code, 0);
}

const CIRCLE: &str = r#"
data = "train.csv"
sensors = 10
output = "out"
[grid]
kind = "image"
height = 32
width = 32
[basis]
kind = "svd"
r = 10
[optimizer]
kind = "gqr"
[constraint]
mode = "exact_n"
s = 4
[constraint.region]
shape = "circle"
center = [20.0, 5.0]
radius = 5.0
"#;

#[test]
fn circle_exact_four_flags_four_sensors() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 32, 32);
    write(dir.path(), "run.toml", CIRCLE);
    let run = sensorplace(dir.path(), &["--config", "run.toml", "fit"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = csv_rows(&dir.path().join("out/sensors.csv"));
    assert_eq!(
        rows[0],
        ["rank", "state_index", "x", "y", "in_constraint_region", "moved"]
    );
    assert_eq!(rows.len(), 11);
    let flagged = column(&rows, "in_constraint_region");
    assert_eq!(flagged.iter().filter(|f| *f == "1").count(), 4);
    // flagged sensors really are within radius 5 of (20, 5)
    for r in &rows[1..] {
        let (x, y): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        let inside = (x - 20.0).powi(2) + (y - 5.0).powi(2) <= 25.0;
        assert_eq!(inside, r[4] == "1");
    }
    let pivots = csv_rows(&dir.path().join("out/pivots.csv"));
    assert_eq!(pivots[0], ["rank", "step_norm"]);
    assert_eq!(pivots.len(), 1 + 32 * 32);
}

#[test]
fn box_with_zero_allowed_flags_nothing() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 32, 32);
    let cfg = CIRCLE.replace("exact_n", "max_n").replace("s = 4", "s = 0").replace(
        "shape = \"circle\"\ncenter = [20.0, 5.0]\nradius = 5.0",
        "shape = \"polygon\"\nvertices = [[5.0, 5.0], [25.0, 5.0], [25.0, 25.0], [5.0, 25.0]]",
    );
    write(dir.path(), "run.toml", &cfg);
    let run = sensorplace(dir.path(), &["--config", "run.toml", "fit"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = csv_rows(&dir.path().join("out/sensors.csv"));
    assert!(column(&rows, "in_constraint_region").iter().all(|f| f == "0"));
    for r in &rows[1..] {
        let (x, y): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(!(5.0..=25.0).contains(&x) || !(5.0..=25.0).contains(&y));
    }
}

#[test]
fn missing_data_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "run.toml", CIRCLE);
    let run = sensorplace(dir.path(), &["--config", "run.toml", "fit"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("cannot open"), "{}", run.stderr);
}

#[test]
fn rejected_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 32, 32);
    for bad in [
        CIRCLE.replace("sensors = 10", "sensors = 10\ncolour = \"red\""),
        CIRCLE.replace("radius = 5.0", "radius = -5.0"),
        CIRCLE.replace("height = 32", "height = 31"),
        CIRCLE.replace("shape = \"circle\"", "shape = \"triangle\""),
    ] {
        write(dir.path(), "run.toml", &bad);
        let run = sensorplace(dir.path(), &["--config", "run.toml", "fit"]);
        assert_eq!(run.code, 2, "{}", run.stderr);
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sensorplace(dir.path(), &["frobnicate"]).code, 2);
    assert_eq!(sensorplace(dir.path(), &["fit"]).code, 2);
    assert_eq!(sensorplace(dir.path(), &["landscape"]).code, 2);
}

#[test]
fn runtime_failures_exit_one_and_name_the_count() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 32, 32);
    let cfg = format!("test = \"test.csv\"\n{CIRCLE}");
    write(dir.path(), "run.toml", &cfg);
    let run = sensorplace(dir.path(), &["--config", "run.toml", "rmse-curve", "--p", "2,6,10"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("at p = 2"), "{}", run.stderr);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn generated_csv_reloads_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 6, 7);
    let field = SyntheticField::new(6, 7, 80, 0.95, 5).unwrap();
    let train = field.sample(60, 0.0, 6).unwrap();
    let test = field.sample(10, 0.0, 7).unwrap();
    assert_eq!(
        &read_matrix(&dir.path().join("train.csv"), false).unwrap(),
        train.data()
    );
    assert_eq!(&read_matrix(&dir.path().join("test.csv"), false).unwrap(), test.data());
}

const IDENTITY: &str = r#"
data = "train.csv"
test = "test.csv"
sensors = 9
[grid]
kind = "image"
height = 3
width = 3
[basis]
kind = "identity"
[optimizer]
kind = "qr"
"#;

#[test]
fn identity_basis_with_every_pixel_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 3, 3);
    write(dir.path(), "run.toml", IDENTITY);
    let run = sensorplace(
        dir.path(),
        &["--config", "run.toml", "reconstruct", "--method", "unregularized"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let got = read_matrix(&dir.path().join("reconstruction.csv"), false).unwrap();
    let want = read_matrix(&dir.path().join("test.csv"), false).unwrap();
    assert!(got.sub(&want).max_abs() < 1e-12);
    let rmse: f64 = fs::read_to_string(dir.path().join("rmse.txt"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(rmse < 1e-12);
}

#[test]
fn regularized_and_unregularized_differ_with_an_informative_prior() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 8, 8);
    let cfg = IDENTITY
        .replace("height = 3", "height = 8")
        .replace("width = 3", "width = 8")
        .replace("kind = \"identity\"", "kind = \"svd\"\nr = 12")
        .replace(
            "sensors = 9",
            "sensors = 12\nnoise = 0.5\n[prior]\nkind = \"decreasing\"",
        );
    write(dir.path(), "run.toml", &cfg);
    let mut outputs = Vec::new();
    for (method, out) in [("rls", "a"), ("unregularized", "b")] {
        let run = sensorplace(
            dir.path(),
            &[
                "--config",
                "run.toml",
                "--output",
                out,
                "reconstruct",
                "--method",
                method,
            ],
        );
        assert_eq!(run.code, 0, "{}", run.stderr);
        outputs.push(read_matrix(&dir.path().join(out).join("reconstruction.csv"), false).unwrap());
    }
    assert!(outputs[0].sub(&outputs[1]).max_abs() > 1e-6);
}

#[test]
fn undersampled_least_squares_warns() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 8, 8);
    let cfg = IDENTITY
        .replace("height = 3", "height = 8")
        .replace("width = 3", "width = 8")
        .replace("kind = \"identity\"", "kind = \"svd\"\nr = 12")
        .replace("sensors = 9", "sensors = 5");
    write(dir.path(), "run.toml", &cfg);
    let run = sensorplace(
        dir.path(),
        &["--config", "run.toml", "reconstruct", "--method", "unregularized"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stderr.contains("minimum-norm"), "{}", run.stderr);
    let quiet = sensorplace(
        dir.path(),
        &[
            "--quiet",
            "--config",
            "run.toml",
            "reconstruct",
            "--method",
            "unregularized",
        ],
    );
    assert!(quiet.stderr.is_empty());
}

#[test]
fn measurement_width_must_match_the_sensors() {
    let dir = tempfile::tempdir().unwrap();
    synthetic(dir.path(), 3, 3);
    write(dir.path(), "run.toml", IDENTITY);
    write(dir.path(), "y.csv", "1,2,3\n");
    let run = sensorplace(
        dir.path(),
        &["--config", "run.toml", "reconstruct", "--measurements", "y.csv"],
    );
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("measurement"), "{}", run.stderr);
}

const TWO_PIXELS: &str = r#"
data = "train.csv"
sensors = 1
noise = 0.2
[grid]
kind = "image"
height = 1
width = 2
[basis]
kind = "custom"
path = "modes.csv"
[optimizer]
kind = "qr"
"#;

#[test]
fn two_pixel_heatmap_by_hand() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "train.csv", "1,2\n3,4\n");
    write(dir.path(), "modes.csv", "1\n2\n");
    write(dir.path(), "run.toml", TWO_PIXELS);
    let run = sensorplace(
        dir.path(),
        &["--config", "run.toml", "heatmap", "--method", "unregularized"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = csv_rows(&dir.path().join("sigma.csv"));
    assert_eq!(rows[0], ["state_index", "sigma"]);
    let sigma: Vec<f64> = column(&rows, "sigma").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(sigma, [0.1, 0.2]);
    let pgm = fs::read(dir.path().join("sigma.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n#"));
    assert_eq!(&pgm[pgm.len() - 4..], &[0, 0, 0xff, 0xff]);

    // doubling the noise doubles every sigma
    write(
        dir.path(),
        "run.toml",
        &TWO_PIXELS.replace("noise = 0.2", "noise = 0.4"),
    );
    sensorplace(
        dir.path(),
        &["--config", "run.toml", "heatmap", "--method", "unregularized"],
    );
    let doubled: Vec<f64> = column(&csv_rows(&dir.path().join("sigma.csv")), "sigma")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(doubled, [0.2, 0.4]);
}

#[test]
fn constant_heatmap_is_all_zero_pixels() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "train.csv", "1,2\n3,4\n");
    write(dir.path(), "modes.csv", "1\n1\n");
    write(dir.path(), "run.toml", TWO_PIXELS);
    assert_eq!(sensorplace(dir.path(), &["--config", "run.toml", "heatmap"]).code, 0);
    let pgm = fs::read(dir.path().join("sigma.pgm")).unwrap();
    assert_eq!(&pgm[pgm.len() - 4..], &[0, 0, 0, 0]);
}

#[test]
fn point_clouds_get_csv_only() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "train.csv", "1,2,0\n3,4,1\n0,1,5\n");
    write(
        dir.path(),
        "coords.csv",
        "X (m),Y (m),T\n0.0,0.0,1\n1.5,0.0,2\n0.0,2.5,3\n",
    );
    let cfg = r#"
data = "train.csv"
sensors = 2
[grid]
kind = "points"
path = "coords.csv"
x = "X (m)"
y = "Y (m)"
[basis]
kind = "svd"
r = 2
[optimizer]
kind = "qr"
"#;
    write(dir.path(), "run.toml", cfg);
    let run = sensorplace(dir.path(), &["--config", "run.toml", "heatmap"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(dir.path().join("sigma.csv").exists());
    assert!(!dir.path().join("sigma.pgm").exists());
    assert!(run.stderr.contains("point-cloud"), "{}", run.stderr);
    assert_eq!(sensorplace(dir.path(), &["--config", "run.toml", "fit"]).code, 0);
    let rows = csv_rows(&dir.path().join("sensors.csv"));
    let x: Vec<f64> = column(&rows, "x").iter().map(|s| s.parse().unwrap()).collect();
    assert!(x.iter().all(|v| [0.0, 1.5].contains(v)));
}

#[test]
fn landscapes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "train.csv", "1,2,3,4\n");
    write(dir.path(), "modes.csv", "1,0\n0,0\n2,1\n0.5,-1\n");
    let cfg = TWO_PIXELS
        .replace("width = 2", "width = 4")
        .replace("noise = 0.2", "noise = 0.7\n[prior]\nkind = \"flat\"\nscale = 2.0")
        .replace("sensors = 1", "sensors = 2");
    write(dir.path(), "run.toml", &cfg);

    let run = sensorplace(dir.path(), &["--config", "run.toml", "landscape", "--kind", "one"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let one = column(&csv_rows(&dir.path().join("landscape.csv")), "energy");
    assert_eq!(one[1].parse::<f64>().unwrap(), 0.0);
    assert!(one.iter().all(|v| v.parse::<f64>().unwrap() <= 0.0));
    assert!(dir.path().join("landscape.pgm").exists());

    assert_eq!(
        sensorplace(dir.path(), &["--config", "run.toml", "landscape", "--kind", "two"]).code,
        2
    );

    let two = |r: &str| -> Vec<f64> {
        let run = sensorplace(
            dir.path(),
            &["--config", "run.toml", "landscape", "--kind", "two", "--ref", r],
        );
        assert_eq!(run.code, 0, "{}", run.stderr);
        column(&csv_rows(&dir.path().join("landscape.csv")), "energy")
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    };
    let both = two("0,3");
    let (a, b) = (two("0"), two("3"));
    for i in 0..4 {
        assert!((both[i] - a[i] - b[i]).abs() < 1e-12);
    }
    // `selected` uses the fitted sensors
    assert_eq!(sensorplace(dir.path(), &["--config", "run.toml", "fit"]).code, 0);
    let picks = column(&csv_rows(&dir.path().join("sensors.csv")), "state_index").join(",");
    assert_eq!(two("selected"), two(&picks));
}

#[test]
fn rmse_curve_in_span_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    // every snapshot is a combination of two fixed patterns
    let pattern = |k: usize| -> String {
        (0..9)
            .map(|i| ((i as f64 + 1.0) * (k as f64 + 1.0)).sin().to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let (p1, p2): (Vec<f64>, Vec<f64>) = (
        pattern(0).split(',').map(|s| s.parse().unwrap()).collect(),
        pattern(1).split(',').map(|s| s.parse().unwrap()).collect(),
    );
    let mix = |a: f64, b: f64| {
        p1.iter()
            .zip(&p2)
            .map(|(x, y)| (a * x + b * y).to_string())
            .collect::<Vec<_>>()
    };
    let train: Vec<String> = (0..6)
        .map(|k| mix(k as f64 - 2.0, 1.0 + 0.5 * k as f64).join(","))
        .collect();
    let test: Vec<String> = (0..4).map(|k| mix(0.3 * k as f64, 2.0 - k as f64).join(",")).collect();
    write(dir.path(), "train.csv", &(train.join("\n") + "\n"));
    write(dir.path(), "test.csv", &(test.join("\n") + "\n"));
    let cfg = IDENTITY
        .replace("kind = \"identity\"", "kind = \"svd\"\nr = 2")
        .replace("sensors = 9", "sensors = 2");
    write(dir.path(), "run.toml", &cfg);
    let run = sensorplace(dir.path(), &["--config", "run.toml", "rmse-curve", "--p-range", "1:2"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = csv_rows(&dir.path().join("rmse_curve.csv"));
    assert_eq!(rows[0], ["p", "rmse_ls", "rmse_rls"]);
    assert_eq!(column(&rows, "p"), ["1", "2"]);
    let ls: f64 = rows[2][1].parse().unwrap();
    assert!(ls <= 1e-8, "{ls}");
    assert!(rows[1][2].parse::<f64>().unwrap().is_finite());
}
