use std::path::Path;
use std::process::{Command, Output};

fn imexrelax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imexrelax")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const VDP: &str = "\
[model]
name = vdp
eps = 1e-3
[scheme]
name = ssp2-332
[grid]
sizes = 50, 100, 200
[time]
dt = steps
t_end = 0.5
[output]
path = out/vdp.csv
norm = linf
";

#[test]
fn run_writes_csv_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "vdp.ini", VDP);
    let out = imexrelax(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/vdp.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "model,scheme,eps,N,dt,component,norm,error,order,flag,seconds");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().all(|r| r.starts_with("vdp,ssp2-332,1.000000e-3,")));
    assert!(rows.iter().any(|r| r.split(',').nth(8).is_some_and(|o| !o.is_empty())));

    // Same input, same bytes.
    let again = imexrelax(&["run", &cfg, "--stdout"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), csv);
}

#[test]
fn aborted_cell_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "heat.ini",
        "[model]\nname = diffusive2x2\neps = 1e-6\npenalized = false\n\
         [scheme]\nname = ssp2-332\n[grid]\nsizes = 64, 128\n\
         [time]\ndt = hyperbolic\nc = 0.25\nt_end = 4\n[output]\nnorm = linf\n",
    );
    let out = imexrelax(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains(",aborted,"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.ini", &VDP.replace("name = vdp", "name = boltzmann"));
    assert_eq!(imexrelax(&["run", &bad]).status.code(), Some(1));
    let missing = dir.path().join("missing.ini");
    assert_eq!(imexrelax(&["run", missing.to_str().unwrap()]).status.code(), Some(1));
    let unknown_key = write(dir.path(), "key.ini", &VDP.replace("[grid]", "[grid]\nspacing = 3"));
    assert_eq!(imexrelax(&["run", &unknown_key]).status.code(), Some(1));
}

#[test]
fn tableau_check_reports_order() {
    let registry = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/registry/schemes.txt");
    let out = imexrelax(&["tableau", "check", registry, "imex-euler"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("order: 1"), "{text}");
    assert!(text.lines().any(|l| l == "stiffly accurate: true"), "{text}");

    let out = imexrelax(&["tableau", "check", registry, "ssp2-332"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("order: 2"));
    assert_eq!(imexrelax(&["tableau", "check", registry, "nope"]).status.code(), Some(1));
}

#[test]
fn list_models_names_every_model() {
    let text = String::from_utf8(imexrelax(&["list-models"]).stdout).unwrap();
    for m in ["r13", "diffusive2x2", "klf", "broadwell", "vdp"] {
        assert!(text.lines().any(|l| l.starts_with(m)), "{m} missing");
    }
}
