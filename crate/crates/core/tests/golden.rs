//! The checked-in example under `golden/` must stay reproducible.

use std::path::PathBuf;
use std::process::Command;

use stl_synth::encoder::{encode, EncodedProblem, EncoderConfig, Encoding};
use stl_synth::parser::{load_regions, parse, SpecSource};
use stl_synth::solver::{export_lp, import_solution, solve, BnBOptions, SolveStatus};
use stl_synth::system::LinearSystem;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(golden(name)).unwrap()
}

fn problem() -> EncodedProblem {
    let regions = load_regions(&read("regions.json")).unwrap();
    let f = parse(&SpecSource::new(read("spec.stl").trim(), regions)).unwrap();
    let cfg = EncoderConfig::new(Encoding::Proposed).flatten(true);
    encode(&f, &LinearSystem::double_integrator(), &[0.5, 0.5, 0.0, 0.0], 3, &cfg).unwrap()
}

#[test]
fn model_file_is_byte_identical() {
    assert_eq!(export_lp(&problem().model), read("model.lp"));
}

#[test]
fn checked_in_solution_verifies() {
    let p = problem();
    let r = import_solution(&p, &read("solution.txt")).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.rho.unwrap() - 0.5).abs() <= 1e-9);
    assert!(r.oracle_robustness.unwrap() >= r.rho.unwrap() - 1e-6);
}

#[test]
fn solver_reaches_the_same_optimum() {
    let r = solve(&problem(), &BnBOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective.unwrap() + 0.5).abs() <= 1e-6);
}

#[test]
fn cli_regenerates_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let (lp, sol, out) = (dir.path().join("m.lp"), dir.path().join("s.txt"), dir.path().join("r.json"));
    let status = Command::new(env!("CARGO_BIN_EXE_stl-synth"))
        .args(["solve", "--horizon", "3", "--x0", "0.5,0.5,0,0", "--flatten", "--spec"])
        .arg(golden("spec.stl"))
        .arg("--regions")
        .arg(golden("regions.json"))
        .arg("--export")
        .arg(&lp)
        .arg("--write-solution")
        .arg(&sol)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&lp).unwrap(), read("model.lp"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["status"], "optimal");

    // the written solution goes back in through --solution
    let status = Command::new(env!("CARGO_BIN_EXE_stl-synth"))
        .args(["solve", "--horizon", "3", "--x0", "0.5,0.5,0,0", "--flatten", "--spec"])
        .arg(golden("spec.stl"))
        .arg("--regions")
        .arg(golden("regions.json"))
        .arg("--solution")
        .arg(&sol)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
}
