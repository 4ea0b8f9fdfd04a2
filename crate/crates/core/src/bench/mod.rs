//! Benchmark scenarios and the encode/solve sweep over them.

mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use plot::{plot_trajectory, render_svg};

use crate::encoder::{encode, EncodedProblem, EncoderConfig, Encoding};
use crate::formula::Formula;
use crate::parser::{parse, region_map, RegionDef, SpecSource};
use crate::solver::{export_lp, solve, BnBOptions};
use crate::system::LinearSystem;

const BUILTIN_SCENARIOS: &str = include_str!("../../scenarios/builtin.json");

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("scenario file: {0}")]
    Scenario(String),
    #[error("scenario {scenario} needs a horizon of at least {min}, got {horizon}")]
    HorizonTooShort { scenario: String, min: usize, horizon: usize },
    #[error("bad placeholder `{0}` in spec template")]
    Placeholder(String),
    #[error(transparent)]
    Parse(#[from] crate::parser::ParseError),
    #[error(transparent)]
    Region(#[from] crate::parser::RegionError),
    #[error(transparent)]
    Encode(#[from] crate::encoder::EncodeError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Binary counts reported for a horizon as `(standard, proposed)`.
pub type PublishedCounts = BTreeMap<usize, (usize, usize)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub regions: Vec<RegionDef>,
    /// Specification with `{T}` / `{T-k}` placeholders for the horizon.
    pub spec: String,
    #[serde(default = "LinearSystem::double_integrator", skip_serializing)]
    pub system: LinearSystem,
    pub x0: Vec<f64>,
    #[serde(default)]
    pub q_diag: Vec<f64>,
    #[serde(default)]
    pub r_diag: Vec<f64>,
    pub horizons: Vec<usize>,
    #[serde(default)]
    pub min_horizon: usize,
    #[serde(default)]
    pub flatten: bool,
    #[serde(default)]
    pub published_counts: PublishedCounts,
}

#[derive(Deserialize)]
struct ScenarioFile {
    scenarios: Vec<Scenario>,
}

/// Replaces `{T}`, `{T-k}` and `{T+k}` with numbers.
pub fn instantiate_template(template: &str, horizon: usize) -> Result<String, BenchError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| BenchError::Placeholder(rest[open..].to_string()))?
            + open;
        let inner: String = rest[open + 1..close].chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || BenchError::Placeholder(inner.clone());
        let value = match inner.strip_prefix('T') {
            Some("") => horizon as i64,
            Some(off) => {
                let (sign, num) = off.split_at(1);
                let k: i64 = num.parse().map_err(|_| bad())?;
                match sign {
                    "-" => horizon as i64 - k,
                    "+" => horizon as i64 + k,
                    _ => return Err(bad()),
                }
            }
            None => return Err(bad()),
        };
        if value < 0 {
            return Err(bad());
        }
        out.push_str(&value.to_string());
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl Scenario {
    pub fn spec_text(&self, horizon: usize) -> Result<String, BenchError> {
        if horizon < self.min_horizon {
            return Err(BenchError::HorizonTooShort {
                scenario: self.name.clone(),
                min: self.min_horizon,
                horizon,
            });
        }
        instantiate_template(&self.spec, horizon)
    }

    pub fn formula(&self, horizon: usize) -> Result<Formula, BenchError> {
        let src = SpecSource::new(self.spec_text(horizon)?, region_map(self.regions.clone())?);
        Ok(parse(&src)?)
    }

    pub fn encoder_config(&self, encoding: Encoding) -> EncoderConfig {
        EncoderConfig {
            encoding,
            flatten: self.flatten,
            q_diag: self.q_diag.clone(),
            r_diag: self.r_diag.clone(),
            ..EncoderConfig::default()
        }
    }

    pub fn encode(&self, horizon: usize, encoding: Encoding) -> Result<EncodedProblem, BenchError> {
        let f = self.formula(horizon)?;
        Ok(encode(&f, &self.system, &self.x0, horizon, &self.encoder_config(encoding))?)
    }

    /// Checks that the spec parses and `x0` respects the state box.
    pub fn validate(&self) -> Result<(), BenchError> {
        let horizon = self.horizons.iter().copied().max().unwrap_or(self.min_horizon.max(1));
        self.formula(horizon)?;
        let inside = self.x0.len() == self.system.n()
            && self
                .x0
                .iter()
                .zip(&self.system.x_bounds)
                .all(|(&v, &(lo, hi))| (lo..=hi).contains(&v));
        if !inside {
            return Err(BenchError::Scenario(format!("{}: x0 outside the state box", self.name)));
        }
        Ok(())
    }
}

/// All scenarios shipped with the crate, in file order.
pub fn builtin_suite() -> Vec<Scenario> {
    let file: ScenarioFile = serde_json::from_str(BUILTIN_SCENARIOS).expect("bundled scenario file is valid");
    file.scenarios
}

pub fn load_suite(json: &str) -> Result<Vec<Scenario>, BenchError> {
    let file: ScenarioFile = serde_json::from_str(json).map_err(|e| BenchError::Scenario(e.to_string()))?;
    for s in &file.scenarios {
        s.validate()?;
    }
    Ok(file.scenarios)
}

fn named(name: &str) -> Scenario {
    builtin_suite()
        .into_iter()
        .find(|s| s.name == name)
        .expect("bundled scenario present")
}

/// Visit one of two targets for six samples, avoid one obstacle, reach a goal.
pub fn scenario_two_target() -> Scenario {
    named("two_target")
}

/// Reach one of two goals through gaps between four obstacles.
pub fn scenario_narrow_passage() -> Scenario {
    named("narrow_passage")
}

/// Visit one target out of each of five pairs while avoiding an obstacle.
pub fn scenario_many_target() -> Scenario {
    named("many_target")
}

/// Collect two keys before crossing their doors, then reach the goal.
pub fn scenario_door_puzzle() -> Scenario {
    named("door_puzzle")
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverChoice {
    /// Encode only.
    CountsOnly,
    /// Solve with the built-in branch-and-bound.
    Internal(BnBOptions),
    /// Write one LP file per record into the directory.
    LpFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub scenario: String,
    pub horizon: usize,
    pub encoding: Encoding,
    pub binary_count: usize,
    pub continuous_count: usize,
    pub constraint_count: usize,
    pub published_binary_count: Option<usize>,
    pub status: String,
    pub objective: Option<f64>,
    pub rho: Option<f64>,
    pub solve_time_ms: Option<f64>,
    pub node_count: Option<usize>,
}

const CSV_HEADER: [&str; 12] = [
    "scenario",
    "horizon",
    "encoding",
    "binary_count",
    "continuous_count",
    "constraint_count",
    "published_binary_count",
    "status",
    "objective",
    "rho",
    "solve_time_ms",
    "node_count",
];

fn run_one(scenario: &Scenario, horizon: usize, encoding: Encoding, choice: &SolverChoice) -> BenchRecord {
    let published = scenario.published_counts.get(&horizon).map(|&(std, ours)| match encoding {
        Encoding::Standard => std,
        Encoding::Proposed => ours,
    });
    let mut rec = BenchRecord {
        scenario: scenario.name.clone(),
        horizon,
        encoding,
        binary_count: 0,
        continuous_count: 0,
        constraint_count: 0,
        published_binary_count: published,
        status: String::new(),
        objective: None,
        rho: None,
        solve_time_ms: None,
        node_count: None,
    };
    let problem = match scenario.encode(horizon, encoding) {
        Ok(p) => p,
        Err(e) => {
            rec.status = format!("error: {e}");
            return rec;
        }
    };
    rec.binary_count = problem.stats.binary_count;
    rec.continuous_count = problem.stats.continuous_count;
    rec.constraint_count = problem.stats.constraint_count;
    rec.status = match choice {
        SolverChoice::CountsOnly => "encoded".into(),
        SolverChoice::Internal(opts) => {
            let start = Instant::now();
            let res = solve(&problem, opts);
            rec.solve_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            match res {
                Ok(r) => {
                    rec.objective = r.objective;
                    rec.rho = r.rho;
                    rec.node_count = Some(r.nodes);
                    r.status.as_str().to_string()
                }
                Err(e) => format!("error: {e}"),
            }
        }
        SolverChoice::LpFile(dir) => {
            let path = dir.join(format!("{}_T{}_{}.lp", scenario.name, horizon, encoding));
            match std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, export_lp(&problem.model))) {
                Ok(()) => "exported".into(),
                Err(e) => format!("error: {e}"),
            }
        }
    };
    rec
}

/// Encodes (and optionally solves) every combination. Horizons default to
/// each scenario's own list when `horizons` is empty. Failures are recorded,
/// never propagated. Records come back sorted.
pub fn run_benchmarks(
    scenarios: &[Scenario],
    encodings: &[Encoding],
    horizons: &[usize],
    choice: &SolverChoice,
) -> Vec<BenchRecord> {
    let mut records = Vec::new();
    for s in scenarios {
        let hs = if horizons.is_empty() { &s.horizons[..] } else { horizons };
        for &h in hs {
            for &e in encodings {
                records.push(run_one(s, h, e, choice));
            }
        }
    }
    records.sort_by(|a, b| {
        (&a.scenario, a.horizon, a.encoding as u8).cmp(&(&b.scenario, b.horizon, b.encoding as u8))
    });
    records
}

pub fn write_csv(records: &[BenchRecord], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(records: &[BenchRecord], path: &Path) -> Result<(), BenchError> {
    std::fs::write(path, serde_json::to_string_pretty(records)? + "\n")?;
    Ok(())
}
