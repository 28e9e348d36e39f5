//! The acceptance suite: thirteen named scenarios, each reduced to one or
//! more numeric checks with an explicit threshold and margin.

use std::collections::BTreeMap;
use std::time::Instant;

use collapse_core::collapse_engine::{
    born_rule_experiment, checkpoint_means, fokker_planck_2ch, matched_kappa, run_ensemble, slip_transfer, Cell,
    CellEnsemble, ChannelSpec, CollapseScenario, FpGrid, SlipParams, TimescaleParams, QUOTED_ESTIMATE_SECONDS,
};
use collapse_core::front_solver::front_position;
use collapse_core::incoherence::INCOHERENCE_BOUND;
use collapse_core::quantum_lattice::{build_indexed_generator, check_directed_flow, non_self_adjointness_witness, LatticeModel};
use collapse_core::rng::{substream, substream_seed};
use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_config_value, Block, TimescaleBlock};
use crate::output::{num, Artifact, Table};
use crate::scenarios::{self, born_table, covariance_table, run_tables, timescale_rows};
use crate::LabError;

pub const ACCEPTANCE_SEED: u64 = 0x5eed_2024;

/// Criteria that are implemented as stated but cannot be met by the model;
/// they are still reported as failures.
pub const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    3,
    "a logistic front relaxes to 1 with decay length ≈ λ, so f₁ one mean free path behind the half-way point sits near 0.75",
)];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    Below { limit: f64 },
    AtMost { limit: f64 },
    Above { limit: f64 },
    Within { low: f64, high: f64 },
}

impl Bound {
    /// Signed distance to the nearest limit; non-negative means satisfied
    /// (strictly positive for the strict bounds).
    pub fn margin(self, x: f64) -> f64 {
        match self {
            Bound::Below { limit } | Bound::AtMost { limit } => limit - x,
            Bound::Above { limit } => x - limit,
            Bound::Within { low, high } => (x - low).min(high - x),
        }
    }

    pub fn holds(self, x: f64) -> bool {
        let m = self.margin(x);
        match self {
            Bound::Below { .. } | Bound::Above { .. } => m > 0.0,
            Bound::AtMost { .. } | Bound::Within { .. } => m >= 0.0,
        }
    }

    fn describe(self) -> String {
        match self {
            Bound::Below { limit } => format!("< {}", short(limit)),
            Bound::AtMost { limit } => format!("≤ {}", short(limit)),
            Bound::Above { limit } => format!("> {}", short(limit)),
            Bound::Within { low, high } => format!("in [{}, {}]", short(low), short(high)),
        }
    }
}

fn short(x: f64) -> String {
    if x == 0.0 || (1e-3..1e4).contains(&x.abs()) {
        format!("{}", (x * 1e6).round() / 1e6)
    } else {
        format!("{x:.3e}")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub bound: Bound,
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Check { label: label.into(), measured, bound, margin: bound.margin(measured), passed: bound.holds(measured) }
    }

    fn describe(&self) -> String {
        format!("{} = {} {}", self.label, short(self.measured), self.bound.describe())
    }
}

/// What a criterion produces before timing is attached.
#[derive(Default)]
pub struct Measurement {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub id: u32,
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub elapsed_seconds: f64,
    pub budget_seconds: Option<f64>,
    pub within_budget: bool,
    pub known_unattainable: Option<&'static str>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

impl Verdict {
    /// Smallest margin over all checks.
    pub fn margin(&self) -> f64 {
        self.checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let checks: Vec<String> = self.checks.iter().map(Check::describe).collect();
        let budget = match self.budget_seconds {
            Some(b) => format!("{:.2} s / {b} s", self.elapsed_seconds),
            None => format!("{:.2} s", self.elapsed_seconds),
        };
        let mut line = format!(
            "{status} {:>2} {:<18} {}  margin {}  [{budget}]",
            self.id,
            self.name,
            checks.join("; "),
            short(self.margin())
        );
        if !self.within_budget {
            line.push_str("  OVER BUDGET");
        }
        if let (false, Some(why)) = (self.passed, self.known_unattainable) {
            line.push_str(&format!("  (known unattainable: {why})"));
        }
        line
    }
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub budget_seconds: Option<f64>,
    run: fn(u64) -> Result<Measurement, LabError>,
}

pub static CRITERIA: [Criterion; 13] = [
    Criterion { id: 1, name: "equivalence", budget_seconds: Some(60.0), run: equivalence },
    Criterion { id: 2, name: "directed-flow", budget_seconds: Some(10.0), run: directed_flow },
    Criterion { id: 3, name: "front-profile", budget_seconds: Some(30.0), run: front_profile },
    Criterion { id: 4, name: "front-speed", budget_seconds: Some(120.0), run: front_speed },
    Criterion { id: 5, name: "semicircle", budget_seconds: Some(30.0), run: semicircle },
    Criterion { id: 6, name: "incoherence-bound", budget_seconds: Some(120.0), run: incoherence_bound },
    Criterion { id: 7, name: "slip-identity", budget_seconds: Some(10.0), run: slip_identity },
    Criterion { id: 8, name: "covariance", budget_seconds: Some(60.0), run: covariance },
    Criterion { id: 9, name: "martingale", budget_seconds: Some(300.0), run: martingale },
    Criterion { id: 10, name: "born-rule", budget_seconds: Some(600.0), run: born_rule },
    Criterion { id: 11, name: "fp-mc", budget_seconds: Some(60.0), run: fp_mc },
    Criterion { id: 12, name: "timescale", budget_seconds: Some(1.0), run: timescale },
    Criterion { id: 13, name: "determinism", budget_seconds: None, run: |_| unreachable!("handled by the suite") },
];

const DETERMINISM: u32 = 13;

/// Resolves `--only` arguments: a criterion name or its number.
pub fn select(only: Option<&str>) -> Result<Vec<&'static Criterion>, LabError> {
    let Some(key) = only else { return Ok(CRITERIA.iter().collect()) };
    let key = key.trim();
    CRITERIA
        .iter()
        .find(|c| c.name == key || c.id.to_string() == key)
        .map(|c| vec![c])
        .ok_or_else(|| {
            let names: Vec<_> = CRITERIA.iter().map(|c| c.name).collect();
            LabError::Validation(vec![format!("unknown criterion `{key}` (expected a number 1-13 or one of {})", names.join(", "))])
        })
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// Failures outside the known-unattainable list.
    pub fn unexpected_failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passed && v.known_unattainable.is_none()).collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }
}

fn criterion_seed(seed: u64, id: u32) -> u64 {
    substream_seed(seed, u64::from(id), 0)
}

fn evaluate(c: &Criterion, seed: u64) -> Verdict {
    let started = Instant::now();
    let result = (c.run)(criterion_seed(seed, c.id));
    finish(c, result, started.elapsed().as_secs_f64())
}

fn finish(c: &Criterion, result: Result<Measurement, LabError>, elapsed: f64) -> Verdict {
    let m = result.unwrap_or_else(|e| Measurement { notes: vec![format!("error: {e}")], ..Default::default() });
    let within_budget = c.budget_seconds.map_or(true, |b| elapsed < b);
    let passed = !m.checks.is_empty() && m.checks.iter().all(|k| k.passed) && within_budget;
    Verdict {
        id: c.id,
        name: c.name,
        checks: m.checks,
        passed,
        elapsed_seconds: elapsed,
        budget_seconds: c.budget_seconds,
        within_budget,
        known_unattainable: KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == c.id).map(|(_, why)| *why),
        notes: m.notes,
        artifacts: m.artifacts,
    }
}

/// Runs the selected criteria, calling `progress` after each one.
pub fn run_suite(only: Option<&str>, mut progress: impl FnMut(&Verdict)) -> Result<Report, LabError> {
    let selected = select(only)?;
    let mut verdicts = Vec::new();
    let mut first_pass: BTreeMap<u32, Vec<Artifact>> = BTreeMap::new();
    for c in &selected {
        if c.id == DETERMINISM {
            continue;
        }
        let v = evaluate(c, ACCEPTANCE_SEED);
        progress(&v);
        first_pass.insert(c.id, v.artifacts.clone());
        verdicts.push(v);
    }
    if selected.iter().any(|c| c.id == DETERMINISM) {
        let c = &CRITERIA[DETERMINISM as usize - 1];
        let started = Instant::now();
        let m = determinism(&mut first_pass);
        let v = finish(c, Ok(m), started.elapsed().as_secs_f64());
        progress(&v);
        verdicts.push(v);
    }
    Ok(Report { seed: ACCEPTANCE_SEED, verdicts })
}

fn csv_bytes(artifacts: &[Artifact]) -> Vec<(&str, &[u8])> {
    artifacts.iter().filter(|a| a.name.ends_with(".csv")).map(|a| (a.name.as_str(), a.bytes.as_slice())).collect()
}

fn determinism(first_pass: &mut BTreeMap<u32, Vec<Artifact>>) -> Measurement {
    let mut compared = 0usize;
    let mut differing = Vec::new();
    for c in CRITERIA.iter().filter(|c| c.id != DETERMINISM) {
        let seed = criterion_seed(ACCEPTANCE_SEED, c.id);
        let first = match first_pass.remove(&c.id) {
            Some(a) => Ok(a),
            None => (c.run)(seed).map(|m| m.artifacts),
        };
        let second = (c.run)(seed).map(|m| m.artifacts);
        match (first, second) {
            (Ok(a), Ok(b)) => {
                let (a, b) = (csv_bytes(&a), csv_bytes(&b));
                if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.0 != y.0) {
                    differing.push(format!("{}: different file sets", c.name));
                }
                for ((name, x), (_, y)) in a.iter().zip(&b) {
                    compared += 1;
                    if x != y {
                        differing.push(format!("{}/{name}", c.name));
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => differing.push(format!("{}: {e}", c.name)),
        }
    }
    let mut notes = vec![format!("{compared} CSV files compared across two runs")];
    notes.extend(differing.iter().map(|d| format!("differs: {d}")));
    Measurement {
        checks: vec![
            Check::new("differing files", differing.len() as f64, Bound::AtMost { limit: 0.0 }),
            Check::new("files compared", compared as f64, Bound::Above { limit: 0.0 }),
        ],
        notes,
        artifacts: Vec::new(),
    }
}

fn scenario(value: Value) -> Result<crate::ScenarioConfig, LabError> {
    parse_config_value(value)
}

fn equivalence(_seed: u64) -> Result<Measurement, LabError> {
    let cfg = scenario(json!({
        "kind": "exact",
        "exact": { "n_sites": 5, "n_atoms": 3, "t_final": 10.0, "tolerance": 1e-11 }
    }))?;
    let out = scenarios::run_scenario(&cfg)?;
    let worst = out.summary["max_norm_diff"].as_f64().unwrap_or(f64::NAN);
    let checkpoints = out.summary["checkpoints"].as_u64().unwrap_or(0) as f64;
    Ok(Measurement {
        checks: vec![
            Check::new("max ‖ψ″−ψ‖", worst, Bound::Below { limit: 1e-8 }),
            Check::new("checkpoints", checkpoints, Bound::Within { low: 20.0, high: 20.0 }),
        ],
        notes: vec![format!("indexed dimension {}", out.summary["indexed_dimension"])],
        artifacts: out.artifacts,
    })
}

fn directed_flow(seed: u64) -> Result<Measurement, LabError> {
    let mut rng = substream(seed, 0, 0);
    let mut table = Table::new(["model", "n_sites", "n_atoms", "u", "v", "directed", "witness_gap"]);
    let (mut undirected, mut missing, mut with_contact) = (0u32, 0u32, 0u32);
    for k in 0..50 {
        let n_sites = rng.random_range(2..=5);
        let n_atoms = rng.random_range(1..=3);
        // every fifth model has no particle-atom contact
        let u = if k % 5 == 4 { 0.0 } else { rng.random_range(-2.0..2.0) };
        let v = rng.random_range(-2.0..2.0);
        let model = LatticeModel::new(n_sites, n_atoms)
            .with_couplings(u, v)
            .with_hopping(rng.random_range(0.5..1.5), rng.random_range(0.5..1.5));
        let g = build_indexed_generator(&model).map_err(|e| LabError::Runtime(format!("directed-flow: {e}")))?;
        let flow = check_directed_flow(&g);
        let witness = non_self_adjointness_witness(&g, 1e-12);
        undirected += u32::from(!flow.directed);
        if u != 0.0 {
            with_contact += 1;
            missing += u32::from(witness.is_none());
        }
        table.push(vec![
            k.to_string(),
            n_sites.to_string(),
            n_atoms.to_string(),
            num(u),
            num(v),
            flow.directed.to_string(),
            witness.map(|w| num(w.gap)).unwrap_or_default(),
        ]);
    }
    Ok(Measurement {
        checks: vec![
            Check::new("undirected models", undirected as f64, Bound::AtMost { limit: 0.0 }),
            Check::new("u≠0 without witness", missing as f64, Bound::AtMost { limit: 0.0 }),
        ],
        notes: vec![format!("50 random models, {with_contact} with u ≠ 0")],
        artifacts: vec![Artifact::csv("directed_flow.csv", &table)],
    })
}

fn front_block(value: Value) -> Result<crate::config::FrontBlock, LabError> {
    match scenario(json!({ "kind": "front", "front": value }))?.block {
        Block::Front(b) => Ok(b),
        _ => unreachable!("front kind yields a front block"),
    }
}

fn front_profile(_seed: u64) -> Result<Measurement, LabError> {
    let b = front_block(json!({ "dx": 0.05, "domain_length": 120.0, "t_final": 80.0, "snapshot_interval": 20.0 }))?;
    let (out, tr) = scenarios::front(&b, "")?;
    let field = tr.final_field();
    let x_front = front_position(field, 0.5).map_err(|e| LabError::Runtime(format!("front-profile: {e}")))?;
    let behind = x_front - b.mean_free_path;
    let f = &field.values[0];
    let i = (behind / b.dx).floor() as usize;
    let s = behind / b.dx - i as f64;
    let at_lambda = f[i] * (1.0 - s) + f[i + 1] * s;
    let lowest = f[..=i].iter().copied().fold(at_lambda, f64::min);
    let at = |d: f64| f[((x_front - d) / b.dx).round() as usize];
    Ok(Measurement {
        checks: vec![Check::new("min f₁ at ≥ λ behind", lowest, Bound::Above { limit: 0.99 })],
        notes: vec![
            format!("front at x = {x_front:.4} λ, t = {} τ", b.t_final),
            format!("f₁ at 1, 2, 3, 5 λ behind: {:.4}, {:.4}, {:.4}, {:.5}", at(1.0), at(2.0), at(3.0), at(5.0)),
        ],
        artifacts: out.artifacts.into_iter().filter(|a| a.name == "front_profile.csv").collect(),
    })
}

fn front_speed(_seed: u64) -> Result<Measurement, LabError> {
    let b = front_block(json!({ "dx": 0.05, "domain_length": 200.0, "t_final": 200.0, "snapshot_interval": 50.0 }))?;
    let (out, _) = scenarios::front(&b, "")?;
    let speed = out.summary["speed"].as_f64().unwrap_or(f64::NAN);
    let theory = out.summary["theoretical_speed"].as_f64().unwrap_or(f64::NAN);
    let ratio_v = out.summary["ratio_to_v_over_sqrt3"].as_f64().unwrap_or(f64::NAN);
    Ok(Measurement {
        checks: vec![Check::new("|c/2√(D/τ) − 1|", (speed / theory - 1.0).abs(), Bound::AtMost { limit: 0.02 })],
        notes: vec![
            format!("measured speed {speed:.5} λ/τ, 2√(D/τ) = {theory:.5}"),
            format!("ratio to v/√3: {ratio_v:.4}"),
        ],
        artifacts: out.artifacts.into_iter().filter(|a| a.name.ends_with(".csv")).collect(),
    })
}

fn wigner_run(n: usize, samples: usize, seed: u64) -> Result<(Value, Vec<Artifact>), LabError> {
    let cfg = scenario(json!({
        "kind": "wigner",
        "master_seed": seed,
        "wigner": { "n": n, "samples": samples, "traceless": true }
    }))?;
    let out = scenarios::run_scenario(&cfg)?;
    let csvs = out.artifacts.into_iter().filter(|a| a.name.ends_with(".csv")).collect();
    Ok((out.summary, csvs))
}

fn numbers(v: &Value) -> Vec<f64> {
    v.as_array().map(|a| a.iter().filter_map(Value::as_f64).collect()).unwrap_or_default()
}

fn semicircle(seed: u64) -> Result<Measurement, LabError> {
    let (summary, artifacts) = wigner_run(1024, 1, seed)?;
    let ks = numbers(&summary["ks_distance"]).first().copied().unwrap_or(f64::NAN);
    Ok(Measurement {
        checks: vec![Check::new("KS distance", ks, Bound::Below { limit: 0.05 })],
        notes: vec!["one n = 1024 sample against the semicircle on [−2, 2]".into()],
        artifacts,
    })
}

fn incoherence_bound(seed: u64) -> Result<Measurement, LabError> {
    let (summary, artifacts) = wigner_run(512, 20, seed)?;
    let mean = summary["mean_w_plus"].as_f64().unwrap_or(f64::NAN);
    let plus = numbers(&summary["w_plus"]);
    let minus = numbers(&summary["w_minus"]);
    let worst = plus.iter().zip(&minus).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Measurement {
        checks: vec![
            Check::new("|⟨w+⟩/(4/3π) − 1|", (mean / INCOHERENCE_BOUND - 1.0).abs(), Bound::AtMost { limit: 0.02 }),
            Check::new("max |w+ − w−|", worst, Bound::Below { limit: 1e-10 }),
        ],
        notes: vec![format!("mean w+ = {mean:.5} over {} samples, 4/(3π) = {INCOHERENCE_BOUND:.5}", plus.len())],
        artifacts,
    })
}

// With these ranges every reduced intermediate stays below 4e17, inside i64.
type Q = Ratio<i64>;

fn slip_identity(seed: u64) -> Result<Measurement, LabError> {
    const DRAWS: u64 = 1_000_000;
    let mut rng = substream(seed, 0, 0);
    let mut nonzero = 0u64;
    let mut by_channels = [0u64; 7];
    for _ in 0..DRAWS {
        let n = rng.random_range(2..=6usize);
        let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=50)).collect();
        let total: i64 = weights.iter().sum();
        let p: Vec<Q> = weights.iter().map(|&w| Q::new(w, total)).collect();
        let params = SlipParams {
            w: Q::new(rng.random_range(1..=424), 1000),
            tau: Q::new(rng.random_range(1..=100), 10),
            dt: Q::new(rng.random_range(1..=100), 1000),
        };
        let f = Q::new(rng.random_range(0..=100), 100);
        let f0 = Q::new(rng.random_range(0..=100), 100);
        let scale = Q::from_integer(rng.random_range(1..=100));
        let j = rng.random_range(0..n);
        let d = slip_transfer(&p, j, f, f0, &params, scale);
        by_channels[n] += 1;
        if d.iter().sum::<Q>() != Q::from_integer(0) {
            nonzero += 1;
        }
    }
    let mut table = Table::new(["channels", "draws"]);
    for (n, &k) in by_channels.iter().enumerate().skip(2) {
        table.push(vec![n.to_string(), k.to_string()]);
    }
    table.push(vec!["nonzero_sums".into(), nonzero.to_string()]);
    Ok(Measurement {
        checks: vec![Check::new("draws with Σδ ≠ 0", nonzero as f64, Bound::AtMost { limit: 0.0 })],
        notes: vec![format!("{DRAWS} exact rational draws, 2-6 channels")],
        artifacts: vec![Artifact::csv("slip_identity.csv", &table)],
    })
}

fn covariance(seed: u64) -> Result<Measurement, LabError> {
    let err = |e: collapse_core::collapse_engine::CollapseError| LabError::Runtime(format!("covariance: {e}"));
    let cell = Cell::uniform(0, 1000, &[0.5, 0.0]);
    let ens = CellEnsemble::new(vec![cell], vec![vec![300, 700]], SlipParams::new(0.4, 1.0, 0.01)).map_err(err)?;
    let (table, report) = covariance_table(&ens, 0, 100_000, seed)?;
    let gap = report.relative_gap[0][0].unwrap_or(f64::NAN);
    Ok(Measurement {
        checks: vec![Check::new("|Var δp₁ rel. gap|", gap.abs(), Bound::AtMost { limit: 0.05 })],
        notes: vec![
            format!("Var δp₁: empirical {:.4e}, analytic {:.4e}", report.empirical[0][0], report.analytic[0][0]),
            format!(
                "row sums: empirical [{}], analytic [{}]",
                report.empirical_row_sums.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", "),
                report.analytic_row_sums.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
            ),
        ],
        artifacts: vec![Artifact::csv("covariance.csv", &table)],
    })
}

fn slip_scenario(p: &[f64], dt: f64, t_max: f64) -> Result<CollapseScenario<f64>, LabError> {
    let channels = ChannelSpec::from_probabilities(p).map_err(|e| LabError::Runtime(e.to_string()))?;
    Ok(CollapseScenario::single_cell(channels, 10, 0.5, SlipParams::new(INCOHERENCE_BOUND, 1.0, dt), t_max))
}

fn martingale(seed: u64) -> Result<Measurement, LabError> {
    let checkpoints = vec![5.0, 10.0, 20.0, 40.0, 80.0];
    let sc = slip_scenario(&[0.3, 0.7], 0.01, 80.0)?.with_checkpoints(checkpoints.clone());
    let results = run_ensemble(&sc, 10_000, seed).map_err(|e| LabError::Runtime(format!("martingale: {e}")))?;
    let means = checkpoint_means(&results);
    let checks = means
        .iter()
        .map(|m| Check::new(format!("z(t={})", m.time), (m.mean[0] - 0.3).abs() / m.std_error[0], Bound::AtMost { limit: 3.0 }))
        .collect();
    let notes = vec![format!(
        "⟨p₁⟩ at {:?} τ: {}",
        checkpoints,
        means.iter().map(|m| format!("{:.4}±{:.4}", m.mean[0], m.std_error[0])).collect::<Vec<_>>().join(", ")
    )];
    let artifacts = run_tables(&results, 2, "").into_iter().filter(|a| a.name.ends_with(".csv")).collect();
    Ok(Measurement { checks, notes, artifacts })
}

fn born_rule(seed: u64) -> Result<Measurement, LabError> {
    let mut m = Measurement::default();
    for (k, p) in [vec![0.3, 0.7], vec![0.2, 0.3, 0.5]].iter().enumerate() {
        let sc = slip_scenario(p, 0.01, 1e5)?;
        let r = born_rule_experiment(&sc, 10_000, substream_seed(seed, k as u64, 0))
            .map_err(|e| LabError::Runtime(format!("born-rule: {e}")))?;
        for j in 0..p.len() {
            let (lo, hi) = r.bands[j];
            m.checks.push(Check::new(
                format!("n{}({})", j + 1, p[j]),
                r.counts[j] as f64,
                Bound::Within { low: lo as f64, high: hi as f64 },
            ));
        }
        m.checks.push(Check::new(format!("timeouts({}ch)", p.len()), r.timeouts as f64, Bound::AtMost { limit: 0.0 }));
        m.notes.push(format!("{} channels: frequencies {:?}", p.len(), r.frequencies));
        m.artifacts.push(Artifact::csv(&format!("born_{}ch.csv", p.len()), &born_table(&r)));
    }
    Ok(m)
}

fn fp_mc(seed: u64) -> Result<Measurement, LabError> {
    let err = |e: collapse_core::collapse_engine::CollapseError| LabError::Runtime(format!("fp-mc: {e}"));
    let kappa = matched_kappa(INCOHERENCE_BOUND, 1.0, 10, 0.5);
    let fp = fokker_planck_2ch(0.3, kappa, &FpGrid::default(), 10.0 / kappa).map_err(err)?;
    let sc = slip_scenario(&[0.3, 0.7], 0.1, 1e5)?;
    let trials = 100_000;
    let mc = born_rule_experiment(&sc, trials, seed).map_err(err)?;
    let split = mc.frequencies[0];
    let mut history = Table::new(["t", "interior", "absorbed_low", "absorbed_high"]);
    for h in &fp.history {
        history.push(vec![num(h.time), num(h.interior), num(h.absorbed_low), num(h.absorbed_high)]);
    }
    Ok(Measurement {
        checks: vec![
            Check::new("|FP mass at 1 / 0.3 − 1|", (fp.absorbed_high / 0.3 - 1.0).abs(), Bound::AtMost { limit: 0.01 }),
            Check::new("|MC / FP − 1|", (split / fp.absorbed_high - 1.0).abs(), Bound::AtMost { limit: 0.02 }),
        ],
        notes: vec![
            format!(
                "κ = {kappa:.5}/τ, FP absorbed at 1: {:.6}, at 0: {:.6}, interior left {:.1e}",
                fp.absorbed_high, fp.absorbed_low, fp.interior_mass
            ),
            format!("MC split over {trials} runs at δt = τ/10: {split:.5} ({} timeouts)", mc.timeouts),
        ],
        artifacts: vec![Artifact::csv("fp_history.csv", &history), Artifact::csv("fp_mc_born.csv", &born_table(&mc))],
    })
}

fn timescale(_seed: u64) -> Result<Measurement, LabError> {
    let r = TimescaleParams::reference();
    let block = TimescaleBlock { tau: r.tau, l: r.l, n_a: r.n_a, lambda: r.lambda, w: r.w };
    let (t, table) = timescale_rows(&block)?;
    Ok(Measurement {
        checks: vec![Check::new("|t/1e-4 s − 1|", (t / 1e-4 - 1.0).abs(), Bound::AtMost { limit: 1e-9 })],
        notes: vec![
            format!("formula value: {t:e} s"),
            format!("DISCREPANCY: quoted estimate {QUOTED_ESTIMATE_SECONDS:e} s, off by ×{:.0e}", t / QUOTED_ESTIMATE_SECONDS),
        ],
        artifacts: vec![Artifact::csv("timescale.csv", &table)],
    })
}
