//! One runner per scenario kind. Each returns its artifacts and a JSON
//! summary; nothing touches the filesystem here.

use collapse_core::collapse_engine::{
    aggregate_covariance, born_rule_experiment, cells_from_field, checkpoint_means, collapse_timescale,
    fokker_planck_2ch, run_ensemble, sample_single_steps, BornReport, Cell, CellEnsemble, ChannelSpec,
    CollapseRunResult, CollapseScenario, FpGrid, Occupancy, Outcome, SlipParams, TimescaleParams, QUOTED_ESTIMATE_SECONDS,
};
use collapse_core::front_solver::{
    front_position, front_speed, run_with_threshold, FrontConfig, Geometry, SourceRegion, TimeScheme, Trajectory,
};
use collapse_core::incoherence::{
    ks_distance, sample_exponential_spectrum, sample_wigner_ensemble, semicircle_cdf, Ensemble, INCOHERENCE_BOUND,
};
use collapse_core::quantum_lattice::{
    build_indexed_generator, entanglement_fractions, evolve_indexed, evolve_standard, product_state, string_sum,
    wave_packet, CellPartition, IndexedWaveState, LatticeModel,
};
use collapse_core::rng::{substream, substream_seed};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{num, polyline_svg, Artifact, Series, Table};
use crate::LabError;

pub struct ScenarioOutput {
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
    /// Lines echoed to the console.
    pub notes: Vec<String>,
}

fn runtime(context: &str) -> impl Fn(String) -> LabError + '_ {
    move |e| LabError::Runtime(format!("{context}: {e}"))
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, LabError> {
    match &cfg.block {
        Block::Exact(b) => exact(b, &cfg.checkpoints),
        Block::Front(b) => front(b, "").map(|(out, _)| out),
        Block::Wigner(b) => wigner(b, cfg.master_seed),
        Block::Collapse(b) => collapse(b, &cfg.checkpoints, cfg.master_seed),
        Block::Born(b) => born(b, cfg.master_seed),
        Block::FokkerPlanck(b) => fokker_planck(b),
        Block::Timescale(b) => timescale(b),
        Block::FullPipeline(b) => pipeline(b, &cfg.checkpoints, cfg.master_seed),
    }
}

fn exact(b: &ExactBlock, checkpoints: &[f64]) -> Result<ScenarioOutput, LabError> {
    let err = runtime("exact");
    let model = LatticeModel::new(b.n_sites, b.n_atoms)
        .with_couplings(b.u, b.v)
        .with_hopping(b.hop_atom, b.hop_particle)
        .with_symmetrize(b.symmetrize);
    let particle = wave_packet(b.n_sites, b.particle_center, b.sigma, b.momentum);
    let atoms: Vec<_> = (0..b.n_atoms)
        .map(|a| wave_packet(b.n_sites, b.atom_center + 0.5 * a as f64, b.sigma, -b.momentum))
        .collect();
    let psi0 = product_state(&model, &particle, &atoms).map_err(|e| err(e.to_string()))?;
    let g = build_indexed_generator(&model).map_err(|e| err(e.to_string()))?;
    let partition = CellPartition::contiguous(b.n_sites, b.cells).map_err(|e| err(e.to_string()))?;
    let times: Vec<f64> = if checkpoints.is_empty() {
        (1..=20).map(|k| b.t_final * k as f64 / 20.0).collect()
    } else {
        checkpoints.to_vec()
    };
    let mut state = IndexedWaveState::from_standard(&model, &psi0).map_err(|e| err(e.to_string()))?;
    let mut standard = psi0.clone();
    let mut t_prev = 0.0;
    let mut main = Table::new(["t", "norm_diff", "string_sum_norm_sq", "family_weight", "global_f1"]);
    let mut cells = Table::new(["t", "cell", "f1", "f0"]);
    let mut worst: f64 = 0.0;
    let mut curve = Vec::new();
    for &t in &times {
        state = evolve_indexed(&state, &g, t, b.tolerance).map_err(|e| err(e.to_string()))?;
        let step = evolve_standard(&standard, &model, t - t_prev, b.tolerance).map_err(|e| err(e.to_string()))?;
        standard = step;
        t_prev = t;
        let sum = string_sum(&state);
        let diff = sum.iter().zip(&standard).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(diff);
        let rep = entanglement_fractions(&model, &state, &partition).map_err(|e| err(e.to_string()))?;
        main.push(vec![num(t), num(diff), num(rep.string_sum_norm_sq), num(rep.family_weight), num(rep.global_f1)]);
        curve.push((t, rep.global_f1));
        for c in &rep.cells {
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            cells.push(vec![num(t), c.cell_id.to_string(), opt(c.f1), opt(c.f0)]);
        }
    }
    let svg = polyline_svg("global entanglement fraction", "t", "f1", &[Series { label: "f1".into(), points: curve }]);
    Ok(ScenarioOutput {
        artifacts: vec![
            Artifact::csv("exact_checkpoints.csv", &main),
            Artifact::csv("exact_cells.csv", &cells),
            Artifact::svg("exact_f1.svg", svg),
        ],
        summary: json!({
            "indexed_dimension": model.indexed_dimension(),
            "checkpoints": times.len(),
            "max_norm_diff": worst,
        }),
        notes: vec![format!("max ‖ψ″ − ψ‖ over {} checkpoints: {worst:e}", times.len())],
    })
}

pub(crate) fn front_config(b: &FrontBlock) -> FrontConfig<f64> {
    let mut cfg = FrontConfig::kinetic(b.mean_free_path, b.mean_free_time);
    cfg.diffusion = b.diffusion;
    cfg.geometry = match b.geometry.as_str() {
        "cylindrical" => Geometry::Cylindrical,
        "spherical" => Geometry::Spherical,
        _ => Geometry::Planar,
    };
    cfg.scheme = if b.scheme == "rk4" { TimeScheme::Rk4 } else { TimeScheme::Euler };
    cfg.domain_length = b.domain_length;
    cfg.dx = b.dx;
    cfg.t_final = b.t_final;
    cfg.channel_probs = b.channel_probs.clone();
    cfg.sources = b.sources.iter().map(|s| SourceRegion { start: s.start, end: s.end, channel: s.channel }).collect();
    cfg.snapshot_interval = Some(b.snapshot_interval);
    cfg.dt = b.dt.unwrap_or_else(|| cfg.suggested_dt());
    cfg
}

pub(crate) fn front(b: &FrontBlock, prefix: &str) -> Result<(ScenarioOutput, Trajectory<f64>), LabError> {
    let err = runtime("front");
    let cfg = front_config(b);
    let problems = cfg.problems();
    if !problems.is_empty() {
        let list: Vec<String> = problems.iter().map(|p| p.to_string()).collect();
        return Err(LabError::Validation(list));
    }
    let tr = run_with_threshold(&cfg, b.threshold).map_err(|e| err(e.to_string()))?;
    let mut fronts = Table::new(["t", "position"]);
    for (&t, x) in tr.fronts.times.iter().zip(&tr.fronts.positions) {
        fronts.push(vec![num(t), x.map(num).unwrap_or_default()]);
    }
    let last = tr.final_field();
    let j = last.values.len();
    let mut header: Vec<String> = vec!["x".into()];
    header.extend((1..=j).map(|k| format!("f_{k}")));
    header.push("f0".into());
    let mut profile = Table::new(header);
    for i in 0..last.n_nodes() {
        let mut row = vec![num(cfg.node_position(i))];
        row.extend(last.values.iter().map(|v| num(v[i])));
        row.push(num(last.f0_at(i)));
        profile.push(row);
    }
    let series: Vec<Series> = tr
        .snapshots
        .iter()
        .map(|s| Series {
            label: format!("t = {:.1}", s.time),
            points: s.values[0].iter().enumerate().map(|(i, &v)| (cfg.node_position(i), v)).collect(),
        })
        .collect();
    let svg = polyline_svg("local entanglement profile f_1", "x", "f_1", &series);
    let theory = 2.0 * (cfg.diffusion / cfg.mean_free_time).sqrt();
    let fit = front_speed(&tr, None).ok();
    let velocity = cfg.mean_free_path / cfg.mean_free_time;
    let position = front_position(last, b.threshold).ok();
    let mut notes = vec![format!("final front position: {}", position.map_or("none".into(), |x| format!("{x:.4}")))];
    if let Some(f) = &fit {
        notes.push(format!(
            "front speed {:.5} ± {:.1e}; 2√(D/τ) = {theory:.5} (ratio {:.4}); ratio to v/√3: {:.4}",
            f.speed,
            f.std_error,
            f.speed / theory,
            f.speed / (velocity / 3f64.sqrt())
        ));
    }
    let summary = json!({
        "steps": tr.steps,
        "dt": cfg.dt,
        "final_front_position": position,
        "speed": fit.map(|f| f.speed),
        "speed_std_error": fit.map(|f| f.std_error),
        "theoretical_speed": theory,
        "ratio_to_v_over_sqrt3": fit.map(|f| f.speed / (velocity / 3f64.sqrt())),
    });
    let out = ScenarioOutput {
        artifacts: vec![
            Artifact::csv(&format!("{prefix}front_positions.csv"), &fronts),
            Artifact::csv(&format!("{prefix}front_profile.csv"), &profile),
            Artifact::svg(&format!("{prefix}front_profile.svg"), svg),
        ],
        summary,
        notes,
    };
    Ok((out, tr))
}

fn wigner(b: &WignerBlock, seed: u64) -> Result<ScenarioOutput, LabError> {
    let err = runtime("wigner");
    let n = b.n;
    let draws: Vec<(u64, Vec<f64>)> = (0..b.samples as u64)
        .into_par_iter()
        .map(|k| {
            let s = substream_seed(seed, k, n as u64);
            let sample = match b.ensemble.as_str() {
                "wigner-real" => sample_wigner_ensemble::<f64>(n, s, Ensemble::WignerReal),
                "exponential" => sample_exponential_spectrum::<f64>(n, s),
                _ => sample_wigner_ensemble::<f64>(n, s, Ensemble::Wigner),
            };
            sample.map(|m| (s, m.eigenvalues()))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| err(e.to_string()))?;
    let mut table = Table::new(["sample", "seed", "w_plus", "w_minus", "ks_distance"]);
    let (mut w_plus, mut w_minus, mut ks) = (Vec::new(), Vec::new(), Vec::new());
    for (k, (s, eig)) in draws.iter().enumerate() {
        let shift = if b.traceless { eig.iter().sum::<f64>() / n as f64 } else { 0.0 };
        let wp = eig.iter().map(|q| (q - shift).max(0.0)).sum::<f64>() / n as f64;
        let wm = eig.iter().map(|q| (shift - q).max(0.0)).sum::<f64>() / n as f64;
        let d = ks_distance(eig, semicircle_cdf);
        table.push(vec![k.to_string(), s.to_string(), num(wp), num(wm), num(d)]);
        w_plus.push(wp);
        w_minus.push(wm);
        ks.push(d);
    }
    let mut spectrum = Table::new(["index", "eigenvalue", "empirical_cdf", "semicircle_cdf"]);
    let mut sorted = draws[0].1.clone();
    sorted.sort_by(f64::total_cmp);
    for (i, &q) in sorted.iter().enumerate() {
        spectrum.push(vec![i.to_string(), num(q), num((i + 1) as f64 / n as f64), num(semicircle_cdf(q))]);
    }
    let mean = w_plus.iter().sum::<f64>() / b.samples as f64;
    let cdf = Series { label: "empirical".into(), points: sorted.iter().enumerate().map(|(i, &q)| (q, (i + 1) as f64 / n as f64)).collect() };
    let law = Series { label: "semicircle".into(), points: (0..=200).map(|k| { let x = -2.0 + 4.0 * k as f64 / 200.0; (x, semicircle_cdf(x)) }).collect() };
    Ok(ScenarioOutput {
        artifacts: vec![
            Artifact::csv("wigner_samples.csv", &table),
            Artifact::csv("wigner_spectrum.csv", &spectrum),
            Artifact::svg("wigner_cdf.svg", polyline_svg("eigenvalue distribution", "eigenvalue", "CDF", &[cdf, law])),
        ],
        summary: json!({
            "n": n,
            "samples": b.samples,
            "mean_w_plus": mean,
            "bound": INCOHERENCE_BOUND,
            "w_plus": w_plus,
            "w_minus": w_minus,
            "ks_distance": ks,
        }),
        notes: vec![format!("mean w+ = {mean:.5} (4/(3π) = {INCOHERENCE_BOUND:.5})")],
    })
}

fn slip_params(s: &SlipBlock) -> SlipParams<f64> {
    SlipParams::new(s.w, s.tau, s.dt)
}

fn default_checkpoints(checkpoints: &[f64], t_max: f64) -> Vec<f64> {
    if checkpoints.is_empty() {
        (0..=10).map(|k| t_max * k as f64 / 10.0).collect()
    } else {
        checkpoints.to_vec()
    }
}

/// Per-run and per-checkpoint tables plus a trace plot for an ensemble.
pub(crate) fn run_tables(results: &[CollapseRunResult<f64>], n_channels: usize, prefix: &str) -> Vec<Artifact> {
    let mut runs = Table::new(["seed", "trial", "outcome", "collapse_time", "slip_count"]);
    for r in results {
        let outcome = match r.outcome {
            Outcome::Collapsed(k) => (k + 1).to_string(),
            Outcome::Timeout => "timeout".into(),
        };
        runs.push(vec![r.seed.to_string(), r.trial.to_string(), outcome, num(r.collapse_time), r.slip_count.to_string()]);
    }
    let mut header = vec!["t".to_string()];
    header.extend((1..=n_channels).map(|k| format!("p_{k}")));
    header.extend((1..=n_channels).map(|k| format!("se_{k}")));
    let mut table = Table::new(header);
    let means = checkpoint_means(results);
    for m in &means {
        let mut row = vec![num(m.time)];
        row.extend(m.mean.iter().map(|&v| num(v)));
        row.extend(m.std_error.iter().map(|&v| num(v)));
        table.push(row);
    }
    let mut artifacts = vec![
        Artifact::csv(&format!("{prefix}runs.csv"), &runs),
        Artifact::csv(&format!("{prefix}checkpoints.csv"), &table),
    ];
    if let Some(first) = results.first() {
        let series: Vec<Series> = (0..n_channels)
            .map(|j| Series {
                label: format!("p_{} (trial 0)", j + 1),
                points: first.trajectory.iter().map(|(t, p)| (*t, p[j])).collect(),
            })
            .collect();
        artifacts.push(Artifact::svg(&format!("{prefix}trace.svg"), polyline_svg("channel probabilities", "t", "p_j", &series)));
    }
    artifacts
}

fn outcome_summary(results: &[CollapseRunResult<f64>], n_channels: usize) -> Value {
    let mut counts = vec![0u64; n_channels];
    let mut timeouts = 0u64;
    for r in results {
        match r.outcome {
            Outcome::Collapsed(k) => counts[k] += 1,
            Outcome::Timeout => timeouts += 1,
        }
    }
    json!({ "trials": results.len(), "collapsed_counts": counts, "timeouts": timeouts })
}

/// Covariance table with 1-based channel labels.
pub(crate) fn covariance_table(
    ens: &CellEnsemble<f64>,
    cell: usize,
    steps: usize,
    seed: u64,
) -> Result<(Table, collapse_core::collapse_engine::CovarianceReport<f64>), LabError> {
    let samples = sample_single_steps(ens, cell, steps, &mut substream(seed, u64::MAX, cell as u64));
    let p = ens.global_probabilities();
    let local = CellEnsemble::new(vec![ens.cells[cell].clone()], vec![ens.counts()[cell].clone()], ens.params)
        .map_err(|e| LabError::Runtime(format!("covariance: {e}")))?;
    let c = local.correlation_coefficients(&p);
    let report = aggregate_covariance(&samples, &p, &c, &ens.params).map_err(|e| LabError::Runtime(format!("covariance: {e}")))?;
    let mut t = Table::new(["j", "j_prime", "empirical", "analytic", "relative_gap"]);
    let n = p.len();
    for j in 0..n {
        for k in 0..n {
            t.push(vec![
                (j + 1).to_string(),
                (k + 1).to_string(),
                num(report.empirical[j][k]),
                num(report.analytic[j][k]),
                report.relative_gap[j][k].map(num).unwrap_or_default(),
            ]);
        }
    }
    for j in 0..n {
        t.push(vec![
            (j + 1).to_string(),
            "row_sum".into(),
            num(report.empirical_row_sums[j]),
            num(report.analytic_row_sums[j]),
            String::new(),
        ]);
    }
    Ok((t, report))
}

fn collapse(b: &CollapseBlock, checkpoints: &[f64], seed: u64) -> Result<ScenarioOutput, LabError> {
    let err = runtime("collapse");
    let channels = ChannelSpec::from_probabilities(&b.probabilities).map_err(|e| err(e.to_string()))?;
    let cells: Vec<Cell<f64>> = b.cells.iter().enumerate().map(|(i, c)| Cell::uniform(i, c.atoms, &c.f)).collect();
    let scenario = CollapseScenario {
        channels,
        cells,
        params: slip_params(&b.slip),
        t_max: b.slip.t_max,
        checkpoints: default_checkpoints(checkpoints, b.slip.t_max),
        occupancy: Occupancy::Full,
    };
    let results = run_ensemble(&scenario, b.slip.trials, seed).map_err(|e| err(e.to_string()))?;
    let n = b.probabilities.len();
    let mut artifacts = run_tables(&results, n, "");
    let mut summary = outcome_summary(&results, n);
    let mut notes = vec![format!("{} trial(s), outcomes {}", results.len(), summary["collapsed_counts"])];
    if let Some(cov) = &b.covariance {
        let ens = scenario.initial_ensemble().map_err(|e| err(e.to_string()))?;
        let (table, report) = covariance_table(&ens, cov.cell, cov.steps, seed)?;
        artifacts.push(Artifact::csv("covariance.csv", &table));
        summary["analytic_row_sums"] = json!(report.analytic_row_sums);
        summary["empirical_row_sums"] = json!(report.empirical_row_sums);
        notes.push(format!("analytic covariance row sums: {:?}", report.analytic_row_sums));
    }
    Ok(ScenarioOutput { artifacts, summary, notes })
}

pub(crate) fn born_table(report: &BornReport<f64>) -> Table {
    let mut t = Table::new(["channel", "expected", "count", "frequency", "band_low", "band_high", "within_band"]);
    for j in 0..report.expected.len() {
        t.push(vec![
            (j + 1).to_string(),
            num(report.expected[j]),
            report.counts[j].to_string(),
            num(report.frequencies[j]),
            report.bands[j].0.to_string(),
            report.bands[j].1.to_string(),
            report.within[j].to_string(),
        ]);
    }
    t
}

fn born(b: &BornBlock, seed: u64) -> Result<ScenarioOutput, LabError> {
    let err = runtime("born");
    let channels = ChannelSpec::from_probabilities(&b.probabilities).map_err(|e| err(e.to_string()))?;
    let scenario = CollapseScenario::single_cell(channels, b.atoms, b.f, slip_params(&b.slip), b.slip.t_max);
    let report = born_rule_experiment(&scenario, b.slip.trials, seed).map_err(|e| err(e.to_string()))?;
    let verdicts: Vec<Value> = (0..report.expected.len())
        .map(|j| {
            json!({
                "channel": j + 1,
                "expected": report.expected[j],
                "frequency": report.frequencies[j],
                "band": [report.bands[j].0, report.bands[j].1],
                "pass": report.within[j],
            })
        })
        .collect();
    Ok(ScenarioOutput {
        artifacts: vec![Artifact::csv("born.csv", &born_table(&report))],
        summary: json!({ "trials": report.trials, "timeouts": report.timeouts, "verdicts": verdicts, "pass": report.passed() }),
        notes: vec![format!(
            "frequencies {:?} vs {:?}: {}",
            report.frequencies,
            report.expected,
            if report.passed() { "within exact-binomial 3σ" } else { "OUTSIDE exact-binomial 3σ" }
        )],
    })
}

fn fokker_planck(b: &FpBlock) -> Result<ScenarioOutput, LabError> {
    let grid = FpGrid { intervals: b.intervals, dt: b.dt, bump_width: b.bump_width, records: b.records };
    let r = fokker_planck_2ch(b.p0, b.kappa, &grid, b.t_final).map_err(|e| LabError::Runtime(format!("fokker-planck: {e}")))?;
    let mut history = Table::new(["t", "interior", "absorbed_low", "absorbed_high"]);
    for h in &r.history {
        history.push(vec![num(h.time), num(h.interior), num(h.absorbed_low), num(h.absorbed_high)]);
    }
    let mut density = Table::new(["p", "density"]);
    for (p, d) in r.nodes.iter().zip(&r.density) {
        density.push(vec![num(*p), num(*d)]);
    }
    let series = vec![
        Series { label: "absorbed at 1".into(), points: r.history.iter().map(|h| (h.time, h.absorbed_high)).collect() },
        Series { label: "absorbed at 0".into(), points: r.history.iter().map(|h| (h.time, h.absorbed_low)).collect() },
        Series { label: "interior".into(), points: r.history.iter().map(|h| (h.time, h.interior)).collect() },
    ];
    Ok(ScenarioOutput {
        artifacts: vec![
            Artifact::csv("fp_history.csv", &history),
            Artifact::csv("fp_density.csv", &density),
            Artifact::svg("fp_masses.svg", polyline_svg("Fokker-Planck masses", "t", "mass", &series)),
        ],
        summary: json!({
            "absorbed_low": r.absorbed_low,
            "absorbed_high": r.absorbed_high,
            "interior_mass": r.interior_mass,
            "total_mass": r.total_mass(),
            "steps": r.steps,
            "dt": r.dt,
        }),
        notes: vec![format!("absorbed at p = 1: {:.6}, at p = 0: {:.6}", r.absorbed_high, r.absorbed_low)],
    })
}

pub(crate) fn timescale_rows(b: &TimescaleBlock) -> Result<(f64, Table), LabError> {
    let params = TimescaleParams { tau: b.tau, l: b.l, n_a: b.n_a, lambda: b.lambda, w: b.w };
    let t = collapse_timescale(&params).map_err(|e| LabError::Runtime(format!("timescale: {e}")))?;
    let mut table = Table::new(["quantity", "seconds", "note"]);
    table.push(vec!["formula".into(), num(t), "tau*L^2/(n_a*lambda^5*W)".into()]);
    table.push(vec![
        "quoted_estimate".into(),
        num(QUOTED_ESTIMATE_SECONDS),
        format!("DISCREPANCY: differs from the formula by a factor {:.1e}", t / QUOTED_ESTIMATE_SECONDS),
    ]);
    Ok((t, table))
}

fn timescale(b: &TimescaleBlock) -> Result<ScenarioOutput, LabError> {
    let (t, table) = timescale_rows(b)?;
    Ok(ScenarioOutput {
        artifacts: vec![Artifact::csv("timescale.csv", &table)],
        summary: json!({ "formula_seconds": t, "quoted_seconds": QUOTED_ESTIMATE_SECONDS, "discrepancy": true }),
        notes: vec![
            format!("collapse timescale (formula): {t:e} s"),
            format!("quoted estimate:             {QUOTED_ESTIMATE_SECONDS:e} s  [DISCREPANCY ×{:.0e}]", t / QUOTED_ESTIMATE_SECONDS),
        ],
    })
}

fn pipeline(b: &PipelineBlock, checkpoints: &[f64], seed: u64) -> Result<ScenarioOutput, LabError> {
    let err = runtime("full-pipeline");
    let (front_out, tr) = front(&b.front, "front_")?;
    let field = tr.final_field();
    let cells = cells_from_field(field, b.nodes_per_cell, b.atom_density).map_err(|e| err(e.to_string()))?;
    let channels = ChannelSpec::from_probabilities(&b.probabilities).map_err(|e| err(e.to_string()))?;
    let scenario = CollapseScenario {
        channels,
        cells,
        params: slip_params(&b.slip),
        t_max: b.slip.t_max,
        checkpoints: default_checkpoints(checkpoints, b.slip.t_max),
        occupancy: Occupancy::Entangled,
    };
    let results = run_ensemble(&scenario, b.slip.trials, seed).map_err(|e| err(e.to_string()))?;
    let n = b.probabilities.len();
    let mut artifacts = front_out.artifacts;
    artifacts.extend(run_tables(&results, n, "collapse_"));
    let ens = scenario.initial_ensemble().map_err(|e| err(e.to_string()))?;
    let mut cell_table = Table::new(["cell", "atoms", "entangled"]);
    for (c, row) in ens.cells.iter().zip(ens.counts()) {
        cell_table.push(vec![c.id.to_string(), c.atoms.to_string(), row.iter().sum::<u64>().to_string()]);
    }
    artifacts.push(Artifact::csv("pipeline_cells.csv", &cell_table));
    let outcomes = outcome_summary(&results, n);
    let mut notes = front_out.notes;
    notes.push(format!("{} cells, {} atoms; outcomes {}", ens.cells.len(), ens.total(), outcomes["collapsed_counts"]));
    Ok(ScenarioOutput {
        artifacts,
        summary: json!({ "front": front_out.summary, "collapse": outcomes, "cells": ens.cells.len() }),
        notes,
    })
}
