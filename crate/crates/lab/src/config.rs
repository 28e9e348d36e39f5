//! Scenario configuration: strict JSON parsing that reports every problem at
//! once.

use std::path::{Path, PathBuf};

use collapse_core::incoherence::INCOHERENCE_BOUND;
use collapse_core::quantum_lattice::LatticeModel;
use serde_json::{Map, Value};

use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Exact,
    Front,
    Wigner,
    Collapse,
    Born,
    FokkerPlanck,
    Timescale,
    FullPipeline,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Exact,
        Kind::Front,
        Kind::Wigner,
        Kind::Collapse,
        Kind::Born,
        Kind::FokkerPlanck,
        Kind::Timescale,
        Kind::FullPipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Exact => "exact",
            Kind::Front => "front",
            Kind::Wigner => "wigner",
            Kind::Collapse => "collapse",
            Kind::Born => "born",
            Kind::FokkerPlanck => "fokker-planck",
            Kind::Timescale => "timescale",
            Kind::FullPipeline => "full-pipeline",
        }
    }

    /// Key of the parameter block belonging to this kind.
    pub fn block_key(self) -> &'static str {
        match self {
            Kind::FokkerPlanck => "fokker_planck",
            Kind::FullPipeline => "pipeline",
            other => other.name(),
        }
    }

    fn uses_checkpoints(self) -> bool {
        matches!(self, Kind::Exact | Kind::Collapse | Kind::FullPipeline)
    }

    fn from_name(name: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactBlock {
    pub n_sites: usize,
    pub n_atoms: usize,
    pub u: f64,
    pub v: f64,
    pub hop_atom: f64,
    pub hop_particle: f64,
    pub t_final: f64,
    pub tolerance: f64,
    pub cells: usize,
    pub symmetrize: bool,
    pub particle_center: f64,
    pub atom_center: f64,
    pub sigma: f64,
    pub momentum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    pub start: f64,
    pub end: f64,
    pub channel: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontBlock {
    pub mean_free_path: f64,
    pub mean_free_time: f64,
    pub diffusion: f64,
    pub geometry: String,
    pub domain_length: f64,
    pub dx: f64,
    /// `None` uses the solver's suggested step.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub scheme: String,
    pub channel_probs: Option<Vec<f64>>,
    pub sources: Vec<SourceSpec>,
    pub snapshot_interval: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerBlock {
    pub n: usize,
    pub samples: usize,
    pub traceless: bool,
    pub ensemble: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSpec {
    pub atoms: u64,
    pub f: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSpec {
    pub cell: usize,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlipBlock {
    pub w: f64,
    pub tau: f64,
    pub dt: f64,
    pub t_max: f64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseBlock {
    pub probabilities: Vec<f64>,
    pub cells: Vec<CellSpec>,
    pub slip: SlipBlock,
    pub covariance: Option<CovarianceSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BornBlock {
    pub probabilities: Vec<f64>,
    pub atoms: u64,
    pub f: f64,
    pub slip: SlipBlock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FpBlock {
    pub p0: f64,
    pub kappa: f64,
    pub intervals: usize,
    pub dt: Option<f64>,
    pub bump_width: f64,
    pub t_final: f64,
    pub records: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimescaleBlock {
    pub tau: f64,
    pub l: f64,
    pub n_a: f64,
    pub lambda: f64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineBlock {
    pub front: FrontBlock,
    pub probabilities: Vec<f64>,
    pub nodes_per_cell: usize,
    pub atom_density: f64,
    pub slip: SlipBlock,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    Exact(ExactBlock),
    Front(FrontBlock),
    Wigner(WignerBlock),
    Collapse(CollapseBlock),
    Born(BornBlock),
    FokkerPlanck(FpBlock),
    Timescale(TimescaleBlock),
    FullPipeline(PipelineBlock),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub checkpoints: Vec<f64>,
    pub block: Block,
    /// The parsed document, used for hashing.
    pub source: Value,
}

pub const DEFAULT_OUTPUT_DIR: &str = "collapse-lab-out";

impl ScenarioConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        if let Value::Object(m) = &mut self.source {
            m.insert("master_seed".into(), Value::from(seed));
        }
        self
    }

    pub fn with_output_dir(mut self, dir: PathBuf) -> Self {
        if let Value::Object(m) = &mut self.source {
            m.insert("output_dir".into(), Value::from(dir.to_string_lossy().into_owned()));
        }
        self.output_dir = dir;
        self
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Validation(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, LabError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| LabError::Validation(vec![format!("malformed JSON: {e}")]))?;
    parse_config_value(value)
}

pub fn parse_config_value(value: Value) -> Result<ScenarioConfig, LabError> {
    let mut errs = Vec::new();
    let Some(map) = value.as_object() else {
        return Err(LabError::Validation(vec!["configuration must be a JSON object".into()]));
    };
    let mut top = Fields::new("", map);
    let kind_name = top.string(&mut errs, "kind", None);
    let kind = kind_name.as_deref().and_then(|n| {
        let k = Kind::from_name(n);
        if k.is_none() {
            let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
            errs.push(format!("kind: unknown kind `{n}` (expected one of {})", names.join(", ")));
        }
        k
    });
    let master_seed = top.u64(&mut errs, "master_seed", Some(0)).unwrap_or(0);
    let output_dir = top.string(&mut errs, "output_dir", Some(DEFAULT_OUTPUT_DIR)).unwrap_or_default();
    let checkpoints = top.f64_list(&mut errs, "checkpoints", Some(vec![])).unwrap_or_default();
    if checkpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        errs.push("checkpoints: times must be finite and non-negative".into());
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        errs.push("checkpoints: times must be non-decreasing".into());
    }
    for k in Kind::ALL {
        top.known(k.block_key());
    }
    let mut block = None;
    if let Some(kind) = kind {
        if !checkpoints.is_empty() && !kind.uses_checkpoints() {
            errs.push(format!("checkpoints: not used by kind `{}`", kind.name()));
        }
        for other in Kind::ALL {
            if other != kind && map.contains_key(other.block_key()) {
                errs.push(format!("{}: block does not belong to kind `{}`", other.block_key(), kind.name()));
            }
        }
        let key = kind.block_key();
        match map.get(key) {
            None => errs.push(format!("{key}: missing parameter block for kind `{}`", kind.name())),
            Some(Value::Object(b)) => block = parse_block(kind, key, b, &checkpoints, &mut errs),
            Some(_) => errs.push(format!("{key}: expected an object")),
        }
    }
    top.finish(&mut errs);
    match (kind, block) {
        (Some(kind), Some(block)) if errs.is_empty() => Ok(ScenarioConfig {
            kind,
            master_seed,
            output_dir: PathBuf::from(output_dir),
            checkpoints,
            block,
            source: value,
        }),
        _ => {
            if errs.is_empty() {
                errs.push("configuration is incomplete".into());
            }
            Err(LabError::Validation(errs))
        }
    }
}

fn parse_block(
    kind: Kind,
    key: &str,
    map: &Map<String, Value>,
    checkpoints: &[f64],
    errs: &mut Vec<String>,
) -> Option<Block> {
    let mut f = Fields::new(key, map);
    let block = match kind {
        Kind::Exact => exact_block(&mut f, checkpoints, errs).map(Block::Exact),
        Kind::Front => front_block(&mut f, errs).map(Block::Front),
        Kind::Wigner => wigner_block(&mut f, errs).map(Block::Wigner),
        Kind::Collapse => collapse_block(&mut f, checkpoints, errs).map(Block::Collapse),
        Kind::Born => born_block(&mut f, errs).map(Block::Born),
        Kind::FokkerPlanck => fp_block(&mut f, errs).map(Block::FokkerPlanck),
        Kind::Timescale => timescale_block(&mut f, errs).map(Block::Timescale),
        Kind::FullPipeline => pipeline_block(&mut f, checkpoints, errs).map(Block::FullPipeline),
    };
    f.finish(errs);
    block
}

fn exact_block(f: &mut Fields, checkpoints: &[f64], errs: &mut Vec<String>) -> Option<ExactBlock> {
    let n_sites = f.usize(errs, "n_sites", Some(5));
    let n_atoms = f.usize(errs, "n_atoms", Some(3));
    let u = f.finite(errs, "u", Some(1.0));
    let v = f.finite(errs, "v", Some(1.0));
    let hop_atom = f.finite(errs, "hop_atom", Some(1.0));
    let hop_particle = f.finite(errs, "hop_particle", Some(1.0));
    let t_final = f.non_negative(errs, "t_final", Some(10.0));
    let tolerance = f.positive(errs, "tolerance", Some(1e-11));
    let cells = f.usize(errs, "cells", n_sites);
    let symmetrize = f.bool(errs, "symmetrize", Some(false));
    let particle_center = f.finite(errs, "particle_center", Some(0.0));
    let atom_center = f.finite(errs, "atom_center", n_sites.map(|n| n as f64 / 2.0));
    let sigma = f.positive(errs, "sigma", Some(0.8));
    let momentum = f.finite(errs, "momentum", Some(0.7));
    let b = ExactBlock {
        n_sites: n_sites?,
        n_atoms: n_atoms?,
        u: u?,
        v: v?,
        hop_atom: hop_atom?,
        hop_particle: hop_particle?,
        t_final: t_final?,
        tolerance: tolerance?,
        cells: cells?,
        symmetrize: symmetrize?,
        particle_center: particle_center?,
        atom_center: atom_center?,
        sigma: sigma?,
        momentum: momentum?,
    };
    let model = LatticeModel::<f64>::new(b.n_sites, b.n_atoms)
        .with_couplings(b.u, b.v)
        .with_hopping(b.hop_atom, b.hop_particle);
    if let Err(e) = model.validate() {
        errs.push(format!("exact: {e}"));
    }
    if b.cells == 0 || b.cells > b.n_sites {
        errs.push(format!("exact.cells: must lie in 1..={}, got {}", b.n_sites, b.cells));
    }
    if let Some(&t) = checkpoints.last() {
        if t > b.t_final {
            errs.push(format!("checkpoints: last time {t} exceeds t_final {}", b.t_final));
        }
    }
    Some(b)
}

fn front_block(f: &mut Fields, errs: &mut Vec<String>) -> Option<FrontBlock> {
    let lambda = f.positive(errs, "mean_free_path", Some(1.0));
    let tau = f.positive(errs, "mean_free_time", Some(1.0));
    let (l, t) = (lambda.unwrap_or(1.0), tau.unwrap_or(1.0));
    let diffusion = f.positive(errs, "diffusion", Some(l * l / (6.0 * t)));
    let geometry = f.choice(errs, "geometry", &["planar", "cylindrical", "spherical"], "planar");
    let domain_length = f.positive(errs, "domain_length", Some(100.0 * l));
    let dx = f.positive(errs, "dx", Some(l / 10.0));
    let dt = f.optional_positive(errs, "dt");
    let t_final = f.non_negative(errs, "t_final", Some(50.0 * t));
    let scheme = f.choice(errs, "scheme", &["euler", "rk4"], "euler");
    let channel_probs = f.optional_f64_list(errs, "channel_probs");
    let sources = match f.take("sources") {
        None => Some(vec![SourceSpec { start: 0.0, end: 2.0 * l, channel: 0 }]),
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                let path = format!("{}.sources[{i}]", f.path);
                match item.as_object() {
                    Some(m) => {
                        let mut s = Fields::new(&path, m);
                        let start = s.non_negative(errs, "start", None);
                        let end = s.non_negative(errs, "end", None);
                        let channel = s.usize(errs, "channel", Some(0));
                        s.finish(errs);
                        if let (Some(start), Some(end), Some(channel)) = (start, end, channel) {
                            out.push(SourceSpec { start, end, channel });
                        }
                    }
                    None => errs.push(format!("{path}: expected an object")),
                }
            }
            Some(out)
        }
        Some(_) => {
            errs.push(format!("{}.sources: expected an array", f.path));
            None
        }
    };
    let snapshot_interval = f.positive(errs, "snapshot_interval", Some(10.0 * t));
    let threshold = f.open_unit(errs, "threshold", Some(0.5));
    if let Some(p) = &channel_probs {
        check_simplex(&format!("{}.channel_probs", f.path), p, errs);
    }
    Some(FrontBlock {
        mean_free_path: lambda?,
        mean_free_time: tau?,
        diffusion: diffusion?,
        geometry: geometry?,
        domain_length: domain_length?,
        dx: dx?,
        dt,
        t_final: t_final?,
        scheme: scheme?,
        channel_probs,
        sources: sources?,
        snapshot_interval: snapshot_interval?,
        threshold: threshold?,
    })
}

fn wigner_block(f: &mut Fields, errs: &mut Vec<String>) -> Option<WignerBlock> {
    let n = f.usize(errs, "n", Some(512));
    let samples = f.usize(errs, "samples", Some(20));
    let traceless = f.bool(errs, "traceless", Some(true));
    let ensemble = f.choice(errs, "ensemble", &["wigner", "wigner-real", "exponential"], "wigner");
    if n.is_some_and(|n| n < 2) {
        errs.push(format!("{}.n: must be at least 2", f.path));
    }
    if samples == Some(0) {
        errs.push(format!("{}.samples: must be at least 1", f.path));
    }
    Some(WignerBlock { n: n?, samples: samples?, traceless: traceless?, ensemble: ensemble? })
}

fn slip_block(f: &mut Fields, errs: &mut Vec<String>, t_max: f64, trials: u64) -> Option<SlipBlock> {
    let w = f.positive(errs, "w", Some(INCOHERENCE_BOUND));
    if w.is_some_and(|w| w > INCOHERENCE_BOUND * (1.0 + 1e-12)) {
        errs.push(format!("{}.w: must not exceed 4/(3π) = {INCOHERENCE_BOUND}", f.path));
    }
    let tau = f.positive(errs, "tau", Some(1.0));
    let dt = f.positive(errs, "dt", tau.map(|t| t / 100.0));
    let t_max = f.non_negative(errs, "t_max", Some(t_max));
    let trials = f.u64(errs, "trials", Some(trials));
    if trials == Some(0) {
        errs.push(format!("{}.trials: must be at least 1", f.path));
    }
    Some(SlipBlock { w: w?, tau: tau?, dt: dt?, t_max: t_max?, trials: trials? })
}

fn probabilities(f: &mut Fields, errs: &mut Vec<String>) -> Option<Vec<f64>> {
    let p = f.f64_list(errs, "probabilities", None)?;
    if p.len() < 2 {
        errs.push(format!("{}.probabilities: need at least 2 channels, got {}", f.path, p.len()));
    }
    check_simplex(&format!("{}.probabilities", f.path), &p, errs);
    Some(p)
}

fn check_simplex(path: &str, p: &[f64], errs: &mut Vec<String>) {
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        errs.push(format!("{path}: entries must be non-negative"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        errs.push(format!("{path}: not on the simplex, entries sum to {sum}"));
    }
}

fn check_checkpoints(checkpoints: &[f64], t_max: f64, errs: &mut Vec<String>) {
    if let Some(&t) = checkpoints.last() {
        if t > t_max {
            errs.push(format!("checkpoints: last time {t} exceeds t_max {t_max}"));
        }
    }
}

fn collapse_block(f: &mut Fields, checkpoints: &[f64], errs: &mut Vec<String>) -> Option<CollapseBlock> {
    let p = probabilities(f, errs);
    let n = p.as_ref().map_or(0, Vec::len);
    let cells = match f.take("cells") {
        None => Some(vec![CellSpec { atoms: 10, f: vec![0.5; n] }]),
        Some(Value::Array(items)) if !items.is_empty() => {
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                let path = format!("{}.cells[{i}]", f.path);
                let Some(m) = item.as_object() else {
                    errs.push(format!("{path}: expected an object"));
                    continue;
                };
                let mut c = Fields::new(&path, m);
                let atoms = c.u64(errs, "atoms", None);
                let fv = c.f64_list(errs, "f", None);
                c.finish(errs);
                if atoms == Some(0) {
                    errs.push(format!("{path}.atoms: must be at least 1"));
                }
                if let Some(fv) = &fv {
                    if fv.len() != n {
                        errs.push(format!("{path}.f: expected {n} entries, got {}", fv.len()));
                    }
                    if fv.iter().any(|v| !(0.0..=1.0).contains(v)) {
                        errs.push(format!("{path}.f: values must lie in [0, 1]"));
                    }
                }
                if let (Some(atoms), Some(f)) = (atoms, fv) {
                    out.push(CellSpec { atoms, f });
                }
            }
            Some(out)
        }
        Some(_) => {
            errs.push(format!("{}.cells: expected a non-empty array", f.path));
            None
        }
    };
    let slip = slip_block(f, errs, 1e4, 1);
    let covariance = match f.take("covariance") {
        None | Some(Value::Null) => None,
        Some(Value::Object(m)) => {
            let path = format!("{}.covariance", f.path);
            let mut c = Fields::new(&path, m);
            let cell = c.usize(errs, "cell", Some(0));
            let steps = c.usize(errs, "steps", Some(100_000));
            c.finish(errs);
            if steps.is_some_and(|s| s < collapse_core::collapse_engine::MIN_COVARIANCE_SAMPLES) {
                errs.push(format!("{path}.steps: need at least {}", collapse_core::collapse_engine::MIN_COVARIANCE_SAMPLES));
            }
            if let (Some(cell), Some(cells)) = (cell, &cells) {
                if cell >= cells.len() {
                    errs.push(format!("{path}.cell: index {cell} out of range"));
                }
            }
            Some(CovarianceSpec { cell: cell?, steps: steps? })
        }
        Some(_) => {
            errs.push(format!("{}.covariance: expected an object", f.path));
            None
        }
    };
    if let Some(s) = &slip {
        check_checkpoints(checkpoints, s.t_max, errs);
    }
    Some(CollapseBlock { probabilities: p?, cells: cells?, slip: slip?, covariance })
}

fn born_block(f: &mut Fields, errs: &mut Vec<String>) -> Option<BornBlock> {
    let p = probabilities(f, errs);
    let atoms = f.u64(errs, "atoms", Some(10));
    if atoms == Some(0) {
        errs.push(format!("{}.atoms: must be at least 1", f.path));
    }
    let fv = f.unit(errs, "f", Some(0.5));
    let slip = slip_block(f, errs, 1e5, 10_000);
    if slip.as_ref().is_some_and(|s| s.trials < 100) {
        errs.push(format!("{}.trials: need at least 100", f.path));
    }
    Some(BornBlock { probabilities: p?, atoms: atoms?, f: fv?, slip: slip? })
}

fn fp_block(f: &mut Fields, errs: &mut Vec<String>) -> Option<FpBlock> {
    let p0 = f.open_unit(errs, "p0", Some(0.3));
    let kappa = f.positive(errs, "kappa", Some(1.0));
    let intervals = f.usize(errs, "intervals", Some(200));
    if intervals.is_some_and(|n| n < 8) {
        errs.push(format!("{}.intervals: need at least 8", f.path));
    }
    let dt = f.optional_positive(errs, "dt");
    let bump_width = f.positive(errs, "bump_width", Some(2.0));
    let t_final = f.non_negative(errs, "t_final", kappa.map(|k| 10.0 / k));
    let records = f.usize(errs, "records", Some(100));
    Some(FpBlock {
        p0: p0?,
        kappa: kappa?,
        intervals: intervals?,
        dt,
        bump_width: bump_width?,
        t_final: t_final?,
        records: records?,
    })
}

fn timescale_block(f: &mut Fields, errs: &mut Vec<String>) -> Option<TimescaleBlock> {
    let tau = f.positive(errs, "tau", Some(1e-10));
    let l = f.positive(errs, "l", Some(1.0));
    let n_a = f.positive(errs, "n_a", Some(1e20));
    let lambda = f.positive(errs, "lambda", Some(1e-5));
    let w = f.positive(errs, "w", Some(0.1));
    Some(TimescaleBlock { tau: tau?, l: l?, n_a: n_a?, lambda: lambda?, w: w? })
}

fn pipeline_block(f: &mut Fields, checkpoints: &[f64], errs: &mut Vec<String>) -> Option<PipelineBlock> {
    let p = probabilities(f, errs);
    let front = match f.take("front") {
        None => front_block(&mut Fields::new(&format!("{}.front", f.path), &Map::new()), errs),
        Some(Value::Object(m)) => {
            let mut inner = Fields::new(&format!("{}.front", f.path), m);
            let b = front_block(&mut inner, errs);
            inner.finish(errs);
            b
        }
        Some(_) => {
            errs.push(format!("{}.front: expected an object", f.path));
            None
        }
    };
    let nodes_per_cell = f.usize(errs, "nodes_per_cell", Some(10));
    if nodes_per_cell == Some(0) {
        errs.push(format!("{}.nodes_per_cell: must be at least 1", f.path));
    }
    let atom_density = f.positive(errs, "atom_density", Some(10.0));
    let slip = slip_block(f, errs, 200.0, 20);
    let mut front = front?;
    if front.channel_probs.is_some() {
        errs.push(format!("{}.front.channel_probs: set `probabilities` on the pipeline instead", f.path));
    }
    let p = p?;
    if !front.sources.iter().any(|s| s.channel > 0) {
        let first = front.sources.first().cloned().unwrap_or(SourceSpec { start: 0.0, end: 2.0, channel: 0 });
        front.sources = (0..p.len()).map(|channel| SourceSpec { channel, ..first.clone() }).collect();
    }
    if let Some(s) = front.sources.iter().find(|s| s.channel >= p.len()) {
        errs.push(format!("{}.front.sources: channel {} out of range", f.path, s.channel));
    }
    front.channel_probs = Some(p.clone());
    if let Some(s) = &slip {
        check_checkpoints(checkpoints, s.t_max, errs);
    }
    Some(PipelineBlock { front, probabilities: p, nodes_per_cell: nodes_per_cell?, atom_density: atom_density?, slip: slip? })
}

/// Typed access to one JSON object that remembers which keys were consulted,
/// so that leftovers can be reported as unknown.
struct Fields<'a> {
    path: String,
    map: &'a Map<String, Value>,
    known: Vec<String>,
}

impl<'a> Fields<'a> {
    fn new(path: &str, map: &'a Map<String, Value>) -> Self {
        Fields { path: path.to_string(), map, known: Vec::new() }
    }

    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn known(&mut self, key: &str) {
        self.known.push(key.to_string());
    }

    fn take(&mut self, key: &str) -> Option<&'a Value> {
        self.known(key);
        self.map.get(key)
    }

    fn get<V>(
        &mut self,
        errs: &mut Vec<String>,
        key: &str,
        default: Option<V>,
        what: &str,
        convert: impl Fn(&Value) -> Option<V>,
    ) -> Option<V> {
        self.known(key);
        match self.map.get(key) {
            None => {
                if default.is_none() {
                    errs.push(format!("{}: missing required field", self.key_path(key)));
                }
                default
            }
            Some(v) => {
                let out = convert(v);
                if out.is_none() {
                    errs.push(format!("{}: expected {what}, got {v}", self.key_path(key)));
                }
                out
            }
        }
    }

    fn finite(&mut self, errs: &mut Vec<String>, key: &str, default: Option<f64>) -> Option<f64> {
        self.get(errs, key, default, "a number", |v| v.as_f64().filter(|x| x.is_finite()))
    }

    fn checked(
        &mut self,
        errs: &mut Vec<String>,
        key: &str,
        default: Option<f64>,
        what: &str,
        ok: impl Fn(f64) -> bool,
    ) -> Option<f64> {
        self.get(errs, key, default, what, |v| v.as_f64().filter(|&x| x.is_finite() && ok(x)))
    }

    fn positive(&mut self, errs: &mut Vec<String>, key: &str, default: Option<f64>) -> Option<f64> {
        self.checked(errs, key, default, "a positive number", |x| x > 0.0)
    }

    fn non_negative(&mut self, errs: &mut Vec<String>, key: &str, default: Option<f64>) -> Option<f64> {
        self.checked(errs, key, default, "a non-negative number", |x| x >= 0.0)
    }

    fn unit(&mut self, errs: &mut Vec<String>, key: &str, default: Option<f64>) -> Option<f64> {
        self.checked(errs, key, default, "a number in [0, 1]", |x| (0.0..=1.0).contains(&x))
    }

    fn open_unit(&mut self, errs: &mut Vec<String>, key: &str, default: Option<f64>) -> Option<f64> {
        self.checked(errs, key, default, "a number in (0, 1)", |x| x > 0.0 && x < 1.0)
    }

    fn optional_positive(&mut self, errs: &mut Vec<String>, key: &str) -> Option<f64> {
        self.known(key);
        match self.map.get(key) {
            None | Some(Value::Null) => None,
            Some(v) => {
                let out = v.as_f64().filter(|x| x.is_finite() && *x > 0.0);
                if out.is_none() {
                    errs.push(format!("{}: expected a positive number or null, got {v}", self.key_path(key)));
                }
                out
            }
        }
    }

    fn u64(&mut self, errs: &mut Vec<String>, key: &str, default: Option<u64>) -> Option<u64> {
        self.get(errs, key, default, "a non-negative integer", Value::as_u64)
    }

    fn usize(&mut self, errs: &mut Vec<String>, key: &str, default: Option<usize>) -> Option<usize> {
        self.get(errs, key, default, "a non-negative integer", |v| v.as_u64().and_then(|x| usize::try_from(x).ok()))
    }

    fn bool(&mut self, errs: &mut Vec<String>, key: &str, default: Option<bool>) -> Option<bool> {
        self.get(errs, key, default, "a boolean", Value::as_bool)
    }

    fn string(&mut self, errs: &mut Vec<String>, key: &str, default: Option<&str>) -> Option<String> {
        self.get(errs, key, default.map(str::to_string), "a string", |v| v.as_str().map(str::to_string))
    }

    fn choice(&mut self, errs: &mut Vec<String>, key: &str, allowed: &[&str], default: &str) -> Option<String> {
        let what = format!("one of {}", allowed.join(", "));
        self.get(errs, key, Some(default.to_string()), &what, |v| {
            v.as_str().filter(|s| allowed.contains(s)).map(str::to_string)
        })
    }

    fn f64_list(&mut self, errs: &mut Vec<String>, key: &str, default: Option<Vec<f64>>) -> Option<Vec<f64>> {
        self.get(errs, key, default, "an array of numbers", |v| {
            v.as_array()?.iter().map(|x| x.as_f64().filter(|x| x.is_finite())).collect()
        })
    }

    fn optional_f64_list(&mut self, errs: &mut Vec<String>, key: &str) -> Option<Vec<f64>> {
        self.known(key);
        match self.map.get(key) {
            None | Some(Value::Null) => None,
            Some(_) => self.f64_list(errs, key, None),
        }
    }

    fn finish(self, errs: &mut Vec<String>) {
        for key in self.map.keys() {
            if !self.known.iter().any(|k| k == key) {
                errs.push(format!("{}: unknown key", self.key_path(key)));
            }
        }
    }
}
