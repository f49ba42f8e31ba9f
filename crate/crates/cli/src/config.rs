//! TOML experiment configuration: raw schema plus validation into a [`Plan`].

use std::path::Path;
use std::sync::Arc;

use medwit_core::correlations::{
    AdmissibleFamily, BoundMode, CorrelationMeasure, GFunction, InitialBoundOptions, MeasureKind,
    ReeOptions, StateDistance,
};
use medwit_core::hamiltonians::{build, EnsembleKind, EnsembleSpec, HamiltonianSpec, TermSpec};
use medwit_core::properties::SuiteConfig;
use medwit_core::witness::{BoundConfig, CChoice};
use medwit_core::{states, CMatrix, DensityMatrix, OperatorSum, Probe, SystemLayout, C64};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Bound,
    Evolve,
    SweepT,
    SweepP,
    Verify,
    Randcheck,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bound" => Self::Bound,
            "evolve" => Self::Evolve,
            "sweep_t" => Self::SweepT,
            "sweep_p" => Self::SweepP,
            "verify" => Self::Verify,
            "randcheck" => Self::Randcheck,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bound => "bound",
            Self::Evolve => "evolve",
            Self::SweepT => "sweep_t",
            Self::SweepP => "sweep_p",
            Self::Verify => "verify",
            Self::Randcheck => "randcheck",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub layout: Option<LayoutSection>,
    pub hamiltonians: Option<HamiltoniansSection>,
    pub initial_state: Option<InitialStateSection>,
    #[serde(default)]
    pub measure: MeasureSection,
    #[serde(default)]
    pub bound: BoundSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    pub dim_a: usize,
    pub mediator_qubits: usize,
    pub dim_b: usize,
    #[serde(default)]
    pub operators: Vec<OperatorDef>,
}

/// Custom probe operator; `im` defaults to zero.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDef {
    pub probe: String,
    pub key: String,
    pub re: Vec<Vec<f64>>,
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltoniansSection {
    #[serde(default)]
    pub am: Vec<TermDef>,
    #[serde(default)]
    pub mb: Vec<TermDef>,
    pub ensemble: Option<EnsembleDef>,
}

fn identity_key() -> String {
    "I".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDef {
    pub coeff: f64,
    #[serde(default)]
    pub coeff_im: f64,
    #[serde(default = "identity_key")]
    pub a: String,
    pub mediator: String,
    #[serde(default = "identity_key")]
    pub b: String,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDef {
    pub kind: String,
    pub seed: Option<u64>,
    pub terms: usize,
    #[serde(default = "one")]
    pub coeff_scale: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSection {
    /// product_plus_zero_plus | product | amplitudes | random_product
    pub kind: String,
    #[serde(default)]
    pub sites: Vec<String>,
    pub amplitudes: Option<Vec<[f64; 2]>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSection {
    pub kind: String,
    pub g: String,
    pub g_scale: f64,
    pub g_exponent: f64,
    pub ree_restarts: usize,
    pub ree_max_evals: usize,
    pub initial_bound: InitialBoundSection,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self {
            kind: "log_negativity".into(),
            g: "identity".into(),
            g_scale: 1.0,
            g_exponent: 1.0,
            ree_restarts: 4,
            ree_max_evals: 20_000,
            initial_bound: InitialBoundSection::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialBoundSection {
    pub mode: String,
    pub family: String,
    pub distance: String,
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for InitialBoundSection {
    fn default() -> Self {
        Self {
            mode: "product_state_zero".into(),
            family: "product".into(),
            distance: "trace".into(),
            restarts: 4,
            max_evals: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    /// d | sqrt_d | constant
    pub c: String,
    pub constant: Option<f64>,
    #[serde(rename = "override")]
    pub c_override: Option<f64>,
}

impl Default for BoundSection {
    fn default() -> Self {
        Self { c: "d".into(), constant: None, c_override: None }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub mode: Option<String>,
    pub t: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    /// Per-qubit phase-flip probabilities for bound/evolve/sweep_t.
    pub p: Option<Vec<f64>>,
    /// Uniform p values for sweep_p.
    pub p_grid: Option<Vec<f64>>,
    /// Explicit per-qubit vectors for sweep_p.
    pub p_vectors: Option<Vec<Vec<f64>>>,
    pub verify: SuiteConfig,
    pub randcheck: RandcheckSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandcheckSection {
    pub seed: Option<u64>,
    pub instances: usize,
    pub kind: String,
    pub max_terms: usize,
    pub t_grid: Vec<f64>,
    /// Largest ΔQ tolerated for the commuting ensemble.
    pub classical_tol: f64,
}

impl Default for RandcheckSection {
    fn default() -> Self {
        Self {
            seed: None,
            instances: 20,
            kind: "general".into(),
            max_terms: 6,
            t_grid: vec![0.25, 0.5, 1.0],
            classical_tol: 1e-10,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<String>,
    pub formats: Vec<String>,
    /// Fill the wall_ms column; off by default so outputs are reproducible.
    pub record_timing: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { path: None, formats: vec!["csv".into(), "json".into()], record_timing: false }
    }
}

pub fn parse(text: &str) -> Result<RawConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<(RawConfig, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Config(format!("{}: not UTF-8: {e}", path.display())))?;
    Ok((parse(text)?, bytes))
}

/// Everything a single-layout mode needs.
#[derive(Debug)]
pub struct Setup {
    pub layout: Arc<SystemLayout>,
    pub h_am: OperatorSum,
    pub h_mb: OperatorSum,
    pub rho0: Option<DensityMatrix>,
    /// Ensemble or state seed, reported in the seed column.
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct Plan {
    pub mode: Mode,
    pub measure: CorrelationMeasure,
    pub initial: InitialBoundOptions,
    pub bound: BoundSettings,
    pub setup: Option<Setup>,
    pub t: Option<f64>,
    pub t_grid: Vec<f64>,
    pub p: Option<Vec<f64>>,
    pub p_grid: Vec<Vec<f64>>,
    pub suite: SuiteConfig,
    pub randcheck: RandcheckPlan,
    pub output: OutputPlan,
}

impl Plan {
    /// Seed that determines this run, as recorded in the manifest.
    pub fn seed(&self) -> Option<u64> {
        match self.mode {
            Mode::Verify => Some(self.suite.seed),
            Mode::Randcheck => Some(self.randcheck.seed),
            _ => self.setup.as_ref().and_then(|s| s.seed),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoundSettings {
    pub c: CChoice,
    pub c_override: Option<f64>,
}

impl BoundSettings {
    pub fn for_layout(&self, layout: &SystemLayout) -> BoundConfig {
        BoundConfig { c: self.c, c_override: self.c_override, dim_mediator: layout.dim_mediator() }
    }
}

#[derive(Debug)]
pub struct RandcheckPlan {
    pub seed: u64,
    pub instances: usize,
    pub kind: EnsembleKind,
    pub max_terms: usize,
    pub t_grid: Vec<f64>,
    pub classical_tol: f64,
}

#[derive(Debug)]
pub struct OutputPlan {
    pub path: Option<String>,
    pub csv: bool,
    pub json: bool,
    pub record_timing: bool,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_grid(name: &str, grid: &[f64], lo: f64, hi: f64) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(cfg_err(format!("{name} must not be empty")));
    }
    if let Some(x) = grid.iter().find(|x| !(x.is_finite() && **x >= lo && **x <= hi)) {
        return Err(cfg_err(format!("{name}: value {x} outside [{lo}, {hi}]")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(cfg_err(format!("{name} must be sorted ascending")));
    }
    Ok(())
}

fn check_time(name: &str, t: f64) -> Result<(), CliError> {
    check_grid(name, &[t], 0.0, f64::MAX)
}

fn g_function(m: &MeasureSection) -> Result<GFunction, CliError> {
    let g = match m.g.as_str() {
        "identity" => GFunction::Identity,
        "log" => GFunction::Log,
        "power" => GFunction::Power { scale: m.g_scale, exponent: m.g_exponent },
        other => return Err(cfg_err(format!("measure.g: unknown g function `{other}`"))),
    };
    g.validate().map_err(|e| cfg_err(format!("measure.g: {e}")))?;
    Ok(g)
}

fn initial_options(s: &InitialBoundSection, g: GFunction) -> Result<InitialBoundOptions, CliError> {
    let mode = match s.mode.as_str() {
        "product_state_zero" => BoundMode::ProductStateZero,
        "optimized" => BoundMode::Optimized,
        o => return Err(cfg_err(format!("measure.initial_bound.mode: unknown `{o}`"))),
    };
    let family = match s.family.as_str() {
        "product" => AdmissibleFamily::Product,
        "initial_marginals" => AdmissibleFamily::InitialMarginals,
        "unrestricted" => AdmissibleFamily::Unrestricted,
        o => return Err(cfg_err(format!("measure.initial_bound.family: unknown `{o}`"))),
    };
    let distance = match s.distance.as_str() {
        "trace" => StateDistance::Trace,
        "hilbert_schmidt" => StateDistance::HilbertSchmidt,
        o => return Err(cfg_err(format!("measure.initial_bound.distance: unknown `{o}`"))),
    };
    Ok(InitialBoundOptions {
        mode,
        family,
        distance,
        g,
        restarts: s.restarts,
        max_evals: s.max_evals,
        seed: s.seed,
    })
}

fn bound_settings(b: &BoundSection) -> Result<BoundSettings, CliError> {
    let c = match b.c.as_str() {
        "d" | "dimension" => CChoice::Dimension,
        "sqrt_d" | "sqrt" => CChoice::Sqrt,
        "constant" => CChoice::Constant(
            b.constant.ok_or_else(|| cfg_err("bound.c = \"constant\" needs bound.constant"))?,
        ),
        o => return Err(cfg_err(format!("bound.c: unknown choice `{o}`"))),
    };
    for v in [b.constant, b.c_override].into_iter().flatten() {
        if !(v.is_finite() && v >= 1.0) {
            return Err(cfg_err(format!("bound: C = {v} must be >= 1")));
        }
    }
    Ok(BoundSettings { c, c_override: b.c_override })
}

fn matrix(def: &OperatorDef) -> Result<CMatrix, CliError> {
    let d = def.re.len();
    let im = def.im.clone().unwrap_or_else(|| vec![vec![0.0; d]; d]);
    if def.re.iter().chain(&im).any(|r| r.len() != d) || im.len() != d {
        return Err(cfg_err(format!("layout.operators `{}`: matrix must be square {d}x{d}", def.key)));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| C64::new(def.re[i][j], im[i][j])))
}

fn build_layout(l: &LayoutSection) -> Result<Arc<SystemLayout>, CliError> {
    let mut layout = SystemLayout::new(l.dim_a, l.mediator_qubits, l.dim_b)?;
    for def in &l.operators {
        let probe = match def.probe.as_str() {
            "A" => Probe::A,
            "B" => Probe::B,
            o => return Err(cfg_err(format!("layout.operators: probe must be A or B, got `{o}`"))),
        };
        layout = layout.with_operator(probe, &def.key, matrix(def)?)?;
    }
    Ok(Arc::new(layout))
}

fn term(t: &TermDef) -> TermSpec {
    TermSpec {
        coeff: C64::new(t.coeff, t.coeff_im),
        a: t.a.clone(),
        mediator: t.mediator.clone(),
        b: t.b.clone(),
    }
}

fn build_setup(raw: &RawConfig, seed_flag: Option<u64>, needs_state: bool) -> Result<Setup, CliError> {
    let l = raw.layout.as_ref().ok_or_else(|| cfg_err("missing [layout] section"))?;
    let layout = build_layout(l)?;
    let h = raw.hamiltonians.as_ref().ok_or_else(|| cfg_err("missing [hamiltonians] section"))?;
    let mut seed = None;
    let spec = match &h.ensemble {
        Some(e) => {
            if !h.am.is_empty() || !h.mb.is_empty() {
                return Err(cfg_err("hamiltonians: give explicit am/mb terms or an ensemble, not both"));
            }
            let kind: EnsembleKind = e.kind.parse()?;
            let s = seed_flag
                .or(e.seed)
                .ok_or_else(|| cfg_err("hamiltonians.ensemble: seed is required (config or --seed)"))?;
            seed = Some(s);
            HamiltonianSpec::ensemble(
                layout.clone(),
                EnsembleSpec { kind, seed: s, term_count: e.terms, coeff_scale: e.coeff_scale },
            )
        }
        None => HamiltonianSpec::explicit(
            layout.clone(),
            h.am.iter().map(term).collect(),
            h.mb.iter().map(term).collect(),
        ),
    };
    let (h_am, h_mb) = build(&spec)?;
    let rho0 = match (&raw.initial_state, needs_state) {
        (None, true) => return Err(cfg_err("missing [initial_state] section")),
        (None, false) => None,
        (Some(s), _) => Some(initial_state(s, &layout, seed_flag, &mut seed)?),
    };
    Ok(Setup { layout, h_am, h_mb, rho0, seed })
}

fn initial_state(
    s: &InitialStateSection,
    layout: &SystemLayout,
    seed_flag: Option<u64>,
    seed: &mut Option<u64>,
) -> Result<DensityMatrix, CliError> {
    let rho = match s.kind.as_str() {
        "product_plus_zero_plus" => states::product_plus_zero_plus(layout)?,
        "product" => {
            let names: Vec<&str> = s.sites.iter().map(String::as_str).collect();
            states::product_named(layout, &names)?
        }
        "amplitudes" => {
            let amps = s
                .amplitudes
                .as_ref()
                .ok_or_else(|| cfg_err("initial_state.kind = \"amplitudes\" needs initial_state.amplitudes"))?;
            let amps: Vec<C64> = amps.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            if amps.iter().all(|a| a.norm() == 0.0) {
                return Err(cfg_err("initial_state.amplitudes: zero vector"));
            }
            states::from_amplitudes(layout, &amps)?
        }
        "random_product" => {
            let st = s
                .seed
                .or(seed_flag)
                .ok_or_else(|| cfg_err("initial_state.kind = \"random_product\" needs a seed"))?;
            seed.get_or_insert(st);
            states::random_product_state(layout, st)?
        }
        o => return Err(cfg_err(format!("initial_state.kind: unknown `{o}`"))),
    };
    Ok(rho)
}

/// Validates the raw config for `mode`; `--seed` takes precedence over
/// seeds in the file.
pub fn plan(
    raw: &RawConfig,
    mode: Mode,
    seed_flag: Option<u64>,
    out_flag: Option<String>,
) -> Result<Plan, CliError> {
    if let Some(m) = &raw.experiment.mode {
        if Mode::parse(m).is_none() {
            return Err(cfg_err(format!("experiment.mode: unknown mode `{m}`")));
        }
    }
    let kind: MeasureKind = raw.measure.kind.parse().map_err(|e| cfg_err(format!("measure.kind: {e}")))?;
    let g = g_function(&raw.measure)?;
    let measure = CorrelationMeasure {
        kind,
        g,
        ree: ReeOptions {
            restarts: raw.measure.ree_restarts,
            max_evals: raw.measure.ree_max_evals,
            ..ReeOptions::default()
        },
    };
    let initial = initial_options(&raw.measure.initial_bound, g)?;
    let bound = bound_settings(&raw.bound)?;
    let ex = &raw.experiment;

    let setup = match mode {
        Mode::Verify => None,
        Mode::Randcheck => match &raw.layout {
            Some(_) => Some(build_layout(raw.layout.as_ref().unwrap()).map(|layout| Setup {
                h_am: OperatorSum::zero(layout.clone()),
                h_mb: OperatorSum::zero(layout.clone()),
                layout,
                rho0: None,
                seed: None,
            })?),
            None => None,
        },
        Mode::Bound => Some(build_setup(raw, seed_flag, false)?),
        _ => Some(build_setup(raw, seed_flag, true)?),
    };

    let needs_t = matches!(mode, Mode::Bound | Mode::Evolve | Mode::SweepP);
    let t = match (ex.t, needs_t) {
        (Some(t), _) => {
            check_time("experiment.t", t)?;
            Some(t)
        }
        (None, true) => return Err(cfg_err(format!("mode {} needs experiment.t", mode.as_str()))),
        (None, false) => None,
    };
    let t_grid = match (&ex.t_grid, mode) {
        (Some(g), _) => {
            check_grid("experiment.t_grid", g, 0.0, f64::MAX)?;
            g.clone()
        }
        (None, Mode::SweepT) => return Err(cfg_err("mode sweep_t needs experiment.t_grid")),
        (None, _) => Vec::new(),
    };
    let qubits = setup.as_ref().map(|s| s.layout.mediator_qubits());
    let check_p = |name: &str, p: &[f64]| -> Result<(), CliError> {
        if let Some(q) = qubits {
            if p.len() != q {
                return Err(cfg_err(format!("{name}: {} values for {q} mediator qubits", p.len())));
            }
        }
        if let Some(x) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(cfg_err(format!("{name}: probability {x} outside [0, 1]")));
        }
        Ok(())
    };
    if let Some(p) = &ex.p {
        check_p("experiment.p", p)?;
    }
    let mut p_grid = Vec::new();
    if mode == Mode::SweepP {
        let q = qubits.unwrap_or(0);
        match (&ex.p_grid, &ex.p_vectors) {
            (Some(_), Some(_)) => return Err(cfg_err("give experiment.p_grid or experiment.p_vectors, not both")),
            (Some(g), None) => {
                check_grid("experiment.p_grid", g, 0.0, 1.0)?;
                p_grid = g.iter().map(|&p| vec![p; q]).collect();
            }
            (None, Some(v)) => {
                if v.is_empty() {
                    return Err(cfg_err("experiment.p_vectors must not be empty"));
                }
                for p in v {
                    check_p("experiment.p_vectors", p)?;
                }
                p_grid = v.clone();
            }
            (None, None) => return Err(cfg_err("mode sweep_p needs experiment.p_grid or experiment.p_vectors")),
        }
    }

    let mut suite = ex.verify.clone();
    if let Some(s) = seed_flag {
        suite.seed = s;
    }
    for n in &suite.only {
        if !medwit_core::properties::PROPERTY_NAMES.contains(&n.as_str()) {
            return Err(cfg_err(format!("experiment.verify.only: unknown property `{n}`")));
        }
    }

    let rc = &ex.randcheck;
    let randcheck = RandcheckPlan {
        seed: seed_flag.or(rc.seed).unwrap_or(0),
        instances: rc.instances,
        kind: rc.kind.parse().map_err(|e| cfg_err(format!("experiment.randcheck.kind: {e}")))?,
        max_terms: rc.max_terms,
        t_grid: rc.t_grid.clone(),
        classical_tol: rc.classical_tol,
    };
    if mode == Mode::Randcheck {
        if randcheck.instances == 0 || randcheck.max_terms == 0 {
            return Err(cfg_err("experiment.randcheck: instances and max_terms must be >= 1"));
        }
        check_grid("experiment.randcheck.t_grid", &randcheck.t_grid, 0.0, f64::MAX)?;
    }

    let o = &raw.output;
    for f in &o.formats {
        if f != "csv" && f != "json" {
            return Err(cfg_err(format!("output.formats: unknown format `{f}`")));
        }
    }
    if o.formats.is_empty() {
        return Err(cfg_err("output.formats must not be empty"));
    }
    let output = OutputPlan {
        path: out_flag.or_else(|| o.path.clone()),
        csv: o.formats.iter().any(|f| f == "csv"),
        json: o.formats.iter().any(|f| f == "json"),
        record_timing: o.record_timing,
    };

    Ok(Plan {
        mode,
        measure,
        initial,
        bound,
        setup,
        t,
        t_grid,
        p: ex.p.clone(),
        p_grid,
        suite,
        randcheck,
        output,
    })
}
