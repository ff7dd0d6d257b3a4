//! Command implementations behind the `cqt` binary.
//!
//! Every command returns its full output as a string so the binary stays a
//! thin shell and tests can compare bytes directly.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use cqt_core::chsh::{chsh_game_probability, m_value, PlaneLabel};
use cqt_core::noise::{
    apply_channel, ChannelKind, AD_BOUND_A_MAX, AD_BOUND_WINDOW, PD_DETECTION_A_MAX, PD_WINDOW,
};
use cqt_core::optimizer::{maximize_conditioned_fidelity, SearchConfig, SearchResult};
use cqt_core::power::{
    chsh_game_estimate, collapse, controller_power, non_conditioned_fidelity,
    power_lower_bound_from_parts, CollapseResult, PowerReport, ProbabilityInterval, AD_PRINTED,
    GHZ_PRINTED, PD_PRINTED,
};
use cqt_core::states::{maximal_slice_from_lambda1, w_n};
use cqt_core::teleport::{fidelity_bundle, result3_fidelity_lower_bound, FidelityBundle};
use cqt_core::witness::{
    result1_bounds, separable_minimum, witness_expectation, AffineExpectation, BoundPair,
};
use cqt_core::{
    BellLabel, ChannelSpec, DensityMatrix, MeasurementDirection, PreparedState, StateSpec,
    ThreeQubitState, WitnessSpec,
};

/// Bumped whenever a JSON field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Product states and mixtures drawn for the separable sanity check in `eval`.
const SEPARABLE_PRODUCTS: usize = 200;
const SEPARABLE_MIXTURES: usize = 20;

/// Witness-window endpoints quoted alongside the W_n rows of the table.
pub const W_QUOTED_WINDOWS: [(u32, f64); 3] = [(1, 0.1767), (2, 0.1665), (3, 0.1525)];
/// Largest λ1 and a quoted for the maximal-slice bound.
pub const MSS_QUOTED_LAMBDA1_MAX: f64 = 0.6;
pub const MSS_QUOTED_A_WINDOW: f64 = 0.0402;
const MSS_SWEEP_POINTS: usize = 71;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or spec strings. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Valid input the physics rejects. Exit code 3.
    #[error(transparent)]
    Physics(#[from] cqt_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Physics(_) => 3,
        }
    }

    /// Machine-readable form written to stderr for physics failures.
    pub fn to_json(&self) -> String {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Physics(e) => error_kind(e),
        };
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": kind, "message": self.to_string() },
        })
        .to_string()
    }
}

fn error_kind(e: &cqt_core::Error) -> &'static str {
    use cqt_core::Error as E;
    match e {
        E::DimensionMismatch { .. } => "dimension_mismatch",
        E::InvalidDimension(_) => "invalid_dimension",
        E::NonFinite => "non_finite",
        E::NotHermitian(_) => "not_hermitian",
        E::InvalidTrace(_) => "invalid_trace",
        E::NotPositive(_) => "not_positive",
        E::OutOfRange { .. } => "out_of_range",
        E::Unnormalized(_) => "unnormalized",
        E::DegenerateOutcome { .. } => "degenerate_outcome",
        E::NotDetected(_) => "not_detected",
        E::Precondition(_) => "precondition",
        E::Parse { .. } => "parse",
    }
}

/// Input-stage failures are the caller's fault, whatever their core kind.
fn usage(e: cqt_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

pub type CliResult<T> = Result<T, CliError>;

/// `%.9g`: nine significant digits, trailing zeros dropped, exponent form
/// only for very large or very small magnitudes.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn check_grid(name: &str, lo: f64, hi: f64, steps: usize, lo_exclusive: bool) -> CliResult<()> {
    let lo_ok = if lo_exclusive { lo > 0.0 } else { lo >= 0.0 };
    if !(lo.is_finite() && hi.is_finite() && lo_ok && lo < hi) {
        return Err(CliError::Usage(format!(
            "{name} range [{lo}, {hi}] must satisfy {} < min < max",
            if lo_exclusive { "0" } else { "0 <=" }
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!(
            "{name} steps = {steps}; need at least 2"
        )));
    }
    Ok(())
}

/// Power lower bound as an affine function of the witness parameter,
/// valid where the witness detects the collapsed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundLine {
    pub witness: AffineExpectation,
    pub m: f64,
}

impl BoundLine {
    pub fn new(collapse: &CollapseResult, bell: BellLabel, plane: PlaneLabel) -> CliResult<Self> {
        Ok(Self {
            witness: AffineExpectation::new(&collapse.post_state, bell, plane)?,
            m: m_value(&collapse.post_state)?,
        })
    }

    /// The bound at `a`, or `None` where the witness stops detecting.
    pub fn at(&self, a: f64) -> Option<f64> {
        let w = self.witness.at(a);
        (w < 0.0).then(|| power_lower_bound_from_parts(w, a, self.m))
    }

    /// Limit as a → 0+, the open end of the bound interval.
    pub fn supremum(&self) -> Option<f64> {
        (self.witness.intercept < 0.0)
            .then(|| power_lower_bound_from_parts(self.witness.intercept, 0.0, self.m))
    }

    /// Largest a keeping the witness detecting and the bound positive.
    pub fn positive_window(&self) -> Option<f64> {
        let start = self.supremum().filter(|&b| b > 0.0)?;
        let slope = self.at_line(1.0) - self.at_line(0.0);
        let mut end = f64::INFINITY;
        if slope < 0.0 {
            end = -start / slope;
        }
        if let Some(root) = self.witness.root() {
            end = end.min(root);
        }
        end.is_finite().then_some(end)
    }

    fn at_line(&self, a: f64) -> f64 {
        power_lower_bound_from_parts(self.witness.at(a), a, self.m)
    }
}

/// W_n collapsed by a computational-basis measurement with outcome 0.
pub fn w_collapse(n: u32) -> CliResult<CollapseResult> {
    let s = w_n(n)?.density();
    Ok(collapse(
        &s.rho,
        s.roles.charlie,
        &MeasurementDirection::computational(),
        0,
    )?)
}

/// Power-bound line of the figure-1 W_n curve (ψ+ witness in the yz plane).
pub fn w_bound_line(n: u32) -> CliResult<BoundLine> {
    BoundLine::new(&w_collapse(n)?, BellLabel::PsiPlus, PlaneLabel::Yz)
}

/// X-basis direction: each outcome leaves λ0|00⟩ + λ1|10⟩ ± |11⟩/√2.
pub fn x_basis() -> MeasurementDirection {
    MeasurementDirection::new(FRAC_1_SQRT_2, [0.0, -FRAC_1_SQRT_2, 0.0]).expect("unit norm")
}

/// One summary row of the table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub state: String,
    pub sweep: String,
    pub f_nc: (f64, f64),
    pub f_c0: (f64, f64),
    pub f_c1: (f64, f64),
    pub direction: String,
    pub witness: String,
    pub a_window: f64,
    pub a_positive_max: Option<f64>,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
}

fn span(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

fn min_option(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    values
        .into_iter()
        .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
}

fn max_option(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    values
        .into_iter()
        .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))
}

fn mss_row() -> CliResult<TableRow> {
    let dir = x_basis();
    let mut f_nc = Vec::new();
    let mut f_c = [Vec::new(), Vec::new()];
    let mut lines = Vec::new();
    for l1 in linspace(0.0, FRAC_1_SQRT_2, MSS_SWEEP_POINTS) {
        let s = maximal_slice_from_lambda1(l1)?.density();
        f_nc.push(non_conditioned_fidelity(&s.rho, s.roles.charlie)?);
        for (k, out) in f_c.iter_mut().enumerate() {
            let col = collapse(&s.rho, s.roles.charlie, &dir, k)?;
            out.push(cqt_core::power::conditioned_fidelity(&col)?);
            if k == 0 && l1 <= MSS_QUOTED_LAMBDA1_MAX + 1e-12 {
                lines.push(BoundLine::new(&col, BellLabel::PhiPlus, PlaneLabel::Xy)?);
            }
        }
    }
    Ok(TableRow {
        state: "mss".into(),
        sweep: format!(
            "lambda1 in [0;{}] (bound: lambda1 <= {})",
            format_float(FRAC_1_SQRT_2),
            MSS_QUOTED_LAMBDA1_MAX
        ),
        f_nc: span(f_nc),
        f_c0: span(f_c[0].iter().copied()),
        f_c1: span(f_c[1].iter().copied()),
        direction: "x".into(),
        witness: WitnessSpec::new(BellLabel::PhiPlus, PlaneLabel::Xy, MSS_QUOTED_A_WINDOW)?
            .to_string(),
        a_window: MSS_QUOTED_A_WINDOW,
        a_positive_max: min_option(lines.iter().map(BoundLine::positive_window)),
        bound_lower: min_option(lines.iter().map(|l| l.at(MSS_QUOTED_A_WINDOW))),
        bound_upper: max_option(lines.iter().map(BoundLine::supremum)),
    })
}

/// Best conditioned fidelity of W_n for each outcome.
pub fn w_optimized_fidelities(n: u32, config: &SearchConfig) -> CliResult<[SearchResult; 2]> {
    let s = w_n(n)?.density();
    let run = |k| maximize_conditioned_fidelity(&s.rho, s.roles.charlie, k, config);
    Ok([run(0)?, run(1)?])
}

fn w_row(n: u32, a_window: f64) -> CliResult<TableRow> {
    let s = w_n(n)?.density();
    let [best0, best1] = w_optimized_fidelities(n, &SearchConfig::default())?;
    let line = w_bound_line(n)?;
    let f_nc = non_conditioned_fidelity(&s.rho, s.roles.charlie)?;
    Ok(TableRow {
        state: format!("w{n}"),
        sweep: format!("n = {n}"),
        f_nc: (f_nc, f_nc),
        f_c0: (best0.fidelity, best0.fidelity),
        f_c1: (best1.fidelity, best1.fidelity),
        direction: "optimized (bound: z)".into(),
        witness: WitnessSpec::new(BellLabel::PsiPlus, PlaneLabel::Yz, a_window)?.to_string(),
        a_window,
        a_positive_max: line.positive_window(),
        bound_lower: line.at(a_window),
        bound_upper: line.supremum(),
    })
}

pub fn table1_rows() -> CliResult<Vec<TableRow>> {
    let mut rows = vec![mss_row()?];
    for (n, a) in W_QUOTED_WINDOWS {
        rows.push(w_row(n, a)?);
    }
    Ok(rows)
}

pub const TABLE1_HEADER: &str = "state,sweep,f_nc_min,f_nc_max,f_c0_min,f_c0_max,f_c1_min,f_c1_max,direction,witness,a_window,a_positive_max,bound_lower,bound_upper";

pub fn cmd_table1() -> CliResult<String> {
    let mut out = format!("{TABLE1_HEADER}\n");
    for r in table1_rows()? {
        let nums = [r.f_nc.0, r.f_nc.1, r.f_c0.0, r.f_c0.1, r.f_c1.0, r.f_c1.1]
            .map(format_float)
            .join(",");
        writeln!(
            out,
            "{},{},{nums},{},{},{},{},{},{}",
            r.state,
            r.sweep,
            r.direction,
            r.witness.replace(',', ";"),
            format_float(r.a_window),
            cell(r.a_positive_max),
            cell(r.bound_lower),
            cell(r.bound_upper),
        )
        .expect("write to string");
    }
    Ok(out)
}

pub const FIG1_HEADER: &str = "a,bound_w1,bound_w2,bound_w3";

/// Power lower bound of W₁, W₂, W₃ against the witness parameter. Cells
/// are blank where the witness no longer detects.
pub fn cmd_fig1(a_min: f64, a_max: f64, steps: usize) -> CliResult<String> {
    check_grid("a", a_min, a_max, steps, true)?;
    let lines = [w_bound_line(1)?, w_bound_line(2)?, w_bound_line(3)?];
    let mut out = format!("{FIG1_HEADER}\n");
    for a in linspace(a_min, a_max, steps) {
        let cells: Vec<String> = lines.iter().map(|l| cell(l.at(a))).collect();
        writeln!(out, "{},{}", format_float(a), cells.join(",")).expect("write to string");
    }
    Ok(out)
}

/// Grid for the noisy-W sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Grid {
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_steps: usize,
}

pub const FIG2_HEADER: &str = "a,p,bound_ad,bound_pd";

/// Noisy-W power bound at one grid point, blank outside the channel's
/// quoted window or where the witness misses.
pub fn fig2_cell(kind: ChannelKind, a: f64, p: f64) -> CliResult<Option<f64>> {
    let (window, a_cap, dir) = match kind {
        ChannelKind::AmplitudeDamping => (
            AD_BOUND_WINDOW,
            AD_BOUND_A_MAX,
            MeasurementDirection::amplitude_damping_printed(),
        ),
        ChannelKind::PhaseDamping => (
            PD_WINDOW,
            PD_DETECTION_A_MAX,
            MeasurementDirection::phase_damping_printed(),
        ),
    };
    if p < window.0 || p > window.1 || a > a_cap {
        return Ok(None);
    }
    let spec = ChannelSpec::new(kind, p)?;
    let witness = WitnessSpec::new(BellLabel::PhiPlus, PlaneLabel::Xy, a)?;
    Ok(cqt_core::noise::noisy_w_pipeline(&spec, &dir, 0, &witness)?.power_lower)
}

pub fn cmd_fig2(grid: &Fig2Grid) -> CliResult<String> {
    check_grid("a", grid.a_min, grid.a_max, grid.a_steps, true)?;
    check_grid("p", grid.p_min, grid.p_max, grid.p_steps, false)?;
    if grid.p_max > 1.0 {
        return Err(CliError::Usage(format!("p-max = {} exceeds 1", grid.p_max)));
    }
    let mut out = format!("{FIG2_HEADER}\n");
    for a in linspace(grid.a_min, grid.a_max, grid.a_steps) {
        for p in linspace(grid.p_min, grid.p_max, grid.p_steps) {
            let ad = fig2_cell(ChannelKind::AmplitudeDamping, a, p)?;
            let pd = fig2_cell(ChannelKind::PhaseDamping, a, p)?;
            writeln!(
                out,
                "{},{},{},{}",
                format_float(a),
                format_float(p),
                cell(ad),
                cell(pd)
            )
            .expect("write to string");
        }
    }
    Ok(out)
}

/// Parses `t,y1,y2,y3` or one of the named directions. Returns the unit
/// direction and how far the given components were from unit norm.
pub fn parse_direction(s: &str) -> CliResult<(MeasurementDirection, f64)> {
    let printed = |v: [f64; 4]| MeasurementDirection::renormalized(v[0], [v[1], v[2], v[3]]);
    match s.trim() {
        "z" => return Ok((MeasurementDirection::computational(), 0.0)),
        "x" => return Ok((x_basis(), 0.0)),
        "ghz-printed" => return printed(GHZ_PRINTED).map_err(usage),
        "ad-printed" => return printed(AD_PRINTED).map_err(usage),
        "pd-printed" => return printed(PD_PRINTED).map_err(usage),
        _ => {}
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "cannot parse direction `{s}`: expected t,y1,y2,y3 or one of z, x, ghz-printed, ad-printed, pd-printed"
        )));
    }
    let mut v = [0.0; 4];
    for (slot, raw) in v.iter_mut().zip(&parts) {
        *slot = raw
            .parse()
            .ok()
            .filter(|x: &f64| x.is_finite())
            .ok_or_else(|| CliError::Usage(format!("cannot parse `{raw}` in direction `{s}`")))?;
    }
    MeasurementDirection::renormalized(v[0], [v[1], v[2], v[3]]).map_err(usage)
}

/// Arguments of `eval`, still as the user typed them.
#[derive(Debug, Clone, Default)]
pub struct EvalArgs {
    pub state: String,
    pub witness: String,
    pub channel: Option<String>,
    pub direction: Option<String>,
    pub outcome: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct DirectionOut {
    t: f64,
    y: [f64; 3],
    /// |‖(t, y)‖ − 1| of the components as given.
    deviation: f64,
}

#[derive(Debug, Serialize)]
struct TwoQubitOut {
    witness_expectation: f64,
    detected: bool,
    m_value: f64,
    fidelity: FidelityBundle,
    chsh_game_probability: f64,
    result3_fidelity_lower: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EvalOut {
    schema_version: u32,
    state: String,
    witness: WitnessSpec,
    channel: Option<ChannelSpec>,
    qubits: usize,
    direction: Option<DirectionOut>,
    /// Three-qubit input: the controller report for the chosen outcome.
    report: Option<PowerReport>,
    /// Two-qubit quantities of the state the witness is applied to: the
    /// collapsed state for three-qubit input, the input itself otherwise.
    target: TwoQubitOut,
    chsh_game_estimate: ProbabilityInterval,
    result1_bounds: Option<BoundPair>,
    separable_sample_minimum: f64,
    seed: u64,
}

fn two_qubit_summary(rho: &DensityMatrix, witness: &WitnessSpec) -> CliResult<TwoQubitOut> {
    let w = witness_expectation(witness, rho)?;
    let result3 = match result3_fidelity_lower_bound(rho, witness) {
        Ok(v) => Some(v),
        Err(cqt_core::Error::NotDetected(_) | cqt_core::Error::Precondition(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(TwoQubitOut {
        witness_expectation: w,
        detected: w < 0.0,
        m_value: m_value(rho)?,
        fidelity: fidelity_bundle(rho)?,
        chsh_game_probability: chsh_game_probability(rho, witness.plane)?,
        result3_fidelity_lower: result3,
    })
}

/// Sorted-key JSON, so parsing and re-serializing reproduces the text.
fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v: Value = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<String> {
    let state_spec: StateSpec = args.state.parse().map_err(usage)?;
    let witness: WitnessSpec = args.witness.parse().map_err(usage)?;
    let channel: Option<ChannelSpec> = args
        .channel
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(usage)?;
    let direction = args.direction.as_deref().map(parse_direction).transpose()?;
    if args.outcome > 1 {
        return Err(CliError::Usage(format!(
            "outcome {} must be 0 or 1",
            args.outcome
        )));
    }
    let prepared = state_spec.build().map_err(usage)?;

    let (qubits, report, target, dir_out) = match prepared {
        PreparedState::ThreeQubit(s) => {
            let s = with_channel_three(s, channel.as_ref())?;
            let (dir, deviation) =
                direction.unwrap_or((MeasurementDirection::computational(), 0.0));
            let report = controller_power(&s.rho, s.roles.charlie, &dir, args.outcome, &witness)?;
            let col = collapse(&s.rho, s.roles.charlie, &dir, args.outcome)?;
            let dir_out = DirectionOut {
                t: dir.t,
                y: dir.y,
                deviation,
            };
            (3, Some(report), col.post_state, Some(dir_out))
        }
        PreparedState::TwoQubit(rho) => {
            if direction.is_some() {
                return Err(CliError::Usage(
                    "--direction needs a three-qubit state".into(),
                ));
            }
            let rho = match &channel {
                Some(c) => apply_channel(&rho, c, 1)?,
                None => rho,
            };
            (2, None, rho, None)
        }
    };

    let result1 = match result1_bounds(&witness, &target) {
        Ok(b) => Some(b),
        Err(cqt_core::Error::Precondition(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let out = EvalOut {
        schema_version: SCHEMA_VERSION,
        state: state_spec.to_string(),
        witness,
        channel,
        qubits,
        direction: dir_out,
        report,
        target: two_qubit_summary(&target, &witness)?,
        chsh_game_estimate: chsh_game_estimate(&target, &witness)?,
        result1_bounds: result1,
        separable_sample_minimum: separable_minimum(
            &witness,
            SEPARABLE_PRODUCTS,
            SEPARABLE_MIXTURES,
            args.seed,
        ),
        seed: args.seed,
    };
    Ok(to_canonical_json(&out))
}

/// Applies the channel to the receiver's qubit.
fn with_channel_three(
    s: ThreeQubitState,
    channel: Option<&ChannelSpec>,
) -> CliResult<ThreeQubitState> {
    Ok(match channel {
        Some(c) => ThreeQubitState::new(apply_channel(&s.rho, c, s.roles.bob)?, s.roles)?,
        None => s,
    })
}

/// Arguments of `optimize`.
#[derive(Debug, Clone)]
pub struct OptimizeArgs {
    pub state: String,
    pub channel: Option<String>,
    pub outcome: usize,
    pub grid: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct OptimizeOut {
    schema_version: u32,
    state: String,
    channel: Option<ChannelSpec>,
    outcome: usize,
    grid_points: usize,
    refine_iters: usize,
    seed: u64,
    direction: [f64; 4],
    f_c: f64,
    coarse_best: f64,
    evaluations: usize,
    f_nc: f64,
    power: f64,
}

pub fn cmd_optimize(args: &OptimizeArgs) -> CliResult<String> {
    let state_spec: StateSpec = args.state.parse().map_err(usage)?;
    let channel: Option<ChannelSpec> = args
        .channel
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(usage)?;
    if args.outcome > 1 {
        return Err(CliError::Usage(format!(
            "outcome {} must be 0 or 1",
            args.outcome
        )));
    }
    let config = SearchConfig {
        grid_points: args.grid,
        seed: args.seed,
        ..Default::default()
    };
    config.validate().map_err(usage)?;
    let s = match state_spec.build().map_err(usage)? {
        PreparedState::ThreeQubit(s) => with_channel_three(s, channel.as_ref())?,
        PreparedState::TwoQubit(_) => {
            return Err(CliError::Usage(format!(
                "`{}` is a two-qubit state; optimize needs a controller qubit",
                args.state
            )))
        }
    };
    let found = maximize_conditioned_fidelity(&s.rho, s.roles.charlie, args.outcome, &config)?;
    let f_nc = non_conditioned_fidelity(&s.rho, s.roles.charlie)?;
    Ok(to_canonical_json(&OptimizeOut {
        schema_version: SCHEMA_VERSION,
        state: state_spec.to_string(),
        channel,
        outcome: args.outcome,
        grid_points: config.grid_points,
        refine_iters: config.refine_iters,
        seed: config.seed,
        direction: found.direction.components(),
        f_c: found.fidelity,
        coarse_best: found.coarse_best,
        evaluations: found.evaluations,
        f_nc,
        power: found.fidelity - f_nc,
    }))
}
