//! Combinatorial Ricci flows and alpha-flows, integrated in the radii.
//!
//! Every flow has the form `dr_i/dt = c (T_i - C_i) f(r_i)` where `C` is the
//! flowed curvature (`R`, `R_alpha`, or their extended versions), `T` the target
//! (a prescribed vector or the current average), `f(r) = r` in Euclidean and
//! `sinh r` in hyperbolic geometry, and `c` is `1/2` for the R-flows (which move
//! `g = s^2`) and `1` for the alpha-flows (which move `s`).

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{
    average_from_radii, classical_curvature, curvature_jacobian, divide_by_s_pow, laplacian_apply_with,
    total_area, CurvatureError, UConvention,
};
use crate::geom::{check_radii, face_admissible, face_lengths, face_slack, GeomError, PackingMetric};
use crate::surface::{Geometry, WeightedTriangulation};

/// Radii must stay in `[RADIUS_FLOOR, RADIUS_CEILING]`.
pub const RADIUS_FLOOR: f64 = 1e-8;
pub const RADIUS_CEILING: f64 = 1e8;
/// Relative triangle slack below which a genuine flow reports a removable singularity.
pub const FACE_SLACK_FLOOR: f64 = 1e-12;
/// A step is abandoned once it has been halved this many times below the nominal step.
pub const MAX_HALVINGS: u32 = 20;
/// Absolute lower bound on the step size.
pub const MIN_STEP: f64 = 1e-14;
/// Steps that change any radius by more than this fraction are retried with half the step.
pub const MAX_RELATIVE_CHANGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FlowKind {
    NormalizedEuclidean,
    ModifiedEuclidean,
    ExtendedEuclidean,
    ModifiedHyperbolic,
    ExtendedHyperbolic,
    AlphaNormalized,
    AlphaModified,
    AlphaExtended,
}

impl FlowKind {
    pub const ALL: [FlowKind; 8] = [
        FlowKind::NormalizedEuclidean,
        FlowKind::ModifiedEuclidean,
        FlowKind::ExtendedEuclidean,
        FlowKind::ModifiedHyperbolic,
        FlowKind::ExtendedHyperbolic,
        FlowKind::AlphaNormalized,
        FlowKind::AlphaModified,
        FlowKind::AlphaExtended,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlowKind::NormalizedEuclidean => "normalized-euclidean",
            FlowKind::ModifiedEuclidean => "modified-euclidean",
            FlowKind::ExtendedEuclidean => "extended-euclidean",
            FlowKind::ModifiedHyperbolic => "modified-hyperbolic",
            FlowKind::ExtendedHyperbolic => "extended-hyperbolic",
            FlowKind::AlphaNormalized => "alpha-normalized",
            FlowKind::AlphaModified => "alpha-modified",
            FlowKind::AlphaExtended => "alpha-extended",
        }
    }

    /// Extended kinds use constant-extended angles and may leave the admissible space.
    pub fn is_extended(self) -> bool {
        matches!(self, FlowKind::ExtendedEuclidean | FlowKind::ExtendedHyperbolic | FlowKind::AlphaExtended)
    }

    pub fn is_alpha(self) -> bool {
        matches!(self, FlowKind::AlphaNormalized | FlowKind::AlphaModified | FlowKind::AlphaExtended)
    }

    pub fn is_normalized(self) -> bool {
        matches!(self, FlowKind::NormalizedEuclidean | FlowKind::AlphaNormalized)
    }

    /// The background geometry the kind is restricted to, if any.
    pub fn geometry(self) -> Option<Geometry> {
        match self {
            FlowKind::NormalizedEuclidean
            | FlowKind::ModifiedEuclidean
            | FlowKind::ExtendedEuclidean
            | FlowKind::AlphaNormalized => Some(Geometry::Euclidean),
            FlowKind::ModifiedHyperbolic | FlowKind::ExtendedHyperbolic => Some(Geometry::Hyperbolic),
            FlowKind::AlphaModified | FlowKind::AlphaExtended => None,
        }
    }

    /// Whether a prescribed target is mandatory on a surface of the given geometry.
    pub fn requires_target(self, geometry: Geometry) -> bool {
        match self {
            FlowKind::ModifiedEuclidean
            | FlowKind::ModifiedHyperbolic
            | FlowKind::ExtendedHyperbolic
            | FlowKind::AlphaModified => true,
            FlowKind::AlphaExtended => geometry == Geometry::Hyperbolic,
            _ => false,
        }
    }
}

impl fmt::Display for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        FlowKind::ALL
            .into_iter()
            .find(|k| k.name().replace('-', "") == key)
            .ok_or_else(|| format!("unknown flow kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

impl FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Integrator::Rk4),
            "euler" => Ok(Integrator::Euler),
            _ => Err(format!("unknown integrator `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub kind: FlowKind,
    /// Exponent of the alpha-kinds; the R-flows always use 2.
    pub alpha: f64,
    pub target: Option<Vec<f64>>,
    /// Nominal time step.
    pub step: f64,
    pub t_max: f64,
    /// Converged once `max_i |C_i - T_i|` drops below this.
    pub tol: f64,
    pub integrator: Integrator,
}

impl FlowSpec {
    pub fn new(kind: FlowKind) -> Self {
        FlowSpec { kind, alpha: 2.0, target: None, step: 0.01, t_max: 100.0, tol: 1e-8, integrator: Integrator::Rk4 }
    }

    pub fn with_target(mut self, target: Vec<f64>) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    /// The exponent the flowed curvature is normalized by.
    pub fn effective_alpha(&self) -> f64 {
        if self.kind.is_alpha() {
            self.alpha
        } else {
            2.0
        }
    }

    fn rate(&self) -> f64 {
        if self.kind.is_alpha() {
            1.0
        } else {
            0.5
        }
    }

    pub fn validate(&self, surface: &WeightedTriangulation) -> Result<(), FlowError> {
        let geometry = surface.geometry();
        let bad = |msg: String| Err(FlowError::Spec(msg));
        if let Some(required) = self.kind.geometry() {
            if required != geometry {
                return bad(format!("{} needs a {required} surface, got {geometry}", self.kind));
            }
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("time horizon must be positive, got {}", self.t_max));
        }
        if !self.alpha.is_finite() {
            return bad("alpha must be finite".into());
        }
        match &self.target {
            None if self.kind.requires_target(geometry) => bad(format!("{} needs a target curvature", self.kind)),
            Some(_) if self.kind.is_normalized() => bad(format!("{} flows towards the average and takes no target", self.kind)),
            Some(t) if t.len() != surface.vertex_count() => {
                bad(format!("target has {} values for {} vertices", t.len(), surface.vertex_count()))
            }
            Some(t) if t.iter().any(|x| !x.is_finite()) => bad("target values must be finite".into()),
            _ => Ok(()),
        }
    }

    /// First vertex where the target violates `alpha * Rbar_i <= 0` (`Rbar_i <= 0` for R-flows).
    pub fn sign_violation(&self) -> Option<usize> {
        let alpha = self.effective_alpha();
        self.target.as_ref()?.iter().position(|&x| alpha * x > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    EssentialSingularity,
    RemovableSingularity,
    LeftAdmissible,
    ReenteredAdmissible,
    Converged,
    HorizonReached,
    /// The target breaks the sign condition the convergence theory relies on.
    TargetSignWarning,
}

impl EventKind {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            EventKind::EssentialSingularity
                | EventKind::RemovableSingularity
                | EventKind::Converged
                | EventKind::HorizonReached
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowEvent {
    pub t: f64,
    pub kind: EventKind,
    /// Vertex index for singularities at a radius and sign warnings, face index for
    /// removable singularities and admissibility changes.
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub radii: Vec<f64>,
    pub max_err: f64,
    /// `sum r_i^2` in Euclidean geometry, total area in hyperbolic geometry.
    pub measure: f64,
    /// Whether some face is degenerate.
    pub extended_region: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub events: Vec<FlowEvent>,
}

impl FlowTrace {
    pub fn terminal(&self) -> Option<&FlowEvent> {
        self.events.iter().rev().find(|e| e.kind.is_terminal())
    }

    pub fn first(&self, kind: EventKind) -> Option<&FlowEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }

    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        let n = self.rows.first().map_or(0, |r| r.radii.len());
        let mut header = vec!["t".to_string()];
        header.extend((0..n).map(|i| format!("r_{i}")));
        header.extend(["max_err", "measure", "extended_region"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let mut fields = vec![format_real(row.t)];
            fields.extend(row.radii.iter().map(|&r| format_real(r)));
            fields.push(format_real(row.max_err));
            fields.push(format_real(row.measure));
            fields.push(u8::from(row.extended_region).to_string());
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn events_json(&self) -> String {
        serde_json::to_string_pretty(&self.events).expect("events serialize")
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub trace: FlowTrace,
    pub metric: PackingMetric,
    pub steps: usize,
}

impl FlowOutcome {
    pub fn status(&self) -> EventKind {
        self.trace.terminal().map(|e| e.kind).expect("every finished run has a terminal event")
    }
}

#[derive(Debug, Clone, Error)]
pub enum FlowError {
    #[error("invalid flow specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("metric is not admissible (face {face} violates the triangle inequality)")]
    Inadmissible { face: usize },
    #[error("step size fell below {MIN_STEP:e} at t = {t}")]
    StepUnderflow { t: f64, trace: Box<FlowTrace> },
}

impl From<GeomError> for FlowError {
    fn from(e: GeomError) -> Self {
        FlowError::Curvature(e.into())
    }
}

struct Evaluation {
    rhs: Vec<f64>,
    curvature: Vec<f64>,
    target: Vec<f64>,
    max_err: f64,
    /// First violating face, if any.
    violating_face: Option<usize>,
    min_slack: (f64, usize),
}

fn evaluate(surface: &WeightedTriangulation, radii: &[f64], spec: &FlowSpec) -> Result<Evaluation, FlowError> {
    check_radii(radii, surface.vertex_count())?;
    let geometry = surface.geometry();
    let mut violating_face = None;
    let mut min_slack = (f64::INFINITY, 0);
    for f in 0..surface.faces().len() {
        let l = face_lengths(surface, radii, f)?;
        let slack = face_slack(l);
        if slack < min_slack.0 {
            min_slack = (slack, f);
        }
        if violating_face.is_none() && !face_admissible(l) {
            violating_face = Some(f);
        }
    }
    let extended = spec.kind.is_extended();
    if let (false, Some(face)) = (extended, violating_face) {
        return Err(FlowError::Inadmissible { face });
    }

    let alpha = spec.effective_alpha();
    let k = classical_curvature(surface, radii, extended)?;
    let curvature = divide_by_s_pow(&k, radii, alpha, geometry);
    let target = match &spec.target {
        Some(t) => t.clone(),
        None => vec![average_from_radii(surface.euler_characteristic(), radii, alpha); radii.len()],
    };
    let c = spec.rate();
    let rhs = (0..radii.len())
        .map(|i| {
            let f = match geometry {
                Geometry::Euclidean => radii[i],
                Geometry::Hyperbolic => radii[i].sinh(),
            };
            c * (target[i] - curvature[i]) * f
        })
        .collect();
    let max_err = curvature.iter().zip(&target).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Evaluation { rhs, curvature, target, max_err, violating_face, min_slack })
}

/// Time derivative of the radii under `spec`.
pub fn flow_rhs(surface: &WeightedTriangulation, radii: &[f64], spec: &FlowSpec) -> Result<Vec<f64>, FlowError> {
    spec.validate(surface)?;
    Ok(evaluate(surface, radii, spec)?.rhs)
}

/// Flowed curvature and target at `radii`, as `(C, T)`.
pub fn curvature_and_target(
    surface: &WeightedTriangulation,
    radii: &[f64],
    spec: &FlowSpec,
) -> Result<(Vec<f64>, Vec<f64>), FlowError> {
    spec.validate(surface)?;
    let e = evaluate(surface, radii, spec)?;
    Ok((e.curvature, e.target))
}

#[derive(Debug, Clone, Copy)]
enum StepFailure {
    Face(usize),
    Radius(usize),
}

fn in_range(radii: &[f64]) -> Result<(), StepFailure> {
    match radii.iter().position(|r| !(RADIUS_FLOOR..=RADIUS_CEILING).contains(r)) {
        Some(i) => Err(StepFailure::Radius(i)),
        None => Ok(()),
    }
}

fn stage(
    surface: &WeightedTriangulation,
    radii: &[f64],
    spec: &FlowSpec,
) -> Result<Result<Evaluation, StepFailure>, FlowError> {
    if let Err(f) = in_range(radii) {
        return Ok(Err(f));
    }
    match evaluate(surface, radii, spec) {
        Ok(e) if e.rhs.iter().all(|x| x.is_finite()) => Ok(Ok(e)),
        Ok(e) => Ok(Err(StepFailure::Radius(e.rhs.iter().position(|x| !x.is_finite()).unwrap_or(0)))),
        Err(FlowError::Inadmissible { face }) => Ok(Err(StepFailure::Face(face))),
        Err(other) => Err(other),
    }
}

fn axpy(r: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    r.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One integrator step of size `h` from `radii` whose evaluation is `current`.
fn attempt(
    surface: &WeightedTriangulation,
    radii: &[f64],
    current: &Evaluation,
    h: f64,
    spec: &FlowSpec,
) -> Result<Result<(Vec<f64>, Evaluation), StepFailure>, FlowError> {
    let next = match spec.integrator {
        Integrator::Euler => axpy(radii, h, &current.rhs),
        Integrator::Rk4 => {
            let k1 = &current.rhs;
            let k2 = match stage(surface, &axpy(radii, 0.5 * h, k1), spec)? {
                Ok(e) => e.rhs,
                Err(f) => return Ok(Err(f)),
            };
            let k3 = match stage(surface, &axpy(radii, 0.5 * h, &k2), spec)? {
                Ok(e) => e.rhs,
                Err(f) => return Ok(Err(f)),
            };
            let k4 = match stage(surface, &axpy(radii, h, &k3), spec)? {
                Ok(e) => e.rhs,
                Err(f) => return Ok(Err(f)),
            };
            (0..radii.len()).map(|i| radii[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
        }
    };
    if let Some(i) = (0..radii.len()).find(|&i| (next[i] - radii[i]).abs() > MAX_RELATIVE_CHANGE * radii[i]) {
        return Ok(Err(StepFailure::Radius(i)));
    }
    Ok(stage(surface, &next, spec)?.map(|e| (next, e)))
}

fn measure(surface: &WeightedTriangulation, radii: &[f64]) -> Result<f64, FlowError> {
    Ok(match surface.geometry() {
        Geometry::Euclidean => radii.iter().map(|r| r * r).sum(),
        Geometry::Hyperbolic => total_area(surface, radii)?,
    })
}

struct Recorder<'a> {
    surface: &'a WeightedTriangulation,
    trace: FlowTrace,
}

impl Recorder<'_> {
    fn row(&mut self, t: f64, radii: &[f64], e: &Evaluation) -> Result<(), FlowError> {
        if self.trace.rows.last().is_some_and(|r| r.t == t) {
            return Ok(());
        }
        self.trace.rows.push(TraceRow {
            t,
            radii: radii.to_vec(),
            max_err: e.max_err,
            measure: measure(self.surface, radii)?,
            extended_region: e.violating_face.is_some(),
        });
        Ok(())
    }

    fn event(&mut self, t: f64, kind: EventKind, index: Option<usize>) {
        self.trace.events.push(FlowEvent { t, kind, index });
    }
}

/// Integrates the flow from `r0` until convergence, the time horizon, or a singularity.
///
/// Genuine kinds require an admissible start; a start outside the admissible space is
/// an `Inadmissible` error, not an event.
pub fn run_flow(surface: &WeightedTriangulation, r0: &[f64], spec: &FlowSpec) -> Result<FlowOutcome, FlowError> {
    spec.validate(surface)?;
    let geometry = surface.geometry();
    let mut radii = r0.to_vec();
    let mut current = evaluate(surface, &radii, spec)?;
    let mut rec = Recorder { surface, trace: FlowTrace::default() };
    let mut t = 0.0;
    let mut steps = 0usize;
    let sample_every = ((0.1 / spec.step).floor() as usize).max(1);
    let min_step = spec.step / f64::powi(2.0, MAX_HALVINGS as i32);

    if let Some(i) = spec.sign_violation() {
        rec.event(0.0, EventKind::TargetSignWarning, Some(i));
    }
    rec.row(0.0, &radii, &current)?;
    if let Some(face) = current.violating_face {
        rec.event(0.0, EventKind::LeftAdmissible, Some(face));
    }

    let finish = |rec: Recorder, radii: Vec<f64>, steps| -> Result<FlowOutcome, FlowError> {
        Ok(FlowOutcome { trace: rec.trace, metric: PackingMetric::new(radii, geometry)?, steps })
    };

    if current.max_err < spec.tol {
        rec.event(0.0, EventKind::Converged, None);
        return finish(rec, radii, steps);
    }

    let mut h_nominal = spec.step;
    loop {
        let remaining = spec.t_max - t;
        if remaining <= 1e-12 * spec.t_max {
            rec.row(t, &radii, &current)?;
            rec.event(t, EventKind::HorizonReached, None);
            return finish(rec, radii, steps);
        }
        let mut h = h_nominal.min(remaining);
        let accepted = loop {
            match attempt(surface, &radii, &current, h, spec)? {
                Ok(ok) => break Ok(ok),
                Err(failure) => {
                    if h < MIN_STEP {
                        rec.row(t, &radii, &current)?;
                        return Err(FlowError::StepUnderflow { t, trace: Box::new(rec.trace) });
                    }
                    if h < min_step {
                        break Err(failure);
                    }
                    h *= 0.5;
                }
            }
        };
        let (next, eval) = match accepted {
            Ok(pair) => pair,
            Err(failure) => {
                rec.row(t, &radii, &current)?;
                match failure {
                    StepFailure::Face(face) => rec.event(t, EventKind::RemovableSingularity, Some(face)),
                    StepFailure::Radius(i) => rec.event(t, EventKind::EssentialSingularity, Some(i)),
                }
                return finish(rec, radii, steps);
            }
        };

        t += h;
        steps += 1;
        h_nominal = (2.0 * h).min(spec.step);
        let was_outside = current.violating_face.is_some();
        radii = next;
        current = eval;

        let mut record = steps.is_multiple_of(sample_every);
        if spec.kind.is_extended() {
            match (was_outside, current.violating_face) {
                (false, Some(face)) => {
                    rec.event(t, EventKind::LeftAdmissible, Some(face));
                    record = true;
                }
                (true, None) => {
                    rec.event(t, EventKind::ReenteredAdmissible, None);
                    record = true;
                }
                _ => {}
            }
        } else if current.min_slack.0 < FACE_SLACK_FLOOR {
            rec.row(t, &radii, &current)?;
            rec.event(t, EventKind::RemovableSingularity, Some(current.min_slack.1));
            return finish(rec, radii, steps);
        }
        if record {
            rec.row(t, &radii, &current)?;
        }
        if current.max_err < spec.tol {
            rec.row(t, &radii, &current)?;
            rec.event(t, EventKind::Converged, None);
            return finish(rec, radii, steps);
        }
    }
}

/// Largest componentwise gap between two evaluations of `dR_alpha/dt` along a normalized
/// flow: the chain rule through the curvature Jacobian, and
/// `Delta R + R (R - R_av)` (R-flow) or `Delta_alpha R_alpha + alpha R_alpha (R_alpha - R_alpha,av)`
/// (alpha-flow, Laplacian taken against `ln r`).
pub fn check_evolution_identity(
    surface: &WeightedTriangulation,
    radii: &[f64],
    spec: &FlowSpec,
) -> Result<f64, FlowError> {
    if !spec.kind.is_normalized() {
        return Err(FlowError::Spec(format!("the evolution identity concerns normalized flows, not {}", spec.kind)));
    }
    spec.validate(surface)?;
    let e = evaluate(surface, radii, spec)?;
    let jac = curvature_jacobian(surface, radii)?;
    let alpha = spec.effective_alpha();
    let n = radii.len();

    let log_rate: Vec<f64> = (0..n).map(|i| e.rhs[i] / radii[i]).collect();
    let du: Vec<f64> = log_rate.iter().map(|x| 2.0 * x).collect();
    let chain: Vec<f64> = (0..n)
        .map(|i| {
            let dk: f64 = (0..n).map(|j| jac.matrix[(i, j)] * du[j]).sum();
            dk / radii[i].powf(alpha) - alpha * e.curvature[i] * log_rate[i]
        })
        .collect();

    let (convention, factor) = match spec.kind {
        FlowKind::AlphaNormalized => (UConvention::LogS, alpha),
        _ => (UConvention::LogS2, 1.0),
    };
    let lap = laplacian_apply_with(&jac, radii, &e.curvature, alpha, convention)?;
    let avg = e.target[0];
    Ok((0..n)
        .map(|i| {
            let rhs = lap[i] + factor * e.curvature[i] * (e.curvature[i] - avg);
            (chain[i] - rhs).abs()
        })
        .fold(0.0, f64::max))
}
