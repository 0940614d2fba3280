//! Scenario documents: JSON schemas for the four run kinds, validation
//! with field-level error reporting, and default filling.

use std::path::Path;

use serde::{Deserialize, Serialize};

use wigprop::influence::{CutoffShape, SpectralDensity, SpectralLine};
use wigprop::potential::{PotentialError, QuadraticPotential};

use crate::error::CliError;

fn one() -> f64 {
    1.0
}

/// A validated scenario of any kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scenario {
    Quad(QuadScenario),
    Influence(InfluenceScenario),
    Kernels(KernelsScenario),
    Cl(ClScenario),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Quad(_) => "quad",
            Scenario::Influence(_) => "influence",
            Scenario::Kernels(_) => "kernels",
            Scenario::Cl(_) => "cl",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadScenario {
    pub potential: QuadraticPotential,
    pub t_a: f64,
    pub t_b: f64,
    /// RK4 resolution; the per-potential default policy fills this.
    #[serde(default)]
    pub n_steps: Option<usize>,
    #[serde(default = "one")]
    pub hbar: f64,
    pub initial: InitialStateJson,
    /// Presence selects the grid pipeline; Gaussian exact otherwise.
    #[serde(default)]
    pub grid: Option<GridJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateJson {
    Packet { u0: f64, p0: f64, delta: f64 },
    Gaussian { mean: [f64; 2], cov: [[f64; 2]; 2] },
    Thermal { mass: f64, omega: f64, beta: f64 },
    /// Path to a grid-state CSV (`x,p,f`), resolved against the scenario
    /// file location.
    GridCsv(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceScenario {
    #[serde(default = "one")]
    pub hbar: f64,
    pub paths: PathsJson,
    pub bath: BathJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathsJson {
    Inline { t0: f64, dt: f64, x: Vec<f64>, x_prime: Vec<f64> },
    /// CSV with header `t,x,x_prime`.
    Csv(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathJson {
    Oscillator(OscillatorJson),
    Collection(Vec<OscillatorJson>),
    Kernels(KernelBathJson),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorJson {
    pub mass: f64,
    pub omega: f64,
    pub coupling: CouplingJson,
    pub initial: OscInitialJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingJson {
    Bilinear(f64),
    Samples { on_x: Vec<f64>, on_x_prime: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscInitialJson {
    Vacuum {},
    Thermal { beta: f64 },
    Packet { u0: f64, p0: f64, delta: f64 },
    Gaussian { mean: [f64; 2], cov: [[f64; 2]; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBathJson {
    pub spectral: SpectralJson,
    pub beta: f64,
    /// Defaults to the path duration.
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Defaults to the path node count (kernels on the path grid).
    #[serde(default)]
    pub n_t: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralJson {
    Lines(Vec<LineJson>),
    Ohmic { eta: f64, omega_c: f64, shape: CutoffShape },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineJson {
    pub omega: f64,
    pub weight: f64,
}

impl SpectralJson {
    pub fn to_density(&self) -> SpectralDensity {
        match self {
            SpectralJson::Lines(lines) => SpectralDensity::Lines(
                lines.iter().map(|l| SpectralLine { omega: l.omega, weight: l.weight }).collect(),
            ),
            SpectralJson::Ohmic { eta, omega_c, shape } => {
                SpectralDensity::Ohmic { eta: *eta, cutoff: *omega_c, shape: *shape }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsScenario {
    pub spectral: SpectralJson,
    pub beta: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub t_max: f64,
    pub n_t: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClScenario {
    pub m: f64,
    pub eta: f64,
    #[serde(rename = "Tb")]
    pub t_bath: f64,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    pub dt: f64,
    pub samples: usize,
    /// Defaults to the step policy keeping `eta dt_step / m < 0.05`.
    #[serde(default)]
    pub n_steps: Option<usize>,
    /// Required (here or via `--seed`) for reproducible ensembles.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub initial: Option<ClInitialJson>,
    #[serde(default)]
    pub stepper: Option<wigprop::caldeira::Stepper>,
    #[serde(default)]
    pub histogram: Option<HistogramJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClInitialJson {
    Point { x: f64, p: f64 },
    Gaussian { mean: [f64; 2], cov: [[f64; 2]; 2] },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramJson {
    pub n_x: usize,
    pub n_p: usize,
}

fn schema_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Schema { field: field.to_string(), message: message.into() }
}

fn check_positive(field: &'static str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(schema_err(field, format!("must be positive and finite, got {value}")))
    }
}

/// Load and validate a scenario document; defaults are filled so the
/// echoed scenario in the run report is explicit.
pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema { field: "<document>".into(), message: e.to_string() })?;
    validate(&mut scenario)?;
    Ok(scenario)
}

/// Validate invariants and fill defaults in place.
pub fn validate(scenario: &mut Scenario) -> Result<(), CliError> {
    match scenario {
        Scenario::Quad(quad) => {
            quad.potential.validate().map_err(|e| match e {
                PotentialError::NonPositiveMass(v) => {
                    schema_err("m", format!("mass must be positive, got {v}"))
                }
                other => schema_err("potential", other.to_string()),
            })?;
            if !(quad.t_b > quad.t_a) {
                return Err(schema_err("t_b", "time interval is empty or reversed"));
            }
            quad.potential.validate_interval(quad.t_a, quad.t_b).map_err(|e| {
                schema_err("coefficient domain", e.to_string())
            })?;
            check_positive("hbar", quad.hbar)?;
            if quad.n_steps.is_none() {
                quad.n_steps = Some(quad.potential.default_steps(quad.t_a, quad.t_b));
            }
            if let InitialStateJson::Packet { delta, .. } = quad.initial {
                check_positive("initial.packet.delta", delta)?;
            }
            if let Some(grid) = &quad.grid {
                if grid.n_x < 8 || grid.n_p < 8 {
                    return Err(schema_err("grid", "grid needs at least 8x8 nodes"));
                }
                if !(grid.x_max > grid.x_min) || !(grid.p_max > grid.p_min) {
                    return Err(schema_err("grid", "grid ranges are empty or reversed"));
                }
            }
            Ok(())
        }
        Scenario::Influence(inf) => {
            check_positive("hbar", inf.hbar)?;
            if let PathsJson::Inline { dt, x, x_prime, .. } = &inf.paths {
                check_positive("paths.dt", *dt)?;
                if x.len() < 2 || x.len() != x_prime.len() {
                    return Err(schema_err(
                        "paths",
                        "x and x_prime need equal lengths of at least 2",
                    ));
                }
            }
            match &inf.bath {
                BathJson::Oscillator(osc) => validate_oscillator(osc)?,
                BathJson::Collection(oscs) => {
                    if oscs.is_empty() {
                        return Err(schema_err("bath.collection", "collection is empty"));
                    }
                    for osc in oscs {
                        validate_oscillator(osc)?;
                    }
                }
                BathJson::Kernels(bath) => {
                    check_positive("bath.kernels.beta", bath.beta)?;
                    validate_spectral(&bath.spectral)?;
                }
            }
            Ok(())
        }
        Scenario::Kernels(kernels) => {
            check_positive("beta", kernels.beta)?;
            check_positive("hbar", kernels.hbar)?;
            check_positive("t_max", kernels.t_max)?;
            if kernels.n_t < 2 {
                return Err(schema_err("n_t", "kernel grid needs at least 2 nodes"));
            }
            validate_spectral(&kernels.spectral)
        }
        Scenario::Cl(cl) => {
            check_positive("m", cl.m)?;
            check_positive("eta", cl.eta)?;
            check_positive("Tb", cl.t_bath)?;
            check_positive("k", cl.k)?;
            check_positive("hbar", cl.hbar)?;
            if cl.dt < 0.0 || !cl.dt.is_finite() {
                return Err(schema_err("dt", "duration must be nonnegative"));
            }
            if cl.samples == 0 {
                return Err(schema_err("samples", "needs at least one sample"));
            }
            if cl.n_steps.is_none() {
                // keep eta dt_step / m comfortably inside the 0.1 guard
                let steps = (cl.dt * cl.eta / (0.05 * cl.m)).ceil() as usize;
                cl.n_steps = Some(steps.max(16));
            }
            if cl.initial.is_none() {
                cl.initial = Some(ClInitialJson::Point { x: 0.0, p: 0.0 });
            }
            if cl.stepper.is_none() {
                cl.stepper = Some(wigprop::caldeira::Stepper::ExactOu);
            }
            Ok(())
        }
    }
}

fn validate_oscillator(osc: &OscillatorJson) -> Result<(), CliError> {
    check_positive("bath.oscillator.mass", osc.mass)?;
    check_positive("bath.oscillator.omega", osc.omega)?;
    match &osc.initial {
        OscInitialJson::Thermal { beta } => check_positive("bath.oscillator.initial.beta", *beta),
        OscInitialJson::Packet { delta, .. } => {
            check_positive("bath.oscillator.initial.delta", *delta)
        }
        _ => Ok(()),
    }
}

fn validate_spectral(spectral: &SpectralJson) -> Result<(), CliError> {
    match spectral {
        SpectralJson::Lines(lines) => {
            if lines.is_empty() {
                return Err(schema_err("spectral.lines", "no lines given"));
            }
            for line in lines {
                check_positive("spectral.lines.omega", line.omega)?;
                if line.weight < 0.0 || !line.weight.is_finite() {
                    return Err(schema_err("spectral.lines.weight", "must be nonnegative"));
                }
            }
            Ok(())
        }
        SpectralJson::Ohmic { eta, omega_c, .. } => {
            check_positive("spectral.ohmic.eta", *eta)?;
            check_positive("spectral.ohmic.omega_c", *omega_c)
        }
    }
}
