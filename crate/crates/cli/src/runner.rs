//! Scenario execution: dispatch to the computational modules, atomic
//! output writing, digests, and the run report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use wigprop::caldeira::{
    estimate_phase_space_kernel, langevin_sample, momentum_kernel, CLParams, InitialEnsemble,
    Stepper,
};
use wigprop::classical::flow_map;
use wigprop::grid::UniformGrid;
use wigprop::influence::{
    kernels_from_spectral_density, phase_collection, phase_continuum, Coupling, OscillatorInitial,
    OscillatorSpec, PathPair,
};
use wigprop::io::{
    read_grid_csv, write_atomic, write_grid_csv, write_histogram_csv, write_kernels_csv,
};
use wigprop::liouville::{l1_distance, liouville_oracle, stable_step_count};
use wigprop::propagator::{propagate_gaussian, propagate_grid};
use wigprop::states::{gaussian_packet, thermal_oscillator, GaussianWignerState, GridWignerState};

use crate::error::CliError;
use crate::scenario::{
    BathJson, ClInitialJson, ClScenario, CouplingJson, GridJson, InfluenceScenario,
    InitialStateJson, KernelsScenario, OscInitialJson, OscillatorJson, PathsJson, QuadScenario,
    Scenario,
};

/// Execution options from the command line.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Cross-check grid propagation against the Liouville oracle.
    pub oracle: bool,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Directory of the scenario file, for relative CSV references.
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Value,
    pub version: String,
    pub wall_time_s: f64,
    pub diagnostics: Value,
    pub outputs: Vec<OutputRecord>,
}

struct OutputSink {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

impl OutputSink {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(CliError::io)?;
        Ok(Self { dir: dir.to_path_buf(), records: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes).map_err(CliError::io)?;
        let digest = Sha256::digest(bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.records.push(OutputRecord { path: path.display().to_string(), sha256: hex });
        Ok(())
    }

    fn write_json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Run a validated scenario: dispatch, write outputs atomically, return
/// the report with digests. The report itself is written as
/// `report.json` (not listed among the digested outputs since it embeds
/// the wall time).
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut sink = OutputSink::new(&opts.out_dir)?;
    let diagnostics = match scenario {
        Scenario::Quad(quad) => run_quad(quad, opts, &mut sink)?,
        Scenario::Influence(influence) => run_influence(influence, opts, &mut sink)?,
        Scenario::Kernels(kernels) => run_kernels(kernels, &mut sink)?,
        Scenario::Cl(cl) => run_cl(cl, opts, &mut sink)?,
    };
    let report = RunReport {
        scenario: serde_json::to_value(scenario).map_err(CliError::io)?,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        diagnostics,
        outputs: sink.records.clone(),
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(CliError::io)?;
    text.push('\n');
    write_atomic(&opts.out_dir.join("report.json"), text.as_bytes()).map_err(CliError::io)?;
    Ok(report)
}

fn initial_gaussian(
    initial: &InitialStateJson,
    hbar: f64,
) -> Result<Option<GaussianWignerState>, CliError> {
    match initial {
        InitialStateJson::Packet { u0, p0, delta } => gaussian_packet(*u0, *p0, *delta, hbar)
            .map(Some)
            .map_err(|e| CliError::Schema { field: "initial".into(), message: e.to_string() }),
        InitialStateJson::Gaussian { mean, cov } => GaussianWignerState::new(*mean, *cov, hbar)
            .map(Some)
            .map_err(|e| CliError::Schema { field: "initial".into(), message: e.to_string() }),
        InitialStateJson::Thermal { mass, omega, beta } => {
            thermal_oscillator(*mass, *omega, *beta, hbar)
                .map(Some)
                .map_err(|e| CliError::Schema { field: "initial".into(), message: e.to_string() })
        }
        InitialStateJson::GridCsv(_) => Ok(None),
    }
}

fn load_grid_initial(
    quad: &QuadScenario,
    opts: &RunOptions,
) -> Result<GridWignerState, CliError> {
    match &quad.initial {
        InitialStateJson::GridCsv(rel) => {
            let path = opts.base_dir.join(rel);
            let file = std::fs::File::open(&path)
                .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
            read_grid_csv(file, quad.hbar).map_err(CliError::numerical)
        }
        other => {
            let gaussian = initial_gaussian(other, quad.hbar)?.expect("non-csv initial");
            let grid = quad.grid.as_ref().ok_or_else(|| CliError::Schema {
                field: "grid".into(),
                message: "grid pipeline needs a grid specification".into(),
            })?;
            let (x_axis, p_axis) = axes_of(grid)?;
            gaussian.render(&x_axis, &p_axis).map_err(CliError::numerical)
        }
    }
}

fn axes_of(grid: &GridJson) -> Result<(UniformGrid, UniformGrid), CliError> {
    let x_axis = UniformGrid::from_span(grid.x_min, grid.x_max, grid.n_x)
        .map_err(|e| CliError::Schema { field: "grid".into(), message: e.to_string() })?;
    let p_axis = UniformGrid::from_span(grid.p_min, grid.p_max, grid.n_p)
        .map_err(|e| CliError::Schema { field: "grid".into(), message: e.to_string() })?;
    Ok((x_axis, p_axis))
}

fn run_quad(
    quad: &QuadScenario,
    opts: &RunOptions,
    sink: &mut OutputSink,
) -> Result<Value, CliError> {
    let n_steps = quad.n_steps.expect("validated scenario fills n_steps");
    let map = flow_map(&quad.potential, quad.t_a, quad.t_b, n_steps)
        .map_err(CliError::numerical)?;
    let grid_mode = quad.grid.is_some() || matches!(quad.initial, InitialStateJson::GridCsv(_));
    if opts.oracle && !grid_mode {
        return Err(CliError::Schema {
            field: "grid".into(),
            message: "--oracle needs the grid pipeline (add a grid specification)".into(),
        });
    }

    if grid_mode {
        let initial = load_grid_initial(quad, opts)?;
        let mut csv = Vec::new();
        write_grid_csv(&initial, &mut csv).map_err(CliError::io)?;
        sink.write("initial.csv", &csv)?;

        let result = propagate_grid(&initial, &map).map_err(CliError::numerical)?;
        let mut csv = Vec::new();
        write_grid_csv(&result.state, &mut csv).map_err(CliError::io)?;
        sink.write("final.csv", &csv)?;

        let mut diagnostics = json!({
            "det_deviation": result.diagnostics.det_deviation,
            "norm_drift": result.diagnostics.norm_drift,
            "escaped_mass": result.diagnostics.escaped_mass,
        });
        if opts.oracle {
            let steps = stable_step_count(&initial, &quad.potential, quad.t_a, quad.t_b);
            let oracle = liouville_oracle(&initial, &quad.potential, quad.t_a, quad.t_b, steps)
                .map_err(CliError::numerical)?;
            let l1 = l1_distance(&result.state, &oracle);
            diagnostics["l1_vs_oracle"] = json!(l1);
            diagnostics["oracle_steps"] = json!(steps);
        }
        sink.write_json("diagnostics.json", &diagnostics)?;
        Ok(diagnostics)
    } else {
        let initial = initial_gaussian(&quad.initial, quad.hbar)?.expect("gaussian pipeline");
        let result = propagate_gaussian(&initial, &map).map_err(CliError::numerical)?;
        sink.write_json(
            "initial_state.json",
            &serde_json::to_value(initial).map_err(CliError::io)?,
        )?;
        sink.write_json(
            "final_state.json",
            &serde_json::to_value(result.state).map_err(CliError::io)?,
        )?;
        let diagnostics = json!({
            "det_deviation": result.diagnostics.det_deviation,
            "norm_drift": result.diagnostics.norm_drift,
        });
        sink.write_json("diagnostics.json", &diagnostics)?;
        Ok(diagnostics)
    }
}

fn load_paths(paths: &PathsJson, base_dir: &Path) -> Result<PathPair, CliError> {
    match paths {
        PathsJson::Inline { t0, dt, x, x_prime } => {
            let times = UniformGrid::new(*t0, *dt, x.len())
                .map_err(|e| CliError::Schema { field: "paths".into(), message: e.to_string() })?;
            PathPair::new(times, x.clone(), x_prime.clone())
                .map_err(|e| CliError::Schema { field: "paths".into(), message: e.to_string() })
        }
        PathsJson::Csv(rel) => {
            let path = base_dir.join(rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            let mut ts = Vec::new();
            let mut xs = Vec::new();
            let mut xps = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                if idx == 0 {
                    if line.trim() != "t,x,x_prime" {
                        return Err(CliError::Schema {
                            field: "paths.csv".into(),
                            message: "expected header t,x,x_prime".into(),
                        });
                    }
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 3 {
                    return Err(CliError::Schema {
                        field: "paths.csv".into(),
                        message: format!("line {} needs 3 fields", idx + 1),
                    });
                }
                let parse = |s: &str| -> Result<f64, CliError> {
                    s.trim().parse::<f64>().map_err(|e| CliError::Schema {
                        field: "paths.csv".into(),
                        message: format!("line {}: {e}", idx + 1),
                    })
                };
                ts.push(parse(fields[0])?);
                xs.push(parse(fields[1])?);
                xps.push(parse(fields[2])?);
            }
            if ts.len() < 2 {
                return Err(CliError::Schema {
                    field: "paths.csv".into(),
                    message: "needs at least 2 rows".into(),
                });
            }
            let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
            for pair in ts.windows(2) {
                if ((pair[1] - pair[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                    return Err(CliError::Schema {
                        field: "paths.csv".into(),
                        message: "time column is not uniform".into(),
                    });
                }
            }
            let times = UniformGrid::new(ts[0], dt, ts.len())
                .map_err(|e| CliError::Schema { field: "paths.csv".into(), message: e.to_string() })?;
            PathPair::new(times, xs, xps)
                .map_err(|e| CliError::Schema { field: "paths.csv".into(), message: e.to_string() })
        }
    }
}

fn to_oscillator(json: &OscillatorJson, hbar: f64) -> Result<OscillatorSpec, CliError> {
    let coupling = match &json.coupling {
        CouplingJson::Bilinear(g) => Coupling::Bilinear(*g),
        CouplingJson::Samples { on_x, on_x_prime } => {
            Coupling::Sampled { on_x: on_x.clone(), on_x_prime: on_x_prime.clone() }
        }
    };
    let initial = match &json.initial {
        OscInitialJson::Vacuum {} => OscillatorInitial::Vacuum,
        OscInitialJson::Thermal { beta } => OscillatorInitial::Thermal { beta: *beta },
        OscInitialJson::Packet { u0, p0, delta } => {
            OscillatorInitial::Packet { u0: *u0, p0: *p0, delta: *delta }
        }
        OscInitialJson::Gaussian { mean, cov } => OscillatorInitial::Gaussian(
            GaussianWignerState::new(*mean, *cov, hbar).map_err(|e| CliError::Schema {
                field: "bath.oscillator.initial".into(),
                message: e.to_string(),
            })?,
        ),
    };
    OscillatorSpec::new(json.mass, json.omega, coupling, initial).map_err(|e| CliError::Schema {
        field: "bath.oscillator".into(),
        message: e.to_string(),
    })
}

fn run_influence(
    influence: &InfluenceScenario,
    opts: &RunOptions,
    sink: &mut OutputSink,
) -> Result<Value, CliError> {
    let paths = load_paths(&influence.paths, &opts.base_dir)?;
    let phi = match &influence.bath {
        BathJson::Oscillator(osc) => {
            let spec = to_oscillator(osc, influence.hbar)?;
            phase_collection(&paths, &[spec], influence.hbar).map_err(CliError::numerical)?
        }
        BathJson::Collection(oscs) => {
            let specs: Vec<OscillatorSpec> = oscs
                .iter()
                .map(|o| to_oscillator(o, influence.hbar))
                .collect::<Result<_, _>>()?;
            phase_collection(&paths, &specs, influence.hbar).map_err(CliError::numerical)?
        }
        BathJson::Kernels(bath) => {
            let t_max = bath.t_max.unwrap_or_else(|| paths.duration());
            let n_t = bath.n_t.unwrap_or_else(|| paths.times().len());
            let kernels = kernels_from_spectral_density(
                &bath.spectral.to_density(),
                bath.beta,
                influence.hbar,
                t_max,
                n_t,
            )
            .map_err(CliError::numerical)?;
            phase_continuum(&paths, &kernels, influence.hbar).map_err(CliError::numerical)?
        }
    };
    let result = json!({
        "re_phi": phi.re,
        "im_phi": phi.im,
        "abs_F": phi.abs_f(influence.hbar),
    });
    sink.write_json("influence.json", &result)?;
    Ok(result)
}

fn run_kernels(kernels: &KernelsScenario, sink: &mut OutputSink) -> Result<Value, CliError> {
    let sampled = kernels_from_spectral_density(
        &kernels.spectral.to_density(),
        kernels.beta,
        kernels.hbar,
        kernels.t_max,
        kernels.n_t,
    )
    .map_err(CliError::numerical)?;
    let mut csv = Vec::new();
    write_kernels_csv(&sampled, &mut csv).map_err(CliError::io)?;
    sink.write("kernels.csv", &csv)?;
    Ok(json!({
        "n_t": kernels.n_t,
        "a_max": sampled.a().iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        "r_at_zero": sampled.r()[0],
    }))
}

fn run_cl(cl: &ClScenario, opts: &RunOptions, sink: &mut OutputSink) -> Result<Value, CliError> {
    let seed = opts.seed.or(cl.seed).ok_or_else(|| CliError::Schema {
        field: "seed".into(),
        message: "seed required for reproducible cl runs (set it in the scenario or pass --seed)"
            .into(),
    })?;
    let params =
        CLParams::new(cl.m, cl.eta, cl.t_bath, cl.k, cl.hbar).map_err(CliError::numerical)?;
    let kernel = momentum_kernel(&params, cl.dt).map_err(CliError::numerical)?;
    let te = wigprop::caldeira::effective_temperature(&params, cl.dt)
        .map_err(CliError::numerical)?;

    let initial = match cl.initial.as_ref().expect("validated scenario fills initial") {
        ClInitialJson::Point { x, p } => InitialEnsemble::Point { x: *x, p: *p },
        ClInitialJson::Gaussian { mean, cov } => InitialEnsemble::Gaussian(
            GaussianWignerState::new(*mean, *cov, cl.hbar).map_err(|e| CliError::Schema {
                field: "initial".into(),
                message: e.to_string(),
            })?,
        ),
    };
    let stepper = cl.stepper.unwrap_or(Stepper::ExactOu);
    let n_steps = cl.n_steps.expect("validated scenario fills n_steps");
    let ensemble = langevin_sample(
        &params,
        &initial,
        0.0,
        cl.dt,
        n_steps,
        cl.samples,
        seed,
        stepper,
    )
    .map_err(CliError::numerical)?;

    // closed-form propagated momentum marginal for the KS diagnostic
    let (target_mean, target_var) = match &initial {
        InitialEnsemble::Point { p, .. } => (p * kernel.mean_factor, kernel.variance),
        InitialEnsemble::Gaussian(g) => (
            g.mean[1] * kernel.mean_factor,
            kernel.mean_factor * kernel.mean_factor * g.cov[1][1] + kernel.variance,
        ),
    };
    let ks = wigprop::caldeira::ks_statistic(
        &ensemble.momenta(),
        wigprop::caldeira::normal_cdf(target_mean, target_var),
    );

    if let Some(hist_spec) = &cl.histogram {
        let hist = estimate_phase_space_kernel(&ensemble, hist_spec.n_x, hist_spec.n_p, None)
            .map_err(CliError::numerical)?;
        let mut csv = Vec::new();
        write_histogram_csv(&hist, &mut csv).map_err(CliError::io)?;
        sink.write("histogram.csv", &csv)?;
    }

    let mut result = json!({
        "mean_factor": kernel.mean_factor,
        "sigma2": kernel.variance,
        "Te": te,
        "ks_stat": ks,
        "seed": seed,
        "n_steps": n_steps,
        "tau": params.tau(),
    });
    if let Some(warning) = params.validity_warning() {
        result["warning"] = json!(warning);
        eprintln!("warning: {warning}");
    }
    sink.write_json("cl.json", &result)?;
    Ok(result)
}
