//! Experiment drivers. Every unit of work becomes one record.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiment::config::{ExperimentConfig, ExperimentKind};
use crate::experiment::records::{timestamp_from_env, RecordHeader, RecordSink, Status};
use crate::field::{field_energy, VectorPotential};
use crate::grid::{BoxGrid, ScalarField};
use crate::metrics;
use crate::minimize::{fitted_error_constant, hydrogen_bound_check, minimize_field, normalized_gaps_decrease, verify_bound_sweep, BoundRecord, SweepOptions};
use crate::operator::{build_dirichlet_hamiltonian, neg_trace_with};
use crate::semiclassics::{weyl_count, weyl_estimate};
use crate::tf::{
    c_tf_closed_form, c_tf_closed_form_flipped, compute_c_tf, minimize_tf_functional, solve_tf_ode, tf_density_from_screening,
    tf_energy_terms, TfMinimizeOptions,
};

/// What a finished run produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSummary {
    pub records: usize,
    pub all_converged: bool,
}

#[derive(Debug)]
pub enum RunError {
    /// Found before the records file was created; nothing was written.
    Config(Error),
    /// Failure mid-run; the `records` already written stay on disk.
    Failed { error: Error, records: usize },
}

impl RunError {
    /// Process exit status: 2 for config errors, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Failed { .. } => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::Failed { error, records } => write!(f, "{error} ({records} record(s) kept)"),
        }
    }
}

/// Things prepared before the output file is touched, so any problem with
/// them is a config error and leaves no file behind.
struct Prepared {
    grid: Option<Arc<BoxGrid>>,
    well: Option<ScalarField>,
}

fn as_config_error(e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::Config {
            line: 0,
            message: other.to_string(),
        },
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    match cfg.experiment {
        ExperimentKind::TfConstant => Ok(Prepared { grid: None, well: None }),
        ExperimentKind::HydrogenCheck => Ok(Prepared {
            grid: Some(cfg.grid()?),
            well: None,
        }),
        _ => {
            let grid = cfg.grid()?;
            let well = cfg.potential.build(&grid)?;
            Ok(Prepared {
                grid: Some(grid),
                well: Some(well),
            })
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> std::result::Result<RunSummary, RunError> {
    let prep = prepare(cfg).map_err(|e| RunError::Config(as_config_error(e)))?;
    let header = RecordHeader {
        experiment: cfg.experiment.name().to_string(),
        config_hash: cfg.hash.clone(),
        seed: cfg.seed,
        timestamp: timestamp_from_env(),
    };
    let mut sink = RecordSink::create(&cfg.output_path, header).map_err(|e| {
        RunError::Config(Error::Config {
            line: 0,
            message: format!("cannot create {}: {e}", cfg.output_path.display()),
        })
    })?;
    let res = match cfg.experiment {
        ExperimentKind::TfConstant => tf_constant(cfg, &mut sink),
        ExperimentKind::WeylSweep => weyl_sweep(cfg, &prep, &mut sink),
        ExperimentKind::FieldMin => field_min(cfg, &prep, &mut sink),
        ExperimentKind::HydrogenCheck => hydrogen_check(cfg, &prep, &mut sink),
        ExperimentKind::BoundSweep => bound_sweep(cfg, &prep, &mut sink),
    };
    match res {
        Ok(all_converged) => Ok(RunSummary {
            records: sink.written(),
            all_converged,
        }),
        Err(error) => Err(RunError::Failed {
            error,
            records: sink.written(),
        }),
    }
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Converged
    } else {
        Status::NotConverged
    }
}

fn tf_constant(cfg: &ExperimentConfig, sink: &mut RecordSink) -> Result<bool> {
    let chi = solve_tf_ode(cfg.tf_tolerance)?;
    let rho = tf_density_from_screening(&chi, 1.0)?;
    let terms = tf_energy_terms(&rho)?;
    let c_tf = compute_c_tf(&rho)?;
    sink.write(
        "ode",
        Status::Converged,
        metrics! {
            "slope" => chi.initial_slope(),
            "ode_residual" => chi.residual(),
            "e_tf" => terms.total(),
            "c_tf" => c_tf,
            "charge_residual" => rho.charge_residual(),
            "virial" => terms.virial(),
            "c_tf_closed_form" => c_tf_closed_form(),
            "c_tf_closed_form_flipped" => c_tf_closed_form_flipped(),
        },
    )?;
    let opts = TfMinimizeOptions::default();
    let min = minimize_tf_functional(rho.radial.grid().clone(), 1.0, &rho.radial, opts)?;
    let ok = min.iterations < opts.max_iters;
    sink.write(
        "functional",
        status(ok),
        metrics! {
            "slope" => chi.initial_slope(),
            "e_tf" => min.energy,
            "c_tf" => -min.energy,
            "charge_residual" => min.density.charge_residual(),
            "iterations" => min.iterations,
            "rel_diff_c_tf" => (-min.energy - c_tf).abs() / c_tf,
        },
    )?;
    Ok(ok)
}

fn h_unit(h: f64) -> String {
    format!("h={h}")
}

fn weyl_sweep(cfg: &ExperimentConfig, prep: &Prepared, sink: &mut RecordSink) -> Result<bool> {
    let (grid, v) = (prep.grid.as_ref().unwrap(), prep.well.as_ref().unwrap());
    let mult = cfg.energy.multiplicity;
    let mut all = true;
    for &h in &cfg.h_list {
        let op = build_dirichlet_hamiltonian(h, v, grid)?;
        let mut eig = cfg.energy.eigen.clone();
        eig.count_hint = Some(weyl_count(v, h, 1).ceil() as usize + 2);
        let spec = match neg_trace_with(&op, mult, &eig) {
            Ok(s) => s,
            Err(Error::NotConverged { partial, .. }) => *partial,
            Err(e) => return Err(e),
        };
        let weyl = weyl_estimate(v, h, mult);
        all &= spec.converged;
        sink.write(
            &h_unit(h),
            status(spec.converged),
            metrics! {
                "h" => h,
                "neg_trace" => spec.neg_trace,
                "weyl" => weyl,
                "rel_err" => (spec.neg_trace - weyl).abs() / weyl.abs(),
                "count" => spec.count,
                "residual_bound" => spec.residual_bound,
                "next_eigenvalue" => spec.next_eigenvalue,
                "iterations" => spec.iterations,
            },
        )?;
    }
    Ok(all)
}

fn start_field(grid: &Arc<BoxGrid>, band: usize, rms: f64, seed: u64) -> Result<VectorPotential> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorPotential::random_band_limited(grid.clone(), band, rms, &mut rng)
}

fn field_min(cfg: &ExperimentConfig, prep: &Prepared, sink: &mut RecordSink) -> Result<bool> {
    let (grid, v) = (prep.grid.as_ref().unwrap(), prep.well.as_ref().unwrap());
    let mut all = true;
    for (i, &h) in cfg.h_list.iter().enumerate() {
        let e = cfg.energy.with_h(h);
        let a0 = start_field(grid, cfg.start_band, cfg.start_rms, cfg.seed.wrapping_add(i as u64))?;
        let (res, ok) = match minimize_field(&a0, v, &e, &cfg.minimize) {
            Ok(r) => {
                let ok = r.converged || r.stagnated;
                (r, ok)
            }
            Err(Error::NotConverged { iterations, residual, .. }) => {
                all = false;
                sink.write(
                    &h_unit(h),
                    Status::NotConverged,
                    metrics! {"h" => h, "eigen_iterations" => iterations, "eigen_residual" => residual},
                )?;
                continue;
            }
            Err(e) => return Err(e),
        };
        all &= ok;
        sink.write(
            &h_unit(h),
            status(ok),
            metrics! {
                "h" => h,
                "lambda" => e.lambda(),
                "e_nf" => res.baseline_energy,
                "total_energy" => res.total_energy,
                "b_energy" => field_energy(&res.a_star).b_energy,
                "iterations" => res.iterations,
                "grad_norm_final" => res.grad_norm_final,
                "converged" => res.converged,
                "stagnated" => res.stagnated,
                "subgradient" => res.subgradient,
                "max_divergence_ratio" => res.max_divergence_ratio,
                "descent_history" => res.descent_history,
            },
        )?;
    }
    Ok(all)
}

fn bound_metrics(r: &BoundRecord) -> Map<String, Value> {
    match serde_json::to_value(r) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

fn bound_sweep(cfg: &ExperimentConfig, prep: &Prepared, sink: &mut RecordSink) -> Result<bool> {
    let v = prep.well.as_ref().unwrap();
    let mut all = true;
    let mut rows = Vec::new();
    for (i, &h) in cfg.h_list.iter().enumerate() {
        let opts = SweepOptions {
            minimize: cfg.minimize.clone(),
            start_band: cfg.start_band,
            start_rms: cfg.start_rms,
            seed: cfg.seed.wrapping_add(i as u64),
        };
        let r = verify_bound_sweep(v, &[h], &cfg.energy, &opts)?.remove(0);
        all &= r.usable;
        sink.write(&h_unit(h), status(r.usable), bound_metrics(&r))?;
        rows.push(r);
    }
    let usable: Vec<&BoundRecord> = rows.iter().filter(|r| r.usable).collect();
    sink.write(
        "summary",
        status(all),
        metrics! {
            "fitted_error_constant" => fitted_error_constant(&rows),
            "all_bounds_hold" => usable.iter().all(|r| r.bound_holds),
            "normalized_gap_decreasing" => normalized_gaps_decrease(&rows),
        },
    )?;
    Ok(all)
}

fn hydrogen_check(cfg: &ExperimentConfig, prep: &Prepared, sink: &mut RecordSink) -> Result<bool> {
    let grid = prep.grid.as_ref().unwrap();
    let mut all = true;
    for (ci, &c) in cfg.hydrogen_c.iter().enumerate() {
        for s in 0..=cfg.hydrogen_samples {
            let a = if s == 0 {
                VectorPotential::zeros(grid.clone())
            } else {
                let seed = cfg.seed.wrapping_mul(1000).wrapping_add((ci * 100 + s) as u64);
                start_field(grid, cfg.hydrogen_band, cfg.hydrogen_rms * c, seed)?
            };
            let unit = format!("c={c},sample={s}");
            match hydrogen_bound_check(c, &a, grid, cfg.hydrogen_tol, &cfg.energy.eigen) {
                Ok(rep) => sink.write(
                    &unit,
                    Status::Converged,
                    metrics! {
                        "c" => c,
                        "sample" => s,
                        "field_max" => a.norm_max(),
                        "lowest" => rep.lowest,
                        "bound" => rep.bound,
                        "ratio" => rep.ratio,
                        "holds" => rep.holds,
                    },
                )?,
                Err(Error::NotConverged { iterations, residual, .. }) => {
                    all = false;
                    sink.write(
                        &unit,
                        Status::NotConverged,
                        metrics! {"c" => c, "sample" => s, "eigen_iterations" => iterations, "eigen_residual" => residual},
                    )?
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(all)
}
