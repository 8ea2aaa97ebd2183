use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{ExperimentRow, LayerRow};
use crate::circuits::{Circuit, CircuitEnsemble};
use crate::costs::{heisenberg_observable, qae_observable, qsl_observable, CostSpec, InputState, Observable, Task};
use crate::error::{Error, Result};
use crate::landscape::{
    qsl_bound, theorem1_bound, tight_bound_observable, transfer_tensor_for, variation_range_adam,
    variation_range_exact_m1, variation_range_grid, Method,
};
use crate::linalg::{basis_state, BipartitePartition, KahanSum};
use crate::random::random_state;
use crate::seed::{derive_seed, substream};

/// Environment variable capping the number of worker threads (0 = all cores).
pub const THREADS_ENV: &str = "BARREN_THREADS";

/// Worker count requested through [`THREADS_ENV`]; 0 when unset or unparsable.
pub fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Observable of a task at `n` qubits. The QAE register discards the last qubit.
pub fn task_observable(task: Task, n: usize) -> Result<Observable> {
    match task {
        Task::Vqe => heisenberg_observable(n, true),
        Task::Qae => qae_observable(n, &[n - 1]),
        Task::Qsl => qsl_observable(&basis_state(1 << n, 0)),
    }
}

/// Per-`n` quantities shared by every sample.
struct Point {
    n: usize,
    h: Observable,
    part: BipartitePartition,
    w: f64,
}

impl Point {
    fn new(cfg: &ExperimentConfig, n: usize) -> Result<Self> {
        let h = task_observable(cfg.task, n)?;
        let w = h.spectral_width()?;
        Ok(Self {
            n,
            part: cfg.partition(n)?,
            h,
            w,
        })
    }
}

/// Draws the circuits and input state of sample `k` at `point.n` and returns
/// `Delta / w(H)`.
fn sample_delta(cfg: &ExperimentConfig, point: &Point, k: usize) -> Result<f64> {
    let n = point.n;
    let d = 1usize << n;
    let mut rng = substream(cfg.seed, &[cfg.task.id(), n as u64, k as u64]);
    let rho = match cfg.task {
        Task::Qae => InputState::Pure(random_state(d, &mut rng)),
        Task::Vqe | Task::Qsl => InputState::Pure(basis_state(d, 0)),
    };
    let design = cfg.design(n);
    let identity = CircuitEnsemble::identity(n);
    let v1: Circuit = if cfg.ensemble_config.v1_random() {
        &design
    } else {
        &identity
    }
    .sample(&mut rng)?;
    let v2: Circuit = if cfg.ensemble_config.v2_random() {
        &design
    } else {
        &identity
    }
    .sample(&mut rng)?;
    let spec = CostSpec::new(cfg.task, point.h.clone(), rho, point.part.clone())?;
    let t = transfer_tensor_for(&spec, &v1, &v2)?;
    let result = match cfg.optimizer {
        Method::Exact => variation_range_exact_m1(&t)?,
        Method::Grid => variation_range_grid(&t, cfg.grid_resolution)?,
        Method::Adam => variation_range_adam(&t, &cfg.adam(), &mut rng)?,
    };
    Ok(result.delta / point.w)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().copied().collect::<KahanSum>().value() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).collect::<KahanSum>().value() / (k - 1.0);
    (mean, var.sqrt())
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// [`run_scaling`] with an explicit worker count (0 = all cores).
///
/// Every sample writes to its own slot and slots are reduced in index
/// order, so the rows do not depend on `threads`.
pub fn run_scaling_with_threads(cfg: &ExperimentConfig, threads: usize) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let points = cfg
        .qubit_counts()
        .into_iter()
        .map(|n| Point::new(cfg, n))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.samples).map(move |k| (p, k)))
        .collect();
    let values = with_pool(threads, || {
        jobs.par_iter()
            .map(|&(p, k)| sample_delta(cfg, &points[p], k))
            .collect::<Result<Vec<f64>>>()
    })??;

    let mut rows = Vec::with_capacity(points.len());
    for (point, chunk) in points.iter().zip(values.chunks(cfg.samples)) {
        let (mean, std) = mean_std(chunk);
        let (n, m) = (point.n, cfg.m);
        let bound_general = theorem1_bound(1.0, n, m);
        if cfg.has_two_design_side() && mean > bound_general {
            return Err(Error::BoundViolation(format!(
                "{} n = {n}: mean Delta/w = {mean:e} exceeds {bound_general:e}",
                cfg.task
            )));
        }
        rows.push(ExperimentRow {
            task: cfg.task,
            n,
            m,
            ensemble_config: cfg.ensemble_config,
            samples: cfg.samples,
            mean_delta_over_w: mean,
            std_delta: std,
            bound_general,
            bound_tight: tight_bound_observable(&point.h, &point.part)? / point.w,
            bound_qsl: (cfg.task == Task::Qsl).then(|| qsl_bound(n, m)),
            seed: cfg.seed,
        });
    }
    Ok(rows)
}

/// Mean and spread of `Delta / w(H)` for every `n` in the configured range,
/// in ascending `n`. Fails if a row with a 2-design side exceeds its
/// general bound.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_scaling_with_threads(cfg, threads_from_env())
}

/// Seed used for the runs at `layers` repeated layers in a sweep.
pub fn layer_seed(base: u64, layers: usize) -> u64 {
    derive_seed(base, &[layers as u64])
}

pub fn run_layer_sweep_with_threads(cfg: &ExperimentConfig, layers: &[usize], threads: usize) -> Result<Vec<LayerRow>> {
    if layers.is_empty() {
        return Err(Error::config("layers", "at least one layer count is required"));
    }
    let mut out = Vec::new();
    for &l in layers {
        let sub = ExperimentConfig {
            layers: Some(l),
            seed: layer_seed(cfg.seed, l),
            ..cfg.clone()
        };
        for row in run_scaling_with_threads(&sub, threads)? {
            out.push(LayerRow { layers: l, row });
        }
    }
    Ok(out)
}

/// Scaling runs at several absolute layer counts. Each layer count draws
/// from its own seed so the per-layer means are independent.
pub fn run_layer_sweep(cfg: &ExperimentConfig, layers: &[usize]) -> Result<Vec<LayerRow>> {
    run_layer_sweep_with_threads(cfg, layers, threads_from_env())
}
