//! Euler–Maruyama ensembles of the full and reduced SDEs and their sample
//! autocovariances.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::AcfCurve;
use crate::csvfmt;
use crate::error::{dim_check, Error, Result};
use crate::matcore::{Matrix, SymMatrix, Vector};
use crate::model::{CoarseGrainingMap, ReducedModel, SystemSpec};

/// The forcing propagator is re-evaluated from the spectrum this often.
pub const FORCING_REFRESH_STEPS: usize = 10_000;

/// Stored-sample stride used when no lag grid is supplied.
pub const DEFAULT_STRIDE: usize = 4;

fn default_burn_in() -> f64 {
    0.5
}

fn default_stride() -> usize {
    DEFAULT_STRIDE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_total: f64,
    pub n_samples: usize,
    pub base_seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// `q₀` for full runs, `ξ₀` for reduced runs.
    pub q0: Vec<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_total.is_finite() && self.t_total >= self.dt) {
            return bad(format!("t_total must be at least dt, got {}", self.t_total));
        }
        if self.n_samples == 0 {
            return bad("n_samples must be positive".into());
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return bad(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            ));
        }
        if self.stride == 0 {
            return bad("stride must be positive".into());
        }
        if self.q0.iter().any(|x| !x.is_finite()) {
            return bad("initial state must be finite".into());
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_total / self.dt).round() as usize
    }

    fn check_stability(&self, max_eigenvalue: f64) -> Result<()> {
        let max_dt = 2.0 / max_eigenvalue;
        if self.dt >= max_dt {
            return Err(Error::Unstable {
                dt: self.dt,
                max_eigenvalue,
                max_dt,
            });
        }
        Ok(())
    }
}

/// Largest stride at which every lag is a whole number of stored samples.
pub fn stride_for_lags(dt: f64, lags: &[f64]) -> Result<usize> {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut g = 0;
    for &tau in lags {
        let steps = (tau / dt).round();
        if (steps * dt - tau).abs() > 1e-9 * tau.abs().max(1.0) {
            return Err(Error::LagOutOfRange {
                lag: tau,
                reason: format!("not a multiple of dt = {dt}"),
            });
        }
        g = gcd(g, steps as usize);
    }
    Ok(g.max(1))
}

/// Stored trajectories on a shared time grid `0, h, 2h, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    spacing: f64,
    burn_in_fraction: f64,
    /// One row-major `len × dim` buffer per trajectory.
    paths: Vec<Vec<f64>>,
}

impl Ensemble {
    pub fn from_paths(dim: usize, spacing: f64, burn_in_fraction: f64, paths: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || paths.is_empty() {
            return Err(Error::InvalidParameter(
                "ensemble needs dim ≥ 1 and a trajectory".into(),
            ));
        }
        if !spacing.is_finite() || spacing <= 0.0 || !(0.0..1.0).contains(&burn_in_fraction) {
            return Err(Error::InvalidParameter("bad ensemble spacing or burn-in".into()));
        }
        let len = paths[0].len();
        if len == 0 || !len.is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                context: "trajectory buffer".into(),
                expected: dim,
                found: len,
            });
        }
        for p in &paths {
            dim_check("trajectory length", len, p.len())?;
        }
        Ok(Ensemble {
            dim,
            spacing,
            burn_in_fraction,
            paths,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_samples(&self) -> usize {
        self.paths.len()
    }

    /// Number of stored times per trajectory.
    pub fn len(&self) -> usize {
        self.paths[0].len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.spacing).collect()
    }

    pub fn state(&self, trajectory: usize, k: usize) -> &[f64] {
        &self.paths[trajectory][k * self.dim..(k + 1) * self.dim]
    }

    pub fn path(&self, trajectory: usize) -> &[f64] {
        &self.paths[trajectory]
    }

    /// Index of the first stored time kept after burn-in.
    pub fn first_retained(&self) -> usize {
        ((self.len() - 1) as f64 * self.burn_in_fraction).ceil() as usize
    }

    fn lag_offset(&self, tau: f64) -> Result<usize> {
        let h = (tau / self.spacing).round();
        if tau.is_nan() || tau < 0.0 || (h * self.spacing - tau).abs() > 1e-9 * tau.max(1.0) {
            return Err(Error::LagOutOfRange {
                lag: tau,
                reason: format!("not a multiple of the stored spacing {}", self.spacing),
            });
        }
        let h = h as usize;
        let retained = self.len() - self.first_retained();
        if h >= retained {
            return Err(Error::LagOutOfRange {
                lag: tau,
                reason: format!("exceeds the retained window of {retained} samples"),
            });
        }
        Ok(h)
    }
}

/// One explicit step `x − dt(Dx − f) + √(2dt/β) Σ g`.
pub fn em_step(
    state: &Vector,
    drift: &Matrix,
    forcing: &Vector,
    noise_factor: &Matrix,
    dt: f64,
    beta: f64,
    gaussians: &Vector,
) -> Vector {
    state - dt * (drift * state - forcing) + (2.0 * dt / beta).sqrt() * (noise_factor * gaussians)
}

/// Allocation-free form of [`em_step`] for the inner loop.
struct Stepper {
    dim: usize,
    dt: f64,
    drift: Vec<f64>,
    /// `√(2dt/β) Σ`, row-major; `None` when `Σ` is the identity.
    noise: Option<Vec<f64>>,
    noise_scale: f64,
}

impl Stepper {
    fn new(drift: &Matrix, noise_factor: &SymMatrix, dt: f64, beta: f64) -> Self {
        let dim = drift.nrows();
        let noise_scale = (2.0 * dt / beta).sqrt();
        let identity = noise_factor.as_matrix() == &Matrix::identity(dim, dim);
        let row_major = |m: &Matrix| m.transpose().as_slice().to_vec();
        Stepper {
            dim,
            dt,
            drift: row_major(drift),
            noise: (!identity).then(|| row_major(&(noise_factor.as_matrix() * noise_scale))),
            noise_scale,
        }
    }

    fn step(&self, x: &mut [f64], forcing: Option<&[f64]>, g: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for r in 0..n {
            let row = &self.drift[r * n..(r + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * x[j];
            }
            if let Some(f) = forcing {
                acc -= f[r];
            }
            let kick = match &self.noise {
                None => self.noise_scale * g[r],
                Some(m) => {
                    let row = &m[r * n..(r + 1) * n];
                    let mut s = 0.0;
                    for j in 0..n {
                        s += row[j] * g[j];
                    }
                    s
                }
            };
            out[r] = x[r] - self.dt * acc + kick;
        }
        x.copy_from_slice(out);
    }
}

fn trajectory_rng(base_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index as u64);
    rng
}

/// Integrates every trajectory and stores `observe(x)` at each stored step.
fn run_ensemble(
    cfg: &SimConfig,
    stepper: &Stepper,
    forcing: Option<&[f64]>,
    observe: &(dyn Fn(&[f64], &mut [f64]) + Sync),
    obs_dim: usize,
) -> Result<Ensemble> {
    let n_steps = cfg.n_steps();
    let n = stepper.dim;
    let stored = n_steps / cfg.stride + 1;
    let paths = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(cfg.base_seed, i);
            let mut x = cfg.q0.clone();
            let mut out = vec![0.0; n];
            let mut g = vec![0.0; n];
            let mut path = vec![0.0; stored * obs_dim];
            observe(&x, &mut path[..obs_dim]);
            for k in 0..n_steps {
                for v in g.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let f = forcing.map(|f| &f[k * n..(k + 1) * n]);
                stepper.step(&mut x, f, &g, &mut out);
                if (k + 1) % cfg.stride == 0 {
                    let s = (k + 1) / cfg.stride;
                    observe(&x, &mut path[s * obs_dim..(s + 1) * obs_dim]);
                }
            }
            path
        })
        .collect();
    Ensemble::from_paths(obs_dim, cfg.dt * cfg.stride as f64, cfg.burn_in_fraction, paths)
}

/// Full dynamics `dq = −Aq dt + √(2/β) dW`, recording `ξ = Φq`.
pub fn simulate_full(sys: &SystemSpec, cg: &CoarseGrainingMap, cfg: &SimConfig) -> Result<Ensemble> {
    cfg.validate()?;
    dim_check("q₀", sys.dim(), cfg.q0.len())?;
    dim_check("coarse-graining map width", sys.dim(), cg.full_dim())?;
    cfg.check_stability(sys.spectrum().max_eigenvalue())?;
    let stepper = Stepper::new(sys.a(), &SymMatrix::identity(sys.dim()), cfg.dt, sys.beta());
    let phi = cg.phi();
    let (rows, cols) = (cg.n(), cg.full_dim());
    let phi_rm: Vec<f64> = phi.transpose().as_slice().to_vec();
    let observe = move |x: &[f64], out: &mut [f64]| {
        for r in 0..rows {
            let row = &phi_rm[r * cols..(r + 1) * cols];
            out[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    };
    run_ensemble(cfg, &stepper, None, &observe, rows)
}

/// Drift forcing at every step time `kΔt`, `k < n_steps`, flattened.
///
/// `e^{-A₁kΔt}ζ₀` is advanced by repeated multiplication and re-evaluated
/// from the spectrum every [`FORCING_REFRESH_STEPS`] steps.
fn forcing_table(model: &ReducedModel, dt: f64, n_steps: usize) -> Result<Option<Vec<f64>>> {
    let Some(mem) = &model.memory else {
        return Ok(None);
    };
    let n = model.dim();
    let prop = mem.step_propagator(dt)?;
    let outer = match model.approach {
        crate::model::Approach::Two => model.c.as_matrix() * &mem.alpha,
        _ => mem.alpha.clone(),
    };
    let mut decayed = mem.zeta0.clone();
    let mut table = Vec::with_capacity(n_steps * n);
    for k in 0..n_steps {
        if k > 0 {
            decayed = if k % FORCING_REFRESH_STEPS == 0 {
                let exact = mem.step_propagator(k as f64 * dt)?;
                exact.as_matrix() * &mem.zeta0
            } else {
                prop.as_matrix() * &decayed
            };
        }
        table.extend((&outer * &decayed).iter());
    }
    Ok(Some(table))
}

/// Reduced dynamics `dξ = −(Dξ − f(t)) dt + √(2/β) Σ dW` with `ξ(0)` from `cfg.q0`.
pub fn simulate_reduced(model: &ReducedModel, cfg: &SimConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let n = model.dim();
    dim_check("ξ₀", n, cfg.q0.len())?;
    let max_rate = model
        .drift_rates()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    cfg.check_stability(max_rate)?;
    let stepper = Stepper::new(&model.drift, &model.noise_factor, cfg.dt, model.beta);
    let forcing = forcing_table(model, cfg.dt, cfg.n_steps())?;
    let observe = |x: &[f64], out: &mut [f64]| out.copy_from_slice(x);
    run_ensemble(cfg, &stepper, forcing.as_deref(), &observe, n)
}

/// Sample ACF with per-lag, per-entry standard errors.
#[derive(Debug, Clone)]
pub struct AcfEstimate {
    pub curve: AcfCurve,
    /// Entrywise standard errors: across-trajectory standard deviation of
    /// the per-trajectory estimates over `√n_samples`.
    pub stderr: Vec<Matrix>,
}

impl AcfEstimate {
    /// Frobenius norm of the entrywise standard errors at each lag; the plain
    /// standard error for scalar observables.
    pub fn stderr_norms(&self) -> Vec<f64> {
        self.stderr.iter().map(|s| s.norm()).collect()
    }

    /// `tau,acf_hat,stderr` for scalar observables; `acf_hat_i_j`/`stderr_i_j`
    /// column pairs otherwise.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let n = self.curve.dim();
        let mut header = vec!["tau".to_string()];
        if n == 1 {
            header.push("acf_hat".into());
            header.push("stderr".into());
        } else {
            for i in 1..=n {
                for j in 1..=n {
                    header.push(format!("acf_hat_{i}_{j}"));
                    header.push(format!("stderr_{i}_{j}"));
                }
            }
        }
        csvfmt::write_header(w, &header)?;
        for k in 0..self.curve.len() {
            let mut row = vec![self.curve.lags[k]];
            for i in 0..n {
                for j in 0..n {
                    row.push(self.curve.values[k][(i, j)]);
                    row.push(self.stderr[k][(i, j)]);
                }
            }
            csvfmt::write_row(w, &row)?;
        }
        Ok(())
    }
}

/// Per-trajectory, per-lag estimates (row-major `n×n`, not yet symmetrized).
fn per_trajectory_estimates(ens: &Ensemble, offsets: &[usize]) -> Vec<Vec<f64>> {
    let n = ens.dim;
    let first = ens.first_retained();
    let len = ens.len();
    // Pooled mean over all trajectories and retained times, summed in index order.
    let sums: Vec<Vec<f64>> = ens
        .paths
        .par_iter()
        .map(|p| {
            let mut s = vec![0.0; n];
            for k in first..len {
                for (a, b) in s.iter_mut().zip(&p[k * n..(k + 1) * n]) {
                    *a += b;
                }
            }
            s
        })
        .collect();
    let mut mean = vec![0.0; n];
    for s in &sums {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    let count = (ens.n_samples() * (len - first)) as f64;
    mean.iter_mut().for_each(|m| *m /= count);

    ens.paths
        .par_iter()
        .map(|p| {
            let centered: Vec<f64> = p[first * n..]
                .chunks_exact(n)
                .flat_map(|x| x.iter().zip(&mean).map(|(a, m)| a - m))
                .collect();
            let retained = len - first;
            let mut est = Vec::with_capacity(offsets.len() * n * n);
            for &h in offsets {
                let mut acc = vec![0.0; n * n];
                for t in 0..retained - h {
                    let x = &centered[t * n..(t + 1) * n];
                    let y = &centered[(t + h) * n..(t + h + 1) * n];
                    for i in 0..n {
                        for j in 0..n {
                            acc[i * n + j] += x[i] * y[j];
                        }
                    }
                }
                let norm = (retained - h) as f64;
                est.extend(acc.iter().map(|a| a / norm));
            }
            est
        })
        .collect()
}

fn symmetrized(raw: &[f64], n: usize) -> Matrix {
    let m = Matrix::from_fn(n, n, |i, j| raw[i * n + j]);
    (&m + m.transpose()) * 0.5
}

/// Sample ACF and standard errors at `lags`, after discarding burn-in.
pub fn sample_acf_with_errors(ens: &Ensemble, lags: &[f64]) -> Result<AcfEstimate> {
    let offsets = lags
        .iter()
        .map(|&t| ens.lag_offset(t))
        .collect::<Result<Vec<_>>>()?;
    let n = ens.dim;
    let per = per_trajectory_estimates(ens, &offsets);
    let count = per.len() as f64;
    let mut values = Vec::with_capacity(lags.len());
    let mut stderr = Vec::with_capacity(lags.len());
    for k in 0..lags.len() {
        let block = |e: &Vec<f64>| symmetrized(&e[k * n * n..(k + 1) * n * n], n);
        let mut mean = Matrix::zeros(n, n);
        for e in &per {
            mean += block(e);
        }
        mean /= count;
        let se = if per.len() < 2 {
            Matrix::from_element(n, n, f64::NAN)
        } else {
            let mut var = Matrix::zeros(n, n);
            for e in &per {
                let d = block(e) - &mean;
                var += d.component_mul(&d);
            }
            (var / (count - 1.0)).map(|v| (v / count).sqrt())
        };
        values.push(SymMatrix::new(mean)?);
        stderr.push(se);
    }
    Ok(AcfEstimate {
        curve: AcfCurve {
            lags: lags.to_vec(),
            values,
        },
        stderr,
    })
}

pub fn sample_acf(ens: &Ensemble, lags: &[f64]) -> Result<AcfCurve> {
    Ok(sample_acf_with_errors(ens, lags)?.curve)
}

/// Per-lag standard error; see [`AcfEstimate::stderr_norms`].
pub fn standard_error(ens: &Ensemble, lags: &[f64]) -> Result<Vec<f64>> {
    if ens.n_samples() < 2 {
        return Err(Error::InvalidParameter(
            "standard errors need n_samples ≥ 2".into(),
        ));
    }
    Ok(sample_acf_with_errors(ens, lags)?.stderr_norms())
}
