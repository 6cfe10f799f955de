//! The experiments behind each config kind. Each returns its CSV files in
//! memory; the runner owns all file writes.

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use cgdyn_core::analytics::{
    acf_full, acf_reduced, asymptotics_2d, check_bounds_thm_nd, error_report, exact_errors_2d, msd,
    scan_small_lags, uniform_grid, AcfCurve, Dynamics, TwoDSpec,
};
use cgdyn_core::document::SystemDocument;
use cgdyn_core::mc::{sample_acf_with_errors, simulate_full, simulate_reduced, stride_for_lags, SimConfig};
use cgdyn_core::model::{block_decompose, build_reduced, default_zeta0, normalize_map};
use cgdyn_core::systems::{
    build_2d, build_chain, build_tridiag, coordinate_selection_map, progressive_compare,
    random_orthonormal_rows, random_spd, ChainSpec, ProgressiveSpec, TridiagSpec,
};
use cgdyn_core::{Approach, Vector};

use crate::config::{
    AbsVsTauParams, Acf2dParams, BoundsCheckParams, ChainParams, McValidateParams, Params, SweepLambdaParams,
    TridiagProgressiveParams,
};
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn file(name: impl Into<String>, table: Table) -> OutputFile {
    OutputFile {
        name: name.into(),
        bytes: table.into_bytes(),
    }
}

/// Runs one experiment on the current rayon pool.
pub fn run(params: &Params) -> Result<Vec<OutputFile>> {
    match params {
        Params::Acf2d(p) => acf_2d(p),
        Params::SweepLambda(p) => sweep_lambda(p),
        Params::AbsVsTau(p) => abs_vs_tau(p),
        Params::TridiagProgressive(p) => tridiag_progressive(p),
        Params::Chain(p) => chain(p),
        Params::McValidate(p) => mc_validate(p),
        Params::BoundsCheck(p) => bounds_check(p),
    }
}

fn scalar(curve: &AcfCurve) -> Vec<f64> {
    curve.entry(0, 0)
}

fn acf_2d(p: &Acf2dParams) -> Result<Vec<OutputFile>> {
    let (sys, cg) = build_2d(TwoDSpec::new(p.lambda, p.theta)?, p.beta)?;
    let lags = uniform_grid(0.0, p.tau_max, p.n_lags);
    let zero = Vector::zeros(cg.m());
    let full = acf_full(&sys, &cg, &lags)?;
    let mut reduced = Vec::new();
    for approach in Approach::ALL {
        let model = build_reduced(&sys, &cg, approach, &zero)?;
        reduced.push((approach, model.clone(), acf_reduced(&model, &lags)?));
    }

    let mut acf = Table::new(&["tau", "full", "app0", "app1", "app2"]);
    let columns: Vec<Vec<f64>> = std::iter::once(scalar(&full))
        .chain(reduced.iter().map(|(_, _, c)| scalar(c)))
        .collect();
    for (k, &tau) in lags.iter().enumerate() {
        let mut row = vec![tau];
        row.extend(columns.iter().map(|c| c[k]));
        acf.row(&row);
    }
    let mut out = vec![file("acf.csv", acf)];

    for (approach, _, curve) in &reduced {
        let mut buf = Vec::new();
        error_report(&full, curve)?.write_csv(&mut buf)?;
        out.push(OutputFile {
            name: format!("errors_app{}.csv", approach.index()),
            bytes: buf,
        });
    }

    let mut msd_table = Table::new(&["t", "full", "app0", "app1", "app2"]);
    let mut msd_cols = vec![msd(Dynamics::Full { sys: &sys, cg: &cg }, &lags, None)?];
    for (_, model, _) in &reduced {
        msd_cols.push(msd(Dynamics::Reduced(model), &lags, None)?);
    }
    for (k, &t) in lags.iter().enumerate() {
        let mut row = vec![t];
        row.extend(msd_cols.iter().map(|c| c[k]));
        msd_table.row(&row);
    }
    out.push(file("msd.csv", msd_table));
    Ok(out)
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    uniform_grid(a, b, n).into_iter().map(f64::exp).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Exact `τ → 0⁺` coefficients of the 2D relative errors:
/// approach 1 error `≈ c₁τ²`, approach 2 error `≈ c₂τ`.
pub fn small_lag_coefficients(spec: TwoDSpec) -> (f64, f64) {
    let (sin, cos) = spec.theta.sin_cos();
    let (s2, c2) = (sin * sin, cos * cos);
    let l = spec.lambda;
    let gap = c2 * s2 * (l - 1.0) * (l - 1.0);
    let b = l / (l * c2 + s2);
    // A₀ − B and I − C share the factor cos²θ sin²θ (λ−1)²
    let a0_minus_b = gap / (l * c2 + s2);
    let one_minus_c = gap / (l * l * c2 + s2);
    (0.5 * a0_minus_b * b, one_minus_c * b)
}

fn sweep_lambda(p: &SweepLambdaParams) -> Result<Vec<OutputFile>> {
    let mut t = Table::new(&[
        "theta",
        "lambda",
        "app1_rel",
        "app1_rate",
        "app1_rate_richardson",
        "app1_rate_limit",
        "app1_rate_asymptotic",
        "app2_rel",
        "app2_rate",
        "app2_rate_richardson",
        "app2_rate_limit",
        "app2_rate_asymptotic",
        "app1_rel_tau1",
        "app1_rel_tau1_asymptotic",
        "app2_rel_tau1",
        "app2_rel_tau1_asymptotic",
    ]);
    let tau = p.tau_small;
    let half = 0.5 * tau;
    for &theta in &p.thetas {
        for lambda in log_grid(p.lambda_min, p.lambda_max, p.n_lambda) {
            let spec = TwoDSpec::new(lambda, theta)?;
            let at = exact_errors_2d(spec, p.beta, tau)?;
            let at_half = exact_errors_2d(spec, p.beta, half)?;
            let at_one = exact_errors_2d(spec, p.beta, 1.0)?;
            let asym_small = asymptotics_2d(spec, p.beta, tau)?;
            let asym_one = asymptotics_2d(spec, p.beta, 1.0)?;
            let (lim1, lim2) = small_lag_coefficients(spec);
            let rate1 = at.app1_rel / (tau * tau);
            let rate1_half = at_half.app1_rel / (half * half);
            let rate2 = at.app2_rel / tau;
            let rate2_half = at_half.app2_rel / half;
            t.row(&[
                theta,
                lambda,
                at.app1_rel,
                rate1,
                2.0 * rate1_half - rate1,
                lim1,
                asym_small.short_app1_rel / (tau * tau),
                at.app2_rel,
                rate2,
                2.0 * rate2_half - rate2,
                lim2,
                asym_small.short_app2_rel / tau,
                at_one.app1_rel,
                asym_one.app1_rel_tau1,
                at_one.app2_rel,
                asym_one.app2_rel_tau1,
            ]);
        }
    }
    Ok(vec![file("sweep_lambda.csv", t)])
}

fn abs_vs_tau(p: &AbsVsTauParams) -> Result<Vec<OutputFile>> {
    let header = [
        "theta",
        "tau",
        "app1_abs",
        "app1_abs_asymptotic",
        "app2_abs",
        "app2_abs_asymptotic",
    ];
    let mut long = Table::new(&header);
    let mut short = Table::new(&header);
    let mut slopes = Table::new(&["theta", "app1_slope", "app2_slope"]);
    let fit = log_grid(p.fit_min, p.fit_max, p.n_fit);
    for &theta in &p.thetas {
        let spec = TwoDSpec::new(p.lambda, theta)?;
        for tau in uniform_grid(0.0, p.tau_max, p.n_long) {
            let ex = exact_errors_2d(spec, p.beta, tau)?;
            let asym = asymptotics_2d(spec, p.beta, tau)?;
            long.row(&[theta, tau, ex.app1_abs, asym.app1_abs, ex.app2_abs, asym.app2_abs]);
        }
        for tau in uniform_grid(0.0, p.short_max, p.n_short) {
            let ex = exact_errors_2d(spec, p.beta, tau)?;
            let asym = asymptotics_2d(spec, p.beta, tau)?;
            short.row(&[
                theta,
                tau,
                ex.app1_abs,
                asym.short_app1_abs,
                ex.app2_abs,
                asym.short_app2_abs,
            ]);
        }
        let errs = fit
            .iter()
            .map(|&tau| exact_errors_2d(spec, p.beta, tau))
            .collect::<cgdyn_core::Result<Vec<_>>>()?;
        let e1: Vec<f64> = errs.iter().map(|e| e.app1_abs).collect();
        let e2: Vec<f64> = errs.iter().map(|e| e.app2_abs).collect();
        slopes.row(&[theta, loglog_slope(&fit, &e1), loglog_slope(&fit, &e2)]);
    }
    Ok(vec![
        file("abs_vs_tau_long.csv", long),
        file("abs_vs_tau_short.csv", short),
        file("abs_vs_tau_slopes.csv", slopes),
    ])
}

/// Progressive-coarsening outcome for one approach and intermediate size.
#[derive(Debug, Clone)]
pub struct ProgressiveSummary {
    pub approach: Approach,
    pub n: usize,
    pub lags: Vec<f64>,
    pub full_vs_coarsest: Vec<f64>,
    pub full_vs_intermediate: Vec<f64>,
    pub intermediate_vs_coarsest: Vec<f64>,
    pub monotone: Vec<bool>,
}

impl ProgressiveSummary {
    pub fn violations(&self) -> usize {
        self.monotone.iter().filter(|&&ok| !ok).count()
    }

    /// Smallest `top − max(gap₁, gap₂)`; negative when an inequality fails.
    pub fn worst_margin(&self) -> f64 {
        (0..self.lags.len())
            .map(|k| {
                self.full_vs_coarsest[k] - self.full_vs_intermediate[k].max(self.intermediate_vs_coarsest[k])
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn progressive_summaries(p: &TridiagProgressiveParams) -> Result<Vec<ProgressiveSummary>> {
    let spec = match &p.diag {
        Some(d) => TridiagSpec {
            diag: d.clone(),
            offdiag_sigma: p.sigma,
        },
        None => TridiagSpec::paper_10d(p.sigma),
    };
    let sys = build_tridiag(&spec, p.beta)?;
    let dim = sys.dim();
    let lags = uniform_grid(p.tau_max / p.n_lags as f64, p.tau_max, p.n_lags);
    let mut out = Vec::new();
    for approach in [Approach::One, Approach::Two] {
        for &n in &p.ns {
            let inner = coordinate_selection_map(dim, &(0..n).collect::<Vec<_>>())?;
            let outer = coordinate_selection_map(n, &p.coarse)?;
            let prog = ProgressiveSpec::new(outer, inner)?;
            let res = progressive_compare(&sys, &prog, approach, &lags)
                .with_context(|| format!("progressive comparison for {approach}, n = {n}"))?;
            out.push(ProgressiveSummary {
                approach,
                n,
                monotone: res.monotone_at(p.slack),
                lags: lags.clone(),
                full_vs_coarsest: res.full_vs_coarsest.abs_err,
                full_vs_intermediate: res.full_vs_intermediate.abs_err,
                intermediate_vs_coarsest: res.intermediate_vs_coarsest.abs_err,
            });
        }
    }
    Ok(out)
}

fn tridiag_progressive(p: &TridiagProgressiveParams) -> Result<Vec<OutputFile>> {
    let summaries = progressive_summaries(p)?;
    let mut out = Vec::new();
    let mut summary = Table::new(&["approach", "n", "violations", "n_lags", "worst_margin"]);
    for s in &summaries {
        let mut t = Table::new(&[
            "tau",
            "full_vs_coarsest",
            "full_vs_intermediate",
            "intermediate_vs_coarsest",
            "monotone",
        ]);
        for k in 0..s.lags.len() {
            t.row(&[
                s.lags[k],
                s.full_vs_coarsest[k],
                s.full_vs_intermediate[k],
                s.intermediate_vs_coarsest[k],
                if s.monotone[k] { 1.0 } else { 0.0 },
            ]);
        }
        out.push(file(
            format!("progressive_app{}_n{}.csv", s.approach.index(), s.n),
            t,
        ));
        summary.row(&[
            s.approach.index() as f64,
            s.n as f64,
            s.violations() as f64,
            s.lags.len() as f64,
            s.worst_margin(),
        ]);
    }
    out.push(file("progressive_summary.csv", summary));
    Ok(out)
}

/// Relative ACF errors of both approaches for one chain comparison option.
#[derive(Debug, Clone)]
pub struct ChainComparison {
    /// `40v2`-style label: reference dimension `v` reduced dimension.
    pub option: String,
    pub lags: Vec<f64>,
    pub app1_rel: Vec<f64>,
    pub app2_rel: Vec<f64>,
}

impl ChainComparison {
    /// Fraction of lags where approach 2 is at least as accurate as approach 1.
    pub fn app2_better_fraction(&self) -> f64 {
        let wins = self
            .app1_rel
            .iter()
            .zip(&self.app2_rel)
            .filter(|(a1, a2)| a2 <= a1)
            .count();
        wins as f64 / self.lags.len() as f64
    }
}

/// The three comparison options for one `(k₂, k₃)`: full vs coarsest,
/// full vs intermediate, intermediate vs coarsest.
pub fn chain_comparisons(p: &ChainParams, k2: f64, k3: f64) -> Result<Vec<ChainComparison>> {
    let spec = ChainSpec {
        n_masses: p.n_masses,
        k1: p.k1,
        k2,
        k3,
        springs: p.springs.clone(),
    };
    let sys = build_chain(&spec, p.beta)?;
    let dim = sys.dim();
    let lags = uniform_grid(p.tau_max / p.n_lags as f64, p.tau_max, p.n_lags);
    let inner = coordinate_selection_map(dim, &p.intermediate)?;
    let positions: Vec<usize> = p
        .coarse
        .iter()
        .map(|c| {
            p.intermediate
                .iter()
                .position(|i| i == c)
                .expect("validated subset")
        })
        .collect();
    let outer = coordinate_selection_map(p.intermediate.len(), &positions)?;
    let prog = ProgressiveSpec::new(outer, inner.clone())?;
    let mid_map = normalize_map(&inner)?;
    let mid_truth = acf_full(&sys, &mid_map, &lags)?;
    let zero = Vector::zeros(mid_map.m());

    let (n, d) = (p.intermediate.len(), p.coarse.len());
    let mut coarse_rel = Vec::new();
    let mut mid_rel = Vec::new();
    let mut step_rel = Vec::new();
    for approach in [Approach::One, Approach::Two] {
        let res = progressive_compare(&sys, &prog, approach, &lags)?;
        coarse_rel.push(res.full_vs_coarsest.rel_err);
        step_rel.push(res.intermediate_vs_coarsest.rel_err);
        let mid = acf_reduced(&build_reduced(&sys, &mid_map, approach, &zero)?, &lags)?;
        mid_rel.push(error_report(&mid_truth, &mid)?.rel_err);
    }
    let make = |option: String, mut rel: Vec<Vec<f64>>| {
        let app2_rel = rel.pop().expect("two approaches");
        let app1_rel = rel.pop().expect("two approaches");
        ChainComparison {
            option,
            lags: lags.clone(),
            app1_rel,
            app2_rel,
        }
    };
    Ok(vec![
        make(format!("{dim}v{d}"), coarse_rel),
        make(format!("{dim}v{n}"), mid_rel),
        make(format!("{n}v{d}"), step_rel),
    ])
}

fn chain(p: &ChainParams) -> Result<Vec<OutputFile>> {
    let points: Vec<(f64, f64)> = p
        .k2s
        .iter()
        .flat_map(|&k2| p.k3s.iter().map(move |&k3| (k2, k3)))
        .collect();
    let results = points
        .par_iter()
        .map(|&(k2, k3)| {
            chain_comparisons(p, k2, k3).with_context(|| format!("chain with k2 = {k2}, k3 = {k3}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut errors = Table::new(&["option", "k2", "k3", "tau", "app1_rel", "app2_rel"]);
    let mut summary = Table::new(&["option", "k2", "k3", "app2_le_app1_fraction", "n_lags"]);
    for (&(k2, k3), options) in points.iter().zip(&results) {
        for c in options {
            for k in 0..c.lags.len() {
                errors.labeled_row(&c.option, &[k2, k3, c.lags[k], c.app1_rel[k], c.app2_rel[k]]);
            }
            summary.labeled_row(
                &c.option,
                &[k2, k3, c.app2_better_fraction(), c.lags.len() as f64],
            );
        }
    }
    Ok(vec![
        file("chain_errors.csv", errors),
        file("chain_summary.csv", summary),
    ])
}

/// Analytic and sampled ACFs for the full dynamics and approaches 1 and 2.
#[derive(Debug, Clone)]
pub struct McComparison {
    pub lags: Vec<f64>,
    /// Full, approach 1, approach 2.
    pub analytic: [Vec<f64>; 3],
    pub sampled: [Vec<f64>; 3],
    pub stderr: [Vec<f64>; 3],
}

pub const MC_MODELS: [&str; 3] = ["full", "app1", "app2"];

impl McComparison {
    /// Fraction of lags where the sample lies within `z` standard errors.
    pub fn within(&self, model: usize, z: f64) -> f64 {
        let hits = (0..self.lags.len())
            .filter(|&k| {
                (self.sampled[model][k] - self.analytic[model][k]).abs() <= z * self.stderr[model][k]
            })
            .count();
        hits as f64 / self.lags.len() as f64
    }
}

pub fn mc_lags(p: &McValidateParams) -> Vec<f64> {
    let count = (p.lag_max / p.lag_step + 1e-9).floor() as usize;
    (1..=count).map(|k| p.lag_step * k as f64).collect()
}

pub fn mc_compare(p: &McValidateParams) -> Result<McComparison> {
    let (sys, cg) = build_2d(TwoDSpec::new(p.lambda, p.theta)?, p.beta)?;
    let lags = mc_lags(p);
    let stride = match p.stride {
        Some(s) => s,
        None => stride_for_lags(p.dt, &lags)?,
    };
    let q0 = Vector::from_column_slice(&p.q0);
    let xi0 = cg.phi() * &q0;
    let zeta0 = match &p.zeta0 {
        Some(z) => Vector::from_column_slice(z),
        None => default_zeta0(&block_decompose(&sys, &cg)?, &xi0)?,
    };
    let cfg = |seed: u64, start: Vec<f64>| SimConfig {
        dt: p.dt,
        t_total: p.t_total,
        n_samples: p.n_samples,
        base_seed: seed,
        burn_in_fraction: p.burn_in_fraction,
        stride,
        q0: start,
    };

    let truth = scalar(&acf_full(&sys, &cg, &lags)?);
    let ens =
        simulate_full(&sys, &cg, &cfg(p.base_seed, p.q0.clone())).context("full dynamics simulation")?;
    let full_est = sample_acf_with_errors(&ens, &lags)?;
    drop(ens);

    let mut analytic = vec![truth];
    let mut sampled = vec![scalar(&full_est.curve)];
    let mut stderr = vec![full_est.stderr_norms()];
    for approach in [Approach::One, Approach::Two] {
        let model = build_reduced(&sys, &cg, approach, &zeta0)?;
        let seed = p.base_seed.wrapping_add(approach.index() as u64);
        let ens = simulate_reduced(&model, &cfg(seed, xi0.iter().copied().collect()))
            .with_context(|| format!("{approach} simulation"))?;
        let est = sample_acf_with_errors(&ens, &lags)?;
        analytic.push(scalar(&acf_reduced(&model, &lags)?));
        sampled.push(scalar(&est.curve));
        stderr.push(est.stderr_norms());
    }
    let arr = |v: Vec<Vec<f64>>| -> [Vec<f64>; 3] { v.try_into().expect("three models") };
    Ok(McComparison {
        lags,
        analytic: arr(analytic),
        sampled: arr(sampled),
        stderr: arr(stderr),
    })
}

/// `ln x`, or NaN where a sampled value is not positive.
fn log_or_nan(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NAN
    }
}

fn mc_validate(p: &McValidateParams) -> Result<Vec<OutputFile>> {
    let cmp = mc_compare(p)?;
    let mut analytic = Table::new(&["tau", "full", "app1", "app2", "log_full", "log_app1", "log_app2"]);
    let mut sampled = Table::new(&[
        "tau",
        "full",
        "full_stderr",
        "app1",
        "app1_stderr",
        "app2",
        "app2_stderr",
        "log_full",
        "log_app1",
        "log_app2",
    ]);
    for (k, &tau) in cmp.lags.iter().enumerate() {
        let a: Vec<f64> = (0..3).map(|m| cmp.analytic[m][k]).collect();
        let s: Vec<f64> = (0..3).map(|m| cmp.sampled[m][k]).collect();
        analytic.row(&[tau, a[0], a[1], a[2], a[0].ln(), a[1].ln(), a[2].ln()]);
        sampled.row(&[
            tau,
            s[0],
            cmp.stderr[0][k],
            s[1],
            cmp.stderr[1][k],
            s[2],
            cmp.stderr[2][k],
            log_or_nan(s[0]),
            log_or_nan(s[1]),
            log_or_nan(s[2]),
        ]);
    }
    let mut summary = Table::new(&["model", "within_3se", "n_lags"]);
    for (m, name) in MC_MODELS.iter().enumerate() {
        summary.labeled_row(name, &[cmp.within(m, 3.0), cmp.lags.len() as f64]);
    }
    Ok(vec![
        file("mc_analytic.csv", analytic),
        file("mc_sampled.csv", sampled),
        file("mc_summary.csv", summary),
    ])
}

fn bounds_check(p: &BoundsCheckParams) -> Result<Vec<OutputFile>> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let a = random_spd(p.dim, p.eig_min, p.eig_max, &mut rng);
    let phi_raw = random_orthonormal_rows(p.n, p.dim, &mut rng);
    let rows = |m: &cgdyn_core::Matrix| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect()
    };
    let doc = SystemDocument {
        a: rows(a.as_matrix()),
        beta: p.beta,
        phi_raw: rows(&phi_raw),
        dt: None,
        t_total: None,
        n_samples: None,
        base_seed: None,
        burn_in_fraction: None,
        stride: None,
        q0: None,
    };
    let loaded = doc.load()?;
    let lags = uniform_grid(p.tau_max / p.n_lags as f64, p.tau_max, p.n_lags);
    let report = check_bounds_thm_nd(&loaded.sys, &loaded.cg, &lags, p.tol)?;
    let scan_grid = uniform_grid(p.scan_max / p.n_scan as f64, p.scan_max, p.n_scan);
    let scan = scan_small_lags(&loaded.sys, &loaded.cg, &scan_grid, p.tol)?;

    let mut margins = Vec::new();
    report.write_csv(&mut margins)?;
    let mut summary = Table::new(&[
        "worst_margin",
        "lags_passed",
        "n_lags",
        "sandwich_horizon",
        "overestimate_horizon",
    ]);
    let passed = (0..lags.len()).filter(|&k| report.passed_at(k)).count();
    summary.row(&[
        report.worst_margin(),
        passed as f64,
        lags.len() as f64,
        scan.sandwich_horizon.unwrap_or(f64::NAN),
        scan.overestimate_horizon.unwrap_or(f64::NAN),
    ]);
    let mut system = serde_json::to_vec_pretty(&doc)?;
    system.push(b'\n');
    Ok(vec![
        OutputFile {
            name: "bounds_margins.csv".into(),
            bytes: margins,
        },
        file("bounds_summary.csv", summary),
        OutputFile {
            name: "system.json".into(),
            bytes: system,
        },
    ])
}
