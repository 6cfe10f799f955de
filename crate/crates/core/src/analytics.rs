//! Closed-form statistics of the full and reduced dynamics: equilibrium
//! covariances, autocovariance functions (ACFs), mean-squared displacements,
//! error metrics, Löwner-order bound checks and the two-dimensional asymptotics.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::csvfmt;
use crate::error::{dim_check, Error, Result};
use crate::matcore::{
    frobenius_norm, inverse_spd, spectral_decompose, Matrix, SimilarExp, SymMatrix, Vector,
};
use crate::model::{
    block_decompose, effective_matrices, Approach, CoarseGrainingMap, ReducedModel, SystemSpec,
};

/// Below this norm a reference ACF value counts as zero.
pub const ZERO_NORM: f64 = 1e-14;

/// Default pass threshold for the Löwner bound checks.
pub const BOUND_TOL: f64 = 1e-9;

/// Default lag-grid density for L¹ quadrature.
pub const POINTS_PER_UNIT_LAG: usize = 512;

/// Matrix-valued autocovariance sampled on a lag grid.
#[derive(Debug, Clone)]
pub struct AcfCurve {
    pub lags: Vec<f64>,
    pub values: Vec<SymMatrix>,
}

impl AcfCurve {
    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, SymMatrix::dim)
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// Entry `(i, j)` of every value.
    pub fn entry(&self, i: usize, j: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[(i, j)]).collect()
    }

    /// `X R(τ) Xᵀ` at every lag.
    pub fn project(&self, x: &Matrix) -> Result<AcfCurve> {
        let values = self
            .values
            .iter()
            .map(|v| v.congruence(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(AcfCurve {
            lags: self.lags.clone(),
            values,
        })
    }

    /// `tau,value_1_1,value_1_2,…` with 1-based row-major entry columns.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let n = self.dim();
        let mut header = vec!["tau".to_string()];
        for i in 1..=n {
            for j in 1..=n {
                header.push(format!("value_{i}_{j}"));
            }
        }
        csvfmt::write_header(w, &header)?;
        for (tau, v) in self.lags.iter().zip(&self.values) {
            let mut row = Vec::with_capacity(1 + n * n);
            row.push(*tau);
            for i in 0..n {
                for j in 0..n {
                    row.push(v[(i, j)]);
                }
            }
            csvfmt::write_row(w, &row)?;
        }
        Ok(())
    }
}

pub(crate) fn validate_lags(lags: &[f64]) -> Result<()> {
    if lags.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter(
            "lags must be finite and nonnegative".into(),
        ));
    }
    if lags.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("lags must be strictly ascending".into()));
    }
    Ok(())
}

/// `count` points uniformly spaced on `[start, end]`.
pub fn uniform_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (end - start) / (count - 1) as f64;
            (0..count).map(|k| start + h * k as f64).collect()
        }
    }
}

/// `[0, tau_max]` at [`POINTS_PER_UNIT_LAG`] points per unit lag.
pub fn default_lag_grid(tau_max: f64) -> Vec<f64> {
    let count = ((tau_max * POINTS_PER_UNIT_LAG as f64).round() as usize).max(1) + 1;
    uniform_grid(0.0, tau_max, count)
}

/// Either the full dynamics observed through a map, or a reduced model.
#[derive(Debug, Clone, Copy)]
pub enum Dynamics<'a> {
    Full {
        sys: &'a SystemSpec,
        cg: &'a CoarseGrainingMap,
    },
    Reduced(&'a ReducedModel),
}

/// `R(τ) = β⁻¹ Φ A⁻¹ e^{-τA} Φᵀ`.
pub fn acf_full(sys: &SystemSpec, cg: &CoarseGrainingMap, lags: &[f64]) -> Result<AcfCurve> {
    validate_lags(lags)?;
    dim_check("coarse-graining map width", sys.dim(), cg.full_dim())?;
    let spectrum = sys.spectrum();
    let inv_beta = 1.0 / sys.beta();
    let values = lags
        .par_iter()
        .map(|&tau| spectrum.apply_congruence(cg.phi(), |x| inv_beta * (-tau * x).exp() / x))
        .collect::<Result<Vec<_>>>()?;
    Ok(AcfCurve {
        lags: lags.to_vec(),
        values,
    })
}

/// Equilibrium ACFs of the reduced models: `β⁻¹A₀⁻¹e^{-τA₀}`, `β⁻¹B⁻¹e^{-τB}`
/// and `β⁻¹B⁻¹e^{-τBC}` for approaches 0, 1 and 2.
pub fn acf_reduced(model: &ReducedModel, lags: &[f64]) -> Result<AcfCurve> {
    validate_lags(lags)?;
    let inv_beta = 1.0 / model.beta;
    let values = match model.approach {
        Approach::Zero | Approach::One => {
            let m = if model.approach == Approach::Zero {
                &model.a0
            } else {
                &model.b
            };
            let spectrum = spectral_decompose(m)?;
            lags.par_iter()
                .map(|&tau| spectrum.apply(|x| inv_beta * (-tau * x).exp() / x))
                .collect::<Result<Vec<_>>>()?
        }
        Approach::Two => {
            let similar = SimilarExp::new(&model.b, &model.c)?;
            let b_inv = inverse_spd(&model.b)?.scale(inv_beta);
            lags.par_iter()
                .map(|&tau| {
                    let value = b_inv.as_matrix() * similar.exp(tau)?;
                    SymMatrix::with_tolerance(value, 1e-9)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(AcfCurve {
        lags: lags.to_vec(),
        values,
    })
}

/// ACF of either kind of dynamics.
pub fn acf(dynamics: Dynamics<'_>, lags: &[f64]) -> Result<AcfCurve> {
    match dynamics {
        Dynamics::Full { sys, cg } => acf_full(sys, cg, lags),
        Dynamics::Reduced(model) => acf_reduced(model, lags),
    }
}

/// Stationary covariance: `β⁻¹B⁻¹` for the full dynamics and approaches 1, 2;
/// `β⁻¹A₀⁻¹` for approach 0.
pub fn equilibrium_covariance(dynamics: Dynamics<'_>) -> Result<SymMatrix> {
    match dynamics {
        Dynamics::Full { sys, cg } => {
            let inv_beta = 1.0 / sys.beta();
            sys.spectrum().apply_congruence(cg.phi(), |x| inv_beta / x)
        }
        Dynamics::Reduced(model) => {
            let m = match model.approach {
                Approach::Zero => &model.a0,
                Approach::One | Approach::Two => &model.b,
            };
            Ok(inverse_spd(m)?.scale(1.0 / model.beta))
        }
    }
}

/// Mean-squared displacement `E‖ξ_t − ξ₀‖²` from the deterministic start
/// `ξ₀ = 0`, the only case in which it is fixed by the covariance alone.
pub fn msd(dynamics: Dynamics<'_>, t_grid: &[f64], xi0: Option<&Vector>) -> Result<Vec<f64>> {
    if let Some(x) = xi0 {
        if x.iter().any(|&v| v != 0.0) {
            return Err(Error::Unsupported(
                "mean-squared displacement requires ξ₀ = 0 (zero-mean evolution)".into(),
            ));
        }
    }
    validate_lags(t_grid)?;
    // (1 − e^{-2tx})/x, written to avoid cancellation at small t
    let growth = |t: f64| move |x: f64| -(-2.0 * t * x).exp_m1() / x;
    match dynamics {
        Dynamics::Full { sys, cg } => {
            let inv_beta = 1.0 / sys.beta();
            t_grid
                .iter()
                .map(|&t| {
                    let m = sys.spectrum().apply_congruence(cg.phi(), growth(t))?;
                    Ok(inv_beta * m.trace())
                })
                .collect()
        }
        Dynamics::Reduced(model) => {
            let inv_beta = 1.0 / model.beta;
            match model.approach {
                Approach::Zero | Approach::One => {
                    let m = if model.approach == Approach::Zero {
                        &model.a0
                    } else {
                        &model.b
                    };
                    let spectrum = spectral_decompose(m)?;
                    t_grid
                        .iter()
                        .map(|&t| Ok(inv_beta * spectrum.apply(growth(t))?.trace()))
                        .collect()
                }
                Approach::Two => {
                    // B⁻¹(I − e^{-2tBC}) = C^{1/2} S⁻¹(I − e^{-2tS}) C^{1/2}
                    let similar = SimilarExp::new(&model.b, &model.c)?;
                    let c_half = similar.c_half().as_matrix().clone();
                    t_grid
                        .iter()
                        .map(|&t| {
                            let m = similar.symmetric_part().apply_congruence(&c_half, growth(t))?;
                            Ok(inv_beta * m.trace())
                        })
                        .collect()
                }
            }
        }
    }
}

/// Pointwise and cumulative Frobenius-norm errors of an approximate ACF.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub lags: Vec<f64>,
    pub abs_err: Vec<f64>,
    /// `NaN` where the reference norm vanishes but the error does not.
    pub rel_err: Vec<f64>,
    pub l1_mean_abs: Vec<f64>,
    pub l1_mean_rel: Vec<f64>,
}

impl ErrorReport {
    /// `tau,abs,rel,l1_abs,l1_rel`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let header: Vec<String> = ["tau", "abs", "rel", "l1_abs", "l1_rel"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        csvfmt::write_header(w, &header)?;
        for k in 0..self.lags.len() {
            csvfmt::write_row(
                w,
                &[
                    self.lags[k],
                    self.abs_err[k],
                    self.rel_err[k],
                    self.l1_mean_abs[k],
                    self.l1_mean_rel[k],
                ],
            )?;
        }
        Ok(())
    }
}

fn ratio_or_flag(num: f64, den: f64) -> f64 {
    if den >= ZERO_NORM {
        num / den
    } else if num < ZERO_NORM {
        0.0
    } else {
        f64::NAN
    }
}

/// Errors of `approx` against `truth`.
///
/// The L¹ means integrate with the trapezoid rule from the first grid point,
/// so they match the `(0, τ)` averages exactly when the grid starts at 0; at
/// the first grid point they reduce to the pointwise values.
pub fn error_report(truth: &AcfCurve, approx: &AcfCurve) -> Result<ErrorReport> {
    if truth.lags.len() != approx.lags.len() || truth.lags.iter().zip(&approx.lags).any(|(a, b)| a != b) {
        return Err(Error::GridMismatch(format!(
            "{} reference lags vs {} approximate lags",
            truth.lags.len(),
            approx.lags.len()
        )));
    }
    dim_check("ACF dimension", truth.dim(), approx.dim())?;
    let lags = truth.lags.clone();
    let abs_err: Vec<f64> = truth
        .values
        .iter()
        .zip(&approx.values)
        .map(|(r, a)| frobenius_norm(&(a.as_matrix() - r.as_matrix())))
        .collect();
    let ref_norm: Vec<f64> = truth.values.iter().map(|r| frobenius_norm(r)).collect();
    let rel_err = abs_err
        .iter()
        .zip(&ref_norm)
        .map(|(&e, &r)| ratio_or_flag(e, r))
        .collect();

    let mut l1_mean_abs = Vec::with_capacity(lags.len());
    let mut l1_mean_rel = Vec::with_capacity(lags.len());
    let (mut int_err, mut int_ref) = (0.0, 0.0);
    for k in 0..lags.len() {
        if k == 0 {
            l1_mean_abs.push(abs_err[0]);
            l1_mean_rel.push(ratio_or_flag(abs_err[0], ref_norm[0]));
            continue;
        }
        let h = lags[k] - lags[k - 1];
        int_err += 0.5 * h * (abs_err[k] + abs_err[k - 1]);
        int_ref += 0.5 * h * (ref_norm[k] + ref_norm[k - 1]);
        l1_mean_abs.push(int_err / (lags[k] - lags[0]));
        l1_mean_rel.push(ratio_or_flag(int_err, int_ref));
    }
    Ok(ErrorReport {
        lags,
        abs_err,
        rel_err,
        l1_mean_abs,
        l1_mean_rel,
    })
}

/// Everything the lag-domain analysis needs about one coarse-graining.
#[derive(Debug, Clone)]
pub struct ReducedMatrices {
    pub a0: SymMatrix,
    pub b: SymMatrix,
    pub c: SymMatrix,
    pub beta: f64,
}

impl ReducedMatrices {
    pub fn new(sys: &SystemSpec, cg: &CoarseGrainingMap) -> Result<Self> {
        let bd = block_decompose(sys, cg)?;
        let (b, c) = effective_matrices(&bd)?;
        Ok(ReducedMatrices {
            a0: bd.a0,
            b,
            c,
            beta: sys.beta(),
        })
    }
}

/// Smallest-eigenvalue margins of the four Löwner inequalities at one lag:
/// `0 ≤ R−R₁`, `R−R₁ ≤ ½β⁻¹τ²(A₀−B)`, `β⁻¹τ(C−I) ≤ R−R₂` and
/// `R−R₂ ≤ ½β⁻¹τ²(A₀−CBC) + β⁻¹τ(C−I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMargins {
    pub app1_lower: f64,
    pub app1_upper: f64,
    pub app2_lower: f64,
    pub app2_upper: f64,
}

impl BoundMargins {
    pub fn as_array(&self) -> [f64; 4] {
        [self.app1_lower, self.app1_upper, self.app2_lower, self.app2_upper]
    }

    pub fn min(&self) -> f64 {
        self.as_array().into_iter().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub lags: Vec<f64>,
    pub margins: Vec<BoundMargins>,
    pub tol: f64,
}

impl BoundsReport {
    pub fn passed_at(&self, k: usize) -> bool {
        self.margins[k].min() >= -self.tol
    }

    pub fn all_passed(&self) -> bool {
        (0..self.lags.len()).all(|k| self.passed_at(k))
    }

    pub fn worst_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(BoundMargins::min)
            .fold(f64::INFINITY, f64::min)
    }

    /// `tau,app1_lower,app1_upper,app2_lower,app2_upper,pass`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let header: Vec<String> = [
            "tau",
            "app1_lower",
            "app1_upper",
            "app2_lower",
            "app2_upper",
            "pass",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        csvfmt::write_header(w, &header)?;
        for (k, (tau, m)) in self.lags.iter().zip(&self.margins).enumerate() {
            let [a, b, c, d] = m.as_array();
            let pass = if self.passed_at(k) { 1.0 } else { 0.0 };
            csvfmt::write_row(w, &[*tau, a, b, c, d, pass])?;
        }
        Ok(())
    }
}

fn min_eig(m: &SymMatrix) -> Result<f64> {
    Ok(spectral_decompose(m)?.min_eigenvalue())
}

/// Evaluates the global Löwner-order error bounds of both approaches.
/// Violations are reported through the margins, not as errors.
pub fn check_bounds_thm_nd(
    sys: &SystemSpec,
    cg: &CoarseGrainingMap,
    lags: &[f64],
    tol: f64,
) -> Result<BoundsReport> {
    validate_lags(lags)?;
    if lags.first().is_some_and(|&t| t <= 0.0) {
        return Err(Error::InvalidParameter("bound checks need lags > 0".into()));
    }
    let mats = ReducedMatrices::new(sys, cg)?;
    let zero = Vector::zeros(cg.m());
    let app1 = crate::model::build_reduced(sys, cg, Approach::One, &zero)?;
    let app2 = crate::model::build_reduced(sys, cg, Approach::Two, &zero)?;
    let r = acf_full(sys, cg, lags)?;
    let r1 = acf_reduced(&app1, lags)?;
    let r2 = acf_reduced(&app2, lags)?;

    let n = mats.b.dim();
    let inv_beta = 1.0 / mats.beta;
    let gap_b = mats.a0.sub(&mats.b)?;
    let cbc = mats.b.congruence(mats.c.as_matrix())?;
    let gap_cbc = mats.a0.sub(&cbc)?;
    let c_minus_i = mats.c.sub(&SymMatrix::identity(n))?;

    let margins = (0..lags.len())
        .into_par_iter()
        .map(|k| {
            let tau = lags[k];
            let d1 = r.values[k].sub(&r1.values[k])?;
            let d2 = r.values[k].sub(&r2.values[k])?;
            let quad1 = gap_b.scale(0.5 * inv_beta * tau * tau);
            let lin2 = c_minus_i.scale(inv_beta * tau);
            let upper2 = gap_cbc.scale(0.5 * inv_beta * tau * tau).add(&lin2)?;
            Ok(BoundMargins {
                app1_lower: min_eig(&d1)?,
                app1_upper: min_eig(&quad1.sub(&d1)?)?,
                app2_lower: min_eig(&d2.sub(&lin2)?)?,
                app2_upper: min_eig(&upper2.sub(&d2)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsReport {
        lags: lags.to_vec(),
        margins,
        tol,
    })
}

/// Result of scanning small lags for the approach-2 short-lag behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallLagScan {
    /// Largest grid lag up to which `β⁻¹τ(C−I) ≤ R−R₂ ≤ β⁻¹τ(I−C)` held at
    /// every grid point, if it held at the first.
    pub sandwich_horizon: Option<f64>,
    /// Largest grid lag up to which `R ≤ R₂` held at every grid point.
    pub overestimate_horizon: Option<f64>,
}

pub fn scan_small_lags(
    sys: &SystemSpec,
    cg: &CoarseGrainingMap,
    grid: &[f64],
    tol: f64,
) -> Result<SmallLagScan> {
    validate_lags(grid)?;
    if grid.first().is_some_and(|&t| t <= 0.0) {
        return Err(Error::InvalidParameter("scan grid must be > 0".into()));
    }
    let mats = ReducedMatrices::new(sys, cg)?;
    let app2 = crate::model::build_reduced(sys, cg, Approach::Two, &Vector::zeros(cg.m()))?;
    let r = acf_full(sys, cg, grid)?;
    let r2 = acf_reduced(&app2, grid)?;
    let c_minus_i = mats.c.sub(&SymMatrix::identity(mats.b.dim()))?;
    let inv_beta = 1.0 / mats.beta;

    let mut sandwich_horizon = None;
    let mut overestimate_horizon = None;
    let (mut sandwich_open, mut over_open) = (true, true);
    for (k, &tau) in grid.iter().enumerate() {
        let d2 = r.values[k].sub(&r2.values[k])?;
        let lin = c_minus_i.scale(inv_beta * tau);
        if sandwich_open {
            let lower = min_eig(&d2.sub(&lin)?)?;
            let upper = min_eig(&lin.scale(-1.0).sub(&d2)?)?;
            if lower >= -tol && upper >= -tol {
                sandwich_horizon = Some(tau);
            } else {
                sandwich_open = false;
            }
        }
        if over_open {
            if min_eig(&d2.scale(-1.0))? >= -tol {
                overestimate_horizon = Some(tau);
            } else {
                over_open = false;
            }
        }
        if !sandwich_open && !over_open {
            break;
        }
    }
    Ok(SmallLagScan {
        sandwich_horizon,
        overestimate_horizon,
    })
}

/// Second-order Taylor polynomials of `R`, `R₁` and `R₂` at `τ = 0`.
#[derive(Debug, Clone)]
pub struct ShortTimeExpansion {
    pub full: SymMatrix,
    pub app1: SymMatrix,
    pub app2: SymMatrix,
}

/// `β⁻¹(B⁻¹ − τI + ½τ²A₀)`, `β⁻¹(B⁻¹ − τI + ½τ²B)` and
/// `β⁻¹(B⁻¹ − τC + ½τ²CBC)`. No clamping: `tau` is used as given.
pub fn short_time_expansions(
    sys: &SystemSpec,
    cg: &CoarseGrainingMap,
    tau: f64,
) -> Result<ShortTimeExpansion> {
    let mats = ReducedMatrices::new(sys, cg)?;
    let inv_beta = 1.0 / mats.beta;
    let n = mats.b.dim();
    let b_inv = inverse_spd(&mats.b)?;
    let ident = SymMatrix::identity(n);
    let half_sq = 0.5 * tau * tau;
    let full = b_inv
        .sub(&ident.scale(tau))?
        .add(&mats.a0.scale(half_sq))?
        .scale(inv_beta);
    let app1 = b_inv
        .sub(&ident.scale(tau))?
        .add(&mats.b.scale(half_sq))?
        .scale(inv_beta);
    let cbc = mats.b.congruence(mats.c.as_matrix())?;
    let app2 = b_inv
        .sub(&mats.c.scale(tau))?
        .add(&cbc.scale(half_sq))?
        .scale(inv_beta);
    Ok(ShortTimeExpansion { full, app1, app2 })
}

/// Two-dimensional model family: `A = diag(1, λ)`, `Φ = (cos θ, sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TwoDSpec {
    pub lambda: f64,
    pub theta: f64,
}

impl TwoDSpec {
    pub fn new(lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 1.0) {
            return Err(Error::InvalidParameter(format!("λ must be ≥ 1, got {lambda}")));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(theta > -half_pi && theta < half_pi) {
            return Err(Error::InvalidParameter(format!(
                "θ must lie in (−π/2, π/2), got {theta}"
            )));
        }
        Ok(TwoDSpec { lambda, theta })
    }
}

/// Leading-order error predictions for the 2D family.
///
/// Long-lag fields hold for `τ ≫ λ⁻¹` as `λ → ∞`; `short_*` fields hold for
/// `τ ≪ λ⁻¹ ≪ 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AsymptoticErrors {
    pub app1_abs: f64,
    pub app1_rel: f64,
    pub app2_abs: f64,
    pub app2_rel: f64,
    pub app1_rel_tau1: f64,
    pub app2_rel_tau1: f64,
    pub short_app1_abs: f64,
    pub short_app1_rel: f64,
    pub short_app2_abs: f64,
    pub short_app2_rel: f64,
}

pub fn asymptotics_2d(spec: TwoDSpec, beta: f64, tau: f64) -> Result<AsymptoticErrors> {
    let TwoDSpec { lambda, theta } = TwoDSpec::new(spec.lambda, spec.theta)?;
    if lambda <= 1.0 {
        return Err(Error::InvalidParameter(
            "asymptotic predictions need λ > 1".into(),
        ));
    }
    let inv_beta = 1.0 / beta;
    let (sin, cos) = theta.sin_cos();
    let (sin2, cos2) = (sin * sin, cos * cos);
    let tan2 = sin2 / cos2;
    let sec2 = 1.0 / cos2;
    Ok(AsymptoticErrors {
        app1_abs: inv_beta * ((-tau).exp() - (-tau * sec2).exp()) * cos2,
        app1_rel: -(-tau * tan2).exp_m1(),
        app2_abs: inv_beta * (sin2 / lambda) * ((-lambda * tau).exp() - (-tau).exp() * (1.0 - tau)).abs(),
        app2_rel: f64::min(1.0, (tau - 1.0).abs() / lambda * tan2),
        app1_rel_tau1: -(-tan2).exp_m1(),
        app2_rel_tau1: tan2 * (1.0 - 0.5 * tan2).abs() / (lambda * lambda),
        short_app1_abs: 0.5 * inv_beta * tau * tau * (lambda - 1.0) * sin2,
        short_app1_rel: 0.5 * tau * tau * (lambda - 1.0) * tan2,
        short_app2_abs: inv_beta * tau * sin2,
        short_app2_rel: tau * tan2,
    })
}

/// Exact errors of approaches 1 and 2 for the 2D family at one lag.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TwoDErrors {
    pub app1_abs: f64,
    pub app1_rel: f64,
    pub app2_abs: f64,
    pub app2_rel: f64,
}

/// `e^{-x} − 1 + x`, accurate for small `x`.
fn exp_remainder(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // alternating Taylor tail; 12 terms reach full precision for |x| < 0.1
        let mut term = 0.5 * x * x;
        let mut sum = term;
        for k in 3..15 {
            term *= -x / k as f64;
            sum += term;
        }
        sum
    } else {
        (-x).exp_m1() + x
    }
}

/// Scalar 2D errors `R − R_k` with the first-order terms cancelled
/// analytically, so lags where the errors are far below machine epsilon
/// relative to `R` are still resolved.
///
/// With reduced rate `r`, `β(R − R_k) = τ(r/B − 1) + cos²θ[φ(τ) − φ(rτ)]
/// + λ⁻¹sin²θ[φ(λτ) − φ(rτ)]` where `φ(x) = e^{-x} − 1 + x`, and
/// `r/B − 1` is 0 for approach 1 and `C − 1` for approach 2.
pub fn exact_errors_2d(spec: TwoDSpec, beta: f64, tau: f64) -> Result<TwoDErrors> {
    let TwoDSpec { lambda, theta } = TwoDSpec::new(spec.lambda, spec.theta)?;
    let (sin, cos) = theta.sin_cos();
    let (s2, c2) = (sin * sin, cos * cos);
    let inv_beta = 1.0 / beta;
    let b = lambda / (lambda * c2 + s2);
    let c_minus_one = -c2 * s2 * (lambda - 1.0).powi(2) / (lambda * lambda * c2 + s2);
    let c = 1.0 + c_minus_one;
    let truth = inv_beta * (c2 * (-tau).exp() + s2 / lambda * (-lambda * tau).exp());
    let gap = |rate: f64, linear: f64| {
        let tail = c2 * (exp_remainder(tau) - exp_remainder(rate * tau))
            + s2 / lambda * (exp_remainder(lambda * tau) - exp_remainder(rate * tau));
        inv_beta * (linear * tau + tail)
    };
    let (d1, d2) = (gap(b, 0.0), gap(b * c, c_minus_one));
    Ok(TwoDErrors {
        app1_abs: d1.abs(),
        app1_rel: d1.abs() / truth,
        app2_abs: d2.abs(),
        app2_rel: d2.abs() / truth,
    })
}
