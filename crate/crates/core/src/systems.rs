//! Builders for the three experiment families and the progressive
//! coarse-graining comparison.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{acf_full, acf_reduced, error_report, AcfCurve, ErrorReport, TwoDSpec};
use crate::error::{dim_check, Error, Result};
use crate::matcore::{frobenius_norm, spectral_decompose, Matrix, SymMatrix, Vector};
use crate::model::{build_reduced, normalize_map, Approach, CoarseGrainingMap, SystemSpec, MAP_TOL};

/// `A = diag(1, λ)`, `Φ = (cos θ, sin θ)`, `Ψ = (−sin θ, cos θ)`.
pub fn build_2d(spec: TwoDSpec, beta: f64) -> Result<(SystemSpec, CoarseGrainingMap)> {
    let TwoDSpec { lambda, theta } = TwoDSpec::new(spec.lambda, spec.theta)?;
    let sys = SystemSpec::new(SymMatrix::from_diagonal(&[1.0, lambda]), beta)?;
    let (s, c) = theta.sin_cos();
    let raw = Matrix::from_row_slice(1, 2, &[c, s]);
    let psi = Matrix::from_row_slice(1, 2, &[-s, c]);
    Ok((sys, CoarseGrainingMap::with_complement(&raw, psi)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TridiagSpec {
    pub diag: Vec<f64>,
    pub offdiag_sigma: f64,
}

impl TridiagSpec {
    /// `λ₁ = 1` and `λ₂…λ₁₀` equally spaced on `[1.5, 10]`.
    pub fn paper_10d(sigma: f64) -> Self {
        let mut diag = vec![1.0];
        diag.extend((0..9).map(|j| 1.5 + 1.0625 * j as f64));
        TridiagSpec {
            diag,
            offdiag_sigma: sigma,
        }
    }
}

pub fn build_tridiag(spec: &TridiagSpec, beta: f64) -> Result<SystemSpec> {
    let n = spec.diag.len();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "tridiagonal system needs a diagonal".into(),
        ));
    }
    if spec.diag.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "diagonal entries must be ascending".into(),
        ));
    }
    if !(spec.offdiag_sigma.is_finite() && spec.offdiag_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "σ must be nonnegative, got {}",
            spec.offdiag_sigma
        )));
    }
    let a = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            spec.diag[i]
        } else if i.abs_diff(j) == 1 {
            spec.offdiag_sigma
        } else {
            0.0
        }
    });
    SystemSpec::new(SymMatrix::new(a)?, beta)
}

/// Spring chain with a free left end and a wall spring on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub n_masses: usize,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Explicit constants for all `n_masses` springs, the last one being the
    /// wall spring; replaces `(k1, k2, k3, …, k3)` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub springs: Option<Vec<f64>>,
}

impl ChainSpec {
    pub fn spring_constants(&self) -> Result<Vec<f64>> {
        let n = self.n_masses;
        if n == 0 {
            return Err(Error::InvalidParameter("chain needs at least one mass".into()));
        }
        let k = match &self.springs {
            Some(k) => {
                dim_check("spring constants", n, k.len())?;
                k.clone()
            }
            None => (0..n)
                .map(|i| match i {
                    0 => self.k1,
                    1 => self.k2,
                    _ => self.k3,
                })
                .collect(),
        };
        if k.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::InvalidParameter(
                "spring constants must be positive".into(),
            ));
        }
        Ok(k)
    }
}

/// `A = Dᵀ diag(k) D`; spring `i < N` joins masses `i, i+1`, spring `N`
/// joins mass `N` to the wall.
pub fn build_chain(spec: &ChainSpec, beta: f64) -> Result<SystemSpec> {
    let k = spec.spring_constants()?;
    let n = k.len();
    let d = Matrix::from_fn(n, n, |s, m| {
        if s + 1 < n {
            if m == s {
                -1.0
            } else if m == s + 1 {
                1.0
            } else {
                0.0
            }
        } else if m == n - 1 {
            1.0
        } else {
            0.0
        }
    });
    let a = SymMatrix::new(d.transpose() * Matrix::from_diagonal(&Vector::from_vec(k)) * d)?;
    SystemSpec::new(a, beta)
}

/// Rows `e_i` for each selected index.
pub fn coordinate_selection_map(full_dim: usize, indices: &[usize]) -> Result<Matrix> {
    if indices.is_empty() || indices.iter().any(|&i| i >= full_dim) {
        return Err(Error::InvalidParameter(format!(
            "coordinate indices must be nonempty and below {full_dim}"
        )));
    }
    Ok(Matrix::from_fn(indices.len(), full_dim, |r, c| {
        if indices[r] == c {
            1.0
        } else {
            0.0
        }
    }))
}

/// Outer map `X` (d×n), inner map `Φ` (n×N, `n = N` allowed) and `Y = XΦ`.
#[derive(Debug, Clone)]
pub struct ProgressiveSpec {
    pub outer: Matrix,
    pub inner: Matrix,
    pub composed: CoarseGrainingMap,
}

fn orthonormality_defect(m: &Matrix) -> f64 {
    frobenius_norm(&(m * m.transpose() - Matrix::identity(m.nrows(), m.nrows())))
}

fn require_orthonormal(what: &str, m: &Matrix) -> Result<()> {
    let defect = orthonormality_defect(m);
    if defect > MAP_TOL {
        return Err(Error::InvalidParameter(format!(
            "{what} rows are not orthonormal (‖MMᵀ − I‖ = {defect:e})"
        )));
    }
    Ok(())
}

impl ProgressiveSpec {
    pub fn new(outer: Matrix, inner: Matrix) -> Result<Self> {
        dim_check("outer map width", inner.nrows(), outer.ncols())?;
        if outer.nrows() >= outer.ncols() || inner.nrows() > inner.ncols() {
            return Err(Error::InvalidParameter(
                "outer map must strictly reduce dimension and inner map must not expand it".into(),
            ));
        }
        require_orthonormal("outer map", &outer)?;
        require_orthonormal("inner map", &inner)?;
        let y = &outer * &inner;
        require_orthonormal("composed map", &y)?;
        let composed = normalize_map(&y)?;
        Ok(ProgressiveSpec {
            outer,
            inner,
            composed,
        })
    }
}

/// ACFs at three levels of coarsening and the pairwise errors between them.
#[derive(Debug, Clone)]
pub struct ProgressiveResult {
    /// `Y R Yᵀ` from the full dynamics.
    pub full: AcfCurve,
    /// `X R(Φ) Xᵀ` from the intermediate reduced model.
    pub intermediate: AcfCurve,
    /// `R(Y)` from the directly reduced model.
    pub coarsest: AcfCurve,
    /// Full vs coarsest.
    pub full_vs_coarsest: ErrorReport,
    /// Full vs intermediate.
    pub full_vs_intermediate: ErrorReport,
    /// Intermediate (as reference) vs coarsest.
    pub intermediate_vs_coarsest: ErrorReport,
}

impl ProgressiveResult {
    /// Lags at which both progressive-coarsening inequalities hold with `slack`.
    pub fn monotone_at(&self, slack: f64) -> Vec<bool> {
        (0..self.full.len())
            .map(|k| {
                let top = self.full_vs_coarsest.abs_err[k];
                self.full_vs_intermediate.abs_err[k] <= top + slack
                    && self.intermediate_vs_coarsest.abs_err[k] <= top + slack
            })
            .collect()
    }
}

pub fn progressive_compare(
    sys: &SystemSpec,
    spec: &ProgressiveSpec,
    approach: Approach,
    lags: &[f64],
) -> Result<ProgressiveResult> {
    dim_check("inner map width", sys.dim(), spec.inner.ncols())?;
    let coarse_model = build_reduced(sys, &spec.composed, approach, &Vector::zeros(spec.composed.m()))?;
    let full = acf_full(sys, &spec.composed, lags)?;
    let intermediate = if spec.inner.nrows() == sys.dim() {
        // An orthogonal inner map loses nothing: the intermediate level is the full dynamics.
        let inv_beta = 1.0 / sys.beta();
        let values = lags
            .par_iter()
            .map(|&tau| {
                sys.spectrum()
                    .apply_congruence(&spec.inner, |x| inv_beta * (-tau * x).exp() / x)
            })
            .collect::<Result<Vec<_>>>()?;
        AcfCurve {
            lags: lags.to_vec(),
            values,
        }
    } else {
        let inner = normalize_map(&spec.inner)?;
        let inner_model = build_reduced(sys, &inner, approach, &Vector::zeros(inner.m()))?;
        acf_reduced(&inner_model, lags)?
    };
    let projected = intermediate
        .values
        .par_iter()
        .map(|v| v.congruence(&spec.outer))
        .collect::<Result<Vec<_>>>()?;
    let intermediate = AcfCurve {
        lags: lags.to_vec(),
        values: projected,
    };
    let coarsest = acf_reduced(&coarse_model, lags)?;
    Ok(ProgressiveResult {
        full_vs_coarsest: error_report(&full, &coarsest)?,
        full_vs_intermediate: error_report(&full, &intermediate)?,
        intermediate_vs_coarsest: error_report(&intermediate, &coarsest)?,
        full,
        intermediate,
        coarsest,
    })
}

/// Smallest eigenvalue of a symmetric matrix; used in diagnostics.
pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(spectral_decompose(m)?.min_eigenvalue())
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `k × n` matrix with orthonormal rows, Haar-distributed.
pub fn random_orthonormal_rows<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Matrix {
    assert!(k <= n, "cannot fit {k} orthonormal rows in dimension {n}");
    let qr = gaussian_matrix(n, k, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the distribution is Haar rather than QR-convention dependent
    let signs = Vector::from_fn(k, |i, _| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 });
    (q * Matrix::from_diagonal(&signs)).transpose()
}

/// SPD matrix with random eigenvectors and eigenvalues log-uniform on `[lo, hi]`.
pub fn random_spd<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> SymMatrix {
    let q = random_orthonormal_rows(n, n, rng);
    let (a, b) = (lo.ln(), hi.ln());
    let eig = Vector::from_fn(n, |_, _| (a + (b - a) * rng.random::<f64>()).exp());
    let m = q.transpose() * Matrix::from_diagonal(&eig) * q;
    SymMatrix::with_tolerance(m, 1e-10).expect("congruence of a diagonal is symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::uniform_grid;
    use crate::model::{block_decompose, effective_matrices};

    #[test]
    fn two_d_blocks() {
        let (sys, cg) = build_2d(TwoDSpec::new(2.0, std::f64::consts::FRAC_PI_4).unwrap(), 1.0).unwrap();
        let bd = block_decompose(&sys, &cg).unwrap();
        assert!((bd.a0[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((bd.alpha[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((bd.a1[(0, 0)] - 1.5).abs() < 1e-15);

        let (sys, cg) = build_2d(TwoDSpec::new(1.0, 0.7).unwrap(), 1.0).unwrap();
        let bd = block_decompose(&sys, &cg).unwrap();
        assert!(bd.alpha.norm() < 1e-15);
        let (b, c) = effective_matrices(&bd).unwrap();
        assert!((b[(0, 0)] - 1.0).abs() < 1e-15 && (c[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tridiag_paper_diagonal() {
        let spec = TridiagSpec::paper_10d(0.5);
        assert_eq!(spec.diag.len(), 10);
        assert_eq!(spec.diag[1], 1.5);
        assert_eq!(spec.diag[9], 10.0);
        let sys = build_tridiag(&spec, 1.0).unwrap();
        assert_eq!(sys.a()[(3, 4)], 0.5);
        assert_eq!(sys.a()[(3, 5)], 0.0);
    }

    #[test]
    fn tridiag_cubic_oracle() {
        let sys = build_tridiag(
            &TridiagSpec {
                diag: vec![1.0, 2.0, 3.0],
                offdiag_sigma: 0.5,
            },
            1.0,
        )
        .unwrap();
        // det(A − xI) = (1−x)(2−x)(3−x) − 0.25(1−x) − 0.25(3−x)
        let p = |x: f64| (1.0 - x) * (2.0 - x) * (3.0 - x) - 0.25 * (1.0 - x) - 0.25 * (3.0 - x);
        let dp = |x: f64| (p(x + 1e-7) - p(x - 1e-7)) / 2e-7;
        for &l in sys.spectrum().eigenvalues.iter() {
            let mut x = l;
            for _ in 0..5 {
                x -= p(x) / dp(x);
            }
            assert!((x - l).abs() < 1e-10);
        }
    }

    #[test]
    fn tridiag_guards() {
        let bad = TridiagSpec {
            diag: vec![1.0, 1.0],
            offdiag_sigma: 2.0,
        };
        match build_tridiag(&bad, 1.0) {
            Err(Error::NotPositiveDefinite { min_eigenvalue, .. }) => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12)
            }
            other => panic!("expected SPD failure, got {other:?}"),
        }
        let unsorted = TridiagSpec {
            diag: vec![2.0, 1.0],
            offdiag_sigma: 0.0,
        };
        assert!(build_tridiag(&unsorted, 1.0).is_err());
    }

    #[test]
    fn diagonal_tridiag_is_exact() {
        let sys = build_tridiag(&TridiagSpec::paper_10d(0.0), 1.0).unwrap();
        let cg = normalize_map(&coordinate_selection_map(10, &[0]).unwrap()).unwrap();
        assert!(block_decompose(&sys, &cg).unwrap().alpha.norm() == 0.0);
    }

    fn chain(n: usize, k: (f64, f64, f64)) -> SystemSpec {
        build_chain(
            &ChainSpec {
                n_masses: n,
                k1: k.0,
                k2: k.1,
                k3: k.2,
                springs: None,
            },
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn chain_assembly_examples() {
        let a = chain(5, (1.0, 2.0, 3.0));
        let diag: Vec<f64> = (0..5).map(|i| a.a()[(i, i)]).collect();
        let off: Vec<f64> = (0..4).map(|i| a.a()[(i, i + 1)]).collect();
        assert_eq!(diag, vec![1.0, 3.0, 5.0, 6.0, 6.0]);
        assert_eq!(off, vec![-1.0, -2.0, -3.0, -3.0]);

        let a = chain(2, (1.0, 1.0, 1.0));
        assert_eq!(
            a.a().as_matrix(),
            &Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0])
        );
    }

    #[test]
    fn chain_matches_direct_formula() {
        let springs = vec![1.0, 0.3, 7.0, 2.5, 4.0, 0.9];
        let sys = build_chain(
            &ChainSpec {
                n_masses: 6,
                k1: 0.0,
                k2: 0.0,
                k3: 0.0,
                springs: Some(springs.clone()),
            },
            1.0,
        )
        .unwrap();
        let n = springs.len();
        let direct = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                springs[i] + if i > 0 { springs[i - 1] } else { 0.0 }
            } else if j == i + 1 {
                -springs[i]
            } else if i == j + 1 {
                -springs[j]
            } else {
                0.0
            }
        });
        assert_eq!(sys.a().as_matrix(), &direct);
        let row_sums = sys.a().as_matrix() * Vector::repeat(n, 1.0);
        assert!((row_sums[n - 1] - springs[n - 1]).abs() < 1e-14);
        assert!(row_sums.rows(0, n - 1).iter().all(|&s| s.abs() < 1e-14));
    }

    #[test]
    fn chain_rejects_nonpositive_springs() {
        let spec = ChainSpec {
            n_masses: 3,
            k1: 1.0,
            k2: -1.0,
            k3: 1.0,
            springs: None,
        };
        assert!(build_chain(&spec, 1.0).is_err());
    }

    #[test]
    fn identity_inner_map_reproduces_full() {
        let sys = build_tridiag(&TridiagSpec::paper_10d(0.5), 1.0).unwrap();
        let inner = Matrix::identity(10, 10);
        let outer = coordinate_selection_map(10, &[0]).unwrap();
        let spec = ProgressiveSpec::new(outer, inner).unwrap();
        let lags = uniform_grid(0.05, 2.0, 10);
        for approach in [Approach::One, Approach::Two] {
            let res = progressive_compare(&sys, &spec, approach, &lags).unwrap();
            assert!(res.full_vs_intermediate.abs_err.iter().all(|&e| e < 1e-15));
            assert!(res.monotone_at(1e-9).iter().all(|&b| b));
        }
    }

    #[test]
    fn selection_maps_compose() {
        let sys = build_tridiag(&TridiagSpec::paper_10d(0.5), 1.0).unwrap();
        let inner = coordinate_selection_map(10, &[0, 1, 2]).unwrap();
        let spec = ProgressiveSpec::new(coordinate_selection_map(3, &[0]).unwrap(), inner).unwrap();
        assert_eq!(spec.composed.phi(), &coordinate_selection_map(10, &[0]).unwrap());
        let lags = uniform_grid(0.05, 2.0, 10);
        let res = progressive_compare(&sys, &spec, Approach::One, &lags).unwrap();
        assert!(res.monotone_at(1e-9).iter().all(|&b| b));
    }

    #[test]
    fn random_generators() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let phi = random_orthonormal_rows(3, 7, &mut rng);
        assert!(orthonormality_defect(&phi) < 1e-13);
        let a = random_spd(6, 0.5, 4.0, &mut rng);
        let spec = spectral_decompose(&a).unwrap();
        assert!(spec.min_eigenvalue() >= 0.5 - 1e-12 && spec.max_eigenvalue() <= 4.0 + 1e-12);
    }

    #[test]
    fn progressive_dimension_checks() {
        let inner = coordinate_selection_map(10, &[0, 1]).unwrap();
        assert!(ProgressiveSpec::new(coordinate_selection_map(3, &[0]).unwrap(), inner.clone()).is_err());
        let skew = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(ProgressiveSpec::new(skew, inner).is_err());
    }
}
