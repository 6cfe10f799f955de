//! Full system, coarse-graining maps, block decomposition and the three
//! Markovian approximations of the coarse-grained dynamics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{dim_check, Error, Result};
use crate::matcore::{
    frobenius_norm, inverse_spd, require_spd, spectral_decompose, sqrtm_inv, Matrix, SimilarExp,
    SpectralDecomp, SymMatrix, Vector,
};

/// Tolerance for the orthonormality invariants of a coarse-graining map.
pub const MAP_TOL: f64 = 1e-10;

/// Full overdamped dynamics `dq = −A q dt + √(2/β) dW`.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    a: SymMatrix,
    beta: f64,
    spectrum: SpectralDecomp,
}

impl SystemSpec {
    pub fn new(a: SymMatrix, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature must be positive, got {beta}"
            )));
        }
        let spectrum = require_spd("drift matrix A", &a)?;
        Ok(SystemSpec { a, beta, spectrum })
    }

    pub fn a(&self) -> &SymMatrix {
        &self.a
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn spectrum(&self) -> &SpectralDecomp {
        &self.spectrum
    }
}

/// Normalized linear coarse-graining `ξ = Φq` with orthonormal complement `ζ = Ψq`.
#[derive(Debug, Clone)]
pub struct CoarseGrainingMap {
    raw: Matrix,
    phi: Matrix,
    psi: Matrix,
}

impl CoarseGrainingMap {
    /// Normalizes `raw` and pairs it with an explicitly supplied complement.
    pub fn with_complement(raw: &Matrix, psi: Matrix) -> Result<Self> {
        let phi = normalized_rows(raw)?;
        let map = CoarseGrainingMap {
            raw: raw.clone(),
            phi,
            psi,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn raw(&self) -> &Matrix {
        &self.raw
    }

    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    /// Number of coarse variables.
    pub fn n(&self) -> usize {
        self.phi.nrows()
    }

    /// Number of eliminated variables.
    pub fn m(&self) -> usize {
        self.psi.nrows()
    }

    pub fn full_dim(&self) -> usize {
        self.phi.ncols()
    }

    /// Orthogonal projector `P = ΦᵀΦ` onto the coarse row space.
    pub fn projector(&self) -> Matrix {
        self.phi.transpose() * &self.phi
    }

    fn validate(&self) -> Result<()> {
        let (n, m, big_n) = (self.n(), self.m(), self.full_dim());
        dim_check("complement width", big_n, self.psi.ncols())?;
        dim_check("complement rows", big_n - n, m)?;
        let checks = [
            (
                "ΦΦᵀ = I",
                (&self.phi * self.phi.transpose() - Matrix::identity(n, n)).norm(),
            ),
            (
                "ΨΨᵀ = I",
                (&self.psi * self.psi.transpose() - Matrix::identity(m, m)).norm(),
            ),
            ("ΦΨᵀ = 0", (&self.phi * self.psi.transpose()).norm()),
            (
                "ΦᵀΦ + ΨᵀΨ = I",
                (self.projector() + self.psi.transpose() * &self.psi - Matrix::identity(big_n, big_n)).norm(),
            ),
        ];
        for (name, defect) in checks {
            if defect.is_nan() || defect > MAP_TOL {
                return Err(Error::InvalidParameter(format!(
                    "coarse-graining invariant {name} violated by {defect:e}"
                )));
            }
        }
        Ok(())
    }
}

fn normalized_rows(raw: &Matrix) -> Result<Matrix> {
    let (n, big_n) = raw.shape();
    if n == 0 || n >= big_n {
        return Err(Error::InvalidParameter(format!(
            "coarse-graining map must have 0 < n < N rows, got {n}x{big_n}"
        )));
    }
    let gram = SymMatrix::new(raw * raw.transpose())?;
    let inv_half = sqrtm_inv(&gram)?;
    Ok(inv_half.as_matrix() * raw)
}

/// `Φ = (Φ̃Φ̃ᵀ)^{-1/2} Φ̃` together with a deterministic complement `Ψ`.
///
/// `Ψ` is built by pivoted Gram–Schmidt over the canonical basis: at each step
/// the basis vector with the largest residual against the rows accepted so far
/// is orthonormalized and appended (ties go to the lowest index).
pub fn normalize_map(raw: &Matrix) -> Result<CoarseGrainingMap> {
    let phi = normalized_rows(raw)?;
    let psi = orthonormal_complement(&phi);
    let map = CoarseGrainingMap {
        raw: raw.clone(),
        phi,
        psi,
    };
    map.validate()?;
    Ok(map)
}

fn orthonormal_complement(phi: &Matrix) -> Matrix {
    let (n, big_n) = phi.shape();
    let m = big_n - n;
    let mut basis: Vec<Vector> = phi.row_iter().map(|r| r.transpose()).collect();
    let mut used = vec![false; big_n];
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let mut best: Option<(usize, Vector, f64)> = None;
        for j in (0..big_n).filter(|&j| !used[j]) {
            let mut v = Vector::zeros(big_n);
            v[j] = 1.0;
            // two passes of classical Gram–Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let coef = b.dot(&v);
                    v.axpy(-coef, b, 1.0);
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn) {
                best = Some((j, v, norm));
            }
        }
        let (j, v, norm) = best.expect("complement dimension is positive");
        used[j] = true;
        let v = v / norm;
        rows.push(v.transpose());
        basis.push(v);
    }
    Matrix::from_rows(&rows)
}

/// `A₀ = ΦAΦᵀ`, `α = ΦAΨᵀ`, `A₁ = ΨAΨᵀ`.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub a0: SymMatrix,
    pub alpha: Matrix,
    pub a1: SymMatrix,
}

pub fn block_decompose(sys: &SystemSpec, cg: &CoarseGrainingMap) -> Result<BlockDecomposition> {
    dim_check("coarse-graining map width", sys.dim(), cg.full_dim())?;
    let a = sys.a().as_matrix();
    let a0 = sys.a().congruence(cg.phi())?;
    let a1 = sys.a().congruence(cg.psi())?;
    require_spd("A₁", &a1)?;
    let alpha = cg.phi() * a * cg.psi().transpose();
    Ok(BlockDecomposition { a0, alpha, a1 })
}

/// `B = A₀ − αA₁⁻¹αᵀ` and `C = (I + αA₁⁻²αᵀ)⁻¹`.
pub fn effective_matrices(bd: &BlockDecomposition) -> Result<(SymMatrix, SymMatrix)> {
    dim_check("α rows", bd.a0.dim(), bd.alpha.nrows())?;
    dim_check("α columns", bd.a1.dim(), bd.alpha.ncols())?;
    let a1_decomp = spectral_decompose(&bd.a1)?;
    if !a1_decomp.is_spd() {
        return Err(Error::Singularity {
            eigenvalue: a1_decomp.min_eigenvalue(),
        });
    }
    let n = bd.a0.dim();
    let g = &bd.alpha * a1_decomp.apply(|x| 1.0 / x.sqrt())?.as_matrix();
    let h = &bd.alpha * a1_decomp.apply(|x| 1.0 / x)?.as_matrix();
    let b = SymMatrix::new(bd.a0.as_matrix() - &g * g.transpose())?;
    require_spd("B", &b)?;
    let c_inv = SymMatrix::new(Matrix::identity(n, n) + &h * h.transpose())?;
    let c = inverse_spd(&c_inv)?;
    Ok((b, c))
}

/// Which Markovian closure of the memory terms is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Approach {
    /// Memory integrals dropped: drift `A₀`.
    Zero,
    /// Leading-order closure: drift `B`.
    One,
    /// First-order closure in single-noise form: drift `C·B`, noise `C^{1/2}`.
    Two,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::Zero, Approach::One, Approach::Two];

    pub fn index(self) -> u8 {
        match self {
            Approach::Zero => 0,
            Approach::One => 1,
            Approach::Two => 2,
        }
    }
}

impl TryFrom<u8> for Approach {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Approach::Zero),
            1 => Ok(Approach::One),
            2 => Ok(Approach::Two),
            other => Err(format!("approach must be 0, 1 or 2, got {other}")),
        }
    }
}

impl From<Approach> for u8 {
    fn from(a: Approach) -> u8 {
        a.index()
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "approach {}", self.index())
    }
}

/// Forcing `α e^{-A₁t} ζ₀` left over from the eliminated initial condition.
#[derive(Debug, Clone)]
pub struct MemoryTerm {
    pub alpha: Matrix,
    pub a1: SymMatrix,
    pub zeta0: Vector,
    a1_spectrum: SpectralDecomp,
}

impl MemoryTerm {
    pub fn new(alpha: Matrix, a1: SymMatrix, zeta0: Vector) -> Result<Self> {
        dim_check("ζ₀", a1.dim(), zeta0.len())?;
        dim_check("α columns", a1.dim(), alpha.ncols())?;
        let a1_spectrum = spectral_decompose(&a1)?;
        Ok(MemoryTerm {
            alpha,
            a1,
            zeta0,
            a1_spectrum,
        })
    }

    pub fn forcing(&self, t: f64) -> Result<Vector> {
        let decay = self.a1_spectrum.apply(|x| (-t * x).exp())?;
        Ok(&self.alpha * (decay.as_matrix() * &self.zeta0))
    }

    /// `e^{-A₁·dt}`, the one-step propagator of the decaying state.
    pub fn step_propagator(&self, dt: f64) -> Result<SymMatrix> {
        self.a1_spectrum.apply(|x| (-dt * x).exp())
    }
}

/// One of the Markovian coarse-grained models
/// `dξ = −(D ξ − f(t)) dt + √(2/β) Σ dW`, with drift `D`, noise factor `Σ`
/// and forcing `f` derived from the memory term.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub approach: Approach,
    pub drift: Matrix,
    pub noise_factor: SymMatrix,
    pub memory: Option<MemoryTerm>,
    pub a0: SymMatrix,
    pub b: SymMatrix,
    pub c: SymMatrix,
    pub beta: f64,
    drift_rates: Vector,
}

impl ReducedModel {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// Eigenvalues of the drift matrix (all real and positive), ascending.
    pub fn drift_rates(&self) -> &Vector {
        &self.drift_rates
    }

    /// Forcing entering the drift at time `t`; multiplied by `C` for approach 2.
    pub fn drift_forcing(&self, t: f64) -> Result<Vector> {
        let n = self.dim();
        match &self.memory {
            None => Ok(Vector::zeros(n)),
            Some(mem) => {
                let f = mem.forcing(t)?;
                Ok(match self.approach {
                    Approach::Two => self.c.as_matrix() * f,
                    _ => f,
                })
            }
        }
    }
}

/// `ζ₀ = −A₁⁻¹ αᵀ ξ₀`, the conditional-equilibrium choice for the eliminated state.
pub fn default_zeta0(bd: &BlockDecomposition, xi0: &Vector) -> Result<Vector> {
    dim_check("ξ₀", bd.a0.dim(), xi0.len())?;
    let a1_inv = inverse_spd(&bd.a1)?;
    Ok(-(a1_inv.as_matrix() * (bd.alpha.transpose() * xi0)))
}

pub fn build_reduced(
    sys: &SystemSpec,
    cg: &CoarseGrainingMap,
    approach: Approach,
    zeta0: &Vector,
) -> Result<ReducedModel> {
    dim_check("ζ₀", cg.m(), zeta0.len())?;
    let bd = block_decompose(sys, cg)?;
    let (b, c) = effective_matrices(&bd)?;
    let n = cg.n();
    let (drift, noise_factor, drift_rates) = match approach {
        Approach::Zero => {
            let rates = spectral_decompose(&bd.a0)?.eigenvalues;
            (bd.a0.as_matrix().clone(), SymMatrix::identity(n), rates)
        }
        Approach::One => {
            let rates = spectral_decompose(&b)?.eigenvalues;
            (b.as_matrix().clone(), SymMatrix::identity(n), rates)
        }
        Approach::Two => {
            let rates = SimilarExp::new(&b, &c)?.eigenvalues().clone();
            let c_half = crate::matcore::sqrtm(&c)?;
            (c.as_matrix() * b.as_matrix(), c_half, rates)
        }
    };
    let memory = if zeta0.iter().all(|&z| z == 0.0) {
        None
    } else {
        Some(MemoryTerm::new(bd.alpha.clone(), bd.a1.clone(), zeta0.clone())?)
    };
    Ok(ReducedModel {
        approach,
        drift,
        noise_factor,
        memory,
        a0: bd.a0,
        b,
        c,
        beta: sys.beta(),
        drift_rates,
    })
}

/// True iff `‖α‖_F ≤ tol·‖A‖_F`, i.e. the coarse rows span an invariant
/// subspace of `A` up to `tol`.
pub fn check_eigenspace_alignment(sys: &SystemSpec, cg: &CoarseGrainingMap, tol: f64) -> Result<bool> {
    let bd = block_decompose(sys, cg)?;
    Ok(frobenius_norm(&bd.alpha) <= tol * frobenius_norm(sys.a()))
}
