//! Experiment configuration documents.
//!
//! ```json
//! {"experiment": "acf-2d", "output_path": "out/acf", "params": {"lambda": 20}}
//! ```
//!
//! Every parameter has a default, so `params` may be omitted. Unknown keys are
//! rejected at every level, and errors carry the line of the offending key.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::path::PathBuf;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::value::RawValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "acf-2d")]
    Acf2d,
    #[serde(rename = "sweep-lambda")]
    SweepLambda,
    #[serde(rename = "abs-vs-tau")]
    AbsVsTau,
    #[serde(rename = "tridiag-progressive")]
    TridiagProgressive,
    #[serde(rename = "chain")]
    Chain,
    #[serde(rename = "mc-validate")]
    McValidate,
    #[serde(rename = "bounds-check")]
    BoundsCheck,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Acf2d,
        ExperimentKind::SweepLambda,
        ExperimentKind::AbsVsTau,
        ExperimentKind::TridiagProgressive,
        ExperimentKind::Chain,
        ExperimentKind::McValidate,
        ExperimentKind::BoundsCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Acf2d => "acf-2d",
            ExperimentKind::SweepLambda => "sweep-lambda",
            ExperimentKind::AbsVsTau => "abs-vs-tau",
            ExperimentKind::TridiagProgressive => "tridiag-progressive",
            ExperimentKind::Chain => "chain",
            ExperimentKind::McValidate => "mc-validate",
            ExperimentKind::BoundsCheck => "bounds-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A config problem, located in the source text where possible (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Semantic problem with one parameter, before it is located in the text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamError {
    pub key: &'static str,
    pub message: String,
}

fn require(ok: bool, key: &'static str, message: impl Into<String>) -> Result<(), ParamError> {
    if ok {
        Ok(())
    } else {
        Err(ParamError {
            key,
            message: format!("{key}: {}", message.into()),
        })
    }
}

fn positive(x: f64, key: &'static str) -> Result<(), ParamError> {
    require(
        x.is_finite() && x > 0.0,
        key,
        format!("must be finite and > 0, got {x}"),
    )
}

fn theta_ok(theta: f64, key: &'static str) -> Result<(), ParamError> {
    require(
        theta > -FRAC_PI_2 && theta < FRAC_PI_2,
        key,
        format!("angle must lie in (-pi/2, pi/2), got {theta}"),
    )
}

fn paper_thetas() -> Vec<f64> {
    vec![0.05, 0.2, 0.4, FRAC_PI_4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Acf2dParams {
    pub lambda: f64,
    pub theta: f64,
    pub beta: f64,
    pub tau_max: f64,
    pub n_lags: usize,
}

impl Default for Acf2dParams {
    fn default() -> Self {
        Acf2dParams {
            lambda: 20.0,
            theta: 0.3,
            beta: 1.0,
            tau_max: 5.0,
            n_lags: 501,
        }
    }
}

impl Acf2dParams {
    fn validate(&self) -> Result<(), ParamError> {
        require(
            self.lambda.is_finite() && self.lambda >= 1.0,
            "lambda",
            "must be >= 1",
        )?;
        theta_ok(self.theta, "theta")?;
        positive(self.beta, "beta")?;
        positive(self.tau_max, "tau_max")?;
        require(self.n_lags >= 2, "n_lags", "need at least 2 lags")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepLambdaParams {
    pub thetas: Vec<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n_lambda: usize,
    /// Small lag standing in for `τ → 0⁺`; a second evaluation at half of it
    /// gives the Richardson check.
    pub tau_small: f64,
    pub beta: f64,
}

impl Default for SweepLambdaParams {
    fn default() -> Self {
        SweepLambdaParams {
            thetas: paper_thetas(),
            lambda_min: 1.1,
            lambda_max: 1000.0,
            n_lambda: 60,
            tau_small: 1e-6,
            beta: 1.0,
        }
    }
}

impl SweepLambdaParams {
    fn validate(&self) -> Result<(), ParamError> {
        require(!self.thetas.is_empty(), "thetas", "must not be empty")?;
        for &t in &self.thetas {
            theta_ok(t, "thetas")?;
        }
        require(
            self.lambda_min.is_finite() && self.lambda_min > 1.0,
            "lambda_min",
            "must be > 1",
        )?;
        require(
            self.lambda_max.is_finite() && self.lambda_max > self.lambda_min,
            "lambda_max",
            "must exceed lambda_min",
        )?;
        require(self.n_lambda >= 2, "n_lambda", "need at least 2 values")?;
        positive(self.tau_small, "tau_small")?;
        require(self.tau_small <= 1e-2, "tau_small", "must be <= 1e-2")?;
        positive(self.beta, "beta")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsVsTauParams {
    pub lambda: f64,
    pub thetas: Vec<f64>,
    pub beta: f64,
    pub tau_max: f64,
    pub n_long: usize,
    pub short_max: f64,
    pub n_short: usize,
    /// Log-spaced window `[fit_min, fit_max]` for the power-law slopes.
    pub fit_min: f64,
    pub fit_max: f64,
    pub n_fit: usize,
}

impl Default for AbsVsTauParams {
    fn default() -> Self {
        AbsVsTauParams {
            lambda: 10.0,
            thetas: paper_thetas(),
            beta: 1.0,
            tau_max: 5.0,
            n_long: 201,
            short_max: 1e-3,
            n_short: 201,
            fit_min: 1e-6,
            fit_max: 1e-4,
            n_fit: 21,
        }
    }
}

impl AbsVsTauParams {
    fn validate(&self) -> Result<(), ParamError> {
        require(
            self.lambda.is_finite() && self.lambda > 1.0,
            "lambda",
            "must be > 1",
        )?;
        require(!self.thetas.is_empty(), "thetas", "must not be empty")?;
        for &t in &self.thetas {
            theta_ok(t, "thetas")?;
        }
        positive(self.beta, "beta")?;
        positive(self.tau_max, "tau_max")?;
        require(self.n_long >= 2, "n_long", "need at least 2 lags")?;
        positive(self.short_max, "short_max")?;
        require(self.n_short >= 2, "n_short", "need at least 2 lags")?;
        positive(self.fit_min, "fit_min")?;
        require(self.fit_max > self.fit_min, "fit_max", "must exceed fit_min")?;
        require(self.n_fit >= 2, "n_fit", "need at least 2 points")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TridiagProgressiveParams {
    pub sigma: f64,
    /// Omitted: the ten-dimensional diagonal `1, 1.5, …, 10`.
    pub diag: Option<Vec<f64>>,
    pub beta: f64,
    /// Sizes of the intermediate coordinate maps (first `n` coordinates).
    pub ns: Vec<usize>,
    /// Coordinates kept by the final map, indexing into the intermediate level.
    pub coarse: Vec<usize>,
    pub tau_max: f64,
    pub n_lags: usize,
    pub slack: f64,
}

impl Default for TridiagProgressiveParams {
    fn default() -> Self {
        TridiagProgressiveParams {
            sigma: 0.5,
            diag: None,
            beta: 1.0,
            ns: vec![2, 4, 6, 8],
            coarse: vec![0],
            tau_max: 5.0,
            n_lags: 200,
            slack: 1e-9,
        }
    }
}

impl TridiagProgressiveParams {
    pub fn dim(&self) -> usize {
        self.diag.as_ref().map_or(10, Vec::len)
    }

    fn validate(&self) -> Result<(), ParamError> {
        require(self.sigma.is_finite(), "sigma", "must be finite")?;
        if let Some(d) = &self.diag {
            require(d.len() >= 2, "diag", "need at least 2 entries")?;
        }
        positive(self.beta, "beta")?;
        require(!self.ns.is_empty(), "ns", "must not be empty")?;
        require(!self.coarse.is_empty(), "coarse", "must not be empty")?;
        let dim = self.dim();
        for &n in &self.ns {
            require(
                n > self.coarse.len() && n <= dim,
                "ns",
                format!("each n must exceed the coarse size and be at most {dim}"),
            )?;
            require(
                self.coarse.iter().all(|&i| i < n),
                "coarse",
                format!("indices must be below every n (smallest n is {n})"),
            )?;
        }
        require(distinct(&self.coarse), "coarse", "indices must be distinct")?;
        positive(self.tau_max, "tau_max")?;
        require(self.n_lags >= 1, "n_lags", "need at least 1 lag")?;
        require(self.slack >= 0.0, "slack", "must be >= 0")
    }
}

fn distinct(v: &[usize]) -> bool {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainParams {
    pub n_masses: usize,
    pub k1: f64,
    pub k2s: Vec<f64>,
    pub k3s: Vec<f64>,
    /// Overrides the `(k1, k2, k3, …)` pattern; all sweep points then coincide.
    pub springs: Option<Vec<f64>>,
    pub beta: f64,
    /// Coordinates kept by the coarsest map (`d`).
    pub coarse: Vec<usize>,
    /// Coordinates kept by the intermediate map (`n`); must contain `coarse`.
    pub intermediate: Vec<usize>,
    pub tau_max: f64,
    pub n_lags: usize,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams {
            n_masses: 40,
            k1: 1.0,
            k2s: vec![1.0, 2.0, 5.0, 10.0],
            k3s: vec![1.0, 3.0, 5.0, 10.0, 20.0],
            springs: None,
            beta: 1.0,
            coarse: vec![0, 1],
            intermediate: vec![0, 1, 2, 3],
            tau_max: 25.0,
            n_lags: 200,
        }
    }
}

impl ChainParams {
    fn validate(&self) -> Result<(), ParamError> {
        require(self.n_masses >= 3, "n_masses", "need at least 3 masses")?;
        positive(self.k1, "k1")?;
        require(!self.k2s.is_empty(), "k2s", "must not be empty")?;
        require(!self.k3s.is_empty(), "k3s", "must not be empty")?;
        for &k in &self.k2s {
            positive(k, "k2s")?;
        }
        for &k in &self.k3s {
            positive(k, "k3s")?;
        }
        if let Some(s) = &self.springs {
            require(
                s.len() == self.n_masses,
                "springs",
                format!("need {} springs", self.n_masses),
            )?;
            for &k in s {
                positive(k, "springs")?;
            }
        }
        positive(self.beta, "beta")?;
        require(distinct(&self.coarse), "coarse", "indices must be distinct")?;
        require(
            distinct(&self.intermediate),
            "intermediate",
            "indices must be distinct",
        )?;
        require(
            !self.coarse.is_empty() && self.coarse.len() < self.intermediate.len(),
            "coarse",
            "must be non-empty and smaller than the intermediate map",
        )?;
        require(
            self.intermediate.len() < self.n_masses && self.intermediate.iter().all(|&i| i < self.n_masses),
            "intermediate",
            "indices must be valid coordinates and keep fewer than n_masses",
        )?;
        require(
            self.coarse.iter().all(|i| self.intermediate.contains(i)),
            "coarse",
            "must be a subset of the intermediate coordinates",
        )?;
        positive(self.tau_max, "tau_max")?;
        require(self.n_lags >= 1, "n_lags", "need at least 1 lag")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McValidateParams {
    pub lambda: f64,
    pub theta: f64,
    pub beta: f64,
    pub dt: f64,
    pub t_total: f64,
    pub n_samples: usize,
    pub base_seed: u64,
    pub burn_in_fraction: f64,
    /// Initial state of the full system; reduced models start from `Φ q0`.
    pub q0: Vec<f64>,
    /// Initial eliminated state; omitted means its conditional mean given `Φ q0`.
    pub zeta0: Option<Vec<f64>>,
    pub lag_step: f64,
    pub lag_max: f64,
    /// Omitted: the coarsest stride that still resolves every lag.
    pub stride: Option<usize>,
}

/// Trajectory count restored by `--paper-scale`.
pub const PAPER_SCALE_SAMPLES: usize = 5000;

impl Default for McValidateParams {
    fn default() -> Self {
        McValidateParams {
            lambda: 20.0,
            theta: 0.3,
            beta: 1.0,
            dt: 5e-4,
            t_total: 60.0,
            n_samples: 500,
            base_seed: 2024,
            burn_in_fraction: 0.5,
            q0: vec![5.0, -4.0],
            zeta0: None,
            lag_step: 0.05,
            lag_max: 2.0,
            stride: None,
        }
    }
}

impl McValidateParams {
    fn validate(&self) -> Result<(), ParamError> {
        require(
            self.lambda.is_finite() && self.lambda >= 1.0,
            "lambda",
            "must be >= 1",
        )?;
        theta_ok(self.theta, "theta")?;
        positive(self.beta, "beta")?;
        positive(self.dt, "dt")?;
        require(
            self.t_total.is_finite() && self.t_total > self.dt,
            "t_total",
            "must exceed dt",
        )?;
        require(self.n_samples >= 2, "n_samples", "need at least 2 trajectories")?;
        require(
            (0.0..1.0).contains(&self.burn_in_fraction),
            "burn_in_fraction",
            "must lie in [0, 1)",
        )?;
        require(self.q0.len() == 2, "q0", "the 2D system needs 2 entries")?;
        if let Some(z) = &self.zeta0 {
            require(z.len() == 1, "zeta0", "the 2D system eliminates 1 coordinate")?;
        }
        positive(self.lag_step, "lag_step")?;
        require(self.lag_max >= self.lag_step, "lag_max", "must be >= lag_step")?;
        require(
            self.lag_max < (1.0 - self.burn_in_fraction) * self.t_total,
            "lag_max",
            "must be shorter than the retained trajectory",
        )?;
        if let Some(s) = self.stride {
            require(s >= 1, "stride", "must be >= 1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsCheckParams {
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    pub beta: f64,
    /// Eigenvalues of the random `A` are log-uniform on `[eig_min, eig_max]`.
    pub eig_min: f64,
    pub eig_max: f64,
    pub tau_max: f64,
    pub n_lags: usize,
    pub scan_max: f64,
    pub n_scan: usize,
    pub tol: f64,
}

impl Default for BoundsCheckParams {
    fn default() -> Self {
        BoundsCheckParams {
            dim: 6,
            n: 3,
            seed: 7,
            beta: 1.0,
            eig_min: 0.1,
            eig_max: 10.0,
            tau_max: 5.0,
            n_lags: 100,
            scan_max: 1e-2,
            n_scan: 200,
            tol: 1e-9,
        }
    }
}

impl BoundsCheckParams {
    fn validate(&self) -> Result<(), ParamError> {
        require(self.dim >= 2, "dim", "must be >= 2")?;
        require(self.n >= 1 && self.n < self.dim, "n", "must lie in [1, dim)")?;
        positive(self.beta, "beta")?;
        positive(self.eig_min, "eig_min")?;
        require(self.eig_max >= self.eig_min, "eig_max", "must be >= eig_min")?;
        positive(self.tau_max, "tau_max")?;
        require(self.n_lags >= 1, "n_lags", "need at least 1 lag")?;
        positive(self.scan_max, "scan_max")?;
        require(self.n_scan >= 1, "n_scan", "need at least 1 point")?;
        require(self.tol >= 0.0, "tol", "must be >= 0")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Acf2d(Acf2dParams),
    SweepLambda(SweepLambdaParams),
    AbsVsTau(AbsVsTauParams),
    TridiagProgressive(TridiagProgressiveParams),
    Chain(ChainParams),
    McValidate(McValidateParams),
    BoundsCheck(BoundsCheckParams),
}

impl Params {
    pub fn default_for(kind: ExperimentKind) -> Params {
        match kind {
            ExperimentKind::Acf2d => Params::Acf2d(Default::default()),
            ExperimentKind::SweepLambda => Params::SweepLambda(Default::default()),
            ExperimentKind::AbsVsTau => Params::AbsVsTau(Default::default()),
            ExperimentKind::TridiagProgressive => Params::TridiagProgressive(Default::default()),
            ExperimentKind::Chain => Params::Chain(Default::default()),
            ExperimentKind::McValidate => Params::McValidate(Default::default()),
            ExperimentKind::BoundsCheck => Params::BoundsCheck(Default::default()),
        }
    }

    pub fn kind(&self) -> ExperimentKind {
        match self {
            Params::Acf2d(_) => ExperimentKind::Acf2d,
            Params::SweepLambda(_) => ExperimentKind::SweepLambda,
            Params::AbsVsTau(_) => ExperimentKind::AbsVsTau,
            Params::TridiagProgressive(_) => ExperimentKind::TridiagProgressive,
            Params::Chain(_) => ExperimentKind::Chain,
            Params::McValidate(_) => ExperimentKind::McValidate,
            Params::BoundsCheck(_) => ExperimentKind::BoundsCheck,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            Params::Acf2d(p) => p.validate(),
            Params::SweepLambda(p) => p.validate(),
            Params::AbsVsTau(p) => p.validate(),
            Params::TridiagProgressive(p) => p.validate(),
            Params::Chain(p) => p.validate(),
            Params::McValidate(p) => p.validate(),
            Params::BoundsCheck(p) => p.validate(),
        }
    }

    /// Seed driving the run's randomness, if it has any.
    pub fn base_seed(&self) -> Option<u64> {
        match self {
            Params::McValidate(p) => Some(p.base_seed),
            Params::BoundsCheck(p) => Some(p.seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub output_path: Option<PathBuf>,
    pub params: Params,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig<'a> {
    experiment: ExperimentKind,
    #[serde(default)]
    output_path: Option<PathBuf>,
    #[serde(borrow, default)]
    params: Option<&'a RawValue>,
}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].matches('\n').count() + 1
}

/// Byte offset of the first `"key"` used as an object key.
fn find_key(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    let mut from = 0;
    while let Some(pos) = text[from..].find(&quoted) {
        let at = from + pos;
        let rest = text[at + quoted.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(at);
        }
        from = at + quoted.len();
    }
    None
}

fn json_error(e: &serde_json::Error, line_offset: usize, first_line_col: usize) -> ConfigError {
    let (line, column) = (e.line(), e.column());
    let located = line > 0;
    // serde_json appends " at line L column C" to its messages
    let message = e.to_string();
    let message = match message.rfind(" at line ") {
        Some(cut) if located => message[..cut].to_string(),
        _ => message,
    };
    ConfigError {
        line: located.then_some(line + line_offset),
        column: located.then_some(if line == 1 {
            column + first_line_col
        } else {
            column
        }),
        message,
    }
}

fn parse_params<T: DeserializeOwned + Default>(raw: Option<&RawValue>, text: &str) -> Result<T, ConfigError> {
    let Some(raw) = raw else {
        return Ok(T::default());
    };
    let slice = raw.get();
    let offset = slice.as_ptr() as usize - text.as_ptr() as usize;
    let line_start = text[..offset].rfind('\n').map_or(0, |p| p + 1);
    serde_json::from_str(slice).map_err(|e| json_error(&e, line_of(text, offset) - 1, offset - line_start))
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig<'_> = serde_json::from_str(text).map_err(|e| json_error(&e, 0, 0))?;
        let params = match raw.experiment {
            ExperimentKind::Acf2d => Params::Acf2d(parse_params(raw.params, text)?),
            ExperimentKind::SweepLambda => Params::SweepLambda(parse_params(raw.params, text)?),
            ExperimentKind::AbsVsTau => Params::AbsVsTau(parse_params(raw.params, text)?),
            ExperimentKind::TridiagProgressive => Params::TridiagProgressive(parse_params(raw.params, text)?),
            ExperimentKind::Chain => Params::Chain(parse_params(raw.params, text)?),
            ExperimentKind::McValidate => Params::McValidate(parse_params(raw.params, text)?),
            ExperimentKind::BoundsCheck => Params::BoundsCheck(parse_params(raw.params, text)?),
        };
        if let Err(e) = params.validate() {
            // a defaulted key is not in the text; fall back to the params block
            let (scope, base) = match raw.params {
                Some(p) => (p.get(), p.get().as_ptr() as usize - text.as_ptr() as usize),
                None => (text, 0),
            };
            let at = find_key(scope, e.key)
                .map(|k| base + k)
                .or_else(|| find_key(text, "params"))
                .unwrap_or(0);
            return Err(ConfigError {
                line: Some(line_of(text, at)),
                column: None,
                message: e.message,
            });
        }
        Ok(ExperimentConfig {
            experiment: raw.experiment,
            output_path: raw.output_path,
            params,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_params() {
        let cfg = ExperimentConfig::parse(r#"{"experiment": "chain"}"#).unwrap();
        assert_eq!(cfg.params, Params::Chain(ChainParams::default()));
        assert!(cfg.output_path.is_none());
        for kind in ExperimentKind::ALL {
            Params::default_for(kind).validate().unwrap();
            let text = format!(r#"{{"experiment": "{kind}", "params": {{}}}}"#);
            assert_eq!(ExperimentConfig::parse(&text).unwrap().experiment, kind);
        }
    }

    #[test]
    fn unknown_keys_are_located() {
        let text =
            "{\n  \"experiment\": \"acf-2d\",\n  \"params\": {\n    \"lambda\": 5,\n    \"gamma\": 1\n  }\n}";
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(err.line, Some(5), "{err}");
        assert!(err.message.contains("gamma"), "{err}");

        let top = "{\n\"experiment\": \"acf-2d\",\n\"extra\": 1}";
        let err = ExperimentConfig::parse(top).unwrap_err();
        assert_eq!(err.line, Some(3));

        let kind = "{\"experiment\": \"acf-3d\"}";
        assert!(ExperimentConfig::parse(kind)
            .unwrap_err()
            .message
            .contains("acf-3d"));
    }

    #[test]
    fn same_line_params_keep_columns() {
        let text = r#"{"experiment": "acf-2d", "params": {"lambda": "big"}}"#;
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(err.line, Some(1));
        // column lands inside the params object, past its opening brace
        assert!(err.column.unwrap() > text.find("\"lambda\"").unwrap(), "{err}");
    }

    #[test]
    fn semantic_errors_point_at_the_key() {
        let text = "{\n  \"experiment\": \"mc-validate\",\n  \"params\": {\n    \"n_samples\": 10,\n    \"dt\": -1\n  }\n}";
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.message.starts_with("dt:"), "{err}");

        // defaulted key: reported at the params block
        let text = "{\n  \"experiment\": \"tridiag-progressive\",\n  \"params\": {\"diag\": [1, 2, 3]}\n}";
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(err.line, Some(3), "{err}");
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = ExperimentConfig::parse("{\n\"experiment\": \"chain\",\n}").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.to_string().starts_with("line 3, column"));
    }

    #[test]
    fn key_search_skips_string_values() {
        let text = r#"{"a": "theta", "theta": 1}"#;
        assert_eq!(find_key(text, "theta"), Some(15));
    }
}
