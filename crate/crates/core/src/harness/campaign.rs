//! Monte-Carlo campaigns: repeat a randomized run over derived seeds and
//! compare the success rate with the guaranteed probability.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::mm::read_matrix_market;
use super::report::{Aggregate, ExperimentReport, TrialRecord};
use super::spectrum::{synth_matrix, SpectrumKind, SpectrumSpec};
use crate::bounds::{
    bound_value, budget_gap_dependent, budget_lanczos_random, budget_lanczos_warm,
    budget_power_gap_independent, required_rate, verify, BoundKind, GapTarget,
};
use crate::error::{Error, Result};
use crate::init::{construct_z, failure_probability, init_angle_bound, tan_angle_kdim};
use crate::linalg::{right_singular_basis, svd_reference, DenseMatrix};
use crate::rng::{derive_seed, gaussian_matrix};
use crate::solvers::{build_krylov_from_start, extract_rank_k, sketch_basis, Method};

/// The probabilistic or deterministic statement a campaign checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// Lanczos from a Gaussian start: `‖M − Q(QᵀM)_k‖₂² ≤ σ_{k+1}² + ε σ_{p+1}²`.
    LanczosRandom,
    /// Power iteration from a Gaussian start, same bound.
    PowerRandom,
    /// Gap-dependent budgets, spectral and Frobenius bounds.
    GapDependent,
    /// `tan θ(V_k, XZ)` against the initialization bound.
    Initialization,
    /// Lanczos from a start block with known angle: `(1+ε) σ_{k+1}²`.
    LanczosWarm,
}

impl std::str::FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lanczos-random" => Claim::LanczosRandom,
            "power-random" => Claim::PowerRandom,
            "gap-dependent" => Claim::GapDependent,
            "initialization" => Claim::Initialization,
            "lanczos-warm" => Claim::LanczosWarm,
            other => return Err(Error::InvalidParameter(format!("unknown claim `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Power,
    Lanczos,
    #[default]
    Both,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(MethodChoice::Both),
            other => Ok(match other.parse::<Method>()? {
                Method::Power => MethodChoice::Power,
                Method::Lanczos => MethodChoice::Lanczos,
            }),
        }
    }
}

fn default_m() -> usize {
    100
}
fn default_n() -> usize {
    80
}
fn default_alpha() -> f64 {
    2.0
}
fn default_trials() -> usize {
    200
}
fn default_slack() -> f64 {
    1e-6
}
fn default_z() -> f64 {
    2.58
}
fn default_warm() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub claim: Claim,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub epsilon: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub spectrum: SpectrumKind,
    /// Matrix Market file used for every trial instead of a synthetic matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_path: Option<PathBuf>,
    /// Relative tolerance on each bound.
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Normal quantile of the binomial margin.
    #[serde(default = "default_z")]
    pub confidence_z: f64,
    /// Size of the perturbation of `U_k` in warm-start trials.
    #[serde(default = "default_warm")]
    pub warm_perturbation: f64,
}

impl CampaignConfig {
    pub fn new(claim: Claim, k: usize, p: usize, epsilon: f64) -> Self {
        Self {
            claim,
            method: MethodChoice::default(),
            m: default_m(),
            n: default_n(),
            k,
            p,
            epsilon,
            alpha: default_alpha(),
            trials: default_trials(),
            seed: 0,
            spectrum: SpectrumKind::default(),
            matrix_path: None,
            slack: default_slack(),
            confidence_z: default_z(),
            warm_perturbation: default_warm(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message()))
    }

    /// Methods exercised per trial.
    pub fn methods(&self) -> Result<Vec<Method>> {
        let fixed = match self.claim {
            Claim::LanczosRandom | Claim::LanczosWarm => Some(Method::Lanczos),
            Claim::PowerRandom => Some(Method::Power),
            Claim::Initialization => return Ok(Vec::new()),
            Claim::GapDependent => None,
        };
        match (fixed, self.method) {
            (Some(m), MethodChoice::Both) => Ok(vec![m]),
            (Some(m), choice) if choice_matches(choice, m) => Ok(vec![m]),
            (Some(m), _) => Err(Error::config("method", format!("claim requires `{}`", m.name()))),
            (None, MethodChoice::Both) => Ok(vec![Method::Power, Method::Lanczos]),
            (None, MethodChoice::Power) => Ok(vec![Method::Power]),
            (None, MethodChoice::Lanczos) => Ok(vec![Method::Lanczos]),
        }
    }

    /// Checks every field that does not depend on a loaded matrix.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::config("k", "must be at least 1"));
        }
        if self.p <= self.k {
            return Err(Error::config("p", format!("must exceed k = {}", self.k)));
        }
        if self.matrix_path.is_none() && self.p > self.m.min(self.n) {
            return Err(Error::config("p", format!("must not exceed min(m, n) = {}", self.m.min(self.n))));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::config("epsilon", format!("must lie in (0, 1], got {}", self.epsilon)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("alpha", format!("must be finite and non-negative, got {}", self.alpha)));
        }
        let denominator = (self.p as f64).sqrt() - (self.k as f64).sqrt() - self.alpha;
        if self.claim != Claim::LanczosWarm && denominator <= 0.0 {
            return Err(Error::config(
                "alpha",
                format!("sqrt(p) - sqrt(k) - alpha = {denominator} must be positive"),
            ));
        }
        if !(self.slack >= 0.0) {
            return Err(Error::config("slack", "must be non-negative"));
        }
        if !(self.confidence_z >= 0.0) {
            return Err(Error::config("confidence_z", "must be non-negative"));
        }
        if !(self.warm_perturbation > 0.0 && self.warm_perturbation.is_finite()) {
            return Err(Error::config("warm_perturbation", "must be positive"));
        }
        if self.matrix_path.is_none() {
            self.spectrum
                .validate()
                .map_err(|(field, msg)| Error::config(format!("spectrum.{field}"), msg))?;
        }
        self.methods()?;
        Ok(())
    }

    /// Probability with which every trial is guaranteed to pass.
    pub fn guaranteed_rate(&self) -> f64 {
        match self.claim {
            Claim::LanczosWarm => 1.0,
            _ => (1.0 - failure_probability(self.alpha)).max(0.0),
        }
    }
}

fn choice_matches(choice: MethodChoice, m: Method) -> bool {
    matches!(
        (choice, m),
        (MethodChoice::Power, Method::Power) | (MethodChoice::Lanczos, Method::Lanczos)
    )
}

/// How trials are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise sequential.
    Parallel,
}

/// A test matrix with its exact SVD data.
struct Instance {
    matrix: DenseMatrix,
    u: DenseMatrix,
    sigma: Vec<f64>,
    /// Full `n x n` right singular basis.
    v: DenseMatrix,
}

fn load_instance(path: &std::path::Path) -> Result<Instance> {
    let matrix = read_matrix_market(path)?;
    let svd = svd_reference(&matrix)?;
    let (_, v) = right_singular_basis(&matrix)?;
    Ok(Instance { u: svd.u, sigma: svd.sigma, v, matrix })
}

fn synth_instance(config: &CampaignConfig, seed: u64) -> Result<Instance> {
    let s = synth_matrix(&SpectrumSpec {
        kind: config.spectrum.clone(),
        m: config.m,
        n: config.n,
        seed,
    })?;
    Ok(Instance { matrix: s.matrix, u: s.u, sigma: s.sigma, v: s.v })
}

/// Runs the campaign with the default scheduling.
pub fn run_campaign(config: &CampaignConfig) -> Result<ExperimentReport> {
    run_campaign_with(config, Execution::Parallel)
}

pub fn run_campaign_with(config: &CampaignConfig, execution: Execution) -> Result<ExperimentReport> {
    config.validate()?;
    let methods = config.methods()?;
    let shared = match &config.matrix_path {
        Some(path) => {
            let inst = load_instance(path)?;
            let (m, n) = inst.matrix.shape();
            if config.p > m.min(n) {
                return Err(Error::config("p", format!("must not exceed min(m, n) = {}", m.min(n))));
            }
            Some(inst)
        }
        None => None,
    };
    let run = |i: usize| run_trial(config, &methods, shared.as_ref(), i);
    let nested: Vec<Vec<TrialRecord>> = match execution {
        Execution::Sequential => (0..config.trials).map(run).collect::<Result<_>>()?,
        Execution::Parallel => parallel_trials(config.trials, run)?,
    };
    let trials: Vec<TrialRecord> = nested.into_iter().flatten().collect();
    let guaranteed = config.guaranteed_rate();
    let aggregate = Aggregate::from_records(
        &trials,
        guaranteed,
        required_rate(guaranteed, config.trials, config.confidence_z),
    );
    Ok(ExperimentReport { config: config.clone(), trials, aggregate })
}

#[cfg(feature = "parallel")]
fn parallel_trials<F>(trials: usize, run: F) -> Result<Vec<Vec<TrialRecord>>>
where
    F: Fn(usize) -> Result<Vec<TrialRecord>> + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials).into_par_iter().map(run).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_trials<F>(trials: usize, run: F) -> Result<Vec<Vec<TrialRecord>>>
where
    F: Fn(usize) -> Result<Vec<TrialRecord>>,
{
    (0..trials).map(run).collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn run_trial(
    config: &CampaignConfig,
    methods: &[Method],
    shared: Option<&Instance>,
    index: usize,
) -> Result<Vec<TrialRecord>> {
    let seed = derive_seed(config.seed, index as u64);
    let owned;
    let inst = match shared {
        Some(inst) => inst,
        None => {
            owned = synth_instance(config, derive_seed(seed, 0))?;
            &owned
        }
    };
    let (k, p) = (config.k, config.p);
    let n = inst.matrix.cols();
    let x = gaussian_matrix(n, p, derive_seed(seed, 1));
    let blank = TrialRecord {
        trial: index,
        seed,
        method: None,
        budget: None,
        spectral_err_sq: None,
        frobenius_err_sq: None,
        tan_theta_init: None,
        bound: 0.0,
        frobenius_bound: None,
        passed: false,
    };

    if config.claim == Claim::LanczosWarm {
        return Ok(vec![warm_trial(config, inst, seed, blank)?]);
    }

    let z = construct_z(&inst.v, &x, k)?;
    let tan = tan_angle_kdim(&inst.v.columns(0..k), &x.matmul(&z))?;

    if config.claim == Claim::Initialization {
        let bound = init_angle_bound(n, p, k, config.alpha)?;
        return Ok(vec![TrialRecord {
            tan_theta_init: finite(tan),
            bound,
            passed: tan <= bound,
            ..blank
        }]);
    }

    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let budget = match config.claim {
            Claim::LanczosRandom => budget_lanczos_random(n, p, k, config.epsilon, config.alpha)?,
            Claim::PowerRandom => budget_power_gap_independent(n, p, k, config.epsilon, config.alpha)?,
            Claim::GapDependent => budget_gap_dependent(
                inst.sigma[k - 1],
                inst.sigma.get(p).copied().unwrap_or(0.0),
                n,
                p,
                k,
                config.epsilon,
                config.alpha,
                method,
                GapTarget::Norm,
            )?,
            Claim::Initialization | Claim::LanczosWarm => unreachable!(),
        };
        let q = sketch_basis(&inst.matrix, &x, method, budget.count)?;
        let res = extract_rank_k(&inst.matrix, &q, k)?;
        let bound = bound_value(BoundKind::RandomStart, &inst.sigma, k, p, config.epsilon);
        let mut passed = verify(res.spectral_err_sq, bound, config.slack).passed;
        let mut frobenius_bound = None;
        if config.claim == Claim::GapDependent {
            let fb = bound_value(BoundKind::Frobenius, &inst.sigma, k, p, config.epsilon);
            passed &= verify(res.frobenius_err_sq, fb, config.slack).passed;
            frobenius_bound = Some(fb);
        }
        out.push(TrialRecord {
            method: Some(method),
            budget: Some(budget.count),
            spectral_err_sq: Some(res.spectral_err_sq),
            frobenius_err_sq: Some(res.frobenius_err_sq),
            tan_theta_init: finite(tan),
            bound,
            frobenius_bound,
            passed,
            ..blank.clone()
        });
    }
    Ok(out)
}

/// Krylov run from `S = [U_k + δG₁, G₂]`, with `β` measured on `S`'s first
/// `k` columns.
fn warm_trial(config: &CampaignConfig, inst: &Instance, seed: u64, blank: TrialRecord) -> Result<TrialRecord> {
    let (k, p) = (config.k, config.p);
    let m = inst.matrix.rows();
    let g = gaussian_matrix(m, p, derive_seed(seed, 2));
    let uk = inst.u.columns(0..k);
    let head = uk.add(&g.columns(0..k).scale(config.warm_perturbation / (m as f64).sqrt()));
    let start = head.hstack(&g.columns(k..p));
    let beta = tan_angle_kdim(&uk, &head)?;
    let budget = budget_lanczos_warm(beta.max(f64::MIN_POSITIVE), config.epsilon)?;
    let q = build_krylov_from_start(&inst.matrix, &start, budget.count)?.q;
    let res = extract_rank_k(&inst.matrix, &q, k)?;
    let bound = bound_value(BoundKind::WarmStart, &inst.sigma, k, p, config.epsilon);
    Ok(TrialRecord {
        method: Some(Method::Lanczos),
        budget: Some(budget.count),
        spectral_err_sq: Some(res.spectral_err_sq),
        frobenius_err_sq: Some(res.frobenius_err_sq),
        tan_theta_init: finite(beta),
        bound,
        passed: verify(res.spectral_err_sq, bound, config.slack).passed,
        ..blank
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(claim: Claim) -> CampaignConfig {
        CampaignConfig {
            m: 30,
            n: 24,
            trials: 4,
            seed: 11,
            alpha: 0.5,
            ..CampaignConfig::new(claim, 2, 8, 0.5)
        }
    }

    #[test]
    fn zero_epsilon_rejected() {
        let mut c = small(Claim::LanczosRandom);
        c.epsilon = 0.0;
        match run_campaign(&c) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "epsilon"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn field_paths_reported() {
        let mut c = small(Claim::LanczosRandom);
        c.spectrum = SpectrumKind::Geometric { ratio: 2.0 };
        match c.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "spectrum.ratio"),
            other => panic!("unexpected {other:?}"),
        }
        let mut c = small(Claim::PowerRandom);
        c.method = MethodChoice::Lanczos;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "method"));
        let c = CampaignConfig { p: 2, ..small(Claim::PowerRandom) };
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "p"));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        for claim in [Claim::GapDependent, Claim::Initialization, Claim::LanczosWarm] {
            let c = small(claim);
            let a = run_campaign_with(&c, Execution::Sequential).unwrap();
            let b = run_campaign_with(&c, Execution::Parallel).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gap_dependent_runs_both_methods() {
        let c = CampaignConfig {
            spectrum: SpectrumKind::Step { gap_position: 2, gap_ratio: 2.0 },
            ..small(Claim::GapDependent)
        };
        let r = run_campaign(&c).unwrap();
        assert_eq!(r.trials.len(), 8);
        assert!(r.trials.iter().all(|t| t.frobenius_bound.is_some()));
    }

    #[test]
    fn toml_config() {
        let c = CampaignConfig::from_toml(
            "claim = \"power-random\"\nk = 2\np = 8\nepsilon = 0.5\n[spectrum]\nkind = \"polynomial\"\nexponent = 1.0\n",
        )
        .unwrap();
        assert_eq!(c.claim, Claim::PowerRandom);
        assert_eq!(c.spectrum, SpectrumKind::Polynomial { exponent: 1.0 });
        assert_eq!(c.trials, 200);
        assert!(CampaignConfig::from_toml("claim = \"power-random\"\nbogus = 1\n").is_err());
    }
}
