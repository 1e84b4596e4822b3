//! Iteration-budget formulas, error-bound values and verdicts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::{failure_probability, init_angle_bound};
use crate::solvers::Method;

/// Which formula produced an [`IterationBudget`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetRule {
    LanczosRandomStart,
    LanczosWarmStart,
    PowerGapFree,
    PowerGapAngle,
    LanczosGapAngle,
    PowerGapNorm,
    LanczosGapNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationBudget {
    /// `t` or `d`, ceiled and at least 1.
    pub count: usize,
    /// Formula value before rounding.
    pub raw: f64,
    pub rule: BudgetRule,
    pub epsilon: f64,
    pub alpha: f64,
    pub failure_probability: f64,
}

/// Whether a gap-dependent budget targets the angle or the norm error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapTarget {
    Angle,
    Norm,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    Ok(())
}

/// Ceiling that ignores roundoff just above an integer, floored at 1.
fn ceil_count(raw: f64) -> Result<usize> {
    if !raw.is_finite() {
        return Err(Error::Overflow);
    }
    let c = (raw - 1e-12 * raw.abs().max(1.0)).ceil();
    Ok(if c < 1.0 { 1 } else { c as usize })
}

fn probabilistic(raw: f64, rule: BudgetRule, epsilon: f64, alpha: f64) -> Result<IterationBudget> {
    Ok(IterationBudget {
        count: ceil_count(raw)?,
        raw,
        rule,
        epsilon,
        alpha,
        failure_probability: failure_probability(alpha).min(1.0),
    })
}

/// `d = √(2/ε)·(5/2 + log₂(R/ε))` with `R` the initialization angle bound.
pub fn budget_lanczos_random(n: usize, p: usize, k: usize, epsilon: f64, alpha: f64) -> Result<IterationBudget> {
    check_epsilon(epsilon)?;
    let ratio = init_angle_bound(n, p, k, alpha)?;
    let raw = (2.0 / epsilon).sqrt() * (2.5 + (ratio / epsilon).log2());
    probabilistic(raw, BudgetRule::LanczosRandomStart, epsilon, alpha)
}

/// `d = √(2/ε)·(2 + log₂(β/ε))` for a start block with `tan θ ≤ β`.
pub fn budget_lanczos_warm(beta: f64, epsilon: f64) -> Result<IterationBudget> {
    check_epsilon(epsilon)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let raw = (2.0 / epsilon).sqrt() * (2.0 + (beta / epsilon).log2());
    Ok(IterationBudget {
        count: ceil_count(raw)?,
        raw,
        rule: BudgetRule::LanczosWarmStart,
        epsilon,
        alpha: 0.0,
        failure_probability: 0.0,
    })
}

/// `t = 1 + (1/ε)·log₂(R/ε)` with `R` the initialization angle bound.
pub fn budget_power_gap_independent(
    n: usize,
    p: usize,
    k: usize,
    epsilon: f64,
    alpha: f64,
) -> Result<IterationBudget> {
    check_epsilon(epsilon)?;
    let ratio = init_angle_bound(n, p, k, alpha)?;
    let raw = 1.0 + (ratio / epsilon).log2() / epsilon;
    probabilistic(raw, BudgetRule::PowerGapFree, epsilon, alpha)
}

/// Gap-dependent budget for `g = σ_k / σ_{p+1} > 1`.
///
/// With `L = R/ε` (angle target) or `L = √(n−p)·R/√ε` (norm target):
/// power uses `t = ln L / (2 ln g)`, Lanczos uses `d = (1 + log₂ L) / √(g² − 1)`.
#[allow(clippy::too_many_arguments)]
pub fn budget_gap_dependent(
    sigma_k: f64,
    sigma_p1: f64,
    n: usize,
    p: usize,
    k: usize,
    epsilon: f64,
    alpha: f64,
    method: Method,
    target: GapTarget,
) -> Result<IterationBudget> {
    check_epsilon(epsilon)?;
    if !(sigma_p1 > 0.0) || !(sigma_k > sigma_p1) {
        return Err(Error::NoGap { sigma_k, sigma_p1 });
    }
    let ratio = init_angle_bound(n, p, k, alpha)?;
    let level = match target {
        GapTarget::Angle => ratio / epsilon,
        GapTarget::Norm => ((n - p) as f64).sqrt() * ratio / epsilon.sqrt(),
    };
    let g = sigma_k / sigma_p1;
    let (raw, rule) = match (method, target) {
        (Method::Power, t) => (
            level.ln() / (2.0 * g.ln()),
            if t == GapTarget::Angle { BudgetRule::PowerGapAngle } else { BudgetRule::PowerGapNorm },
        ),
        (Method::Lanczos, t) => (
            (1.0 + level.log2()) / (g * g - 1.0).sqrt(),
            if t == GapTarget::Angle { BudgetRule::LanczosGapAngle } else { BudgetRule::LanczosGapNorm },
        ),
    };
    probabilistic(raw, rule, epsilon, alpha)
}

/// Which error bound [`bound_value`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `σ_{k+1}² + ε·σ_{p+1}²`.
    RandomStart,
    /// `(1 + ε)·σ_{k+1}²`.
    WarmStart,
    /// `Σ_{i>k} σ_i² + ε·σ_{p+1}²`.
    Frobenius,
}

/// Bound in squared-norm units from the descending singular values `sigma`
/// (indices past the end count as zero).
pub fn bound_value(kind: BoundKind, sigma: &[f64], k: usize, p: usize, epsilon: f64) -> f64 {
    let s = |i: usize| sigma.get(i).copied().unwrap_or(0.0);
    let next = s(k);
    let beyond = s(p);
    match kind {
        BoundKind::RandomStart => next * next + epsilon * beyond * beyond,
        BoundKind::WarmStart => (1.0 + epsilon) * next * next,
        BoundKind::Frobenius => {
            sigma.iter().skip(k).map(|v| v * v).sum::<f64>() + epsilon * beyond * beyond
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundVerdict {
    pub bound_value: f64,
    pub measured: f64,
    pub passed: bool,
    pub slack: f64,
}

/// Passes iff `measured ≤ bound·(1 + slack)`.
pub fn verify(measured: f64, bound: f64, slack: f64) -> BoundVerdict {
    BoundVerdict {
        bound_value: bound,
        measured,
        passed: measured <= bound * (1.0 + slack),
        slack,
    }
}

/// Success rate a campaign must reach: `q − z·√(q(1−q)/trials)`, clamped at 0.
pub fn required_rate(guaranteed: f64, trials: usize, z: f64) -> f64 {
    let q = guaranteed.clamp(0.0, 1.0);
    let margin = z * (q * (1.0 - q) / trials.max(1) as f64).sqrt();
    (q - margin).max(0.0)
}

/// Cost of a block Krylov run with block size `b` and `d` passes over an
/// `n x n` operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockCost {
    pub time: f64,
    pub memory: f64,
    pub passes: f64,
}

pub fn block_cost(n: usize, block: usize, degree: f64) -> BlockCost {
    let (n, b) = (n as f64, block as f64);
    BlockCost {
        time: n * n * b * degree,
        memory: n * b * degree,
        passes: degree,
    }
}

/// Degree estimate for a small block of size `b < k`; `lambda` holds
/// eigenvalues `λ_1 ≥ λ_2 ≥ …`.
pub fn degree_small_block(k: usize, b: usize, lambda: &[f64], epsilon: f64) -> Result<f64> {
    if k < 2 || k + b > lambda.len() {
        return Err(Error::Dimension(format!(
            "need 2 <= k and k + b <= {}, got k={k}, b={b}",
            lambda.len()
        )));
    }
    let l = |i: usize| lambda[i - 1];
    let (prev, lk, lkb) = (l(k - 1), l(k), l(k + b));
    if !(prev > lk && lk > lkb && lkb > 0.0) {
        return Err(Error::NoGap { sigma_k: lk, sigma_p1: lkb });
    }
    let numerator = k as f64 * (prev / (prev - lk)).ln() + (1.0 / epsilon).ln();
    Ok(numerator / ((lk - lkb) / lkb).sqrt())
}

/// Degree estimate for a block of size `p ≥ k`.
pub fn degree_large_block(k: usize, p: usize, lambda: &[f64], epsilon: f64) -> Result<f64> {
    if k == 0 || p < k || p + 1 > lambda.len() {
        return Err(Error::Dimension(format!(
            "need 1 <= k <= p < {}, got k={k}, p={p}",
            lambda.len()
        )));
    }
    let (lk, lp1) = (lambda[k - 1], lambda[p]);
    if !(lk > lp1 && lp1 > 0.0) {
        return Err(Error::NoGap { sigma_k: lk, sigma_p1: lp1 });
    }
    Ok((1.0 / epsilon).ln() / ((lk - lp1) / lp1).sqrt())
}
