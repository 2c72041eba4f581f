//! White-noise threshold visibilities: the minimum pure-state weight p at
//! which a noisy state still violates an inequality.
//!
//! At fixed settings the left-hand side is affine in the visibility,
//! LHS(p) = p L_pure + (1 - p) L_noise with L_noise the uniform-table value
//! coefficient_sum / 9, so the threshold solves a linear equation. A
//! bisection on the actual noisy-state evaluation cross-checks the affine
//! solve on every call.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::{evaluate, InequalitySpec};
use crate::measurements::{joint_prob_table, ObservableKind, ScenarioSettings};
use crate::optimizer::{global_max_violation, OptConfig};
use crate::states::{noisy, Ket};

const BISECTION_TOL: f64 = 1e-9;
const CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMethod {
    Affine,
    Bisection,
}

/// Threshold visibility of one (inequality, state, settings) triple.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdResult {
    /// Minimum violating visibility, or None when the pure state itself
    /// does not violate.
    pub p_star: Option<f64>,
    /// LHS at p = 1 (the pure state).
    pub pure_value: f64,
    /// LHS at p = 0 (the maximally mixed state).
    pub noise_value: f64,
    pub method: ThresholdMethod,
}

/// Threshold visibility at fixed settings, which should be (near-)optimal
/// for the pure state. Solves the affine model exactly and cross-checks by
/// bisection on the evaluated noisy state; disagreement beyond 1e-8 is an
/// error.
pub fn threshold_visibility(
    spec: &InequalitySpec,
    pure: &Ket,
    settings: &ScenarioSettings,
) -> Result<ThresholdResult> {
    let pure_table = joint_prob_table(&crate::states::DensityMatrix::from_pure(pure), settings)?;
    let pure_value = evaluate(spec, &pure_table);
    let noise_value = spec.coefficient_sum() / 9.0;

    if pure_value <= spec.bound {
        return Ok(ThresholdResult {
            p_star: None,
            pure_value,
            noise_value,
            method: ThresholdMethod::Affine,
        });
    }
    let denom = pure_value - noise_value;
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateThreshold(denom.abs()));
    }
    let affine = (spec.bound - noise_value) / denom;

    let bisected = bisect_threshold(spec, pure, settings)?;
    if (affine - bisected).abs() > CROSS_CHECK_TOL {
        return Err(Error::ThresholdCrossCheck {
            affine,
            bisection: bisected,
        });
    }

    Ok(ThresholdResult {
        p_star: Some(affine),
        pure_value,
        noise_value,
        method: ThresholdMethod::Affine,
    })
}

/// Root of LHS(p) - bound on [0, 1] by bisection, evaluating the actual
/// noisy state each step.
fn bisect_threshold(spec: &InequalitySpec, pure: &Ket, settings: &ScenarioSettings) -> Result<f64> {
    let value_at = |p: f64| -> Result<f64> {
        let rho = noisy(pure, p)?;
        let table = joint_prob_table(&rho, settings)?;
        Ok(evaluate(spec, &table) - spec.bound)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let f_lo = value_at(lo)?;
    if f_lo > 0.0 {
        // Even the maximally mixed state violates; the threshold is 0.
        return Ok(0.0);
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if value_at(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Threshold visibility at the global maximum: runs the Bell-operator
/// settings optimization, then computes the threshold for the optimal
/// eigenstate at the optimal settings.
#[derive(Debug, Clone, Serialize)]
pub struct GlobalThreshold {
    pub threshold: ThresholdResult,
    pub lambda_max: f64,
    pub settings: ScenarioSettings,
    pub state: Ket,
    pub degenerate: bool,
}

pub fn threshold_at_global_max(
    spec: &InequalitySpec,
    kind: ObservableKind,
    config: &OptConfig,
) -> Result<GlobalThreshold> {
    let global = global_max_violation(spec, kind, config)?;
    let threshold = threshold_visibility(spec, &global.state, &global.best_settings)?;
    Ok(GlobalThreshold {
        threshold,
        lambda_max: global.lambda_max,
        settings: global.best_settings,
        state: global.state,
        degenerate: global.degenerate,
    })
}
