//! Relational event model likelihoods and maximum-likelihood fitting.
//!
//! The rate of a candidate action given the realized history is
//! `exp(theta . u(a, A))`. Two likelihoods are supported: the ordinal form
//! (a softmax over the action space at every step, usable without
//! timestamps) and the timestamped form (hazard terms plus exponential
//! survival of every candidate between events, plus a trailing survival
//! term up to the observation end). Fitting is deterministic full-batch
//! gradient ascent with a backtracking line search; the log-likelihoods are
//! concave in theta, so any interior stationary point is the MLE.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::{ActionSpace, ActionTriple, DyadicEvent, EventHistory};
use crate::numeric::{dot, invert_small, log_sum_exp, KahanSum};
use crate::stats::{self, history_design, StatisticMatrix, StatisticSpec};

/// Which likelihood to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LikelihoodMode {
    Ordinal,
    Timestamped,
}

/// Statistic specs plus their coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RemModel {
    pub specs: Vec<StatisticSpec>,
    pub theta: Vec<f64>,
}

impl RemModel {
    pub fn new(specs: Vec<StatisticSpec>, theta: Vec<f64>) -> Self {
        assert_eq!(specs.len(), theta.len(), "one coefficient per statistic");
        assert!(theta.iter().all(|t| t.is_finite()), "coefficients must be finite");
        Self { specs, theta }
    }

    /// Null model: every coefficient zero.
    pub fn null(specs: Vec<StatisticSpec>) -> Self {
        let theta = vec![0.0; specs.len()];
        Self { specs, theta }
    }
}

/// Instantaneous propensity `exp(theta . u(candidate, prefix))` of one
/// candidate action. Always strictly positive; the weighted sum is kept in
/// log domain until the final exponentiation.
pub fn rate(candidate: &ActionTriple, prefix: &[DyadicEvent], model: &RemModel) -> f64 {
    log_rate(candidate, prefix, model).exp()
}

/// `theta . u(candidate, prefix)`, the log of [`rate`].
pub fn log_rate(candidate: &ActionTriple, prefix: &[DyadicEvent], model: &RemModel) -> f64 {
    model
        .specs
        .iter()
        .zip(&model.theta)
        .map(|(spec, coef)| coef * stats::evaluate(spec, candidate, prefix))
        .sum()
}

/// Precomputed per-step statistic matrices and bookkeeping for one history.
/// The matrices do not depend on theta, so one design serves every
/// likelihood and gradient evaluation during a fit.
pub(crate) struct Design {
    /// Matrix `i` covers the prefix of the first `i` events (length M + 1).
    matrices: Vec<StatisticMatrix>,
    /// Position in the action space of each realized event.
    realized: Vec<usize>,
    /// Waiting times between consecutive events (timestamped mode).
    deltas: Vec<f64>,
    /// Exposure from the last event to the observation end (timestamped mode).
    trailing: f64,
    n_stats: usize,
}

impl Design {
    pub(crate) fn build(
        history: &EventHistory,
        specs: &[StatisticSpec],
        space: &ActionSpace,
        mode: LikelihoodMode,
    ) -> Result<Self> {
        let realized = history
            .events()
            .iter()
            .enumerate()
            .map(|(i, e)| space.index_of_event(e, i))
            .collect::<Result<Vec<_>>>()?;
        let (deltas, trailing) = match mode {
            LikelihoodMode::Ordinal => (Vec::new(), 0.0),
            LikelihoodMode::Timestamped => {
                if !history.is_empty() && !history.is_timestamped() {
                    return Err(Error::MissingTimestamps);
                }
                let end = history.end_time().ok_or(Error::MissingEndTime)?;
                let mut previous = history.origin_time();
                let mut deltas = Vec::with_capacity(history.len());
                for event in history.events() {
                    let t = event.timestamp.ok_or(Error::MissingTimestamps)?;
                    deltas.push(t - previous);
                    previous = t;
                }
                (deltas, end - previous)
            }
        };
        let matrices = history_design(space, history, specs, space.action_covariates())?;
        Ok(Self {
            matrices,
            realized,
            deltas,
            trailing,
            n_stats: specs.len(),
        })
    }

    pub(crate) fn n_steps(&self) -> usize {
        self.realized.len()
    }

    pub(crate) fn realized(&self) -> &[usize] {
        &self.realized
    }

    /// Per-candidate linear predictors `theta . u` at one step.
    pub(crate) fn scores(&self, step: usize, theta: &[f64]) -> Vec<f64> {
        let matrix = &self.matrices[step];
        (0..matrix.n_actions())
            .map(|a| dot(matrix.row(a), theta))
            .collect()
    }

    pub(crate) fn ordinal_loglik(&self, theta: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for i in 0..self.n_steps() {
            let scores = self.scores(i, theta);
            acc.add(scores[self.realized[i]] - log_sum_exp(&scores));
        }
        acc.value()
    }

    pub(crate) fn ordinal_gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut acc = vec![KahanSum::new(); self.n_stats];
        for i in 0..self.n_steps() {
            let matrix = &self.matrices[i];
            let scores = self.scores(i, theta);
            let lse = log_sum_exp(&scores);
            let realized_row = matrix.row(self.realized[i]);
            for j in 0..self.n_stats {
                let mut expected = 0.0;
                for a in 0..matrix.n_actions() {
                    expected += (scores[a] - lse).exp() * matrix.get(a, j);
                }
                acc[j].add(realized_row[j] - expected);
            }
        }
        acc.into_iter().map(|k| k.value()).collect()
    }

    pub(crate) fn timestamped_loglik(&self, theta: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for i in 0..self.n_steps() {
            let scores = self.scores(i, theta);
            acc.add(scores[self.realized[i]]);
            acc.add(-self.deltas[i] * log_sum_exp(&scores).exp());
        }
        if self.trailing != 0.0 {
            let scores = self.scores(self.n_steps(), theta);
            acc.add(-self.trailing * log_sum_exp(&scores).exp());
        }
        acc.value()
    }

    pub(crate) fn timestamped_gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut acc = vec![KahanSum::new(); self.n_stats];
        let exposure = |step: usize, weight: f64, acc: &mut Vec<KahanSum>| {
            if weight == 0.0 {
                return;
            }
            let matrix = &self.matrices[step];
            let scores = self.scores(step, theta);
            for j in 0..self.n_stats {
                let mut sum = 0.0;
                for a in 0..matrix.n_actions() {
                    sum += scores[a].exp() * matrix.get(a, j);
                }
                acc[j].add(-weight * sum);
            }
        };
        for i in 0..self.n_steps() {
            let realized_row = self.matrices[i].row(self.realized[i]);
            for j in 0..self.n_stats {
                acc[j].add(realized_row[j]);
            }
            exposure(i, self.deltas[i], &mut acc);
        }
        exposure(self.n_steps(), self.trailing, &mut acc);
        acc.into_iter().map(|k| k.value()).collect()
    }

    pub(crate) fn loglik(&self, theta: &[f64], mode: LikelihoodMode) -> f64 {
        match mode {
            LikelihoodMode::Ordinal => self.ordinal_loglik(theta),
            LikelihoodMode::Timestamped => self.timestamped_loglik(theta),
        }
    }

    pub(crate) fn gradient(&self, theta: &[f64], mode: LikelihoodMode) -> Vec<f64> {
        match mode {
            LikelihoodMode::Ordinal => self.ordinal_gradient(theta),
            LikelihoodMode::Timestamped => self.timestamped_gradient(theta),
        }
    }
}

/// Ordinal (timestamp-free) log-likelihood: a per-step softmax of the
/// realized action over every candidate. Zero on an empty history.
pub fn ordinal_loglik(history: &EventHistory, model: &RemModel, space: &ActionSpace) -> Result<f64> {
    let design = Design::build(history, &model.specs, space, LikelihoodMode::Ordinal)?;
    Ok(design.ordinal_loglik(&model.theta))
}

/// Timestamped log-likelihood: per-event hazard terms, exponential survival
/// of all candidates over each waiting time, and trailing survival from the
/// last event to the observation end.
pub fn timestamped_loglik(
    history: &EventHistory,
    model: &RemModel,
    space: &ActionSpace,
) -> Result<f64> {
    let design = Design::build(history, &model.specs, space, LikelihoodMode::Timestamped)?;
    Ok(design.timestamped_loglik(&model.theta))
}

/// Analytic gradient of the chosen log-likelihood with respect to theta.
pub fn loglik_gradient(
    history: &EventHistory,
    model: &RemModel,
    space: &ActionSpace,
    mode: LikelihoodMode,
) -> Result<Vec<f64>> {
    let design = Design::build(history, &model.specs, space, mode)?;
    Ok(design.gradient(&model.theta, mode))
}

/// Settings for [`fit_mle`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub mode: LikelihoodMode,
    /// Starting point; zeros (the uniform null model) when absent.
    pub init_theta: Option<Vec<f64>>,
    pub max_iter: usize,
    /// Convergence threshold on the gradient infinity norm.
    pub tol: f64,
    /// Estimate standard errors from the inverse negated numerical Hessian.
    pub std_errors: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            mode: LikelihoodMode::Ordinal,
            init_theta: None,
            max_iter: 2000,
            tol: 1e-8,
            std_errors: true,
        }
    }
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    #[serde(rename = "theta")]
    pub theta_hat: Vec<f64>,
    pub loglik: f64,
    #[serde(skip)]
    pub gradient_norm: f64,
    #[serde(rename = "iterations")]
    pub n_iterations: usize,
    pub converged: bool,
    #[serde(rename = "se")]
    pub std_errors: Option<Vec<f64>>,
    /// Accepted log-likelihood after each iteration, for diagnostics.
    #[serde(skip)]
    pub loglik_trace: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Fit coefficients by maximum likelihood.
///
/// Deterministic gradient ascent with a backtracking (Armijo) line search.
/// Once per-step gains fall below the floating-point resolution of the
/// log-likelihood, the fit continues with plain gradient steps at the last
/// certified step size, which keeps shrinking the gradient toward the
/// stationary point the line search can no longer certify. Non-convergence
/// is reported in the result, not as an error.
pub fn fit_mle(
    history: &EventHistory,
    specs: &[StatisticSpec],
    space: &ActionSpace,
    config: &FitConfig,
) -> Result<FitResult> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let design = Design::build(history, specs, space, config.mode)?;
    check_identifiable(&design, config.mode)?;

    let d = specs.len();
    let mut theta = match &config.init_theta {
        Some(t) => {
            assert_eq!(t.len(), d, "init_theta length must match the spec count");
            t.clone()
        }
        None => vec![0.0; d],
    };
    let mut ll = design.loglik(&theta, config.mode);
    let mut grad = design.gradient(&theta, config.mode);
    let mut trace = vec![ll];
    let mut step_hint = 1.0;
    let mut iterations = 0;
    let mut line_search_alive = true;
    // Best point seen during the uncertified phase.
    let mut best = (theta.clone(), ll, inf_norm(&grad));

    while iterations < config.max_iter {
        let gnorm = inf_norm(&grad);
        if gnorm <= config.tol {
            break;
        }
        iterations += 1;
        let gg = dot(&grad, &grad);
        let mut moved = false;
        if line_search_alive {
            let mut step = step_hint;
            for _ in 0..60 {
                let candidate: Vec<f64> =
                    theta.iter().zip(&grad).map(|(t, g)| t + step * g).collect();
                let ll_candidate = design.loglik(&candidate, config.mode);
                if ll_candidate.is_finite() && ll_candidate >= ll + 1e-4 * step * gg {
                    theta = candidate;
                    ll = ll_candidate;
                    step_hint = step * 2.0;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                // Gains are below log-likelihood resolution; switch to plain
                // gradient steps at the last certified step size.
                line_search_alive = false;
                step_hint *= 0.5;
                best = (theta.clone(), ll, gnorm);
            }
        }
        if !line_search_alive {
            let candidate: Vec<f64> = theta
                .iter()
                .zip(&grad)
                .map(|(t, g)| t + step_hint * g)
                .collect();
            let ll_candidate = design.loglik(&candidate, config.mode);
            let grad_candidate = design.gradient(&candidate, config.mode);
            let gnorm_candidate = inf_norm(&grad_candidate);
            if !ll_candidate.is_finite() || gnorm_candidate > 4.0 * best.2 {
                // Diverging in the flat region: restore the best point and stop.
                theta = best.0.clone();
                ll = best.1;
                grad = design.gradient(&theta, config.mode);
                trace.push(ll);
                break;
            }
            theta = candidate;
            ll = ll_candidate;
            grad = grad_candidate;
            if gnorm_candidate < best.2 {
                best = (theta.clone(), ll, gnorm_candidate);
            }
            trace.push(ll);
            continue;
        }
        grad = design.gradient(&theta, config.mode);
        trace.push(ll);
    }

    let gradient_norm = inf_norm(&grad);
    let converged = gradient_norm <= config.tol;
    let std_errors = if config.std_errors {
        standard_errors(&design, &theta, config.mode)
    } else {
        None
    };
    Ok(FitResult {
        theta_hat: theta,
        loglik: ll,
        gradient_norm,
        n_iterations: iterations,
        converged,
        std_errors,
        loglik_trace: trace,
    })
}

/// Reject statistics whose coefficient cannot be identified: in ordinal
/// mode a column constant across the candidates of every step cancels in
/// every softmax; in timestamped mode only an identically zero column is
/// flat (a constant column still scales the total rate).
fn check_identifiable(design: &Design, mode: LikelihoodMode) -> Result<()> {
    for j in 0..design.n_stats {
        let degenerate = match mode {
            LikelihoodMode::Ordinal => (0..design.n_steps()).all(|i| {
                let m = &design.matrices[i];
                let first = m.get(0, j);
                (1..m.n_actions()).all(|a| m.get(a, j) == first)
            }),
            LikelihoodMode::Timestamped => design.matrices.iter().all(|m| {
                (0..m.n_actions()).all(|a| m.get(a, j) == 0.0)
            }),
        };
        if degenerate {
            return Err(Error::DegenerateStatistic { index: j });
        }
    }
    Ok(())
}

/// Standard errors from the observed information: central differences of
/// the analytic gradient give the Hessian, whose negated inverse is the
/// asymptotic covariance. `None` when the information matrix is singular
/// or produces a negative variance.
fn standard_errors(design: &Design, theta: &[f64], mode: LikelihoodMode) -> Option<Vec<f64>> {
    let d = theta.len();
    let mut hessian = vec![0.0; d * d];
    for j in 0..d {
        let h = 1e-5 * theta[j].abs().max(1.0);
        let mut plus = theta.to_vec();
        plus[j] += h;
        let mut minus = theta.to_vec();
        minus[j] -= h;
        let g_plus = design.gradient(&plus, mode);
        let g_minus = design.gradient(&minus, mode);
        for i in 0..d {
            hessian[i * d + j] = (g_plus[i] - g_minus[i]) / (2.0 * h);
        }
    }
    // Symmetrize and negate: covariance = (-H)^-1.
    let mut info = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            info[i * d + j] = -(hessian[i * d + j] + hessian[j * d + i]) / 2.0;
        }
    }
    let cov = invert_small(&info, d)?;
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let v = cov[i * d + i];
        if v < 0.0 {
            return None;
        }
        out.push(v.sqrt());
    }
    Some(out)
}
