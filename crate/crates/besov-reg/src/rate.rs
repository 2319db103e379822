//! The convergence-rate experiment harness: delta-grid runs under the
//! parameter rule `alpha = c * delta`, error measurement in `H^sigma` and
//! in the penalty norm, and log-log slope fitting.

use serde::{Deserialize, Serialize};

use crate::planner::{plan_direct, plan_optimal, plan_weakened, PlanError, ProblemSignature, RegularizationPlan};
use crate::scalar::Rational;
use crate::sequence::{add_noise, make_source, DiagonalScaleOperator, SequenceError};
use crate::solver::{solve_diagonal, PenaltySpec, SolverError};
use crate::space::{besov_norm, sobolev_norm};
use crate::stats;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("delta grid invalid: {reason}")]
    InvalidDeltaGrid { reason: String },
    #[error("alpha constant must be a finite positive real, got {value}")]
    InvalidAlphaConstant { value: f64 },
    #[error("rate experiments run in ambient dimension 1, got {d}")]
    Dimension { d: u32 },
    #[error("slope fit needs at least 3 rows, got {n}")]
    TooFewPoints { n: usize },
    #[error("slope fit requires positive finite values, got ({x}, {y}) at row {index}")]
    NonPositiveFitValue { index: usize, x: f64, y: f64 },
    #[error("slope fit is degenerate: all abscissas coincide")]
    DegenerateFit,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Which planner output drives the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanChoice {
    Direct,
    Weakened(Rational),
    Optimal,
}

fn default_plan() -> PlanChoice {
    PlanChoice::Optimal
}

fn default_max_level() -> u32 {
    12
}

pub fn default_delta_grid() -> Vec<f64> {
    vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
}

fn default_alpha_constant() -> f64 {
    1.0
}

fn default_seed() -> u64 {
    42
}

fn default_margin() -> f64 {
    0.1
}

/// A delta-grid experiment: problem signature, plan choice, smoothing
/// order of the synthetic operator, and discretization parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub signature: ProblemSignature,
    #[serde(default = "default_plan")]
    pub plan: PlanChoice,
    pub eta: f64,
    #[serde(default = "default_max_level")]
    pub max_level: u32,
    #[serde(default = "default_delta_grid")]
    pub delta_grid: Vec<f64>,
    /// `alpha = alpha_constant * delta`.
    #[serde(default = "default_alpha_constant")]
    pub alpha_constant: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.delta_grid.len() < 3 {
            return Err(ExperimentError::InvalidDeltaGrid {
                reason: format!("need at least 3 points, got {}", self.delta_grid.len()),
            });
        }
        for pair in self.delta_grid.windows(2) {
            if pair[1] >= pair[0] {
                return Err(ExperimentError::InvalidDeltaGrid {
                    reason: format!("not strictly decreasing at {} -> {}", pair[0], pair[1]),
                });
            }
        }
        if let Some(&bad) = self
            .delta_grid
            .iter()
            .find(|d| !(d.is_finite() && **d > 0.0))
        {
            return Err(ExperimentError::InvalidDeltaGrid {
                reason: format!("nonpositive entry {bad}"),
            });
        }
        if !self.alpha_constant.is_finite() || self.alpha_constant <= 0.0 {
            return Err(ExperimentError::InvalidAlphaConstant {
                value: self.alpha_constant,
            });
        }
        if self.signature.domain.d() != 1 {
            return Err(ExperimentError::Dimension {
                d: self.signature.domain.d(),
            });
        }
        self.signature.ensure_valid()?;
        Ok(())
    }

    pub fn derive_plan(&self) -> Result<RegularizationPlan, ExperimentError> {
        let plan = match &self.plan {
            PlanChoice::Direct => plan_direct(&self.signature)?,
            PlanChoice::Weakened(p) => plan_weakened(&self.signature, p)?,
            PlanChoice::Optimal => plan_optimal(&self.signature)?,
        };
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub delta: f64,
    pub alpha: f64,
    pub error_h_sigma: f64,
    pub error_b_r: f64,
}

/// Per-delta errors plus the fitted log-log rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    pub sigma: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,alpha,error_h_sigma,error_b_r\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.delta, row.alpha, row.error_h_sigma, row.error_b_r
            ));
        }
        out
    }
}

/// Ordinary least squares on `(log delta, log error)`.
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> Result<(f64, f64, f64), ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::TooFewPoints { n: points.len() });
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for (index, &(x, y)) in points.iter().enumerate() {
        if !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0) {
            return Err(ExperimentError::NonPositiveFitValue { index, x, y });
        }
        xs.push(x.ln());
        ys.push(y.ln());
    }
    let fit = stats::ols(&xs, &ys).ok_or(ExperimentError::DegenerateFit)?;
    Ok((fit.slope, fit.intercept, fit.r_squared))
}

/// Runs the delta-grid experiment: builds the source and the diagonal
/// operator, then for every `delta` adds calibrated noise (seed derived as
/// `seed xor index`, so grid points are independent and reproducible),
/// solves exactly, and measures the error in `H^sigma` and in `B_R`.
pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateReport, ExperimentError> {
    cfg.validate()?;
    let plan = cfg.derive_plan()?;
    let sigma = plan.sigma_f64();
    let penalty_space = plan.penalty_space.clone();

    let source = make_source(&cfg.signature.source, cfg.max_level, cfg.margin, cfg.seed)?;
    let op = DiagonalScaleOperator::new(cfg.eta, cfg.max_level)?;
    let clean = op.apply(&source)?;

    let mut rows = Vec::with_capacity(cfg.delta_grid.len());
    for (index, &delta) in cfg.delta_grid.iter().enumerate() {
        let data = add_noise(&clean, delta, cfg.seed ^ index as u64)?;
        let alpha = cfg.alpha_constant * delta;
        let pen = PenaltySpec::new(penalty_space.clone(), alpha)?;
        let report = solve_diagonal(&op, &data.noisy, &pen)?;
        debug_assert_eq!(report.iterations, 0);
        let gap = report.minimizer.sub(&source);
        rows.push(RateRow {
            delta,
            alpha,
            error_h_sigma: sobolev_norm(&gap, sigma),
            error_b_r: besov_norm(&gap, &penalty_space),
        });
    }

    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.delta, r.error_h_sigma)).collect();
    let (slope, intercept, r_squared) = fit_log_log_slope(&points)?;
    Ok(RateReport {
        sigma,
        slope,
        intercept,
        r_squared,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            signature: fixtures::sobolev_scale_signature(1, Rational::ratio(1, 1000)),
            plan: PlanChoice::Optimal,
            eta: 1.0,
            max_level: 6,
            delta_grid: vec![1e-1, 3e-2, 1e-2],
            alpha_constant: 1.0,
            seed: 42,
            margin: 0.1,
        }
    }

    #[test]
    fn fit_recovers_exact_power_laws() {
        let sqrt_points: Vec<(f64, f64)> = [1e-1f64, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&d| (d, d.sqrt()))
            .collect();
        let (slope, _, r2) = fit_log_log_slope(&sqrt_points).unwrap();
        assert_abs_diff_eq!(slope, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r2, 1.0, epsilon = 1e-12);

        let linear: Vec<(f64, f64)> =
            [1e-1, 1e-2, 1e-3].iter().map(|&d| (d, 3.0 * d)).collect();
        let (slope, _, _) = fit_log_log_slope(&linear).unwrap();
        assert_abs_diff_eq!(slope, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_tolerates_multiplicative_jitter() {
        let points: Vec<(f64, f64)> = [1e-1f64, 3e-2, 1e-2, 3e-3, 1e-3]
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let jitter = if i % 2 == 0 { 1.01 } else { 0.99 };
                (d, d.sqrt() * jitter)
            })
            .collect();
        let (slope, _, _) = fit_log_log_slope(&points).unwrap();
        assert!((slope - 0.5).abs() <= 0.02, "slope {slope}");
    }

    #[test]
    fn fit_input_validation() {
        assert!(matches!(
            fit_log_log_slope(&[(1.0, 1.0), (0.5, 0.7)]),
            Err(ExperimentError::TooFewPoints { n: 2 })
        ));
        assert!(matches!(
            fit_log_log_slope(&[(1.0, 1.0), (0.5, 0.7), (0.1, -1.0)]),
            Err(ExperimentError::NonPositiveFitValue { index: 2, .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = base_config();
        cfg.delta_grid = vec![1e-1, 1e-1, 1e-2];
        assert!(matches!(
            cfg.validate(),
            Err(ExperimentError::InvalidDeltaGrid { .. })
        ));

        let mut cfg = base_config();
        cfg.delta_grid = vec![1e-1, 1e-2];
        assert!(matches!(
            cfg.validate(),
            Err(ExperimentError::InvalidDeltaGrid { .. })
        ));

        let mut cfg = base_config();
        cfg.alpha_constant = 0.0;
        assert!(matches!(
            cfg.validate(),
            Err(ExperimentError::InvalidAlphaConstant { .. })
        ));
    }

    #[test]
    fn infeasible_signature_aborts_before_solving() {
        let mut cfg = base_config();
        // Break the source inclusion: a source far below the domain.
        cfg.signature.source = crate::space::BesovSpace::new(-5.0, 1.0, 1).unwrap();
        match run_rate_experiment(&cfg) {
            Err(ExperimentError::Plan(PlanError::InvalidSignature { summary, .. })) => {
                assert!(summary.contains("source inside domain"));
            }
            other => panic!("expected plan error, got {other:?}"),
        }
    }

    #[test]
    fn experiment_rows_align_with_the_grid() {
        let cfg = base_config();
        let report = run_rate_experiment(&cfg).unwrap();
        assert_eq!(report.rows.len(), cfg.delta_grid.len());
        for (row, &delta) in report.rows.iter().zip(&cfg.delta_grid) {
            assert_eq!(row.delta, delta);
            assert_eq!(row.alpha, delta);
            assert!(row.error_h_sigma.is_finite());
            assert!(row.error_b_r.is_finite());
        }
        assert!(report.slope.is_finite());
    }

    #[test]
    fn experiment_is_deterministic() {
        let cfg = base_config();
        let a = run_rate_experiment(&cfg).unwrap();
        let b = run_rate_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());

        let mut other = cfg;
        other.seed = 43;
        let c = run_rate_experiment(&other).unwrap();
        assert_ne!(a.to_csv(), c.to_csv());
    }

    #[test]
    fn config_deserializes_with_defaults() {
        let json = r#"{
            "signature": {
                "domain": {"s": -1, "p": 2, "d": 1},
                "adjoint_range": {"s": 1, "p": 2, "d": 1},
                "source": {"s": 2, "p": 1, "d": 1},
                "epsilon": "1/1000"
            },
            "eta": 1.0
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.plan, PlanChoice::Optimal);
        assert_eq!(cfg.max_level, 12);
        assert_eq!(cfg.delta_grid, default_delta_grid());
        assert_eq!(cfg.seed, 42);
        assert_abs_diff_eq!(cfg.margin, 0.1);

        let weakened = r#"{"weakened": "3/2"}"#;
        let choice: PlanChoice = serde_json::from_str(weakened).unwrap();
        assert_eq!(choice, PlanChoice::Weakened(Rational::ratio(3, 2)));
    }
}
