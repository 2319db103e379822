//! The penalty-space planner: given the smoothness data of an inverse
//! problem (domain, adjoint range, source), derive admissible and optimal
//! Tikhonov penalty spaces together with the Sobolev exponent `sigma` of
//! the resulting `O(sqrt(delta))` convergence rate.
//!
//! All parameter arithmetic is exact rational, so equalities such as
//! `sigma = s_R + d(1/2 - 1/p_R)` and strictness checks hold literally.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::scalar::Rational;
use crate::space::{embeds, embeds_or_equal, BesovSpace, SpaceError};

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("invalid problem signature: {summary}")]
    InvalidSignature {
        summary: String,
        report: Vec<ConstraintCheck>,
    },
    #[error("weakening exponent p = {p} violates {bound}")]
    WeakeningOutOfRange { p: String, bound: String },
    #[error("penalty exponent p_R = {p_r} violates the requirement 1 < p_R <= 2")]
    PenaltyPowerOutOfRange { p_r: String },
    #[error("tighter source {tighter} is not included in {base} by the embedding criterion")]
    SourceNotIncluded { tighter: String, base: String },
    #[error("strictly tighter source failed to improve the optimal rate: delta = {delta}")]
    DeltaNotPositive { delta: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// One named feasibility check with its outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub satisfied: bool,
    pub detail: String,
}

impl ConstraintCheck {
    fn new(name: &'static str, satisfied: bool, detail: String) -> Self {
        ConstraintCheck {
            name,
            satisfied,
            detail,
        }
    }
}

/// Smoothness data of the inverse problem: the operator maps `B_D` to
/// `L_2` with adjoint range `B_G`, and the true solution lies in `B_S`.
/// `epsilon` is the slack spent when a weakened source condition is used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSignature {
    pub domain: BesovSpace,
    pub adjoint_range: BesovSpace,
    pub source: BesovSpace,
    pub epsilon: Rational,
}

impl ProblemSignature {
    pub fn new(
        domain: BesovSpace,
        adjoint_range: BesovSpace,
        source: BesovSpace,
        epsilon: Rational,
    ) -> Self {
        ProblemSignature {
            domain,
            adjoint_range,
            source,
            epsilon,
        }
    }

    /// Runs every signature invariant and reports each outcome by name.
    pub fn validate(&self) -> Vec<ConstraintCheck> {
        let mut checks = Vec::new();
        let d = self.domain.d();
        let dims_ok = self.adjoint_range.d() == d && self.source.d() == d;
        checks.push(ConstraintCheck::new(
            "shared ambient dimension",
            dims_ok,
            format!(
                "d_D = {}, d_G = {}, d_S = {}",
                d,
                self.adjoint_range.d(),
                self.source.d()
            ),
        ));

        checks.push(ConstraintCheck::new(
            "epsilon > 0",
            self.epsilon.is_positive(),
            format!("epsilon = {}", self.epsilon),
        ));

        let one = Rational::one();
        checks.push(ConstraintCheck::new(
            "p_D > 1",
            self.domain.p() > &one,
            format!("p_D = {}", self.domain.p()),
        ));
        checks.push(ConstraintCheck::new(
            "Banach integrability (p >= 1)",
            self.source.is_banach() && self.adjoint_range.is_banach(),
            format!(
                "p_S = {}, p_G = {}",
                self.source.p(),
                self.adjoint_range.p()
            ),
        ));

        let dual_check = match self.domain.dual() {
            Ok(dual) if dims_ok => match embeds_or_equal(&self.adjoint_range, &dual) {
                Ok(ok) => ConstraintCheck::new(
                    "adjoint range inside domain dual",
                    ok,
                    format!("{} vs {}", self.adjoint_range, dual),
                ),
                Err(e) => ConstraintCheck::new(
                    "adjoint range inside domain dual",
                    false,
                    e.to_string(),
                ),
            },
            Ok(_) | Err(_) => ConstraintCheck::new(
                "adjoint range inside domain dual",
                false,
                "domain dual unavailable".to_owned(),
            ),
        };
        checks.push(dual_check);

        let source_check = if dims_ok && self.source.is_banach() && self.domain.is_banach() {
            match embeds_or_equal(&self.source, &self.domain) {
                Ok(ok) => ConstraintCheck::new(
                    "source inside domain",
                    ok,
                    format!("{} vs {}", self.source, self.domain),
                ),
                Err(e) => ConstraintCheck::new("source inside domain", false, e.to_string()),
            }
        } else {
            ConstraintCheck::new(
                "source inside domain",
                false,
                "prerequisite checks failed".to_owned(),
            )
        };
        checks.push(source_check);

        checks.push(ConstraintCheck::new(
            "p_S <= p_G",
            self.source.p() <= self.adjoint_range.p(),
            format!(
                "p_S = {}, p_G = {}",
                self.source.p(),
                self.adjoint_range.p()
            ),
        ));

        checks
    }

    pub fn ensure_valid(&self) -> Result<(), PlanError> {
        let report = self.validate();
        if report.iter().all(|c| c.satisfied) {
            return Ok(());
        }
        let summary = report
            .iter()
            .filter(|c| !c.satisfied)
            .map(|c| c.name)
            .collect::<Vec<_>>()
            .join("; ");
        Err(PlanError::InvalidSignature { summary, report })
    }

    /// Largest admissible weakening exponent, `min {p_D, p_G}`.
    pub fn max_weakening(&self) -> Rational {
        self.domain
            .p()
            .clone()
            .min(self.adjoint_range.p().clone())
    }
}

/// Which derivation produced a plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanProvenance {
    /// Penalty built directly on the source smoothness.
    Direct,
    /// Penalty built on a weakened source condition with exponent `p`.
    Weakened { p: Rational },
    /// Weakening exponent chosen to maximize `sigma`. When `p_R = 2` the
    /// penalty space is itself the Sobolev rate space `H^{s_R}`.
    Optimal {
        p: Rational,
        penalty_is_rate_space: bool,
    },
}

/// A fully determined Tikhonov penalty `alpha ||u||_{B_R}^{p_R}` together
/// with the Sobolev exponent `sigma` of the convergence-rate space.
#[derive(Debug, Clone)]
pub struct RegularizationPlan {
    pub penalty_space: BesovSpace,
    pub sigma: Rational,
    /// The slack `epsilon (p/p_S - 1)` spent on the weakened source
    /// condition; zero on the direct path.
    pub epsilon_shift: Rational,
    pub provenance: PlanProvenance,
    pub feasibility: Vec<ConstraintCheck>,
}

impl RegularizationPlan {
    pub fn p_r(&self) -> &Rational {
        self.penalty_space.p()
    }

    pub fn s_r(&self) -> &Rational {
        self.penalty_space.s()
    }

    /// The exponent on the penalty norm; equals `p_R`.
    pub fn penalty_power(&self) -> &Rational {
        self.penalty_space.p()
    }

    pub fn sigma_f64(&self) -> f64 {
        self.sigma.to_f64()
    }
}

impl Serialize for RegularizationPlan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("RegularizationPlan", 10)?;
        state.serialize_field("provenance", &self.provenance)?;
        state.serialize_field("penalty_space", &self.penalty_space)?;
        state.serialize_field("p_r", &self.p_r().to_f64())?;
        state.serialize_field("s_r", &self.s_r().to_f64())?;
        state.serialize_field("sigma", &self.sigma.to_f64())?;
        state.serialize_field("p_r_exact", &self.p_r().to_string())?;
        state.serialize_field("s_r_exact", &self.s_r().to_string())?;
        state.serialize_field("sigma_exact", &self.sigma.to_string())?;
        state.serialize_field("epsilon_shift", &self.epsilon_shift.to_f64())?;
        state.serialize_field("feasibility", &self.feasibility)?;
        state.end()
    }
}

struct WeakenedParameters {
    p_r: Rational,
    s_r: Rational,
    sigma: Rational,
    shift: Rational,
}

/// The penalty parameters for weakening exponent `p` and slack `eps`,
/// with `s_R` chosen maximal (sigma is strictly increasing in `s_R`).
fn weakened_parameters(sig: &ProblemSignature, p: &Rational, eps: &Rational) -> WeakenedParameters {
    let d = Rational::from(sig.domain.d());
    let s_s = sig.source.s();
    let p_s = sig.source.p();
    let s_g = sig.adjoint_range.s();
    let p_g = sig.adjoint_range.p();

    let p_plus = p + p_g;
    let p_r = &p_plus / p_g;
    let ratio = p / p_s - Rational::one();
    let shift = eps * &ratio;
    let s_r = (p * s_s - p_g * s_g) / &p_plus - &d * &ratio / &p_plus - &shift;
    let sigma = &s_r + &d * (Rational::ratio(1, 2) - p_r.recip());
    WeakenedParameters {
        p_r,
        s_r,
        sigma,
        shift,
    }
}

fn assemble_plan(
    sig: &ProblemSignature,
    params: WeakenedParameters,
    provenance: PlanProvenance,
) -> Result<RegularizationPlan, PlanError> {
    let one = Rational::one();
    let two = Rational::integer(2);
    if !(params.p_r > one && params.p_r <= two) {
        return Err(PlanError::PenaltyPowerOutOfRange {
            p_r: params.p_r.to_string(),
        });
    }
    let penalty_space = BesovSpace::exact(params.s_r, params.p_r, sig.domain.d())?;

    let mut feasibility = sig.validate();
    feasibility.push(ConstraintCheck::new(
        "1 < p_R <= 2",
        true,
        format!("p_R = {}", penalty_space.p()),
    ));
    let source_in_penalty = embeds_or_equal(&sig.source, &penalty_space)?;
    feasibility.push(ConstraintCheck::new(
        "source inside penalty space",
        source_in_penalty,
        format!("{} vs {}", sig.source, penalty_space),
    ));

    Ok(RegularizationPlan {
        penalty_space,
        sigma: params.sigma,
        epsilon_shift: params.shift,
        provenance,
        feasibility,
    })
}

/// The penalty derived directly from the source smoothness:
/// `p_R = (p_S + p_G) / p_G`, maximal `s_R = (p_S s_S - p_G s_G) / (p_S + p_G)`.
pub fn plan_direct(sig: &ProblemSignature) -> Result<RegularizationPlan, PlanError> {
    sig.ensure_valid()?;
    let params = weakened_parameters(sig, sig.source.p(), &sig.epsilon);
    debug_assert!(params.shift.is_zero());
    assemble_plan(sig, params, PlanProvenance::Direct)
}

fn check_weakening_range(sig: &ProblemSignature, p: &Rational) -> Result<(), PlanError> {
    let p_s = sig.source.p();
    if p < p_s {
        return Err(PlanError::WeakeningOutOfRange {
            p: p.to_string(),
            bound: format!("p >= p_S = {p_s}"),
        });
    }
    let cap = sig.max_weakening();
    if p > &cap {
        let which = if sig.domain.p() <= sig.adjoint_range.p() {
            "p_D"
        } else {
            "p_G"
        };
        return Err(PlanError::WeakeningOutOfRange {
            p: p.to_string(),
            bound: format!("p <= min{{p_D, p_G}} = {which} = {cap}"),
        });
    }
    Ok(())
}

/// The penalty obtained by trading the source condition for a weaker one
/// with integrability `p`, spending `epsilon` slack on the smoothness.
pub fn plan_weakened(sig: &ProblemSignature, p: &Rational) -> Result<RegularizationPlan, PlanError> {
    sig.ensure_valid()?;
    check_weakening_range(sig, p)?;
    let params = weakened_parameters(sig, p, &sig.epsilon);
    assemble_plan(
        sig,
        params,
        PlanProvenance::Weakened { p: p.clone() },
    )
}

/// The epsilon-free rate objective: `sigma` of the weakened plan at `p`
/// with the slack term dropped. Strictly increasing in `p` whenever the
/// source sits strictly inside the dual of the adjoint range.
pub fn sigma_hat(sig: &ProblemSignature, p: &Rational) -> Result<Rational, PlanError> {
    sig.ensure_valid()?;
    check_weakening_range(sig, p)?;
    Ok(weakened_parameters(sig, p, &Rational::zero()).sigma)
}

/// The strongest-rate plan: weakening exponent `p = min {p_D, p_G}`.
pub fn plan_optimal(sig: &ProblemSignature) -> Result<RegularizationPlan, PlanError> {
    let p = sig.max_weakening();
    let mut plan = plan_weakened(sig, &p)?;
    let penalty_is_rate_space = plan.p_r() == &Rational::integer(2);
    plan.provenance = PlanProvenance::Optimal {
        p,
        penalty_is_rate_space,
    };
    Ok(plan)
}

/// Rectangular sampling grid over `(s, p)` candidates.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub s_min: Rational,
    pub s_max: Rational,
    pub s_count: usize,
    pub p_min: Rational,
    pub p_max: Rational,
    pub p_count: usize,
}

fn linspace(min: &Rational, max: &Rational, count: usize) -> Vec<Rational> {
    match count {
        0 => Vec::new(),
        1 => vec![min.clone()],
        _ => {
            let step = (max - min) / Rational::integer(count as i64 - 1);
            (0..count)
                .map(|i| min + &step * Rational::integer(i as i64))
                .collect()
        }
    }
}

/// Samples the region of admissible weaker source conditions: spaces
/// strictly between the source and the domain in differential dimension,
/// with `p_S <= p <= min {p_D, p_G}`.
pub fn feasible_weakened_sources(
    sig: &ProblemSignature,
    grid: &GridSpec,
) -> Result<Vec<BesovSpace>, PlanError> {
    sig.ensure_valid()?;
    let d = sig.domain.d();
    let ddim_source = sig.source.differential_dimension();
    let ddim_domain = sig.domain.differential_dimension();
    let p_s = sig.source.p();
    let p_cap = sig.max_weakening();

    let mut out = Vec::new();
    for p in linspace(&grid.p_min, &grid.p_max, grid.p_count) {
        if &p < p_s || p > p_cap {
            continue;
        }
        for s in linspace(&grid.s_min, &grid.s_max, grid.s_count) {
            let candidate = BesovSpace::exact(s, p.clone(), d)?;
            let ddim = candidate.differential_dimension();
            if ddim < ddim_source && ddim > ddim_domain {
                out.push(candidate);
            }
        }
    }
    Ok(out)
}

pub fn feasible_csv(spaces: &[BesovSpace]) -> String {
    let mut out = String::from("s,p,inv_p\n");
    for space in spaces {
        out.push_str(&format!(
            "{},{},{}\n",
            space.s_f64(),
            space.p_f64(),
            space.p().recip().to_f64()
        ));
    }
    out
}

/// Side-by-side rates for a source condition and a strictly tighter one.
#[derive(Debug, Clone)]
pub struct SourceComparison {
    /// Whether the tighter source is strictly inside the base source by
    /// the criterion (false only in the degenerate equal-parameters case).
    pub strict: bool,
    pub sigma_direct_base: Rational,
    pub sigma_direct_tighter: Rational,
    pub sigma_optimal_base: Rational,
    pub sigma_optimal_tighter: Rational,
    /// `sigma_optimal_tighter - sigma_optimal_base`, slack terms included.
    pub optimal_delta: Rational,
    /// The epsilon-free closed form `p/(p + p_G) * (ddim_T - ddim_S)` with
    /// `p = min {p_D, p_G}`.
    pub optimal_delta_closed_form: Rational,
}

/// Compares the direct and optimal rates under the base source against a
/// tighter source `B_T` (same operator data). On the direct path a tighter
/// source can lose; on the optimal path it always gains.
pub fn compare_sources(
    sig: &ProblemSignature,
    tighter: &BesovSpace,
) -> Result<SourceComparison, PlanError> {
    sig.ensure_valid()?;
    let strict = embeds(tighter, &sig.source)?;
    if !strict && tighter != &sig.source {
        return Err(PlanError::SourceNotIncluded {
            tighter: tighter.to_string(),
            base: sig.source.to_string(),
        });
    }
    let tighter_sig = ProblemSignature::new(
        sig.domain.clone(),
        sig.adjoint_range.clone(),
        tighter.clone(),
        sig.epsilon.clone(),
    );
    tighter_sig.ensure_valid()?;

    let sigma_direct_base = plan_direct(sig)?.sigma;
    let sigma_direct_tighter = plan_direct(&tighter_sig)?.sigma;
    let sigma_optimal_base = plan_optimal(sig)?.sigma;
    let sigma_optimal_tighter = plan_optimal(&tighter_sig)?.sigma;

    let p = sig.max_weakening();
    let factor = &p / (&p + sig.adjoint_range.p());
    let gap = tighter.differential_dimension() - sig.source.differential_dimension();
    let optimal_delta_closed_form = factor * gap;
    let optimal_delta = &sigma_optimal_tighter - &sigma_optimal_base;

    if strict && !optimal_delta_closed_form.is_positive() {
        return Err(PlanError::DeltaNotPositive {
            delta: optimal_delta_closed_form.to_string(),
        });
    }

    Ok(SourceComparison {
        strict,
        sigma_direct_base,
        sigma_direct_tighter,
        sigma_optimal_base,
        sigma_optimal_tighter,
        optimal_delta,
        optimal_delta_closed_form,
    })
}
