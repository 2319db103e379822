//! Pinned reference problems with exact rational parameters, shared by the
//! test suites and the CLI self-check.

use crate::planner::{
    compare_sources, plan_direct, plan_optimal, plan_weakened, ProblemSignature,
};
use crate::scalar::Rational;
use crate::space::BesovSpace;

fn space(s: Rational, p: Rational) -> BesovSpace {
    BesovSpace::exact(s, p, 1).expect("fixture space parameters are valid")
}

/// Smoothing of order `eta` in the Sobolev scale: the operator maps
/// `H^{-eta}` to `L_2` with adjoint range `H^{eta}`, and the source lies in
/// `B_1^{2 eta}`.
pub fn sobolev_scale_signature(eta: i64, epsilon: Rational) -> ProblemSignature {
    let eta = Rational::integer(eta);
    let two = Rational::integer(2);
    ProblemSignature::new(
        space(-&eta, two.clone()),
        space(eta.clone(), two.clone()),
        space(&two * &eta, Rational::one()),
        epsilon,
    )
}

/// Smoothing in the Besov scale with `p_S = min {p_D, p_G}`: the operator
/// maps `B_{1+theta}^{-eta}` to `L_2` with adjoint range
/// `B_{(1+theta)/theta}^{eta}`, source `B_{1+theta}^{-eta+theta}`. Only one
/// penalty is admissible, so no rate optimization is possible.
pub fn besov_scale_single_penalty_signature(
    eta: i64,
    theta: Rational,
    epsilon: Rational,
) -> ProblemSignature {
    let eta = Rational::integer(eta);
    let p = Rational::one() + &theta;
    ProblemSignature::new(
        space(-&eta, p.clone()),
        space(eta.clone(), &p / &theta),
        space(&theta - &eta, p),
        epsilon,
    )
}

/// Smoothing in the Besov scale with `p_S < min {p_D, p_G}`: the operator
/// maps `B_{3/2}^{-eta}` to `L_2` with adjoint range `B_3^{eta}`, source
/// `B_{1+theta}^{-eta+1}`. A whole family of penalties is admissible.
pub fn besov_scale_penalty_family_signature(
    eta: i64,
    theta: Rational,
    epsilon: Rational,
) -> ProblemSignature {
    let eta = Rational::integer(eta);
    ProblemSignature::new(
        space(-&eta, Rational::ratio(3, 2)),
        space(eta.clone(), Rational::integer(3)),
        space(Rational::one() - &eta, Rational::one() + &theta),
        epsilon,
    )
}

/// The reversal pair: smoothing of order `eta` in the Sobolev scale with
/// the loose source `H^{eta}`, plus the strictly tighter source
/// `B_1^{eta + 1/2 + 3 epsilon}`. On the direct path the tighter source
/// gives the weaker rate.
pub fn tighter_source_pair(eta: i64, epsilon: Rational) -> (ProblemSignature, BesovSpace) {
    let eta = Rational::integer(eta);
    let two = Rational::integer(2);
    let sig = ProblemSignature::new(
        space(-&eta, two.clone()),
        space(eta.clone(), two.clone()),
        space(eta.clone(), two),
        epsilon.clone(),
    );
    let tighter = space(
        &eta + Rational::ratio(1, 2) + Rational::integer(3) * &epsilon,
        Rational::one(),
    );
    (sig, tighter)
}

/// Outcome of one pinned reference check.
#[derive(Debug, Clone)]
pub struct ReferenceCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> ReferenceCheck {
    ReferenceCheck {
        name,
        passed,
        detail,
    }
}

/// Runs the pinned plan fixtures and reports one pass/fail entry each.
/// All comparisons are exact rational equalities.
pub fn reference_checks() -> Vec<ReferenceCheck> {
    let mut out = Vec::new();
    let eps = Rational::ratio(1, 1000);

    // Sobolev-scale smoothing, direct penalty: (p_R, s_R, sigma) = (3/2, 0, -1/6).
    {
        let sig = sobolev_scale_signature(1, eps.clone());
        match plan_direct(&sig) {
            Ok(plan) => {
                let ok = plan.p_r() == &Rational::ratio(3, 2)
                    && plan.s_r() == &Rational::zero()
                    && plan.sigma == Rational::ratio(-1, 6);
                out.push(check(
                    "sobolev-scale direct penalty (3/2, 0, -1/6)",
                    ok,
                    format!(
                        "p_R = {}, s_R = {}, sigma = {}",
                        plan.p_r(),
                        plan.s_r(),
                        plan.sigma
                    ),
                ));
            }
            Err(e) => out.push(check(
                "sobolev-scale direct penalty (3/2, 0, -1/6)",
                false,
                e.to_string(),
            )),
        }
    }

    // Sobolev-scale smoothing, optimal penalty: (2, 1/4 - e~, 1/4 - e~).
    {
        let sig = sobolev_scale_signature(1, eps.clone());
        match plan_optimal(&sig) {
            Ok(plan) => {
                let expected = Rational::ratio(1, 4) - &eps;
                let ok = plan.p_r() == &Rational::integer(2)
                    && plan.s_r() == &expected
                    && plan.sigma == expected
                    && plan.epsilon_shift == eps;
                out.push(check(
                    "sobolev-scale optimal penalty (2, 1/4 - e, 1/4 - e)",
                    ok,
                    format!(
                        "p_R = {}, s_R = {}, sigma = {}",
                        plan.p_r(),
                        plan.s_r(),
                        plan.sigma
                    ),
                ));
            }
            Err(e) => out.push(check(
                "sobolev-scale optimal penalty (2, 1/4 - e, 1/4 - e)",
                false,
                e.to_string(),
            )),
        }
    }

    // Besov scale with extremal source: optimization collapses to the
    // direct plan.
    {
        let sig = besov_scale_single_penalty_signature(1, Rational::ratio(1, 4), eps.clone());
        let outcome = plan_direct(&sig).and_then(|d| plan_optimal(&sig).map(|o| (d, o)));
        match outcome {
            Ok((direct, optimal)) => {
                let ok = direct.penalty_space == optimal.penalty_space
                    && direct.sigma == optimal.sigma
                    && direct.p_r() == &Rational::ratio(5, 4)
                    && direct.sigma == Rational::ratio(-5, 4);
                out.push(check(
                    "besov-scale extremal source collapses to one penalty",
                    ok,
                    format!("p_R = {}, sigma = {}", direct.p_r(), direct.sigma),
                ));
            }
            Err(e) => out.push(check(
                "besov-scale extremal source collapses to one penalty",
                false,
                e.to_string(),
            )),
        }
    }

    // Besov-scale penalty family at theta = 1/4: worst and optimal rates.
    {
        let theta = Rational::ratio(1, 4);
        let sig = besov_scale_penalty_family_signature(1, theta.clone(), eps.clone());
        match plan_weakened(&sig, sig.source.p()) {
            Ok(plan) => {
                // sigma = -eta + 1/2 + (theta - 2)/(theta + 4) = -31/34.
                let expected = Rational::integer(-1)
                    + Rational::ratio(1, 2)
                    + (&theta - Rational::integer(2)) / (&theta + Rational::integer(4));
                out.push(check(
                    "besov-scale family, worst-case sigma -31/34",
                    plan.sigma == expected && expected == Rational::ratio(-31, 34),
                    format!("sigma = {}", plan.sigma),
                ));
            }
            Err(e) => out.push(check(
                "besov-scale family, worst-case sigma -31/34",
                false,
                e.to_string(),
            )),
        }
        match plan_optimal(&sig) {
            Ok(plan) => {
                // sigma = -eta + 1/6 + (1/9)(2 theta - 1)/(theta + 1) - e~.
                let shift = &eps * (Rational::ratio(6, 5) - Rational::one());
                let expected = Rational::integer(-1)
                    + Rational::ratio(1, 6)
                    + Rational::ratio(1, 9) * (Rational::integer(2) * &theta - Rational::one())
                        / (&theta + Rational::one())
                    - &shift;
                let ok = plan.p_r() == &Rational::ratio(3, 2)
                    && plan.sigma == expected
                    && plan.epsilon_shift == shift;
                out.push(check(
                    "besov-scale family, optimal sigma -79/90 - e/5",
                    ok,
                    format!("p_R = {}, sigma = {}", plan.p_r(), plan.sigma),
                ));
            }
            Err(e) => out.push(check(
                "besov-scale family, optimal sigma -79/90 - e/5",
                false,
                e.to_string(),
            )),
        }
    }

    // Tighter-source reversal: the direct path loses, the optimal path
    // gains with the closed-form delta.
    {
        let tiny = Rational::ratio(1, 1_000_000);
        let (sig, tighter) = tighter_source_pair(1, tiny.clone());
        match compare_sources(&sig, &tighter) {
            Ok(cmp) => {
                let closed =
                    Rational::ratio(3, 2) * &tiny;
                let ok = cmp.sigma_direct_base == Rational::zero()
                    && cmp.sigma_direct_tighter < cmp.sigma_direct_base
                    && cmp.optimal_delta.is_positive()
                    && cmp.optimal_delta_closed_form == closed;
                out.push(check(
                    "tighter source loses directly, wins optimally",
                    ok,
                    format!(
                        "direct: {} vs {}; optimal delta = {}",
                        cmp.sigma_direct_base, cmp.sigma_direct_tighter, cmp.optimal_delta
                    ),
                ));
            }
            Err(e) => out.push(check(
                "tighter source loses directly, wins optimally",
                false,
                e.to_string(),
            )),
        }
    }

    out
}
