//! The Besov-scale calculus: spaces, sequence norms, duality, differential
//! dimensions, and the embedding criterion.
//!
//! Spaces are identified with their weighted wavelet-coefficient sequence
//! model, and the usual norm equivalence is adopted as equality with
//! constant 1: `||u||_{B^s_p}^p = sum_j 2^{p(s + d(1/2 - 1/p)) j} sum_k |u_{j,k}|^p`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::field::CoefField;
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("integrability index must be positive, got {p}")]
    NonPositiveIntegrability { p: String },
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
    #[error("ambient dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },
    #[error("duality requires p > 1, got {p}")]
    DualUndefined { p: String },
    #[error("the embedding criterion requires Banach spaces (p >= 1), got {p}")]
    NotBanach { p: String },
    #[error("{what} must be finite, got {value}")]
    NonFinite { what: &'static str, value: f64 },
}

/// A point `(s, p, d)` in the Besov scale: smoothness `s` measured in
/// `L_p`, over an ambient dimension `d`. The second integrability index is
/// identified with `p` throughout.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BesovSpace {
    s: Rational,
    p: Rational,
    d: u32,
}

impl BesovSpace {
    /// Space from floating-point parameters (converted exactly).
    pub fn new(s: f64, p: f64, d: u32) -> Result<Self, SpaceError> {
        let s = Rational::from_f64(s).ok_or(SpaceError::NonFinite {
            what: "smoothness",
            value: s,
        })?;
        let p_exact = Rational::from_f64(p).ok_or(SpaceError::NonFinite {
            what: "integrability",
            value: p,
        })?;
        Self::exact(s, p_exact, d)
    }

    /// Space from exact rational parameters.
    pub fn exact(s: Rational, p: Rational, d: u32) -> Result<Self, SpaceError> {
        if !p.is_positive() {
            return Err(SpaceError::NonPositiveIntegrability { p: p.to_string() });
        }
        if d == 0 {
            return Err(SpaceError::ZeroDimension);
        }
        Ok(BesovSpace { s, p, d })
    }

    pub fn s(&self) -> &Rational {
        &self.s
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn s_f64(&self) -> f64 {
        self.s.to_f64()
    }

    pub fn p_f64(&self) -> f64 {
        self.p.to_f64()
    }

    pub fn is_banach(&self) -> bool {
        self.p >= Rational::one()
    }

    /// The differential dimension `s - d/p`.
    pub fn differential_dimension(&self) -> Rational {
        &self.s - Rational::from(self.d) / &self.p
    }

    /// The dual space `(-s, p/(p-1), d)`; defined for `p > 1`.
    pub fn dual(&self) -> Result<BesovSpace, SpaceError> {
        if self.p <= Rational::one() {
            return Err(SpaceError::DualUndefined {
                p: self.p.to_string(),
            });
        }
        let p_star = &self.p / (&self.p - Rational::one());
        BesovSpace::exact(-&self.s, p_star, self.d)
    }

    /// Exponent `e = p (s + d(1/2 - 1/p))` such that the level-`j` norm
    /// weight is `2^{e j}`.
    pub fn weight_exponent(&self) -> Rational {
        let d = Rational::from(self.d);
        &self.p * &self.s + d * (&self.p / Rational::integer(2) - Rational::one())
    }
}

impl fmt::Display for BesovSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B^{}_{} (d = {})", self.s, self.p, self.d)
    }
}

impl<'de> Deserialize<'de> for BesovSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            s: Rational,
            p: Rational,
            d: u32,
        }
        let repr = Repr::deserialize(deserializer)?;
        BesovSpace::exact(repr.s, repr.p, repr.d).map_err(serde::de::Error::custom)
    }
}

/// The weight multiplying `|u_lambda|^p` at level `j` in the sequence norm.
pub fn level_weight(space: &BesovSpace, level: u32) -> f64 {
    let exponent = space.weight_exponent().to_f64();
    (exponent * f64::from(level)).exp2()
}

/// The sequence-model Besov norm (equivalence constants fixed to 1).
pub fn besov_norm(u: &CoefField, space: &BesovSpace) -> f64 {
    let p = space.p_f64();
    let exponent = space.weight_exponent().to_f64();
    let total: f64 = u
        .level_power_sums(p)
        .iter()
        .enumerate()
        .map(|(j, sum)| sum * (exponent * j as f64).exp2())
        .sum();
    total.powf(1.0 / p)
}

/// The Sobolev `H^sigma` sequence norm `(sum 2^{2 sigma j} |u_lambda|^2)^{1/2}`.
///
/// Agrees with `besov_norm` at `(sigma, 2, d)` for every `d`: the dimension
/// drops out of the weight when `p = 2`.
pub fn sobolev_norm(u: &CoefField, sigma: f64) -> f64 {
    let total: f64 = u
        .level_power_sums(2.0)
        .iter()
        .enumerate()
        .map(|(j, sum)| sum * (2.0 * sigma * j as f64).exp2())
        .sum();
    total.sqrt()
}

/// The sufficient embedding criterion: `a` embeds into `b` iff the
/// differential dimension drops strictly and `a.p <= b.p`.
///
/// This is a criterion check, not an inclusion oracle: it returns `false`
/// on equal spaces even though set inclusion trivially holds.
pub fn embeds(a: &BesovSpace, b: &BesovSpace) -> Result<bool, SpaceError> {
    if a.d() != b.d() {
        return Err(SpaceError::DimensionMismatch {
            left: a.d(),
            right: b.d(),
        });
    }
    for space in [a, b] {
        if !space.is_banach() {
            return Err(SpaceError::NotBanach {
                p: space.p().to_string(),
            });
        }
    }
    Ok(a.differential_dimension() > b.differential_dimension() && a.p() <= b.p())
}

/// Criterion check extended by parameter equality, the form of inclusion
/// the planner accepts for its modeling assumptions.
pub fn embeds_or_equal(a: &BesovSpace, b: &BesovSpace) -> Result<bool, SpaceError> {
    if a == b {
        return Ok(true);
    }
    embeds(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CoefField, DyadicIndex};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit_field(max_level: u32, level: u32, position: u64) -> CoefField {
        let mut u = CoefField::new(max_level).unwrap();
        u.set(DyadicIndex::new(level, position).unwrap(), 1.0).unwrap();
        u
    }

    #[test]
    fn level_weight_values() {
        let flat = BesovSpace::new(0.0, 2.0, 1).unwrap();
        assert_abs_diff_eq!(level_weight(&flat, 5), 1.0);

        let h1 = BesovSpace::new(1.0, 2.0, 1).unwrap();
        assert_abs_diff_eq!(level_weight(&h1, 1), 4.0);

        let b1 = BesovSpace::new(1.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(level_weight(&b1, 1), 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn besov_norm_values() {
        let space = BesovSpace::new(1.0, 2.0, 1).unwrap();
        let zero = CoefField::new(4).unwrap();
        assert_eq!(besov_norm(&zero, &space), 0.0);

        let at_root = unit_field(4, 0, 0);
        assert_abs_diff_eq!(besov_norm(&at_root, &space), 1.0);
        let rough = BesovSpace::new(-2.5, 1.5, 1).unwrap();
        assert_abs_diff_eq!(besov_norm(&at_root, &rough), 1.0);

        let at_level_one = unit_field(4, 1, 1);
        assert_abs_diff_eq!(besov_norm(&at_level_one, &space), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn sobolev_norm_values() {
        let zero = CoefField::new(3).unwrap();
        assert_eq!(sobolev_norm(&zero, 0.7), 0.0);

        let mut u = CoefField::new(3).unwrap();
        u.set(DyadicIndex::new(0, 0).unwrap(), 3.0).unwrap();
        u.set(DyadicIndex::new(2, 1).unwrap(), 4.0).unwrap();
        assert_abs_diff_eq!(sobolev_norm(&u, 0.0), 5.0, epsilon = 1e-12);

        let spike = unit_field(3, 2, 0);
        assert_abs_diff_eq!(sobolev_norm(&spike, 1.0), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn sobolev_equals_besov_at_p_two() {
        let mut u = CoefField::new(5).unwrap();
        u.set(DyadicIndex::new(0, 0).unwrap(), 0.3).unwrap();
        u.set(DyadicIndex::new(3, 5).unwrap(), -1.7).unwrap();
        u.set(DyadicIndex::new(5, 20).unwrap(), 0.04).unwrap();
        for d in [1, 2, 3] {
            let space = BesovSpace::new(0.8, 2.0, d).unwrap();
            assert_eq!(sobolev_norm(&u, 0.8), besov_norm(&u, &space));
        }
    }

    #[test]
    fn differential_dimension_values() {
        let src = BesovSpace::new(2.0, 1.0, 1).unwrap();
        assert_eq!(src.differential_dimension(), Rational::integer(1));

        let flat = BesovSpace::new(0.0, 2.0, 2).unwrap();
        assert_eq!(flat.differential_dimension(), Rational::integer(-1));

        let dom = BesovSpace::exact(Rational::integer(-1), Rational::ratio(3, 2), 1).unwrap();
        assert_eq!(dom.differential_dimension(), Rational::ratio(-5, 3));
    }

    #[test]
    fn embedding_criterion() {
        // B_1^2 into H^{-1} in d = 1: 2 - 1 > -1 - 1/2 and 1 <= 2.
        let source = BesovSpace::new(2.0, 1.0, 1).unwrap();
        let target = BesovSpace::new(-1.0, 2.0, 1).unwrap();
        assert!(embeds(&source, &target).unwrap());

        // Equal spaces fail the strict criterion.
        assert!(!embeds(&source, &source).unwrap());
        assert!(embeds_or_equal(&source, &source).unwrap());

        let a = BesovSpace::new(1.0, 2.0, 1).unwrap();
        let b = BesovSpace::new(0.5, 3.0, 1).unwrap();
        assert!(embeds(&a, &b).unwrap());
        assert!(!embeds(&b, &a).unwrap());

        let other_dim = BesovSpace::new(0.5, 3.0, 2).unwrap();
        assert_eq!(
            embeds(&a, &other_dim),
            Err(SpaceError::DimensionMismatch { left: 1, right: 2 })
        );

        let quasi = BesovSpace::new(0.0, 0.5, 1).unwrap();
        assert!(matches!(
            embeds(&quasi, &a),
            Err(SpaceError::NotBanach { .. })
        ));
    }

    #[test]
    fn dual_values() {
        let domain = BesovSpace::exact(Rational::integer(-1), Rational::ratio(3, 2), 1).unwrap();
        let dual = domain.dual().unwrap();
        assert_eq!(dual, BesovSpace::new(1.0, 3.0, 1).unwrap());

        let l2 = BesovSpace::new(0.0, 2.0, 3).unwrap();
        assert_eq!(l2.dual().unwrap(), l2);

        let b43 = BesovSpace::exact(Rational::integer(1), Rational::ratio(4, 3), 1).unwrap();
        assert_eq!(b43.dual().unwrap(), BesovSpace::new(-1.0, 4.0, 1).unwrap());

        let endpoint = BesovSpace::new(1.0, 1.0, 1).unwrap();
        assert!(matches!(endpoint.dual(), Err(SpaceError::DualUndefined { .. })));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            BesovSpace::new(0.0, 0.0, 1),
            Err(SpaceError::NonPositiveIntegrability { .. })
        ));
        assert!(matches!(
            BesovSpace::new(0.0, 2.0, 0),
            Err(SpaceError::ZeroDimension)
        ));
        assert!(matches!(
            BesovSpace::new(f64::NAN, 2.0, 1),
            Err(SpaceError::NonFinite { .. })
        ));
    }

    #[test]
    fn space_serde_round_trip() {
        let space = BesovSpace::exact(Rational::ratio(-12, 17), Rational::ratio(17, 12), 1).unwrap();
        let json = serde_json::to_string(&space).unwrap();
        let back: BesovSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, space);

        let err = serde_json::from_str::<BesovSpace>("{\"s\": 0, \"p\": 0, \"d\": 1}");
        assert!(err.is_err());
    }

    fn arb_field(max_level: u32) -> impl Strategy<Value = CoefField> {
        prop::collection::vec(
            ((0u32..=6), (0u64..64), -2.0f64..2.0),
            0..12,
        )
        .prop_map(move |entries| {
            let mut u = CoefField::new(max_level).unwrap();
            for (level, raw_pos, value) in entries {
                let position = raw_pos % (1u64 << level);
                let idx = DyadicIndex::new(level, position).unwrap();
                u.set(idx, value).unwrap();
            }
            u
        })
    }

    fn arb_banach_space() -> impl Strategy<Value = BesovSpace> {
        (-1.5f64..1.5, 1.0f64..3.0).prop_map(|(s, p)| BesovSpace::new(s, p, 1).unwrap())
    }

    proptest! {
        #[test]
        fn norm_is_absolutely_homogeneous(
            u in arb_field(6),
            space in arb_banach_space(),
            c in -3.0f64..3.0,
        ) {
            let lhs = besov_norm(&u.scale(c), &space);
            let rhs = c.abs() * besov_norm(&u, &space);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
        }

        #[test]
        fn norm_satisfies_triangle_inequality(
            u in arb_field(6),
            v in arb_field(6),
            space in arb_banach_space(),
        ) {
            let lhs = besov_norm(&u.add(&v), &space);
            let rhs = besov_norm(&u, &space) + besov_norm(&v, &space);
            prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs));
        }

        #[test]
        fn dual_is_an_involution(s in -2.0f64..2.0, p in 1.01f64..5.0) {
            let space = BesovSpace::new(s, p, 1).unwrap();
            prop_assert_eq!(space.dual().unwrap().dual().unwrap(), space);
        }

        #[test]
        fn embedding_is_transitive(
            s_c in -1.0f64..1.0,
            p_a in 1.0f64..2.0,
            gap_ab in 0.01f64..1.0,
            gap_bc in 0.01f64..1.0,
            step_ab in 0.0f64..1.0,
            step_bc in 0.0f64..1.0,
        ) {
            let p_b = p_a + step_ab;
            let p_c = p_b + step_bc;
            let c = BesovSpace::new(s_c, p_c, 1).unwrap();
            let ddim_b = c.differential_dimension().to_f64() + gap_bc;
            let b = BesovSpace::new(ddim_b + 1.0 / p_b, p_b, 1).unwrap();
            let ddim_a = b.differential_dimension().to_f64() + gap_ab;
            let a = BesovSpace::new(ddim_a + 1.0 / p_a, p_a, 1).unwrap();
            prop_assert!(embeds(&a, &b).unwrap());
            prop_assert!(embeds(&b, &c).unwrap());
            prop_assert!(embeds(&a, &c).unwrap());
        }

        #[test]
        fn embedded_norm_is_dominated(
            u in arb_field(6),
            target in arb_banach_space(),
            p_shrink in 0.0f64..1.0,
            gap in 0.01f64..1.5,
        ) {
            // Build a source space that embeds into the target.
            let p_a = 1.0 + (target.p_f64() - 1.0) * p_shrink;
            let ddim_a = target.differential_dimension().to_f64() + gap;
            let a = BesovSpace::new(ddim_a + 1.0 / p_a, p_a, 1).unwrap();
            prop_assume!(embeds(&a, &target).unwrap());
            let larger = besov_norm(&u, &a);
            let smaller = besov_norm(&u, &target);
            prop_assert!(smaller <= larger * (1.0 + 1e-12) + 1e-12);
        }
    }
}
