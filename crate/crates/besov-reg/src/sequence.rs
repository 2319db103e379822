//! Synthetic problem construction in the sequence model: diagonal scale
//! operators realizing smoothing of order `eta`, sources of prescribed
//! Besov smoothness, and noise calibrated to an exact level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::field::{all_indices, CoefField, FieldError, MAX_LEVEL};
use crate::space::BesovSpace;

#[derive(Debug, thiserror::Error)]
pub enum SequenceError {
    #[error("smoothing order must be a finite nonnegative real, got {eta}")]
    InvalidSmoothingOrder { eta: f64 },
    #[error("source construction requires ambient dimension 1, got {d}")]
    SourceDimension { d: u32 },
    #[error("source construction requires a Banach space (p >= 1), got p = {p}")]
    SourceNotBanach { p: String },
    #[error("decay margin must be a finite positive real, got {margin}")]
    InvalidMargin { margin: f64 },
    #[error("noise level must be a finite nonnegative real, got {delta}")]
    InvalidNoiseLevel { delta: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The canonical diagonal operator with per-level multipliers
/// `mu_j = 2^{-eta j}`: smoothing of order `eta`, self-adjoint in the
/// plain coefficient inner product.
#[derive(Debug, Clone)]
pub struct DiagonalScaleOperator {
    eta: f64,
    max_level: u32,
    multipliers: Vec<f64>,
}

impl DiagonalScaleOperator {
    pub fn new(eta: f64, max_level: u32) -> Result<Self, SequenceError> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(SequenceError::InvalidSmoothingOrder { eta });
        }
        if max_level > MAX_LEVEL {
            return Err(SequenceError::Field(FieldError::DepthTooLarge {
                requested: max_level,
            }));
        }
        let multipliers = (0..=max_level)
            .map(|j| (-eta * f64::from(j)).exp2())
            .collect();
        Ok(DiagonalScaleOperator {
            eta,
            max_level,
            multipliers,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn multiplier(&self, level: u32) -> f64 {
        self.multipliers[level as usize]
    }

    /// `(F u)_lambda = mu_{|lambda|} u_lambda`.
    pub fn apply(&self, u: &CoefField) -> Result<CoefField, SequenceError> {
        if u.max_level() > self.max_level {
            return Err(SequenceError::Field(FieldError::LevelOverflow {
                level: u.max_level(),
                max_level: self.max_level,
            }));
        }
        Ok(u.map(|idx, value| self.multiplier(idx.level()) * value))
    }

    /// Identical action to `apply`: the operator is diagonal and
    /// self-adjoint, so `<F u, v> = <u, F* v>` holds by construction.
    pub fn apply_adjoint(&self, v: &CoefField) -> Result<CoefField, SequenceError> {
        self.apply(v)
    }
}

/// Deterministic pseudo-random source with prescribed Besov smoothness:
/// `|u_lambda| = 2^{-(s + d(1/2 - 1/p)) j} 2^{-(d/p + margin) j} r_lambda`
/// with `r_lambda` uniform in `[1/2, 1)` and random signs. The second
/// factor pays for the `2^j` coefficients per level, so per-level norm
/// contributions decay geometrically like `2^{-p margin j}` and the norm
/// stays bounded uniformly in the depth.
pub fn make_source(
    space: &BesovSpace,
    max_level: u32,
    margin: f64,
    seed: u64,
) -> Result<CoefField, SequenceError> {
    if space.d() != 1 {
        return Err(SequenceError::SourceDimension { d: space.d() });
    }
    if !space.is_banach() {
        return Err(SequenceError::SourceNotBanach {
            p: space.p().to_string(),
        });
    }
    if !margin.is_finite() || margin <= 0.0 {
        return Err(SequenceError::InvalidMargin { margin });
    }
    // s + d(1/2 - 1/p) + d/p + margin collapses to s + d/2 + margin.
    let decay = space.s_f64() + 0.5 + margin;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = CoefField::new(max_level)?;
    for idx in all_indices(max_level) {
        let r: f64 = rng.random_range(0.5..1.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let value = sign * r * (-decay * f64::from(idx.level())).exp2();
        field.set(idx, value)?;
    }
    Ok(field)
}

/// Clean data, its perturbation, and the noise level that separates them.
#[derive(Debug, Clone)]
pub struct NoisyData {
    pub clean: CoefField,
    pub noisy: CoefField,
    pub delta: f64,
    pub seed: u64,
}

/// Adds a pseudo-random perturbation rescaled so the plain `l2` distance
/// between clean and noisy data is exactly `delta`.
pub fn add_noise(clean: &CoefField, delta: f64, seed: u64) -> Result<NoisyData, SequenceError> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(SequenceError::InvalidNoiseLevel { delta });
    }
    if delta == 0.0 {
        return Ok(NoisyData {
            clean: clean.clone(),
            noisy: clean.clone(),
            delta,
            seed,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut direction = CoefField::new(clean.max_level())?;
    for idx in all_indices(clean.max_level()) {
        let g: f64 = StandardNormal.sample(&mut rng);
        direction.set(idx, g)?;
    }
    let norm = direction.l2_norm();
    assert!(norm > 0.0, "degenerate noise direction");
    let noisy = clean.add(&direction.scale(delta / norm));
    Ok(NoisyData {
        clean: clean.clone(),
        noisy,
        delta,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DyadicIndex;
    use crate::space::{besov_norm, embeds, sobolev_norm, BesovSpace};
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_field(max_level: u32, seed: u64) -> CoefField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = CoefField::new(max_level).unwrap();
        for idx in all_indices(max_level) {
            u.set(idx, rng.random_range(-1.0..1.0)).unwrap();
        }
        u
    }

    #[test]
    fn zero_order_smoothing_is_the_identity() {
        let op = DiagonalScaleOperator::new(0.0, 5).unwrap();
        let u = random_field(5, 3);
        assert_eq!(op.apply(&u).unwrap(), u);
    }

    #[test]
    fn multiplier_action() {
        let op = DiagonalScaleOperator::new(1.0, 4).unwrap();
        let mut u = CoefField::new(4).unwrap();
        u.set(DyadicIndex::new(3, 2).unwrap(), 1.0).unwrap();
        let fu = op.apply(&u).unwrap();
        assert_abs_diff_eq!(fu.get(DyadicIndex::new(3, 2).unwrap()), 0.125);

        let mut v = CoefField::new(4).unwrap();
        v.set(DyadicIndex::new(2, 1).unwrap(), 1.0).unwrap();
        let fav = op.apply_adjoint(&v).unwrap();
        assert_abs_diff_eq!(fav.get(DyadicIndex::new(2, 1).unwrap()), 0.25);

        let zero = CoefField::new(4).unwrap();
        assert!(op.apply(&zero).unwrap().is_zero());
    }

    #[test]
    fn level_overflow_is_rejected() {
        let op = DiagonalScaleOperator::new(1.0, 3).unwrap();
        let u = CoefField::new(5).unwrap();
        assert!(matches!(
            op.apply(&u),
            Err(SequenceError::Field(FieldError::LevelOverflow { .. }))
        ));
    }

    #[test]
    fn operator_is_linear_and_self_adjoint() {
        let op = DiagonalScaleOperator::new(1.5, 6).unwrap();
        let u = random_field(6, 10);
        let w = random_field(6, 11);

        let lhs = op.apply(&u.scale(2.0).add(&w.scale(-0.5))).unwrap();
        let rhs = op.apply(&u).unwrap().scale(2.0).add(&op.apply(&w).unwrap().scale(-0.5));
        assert!(lhs.sub(&rhs).l2_norm() < 1e-12);

        let fu_w = op.apply(&u).unwrap().inner(&w);
        let u_faw = u.inner(&op.apply_adjoint(&w).unwrap());
        assert_abs_diff_eq!(fu_w, u_faw, epsilon = 1e-12);
    }

    #[test]
    fn smoothing_shifts_the_sobolev_scale() {
        // Per level the gain is exact: 2^{(sigma+eta) j} mu_j = 2^{sigma j}.
        let op = DiagonalScaleOperator::new(1.0, 6).unwrap();
        let u = random_field(6, 12);
        let fu = op.apply(&u).unwrap();
        for sigma in [-0.5, 0.0, 0.7] {
            assert_abs_diff_eq!(
                sobolev_norm(&fu, sigma + 1.0),
                sobolev_norm(&u, sigma),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn source_is_deterministic_in_the_seed() {
        let space = BesovSpace::new(2.0, 1.0, 1).unwrap();
        let a = make_source(&space, 8, 0.1, 42).unwrap();
        let b = make_source(&space, 8, 0.1, 42).unwrap();
        let c = make_source(&space, 8, 0.1, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn source_norm_is_bounded_in_depth() {
        let space = BesovSpace::new(2.0, 1.0, 1).unwrap();
        let mut norms = Vec::new();
        for max_level in 4..=12 {
            let u = make_source(&space, max_level, 0.1, 42).unwrap();
            norms.push(besov_norm(&u, &space));
        }
        // Monotone in depth and convergent: increments shrink geometrically.
        for pair in norms.windows(2) {
            assert!(pair[1] >= pair[0]);
        }
        let first_step = norms[1] - norms[0];
        let last_step = norms[8] - norms[7];
        assert!(last_step < 0.6 * first_step);
        assert!(norms[8] < norms[0] + 8.0 * first_step);
    }

    #[test]
    fn source_level_contributions_decay_geometrically() {
        let space = BesovSpace::new(2.0, 1.0, 1).unwrap();
        let margin = 0.1;
        let u = make_source(&space, 12, margin, 42).unwrap();
        let p = space.p_f64();
        let weight_exp = space.weight_exponent().to_f64();
        let contributions: Vec<f64> = u
            .level_power_sums(p)
            .iter()
            .enumerate()
            .map(|(j, sum)| sum * (weight_exp * j as f64).exp2())
            .collect();
        let expected_ratio = (-p * margin).exp2();
        for j in 6..contributions.len() {
            let ratio = contributions[j] / contributions[j - 1];
            assert!(
                ratio <= expected_ratio + 0.05,
                "level {j} ratio {ratio} vs {expected_ratio}"
            );
        }
    }

    #[test]
    fn source_lies_in_every_larger_space() {
        let space = BesovSpace::new(2.0, 1.0, 1).unwrap();
        let u = make_source(&space, 10, 0.1, 7).unwrap();
        let src_norm = besov_norm(&u, &space);
        for target in [
            BesovSpace::new(0.0, 2.0, 1).unwrap(),
            BesovSpace::new(-1.0, 2.0, 1).unwrap(),
            BesovSpace::new(0.5, 1.5, 1).unwrap(),
        ] {
            assert!(embeds(&space, &target).unwrap());
            let norm = besov_norm(&u, &target);
            assert!(norm.is_finite());
            assert!(norm <= src_norm * (1.0 + 1e-12));
        }
    }

    #[test]
    fn source_input_validation() {
        let plane = BesovSpace::new(1.0, 2.0, 2).unwrap();
        assert!(matches!(
            make_source(&plane, 4, 0.1, 0),
            Err(SequenceError::SourceDimension { d: 2 })
        ));
        let quasi = BesovSpace::new(1.0, 0.5, 1).unwrap();
        assert!(matches!(
            make_source(&quasi, 4, 0.1, 0),
            Err(SequenceError::SourceNotBanach { .. })
        ));
        let line = BesovSpace::new(1.0, 2.0, 1).unwrap();
        assert!(matches!(
            make_source(&line, 4, 0.0, 0),
            Err(SequenceError::InvalidMargin { .. })
        ));
    }

    #[test]
    fn noise_is_calibrated_exactly() {
        let clean = random_field(7, 5);
        for (i, delta) in [1e-1, 3.7e-2, 1e-3].into_iter().enumerate() {
            let data = add_noise(&clean, delta, 100 + i as u64).unwrap();
            let gap = sobolev_norm(&data.clean.sub(&data.noisy), 0.0);
            assert_abs_diff_eq!(gap, delta, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_noise_returns_the_data() {
        let clean = random_field(5, 6);
        let data = add_noise(&clean, 0.0, 9).unwrap();
        assert_eq!(data.noisy, clean);
    }

    #[test]
    fn noise_is_deterministic_in_the_seed() {
        let clean = random_field(6, 8);
        let a = add_noise(&clean, 0.01, 17).unwrap();
        let b = add_noise(&clean, 0.01, 17).unwrap();
        let c = add_noise(&clean, 0.01, 18).unwrap();
        assert_eq!(a.noisy, b.noisy);
        assert_ne!(a.noisy, c.noisy);
    }

    #[test]
    fn negative_noise_level_rejected() {
        let clean = random_field(3, 1);
        assert!(matches!(
            add_noise(&clean, -1.0, 0),
            Err(SequenceError::InvalidNoiseLevel { .. })
        ));
    }
}
