//! Finite dyadic wavelet-coefficient fields, the sequence model of a
//! function on the line: one coefficient per index `(j, k)` with
//! `0 <= k < 2^j`, absent indices meaning zero.

use std::collections::BTreeMap;

/// Hard cap on the dyadic depth; keeps level weights representable and
/// index counts sane (`2^{J+1} - 1` coefficients at depth `J`).
pub const MAX_LEVEL: u32 = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("level {level} exceeds the field depth {max_level}")]
    LevelOverflow { level: u32, max_level: u32 },
    #[error("position {position} out of range at level {level} (need < 2^{level})")]
    PositionOutOfRange { level: u32, position: u64 },
    #[error("coefficient values must be finite, got {value}")]
    NonFiniteValue { value: f64 },
    #[error("field depth {requested} exceeds the supported maximum {MAX_LEVEL}")]
    DepthTooLarge { requested: u32 },
}

/// A dyadic index `(level, position)`, totally ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicIndex {
    level: u32,
    position: u64,
}

impl DyadicIndex {
    pub fn new(level: u32, position: u64) -> Result<Self, FieldError> {
        if level > MAX_LEVEL {
            return Err(FieldError::DepthTooLarge { requested: level });
        }
        if position >= 1u64 << level {
            return Err(FieldError::PositionOutOfRange { level, position });
        }
        Ok(DyadicIndex { level, position })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn position(&self) -> u64 {
        self.position
    }
}

/// All indices with level at most `max_level`, in `(level, position)` order.
pub fn all_indices(max_level: u32) -> impl Iterator<Item = DyadicIndex> {
    (0..=max_level).flat_map(|level| {
        (0..1u64 << level).map(move |position| DyadicIndex { level, position })
    })
}

/// A finitely supported coefficient field truncated at `max_level`.
///
/// Storing an exact zero removes the entry, so equal fields have equal
/// supports and serialization is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefField {
    max_level: u32,
    coeffs: BTreeMap<DyadicIndex, f64>,
}

impl CoefField {
    pub fn new(max_level: u32) -> Result<Self, FieldError> {
        if max_level > MAX_LEVEL {
            return Err(FieldError::DepthTooLarge {
                requested: max_level,
            });
        }
        Ok(CoefField {
            max_level,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn from_entries<I>(max_level: u32, entries: I) -> Result<Self, FieldError>
    where
        I: IntoIterator<Item = (DyadicIndex, f64)>,
    {
        let mut field = CoefField::new(max_level)?;
        for (idx, value) in entries {
            field.set(idx, value)?;
        }
        Ok(field)
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, idx: DyadicIndex) -> f64 {
        self.coeffs.get(&idx).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, idx: DyadicIndex, value: f64) -> Result<(), FieldError> {
        if idx.level > self.max_level {
            return Err(FieldError::LevelOverflow {
                level: idx.level,
                max_level: self.max_level,
            });
        }
        if !value.is_finite() {
            return Err(FieldError::NonFiniteValue { value });
        }
        if value == 0.0 {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, value);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicIndex, f64)> + '_ {
        self.coeffs.iter().map(|(&idx, &value)| (idx, value))
    }

    pub fn indices(&self) -> impl Iterator<Item = DyadicIndex> + '_ {
        self.coeffs.keys().copied()
    }

    /// Applies `f` to every stored coefficient; `f` must return finite values.
    pub fn map(&self, mut f: impl FnMut(DyadicIndex, f64) -> f64) -> CoefField {
        let mut out = CoefField::new(self.max_level).expect("depth already validated");
        for (idx, value) in self.iter() {
            let mapped = f(idx, value);
            assert!(mapped.is_finite(), "coefficient map produced {mapped}");
            if mapped != 0.0 {
                out.coeffs.insert(idx, mapped);
            }
        }
        out
    }

    pub fn add(&self, other: &CoefField) -> CoefField {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CoefField) -> CoefField {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &CoefField, op: impl Fn(f64, f64) -> f64) -> CoefField {
        let max_level = self.max_level.max(other.max_level);
        let mut out = CoefField::new(max_level).expect("depth already validated");
        for idx in self.indices().chain(other.indices()) {
            if out.coeffs.contains_key(&idx) {
                continue;
            }
            let value = op(self.get(idx), other.get(idx));
            assert!(value.is_finite(), "field arithmetic produced {value}");
            if value != 0.0 {
                out.coeffs.insert(idx, value);
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> CoefField {
        assert!(c.is_finite(), "scale factor must be finite, got {c}");
        self.map(|_, v| c * v)
    }

    /// Plain coefficient inner product `sum_lambda u_lambda v_lambda`.
    pub fn inner(&self, other: &CoefField) -> f64 {
        self.coeffs
            .iter()
            .filter_map(|(idx, &a)| other.coeffs.get(idx).map(|&b| a * b))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `sum_k |u_{j,k}|^p` per level, indexed `0..=max_level`.
    pub fn level_power_sums(&self, p: f64) -> Vec<f64> {
        let mut sums = vec![0.0; self.max_level as usize + 1];
        for (idx, value) in self.iter() {
            sums[idx.level as usize] += value.abs().powf(p);
        }
        sums
    }
}
