//! DeVore diagram data: smoothness `s` against `1/p`, with optional lines
//! of constant differential dimension `s = d/p + c`.

use crate::scalar::Rational;
use crate::space::{BesovSpace, SpaceError};

#[derive(Debug, Clone, PartialEq)]
pub struct DevoreRow {
    pub label: String,
    pub inv_p: f64,
    pub s: f64,
}

/// Emits one row per labeled space and, for every constant `c`, one row per
/// `1/p` sample along the line `s = d/p + c`. All spaces must share `d`.
pub fn devore_diagram_data(
    d: u32,
    points: &[(String, BesovSpace)],
    lines: &[Rational],
    inv_p_samples: &[Rational],
) -> Result<Vec<DevoreRow>, SpaceError> {
    if d == 0 {
        return Err(SpaceError::ZeroDimension);
    }
    let mut rows = Vec::new();
    for (label, space) in points {
        if space.d() != d {
            return Err(SpaceError::DimensionMismatch {
                left: d,
                right: space.d(),
            });
        }
        rows.push(DevoreRow {
            label: label.clone(),
            inv_p: space.p().recip().to_f64(),
            s: space.s_f64(),
        });
    }
    for c in lines {
        let label = format!("ddim={c}");
        for inv_p in inv_p_samples {
            let s = Rational::from(d) * inv_p + c;
            rows.push(DevoreRow {
                label: label.clone(),
                inv_p: inv_p.to_f64(),
                s: s.to_f64(),
            });
        }
    }
    Ok(rows)
}

pub fn devore_csv(rows: &[DevoreRow]) -> String {
    let mut out = String::from("label,inv_p,s\n");
    for row in rows {
        out.push_str(&format!("{},{},{}\n", row.label, row.inv_p, row.s));
    }
    out
}
