use serde::{Deserialize, Serialize};

/// Spatial weight `phi_K(x)` multiplying an entry's strain energy.
///
/// `Bump` is a tensor product of one-dimensional trapezoids supported in
/// `[lower, upper]` with linear ramps of width `ramp`, lifted onto a floor:
/// `phi = floor + (1 - floor) * prod_j t_j(x_j)`. The result is
/// piecewise multilinear with values in `[floor, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialWeight {
    Constant {
        value: f64,
    },
    Bump {
        lower: Vec<f64>,
        upper: Vec<f64>,
        ramp: f64,
        floor: f64,
    },
}

impl Default for SpatialWeight {
    fn default() -> Self {
        SpatialWeight::Constant { value: 1.0 }
    }
}

impl SpatialWeight {
    pub fn constant(value: f64) -> Self {
        SpatialWeight::Constant { value }
    }

    /// Bump on `[lower, upper]` along every axis of a `dim`-dimensional box.
    pub fn bump_interval(dim: usize, lower: f64, upper: f64, ramp: f64, floor: f64) -> Self {
        SpatialWeight::Bump {
            lower: vec![lower; dim],
            upper: vec![upper; dim],
            ramp,
            floor,
        }
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<(), String> {
        match self {
            SpatialWeight::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(format!("constant weight must be positive, got {value}"));
                }
            }
            SpatialWeight::Bump {
                lower,
                upper,
                ramp,
                floor,
            } => {
                if lower.len() != dim || upper.len() != dim {
                    return Err(format!(
                        "bump bounds need {dim} components, got lower {} / upper {}",
                        lower.len(),
                        upper.len()
                    ));
                }
                if !(floor.is_finite() && *floor > 0.0 && *floor <= 1.0) {
                    return Err(format!("bump floor must lie in (0, 1], got {floor}"));
                }
                if !(ramp.is_finite() && *ramp > 0.0) {
                    return Err(format!("bump ramp must be positive, got {ramp}"));
                }
                for (axis, (lo, hi)) in lower.iter().zip(upper).enumerate() {
                    if !(0.0 <= *lo && lo < hi && *hi <= 1.0) {
                        return Err(format!(
                            "bump axis {axis}: need 0 <= lower < upper <= 1, got [{lo}, {hi}]"
                        ));
                    }
                    if 2.0 * ramp > hi - lo {
                        return Err(format!(
                            "bump axis {axis}: ramp {ramp} too wide for interval [{lo}, {hi}]"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            SpatialWeight::Constant { value } => *value,
            SpatialWeight::Bump {
                lower,
                upper,
                ramp,
                floor,
            } => {
                let profile: f64 = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&xi, (&lo, &hi))| ((xi - lo).min(hi - xi) / ramp).clamp(0.0, 1.0))
                    .product();
                floor + (1.0 - floor) * profile
            }
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            SpatialWeight::Constant { value } => *value,
            SpatialWeight::Bump { floor, .. } => *floor,
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            SpatialWeight::Constant { value } => *value,
            SpatialWeight::Bump { .. } => 1.0,
        }
    }

    /// Upper bound on `|d phi / d x_l|` over the domain and all axes.
    pub fn gradient_bound(&self) -> f64 {
        match self {
            SpatialWeight::Constant { .. } => 0.0,
            SpatialWeight::Bump { ramp, floor, .. } => (1.0 - floor) / ramp,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_floor_outside_and_one_on_plateau() {
        let w = SpatialWeight::bump_interval(1, 0.2, 0.6, 0.1, 0.05);
        assert_eq!(w.value(&[0.1]), 0.05);
        assert_eq!(w.value(&[0.9]), 0.05);
        assert_eq!(w.value(&[0.4]), 1.0);
        let mid_ramp = w.value(&[0.25]);
        assert!((mid_ramp - (0.05 + 0.95 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_wide_ramp() {
        let w = SpatialWeight::bump_interval(2, 0.0, 0.1, 0.2, 0.1);
        assert!(w.validate(2).is_err());
        assert!(SpatialWeight::constant(0.0).validate(1).is_err());
    }
}
