use serde::{Deserialize, Serialize};

use super::FieldError;

/// The six physical parameters of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Lattice spacing.
    pub epsilon: f64,
    /// Misorientation angle in radians.
    pub alpha: f64,
    /// Half side of the square domain [-L, L]².
    #[serde(rename = "L")]
    pub half_side: f64,
    /// Burgers quantum factor.
    pub tau: f64,
    /// Core radius factor.
    pub lambda: f64,
    /// Width of the boundary bands where the rotations are prescribed.
    #[serde(rename = "ell")]
    pub band_width: f64,
}

impl Params {
    /// Validated constructor.
    pub fn new(
        epsilon: f64,
        alpha: f64,
        half_side: f64,
        tau: f64,
        lambda: f64,
        band_width: f64,
    ) -> Result<Self, FieldError> {
        let p = Self {
            epsilon,
            alpha,
            half_side,
            tau,
            lambda,
            band_width,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks positivity, α ≤ 1/8, ℓ < L/4 and λε < ℓ.
    pub fn validate(&self) -> Result<(), FieldError> {
        let positive = [
            ("epsilon", self.epsilon),
            ("alpha", self.alpha),
            ("L", self.half_side),
            ("tau", self.tau),
            ("lambda", self.lambda),
            ("ell", self.band_width),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(FieldError::InvalidParams {
                    name,
                    value,
                    rule: "must be finite and strictly positive",
                });
            }
        }
        if self.alpha > 0.125 {
            return Err(FieldError::InvalidParams {
                name: "alpha",
                value: self.alpha,
                rule: "alpha <= 1/8",
            });
        }
        if self.band_width >= self.half_side / 4.0 {
            return Err(FieldError::InvalidParams {
                name: "ell",
                value: self.band_width,
                rule: "ell < L/4",
            });
        }
        if self.core_radius() >= self.band_width {
            return Err(FieldError::InvalidParams {
                name: "lambda",
                value: self.lambda,
                rule: "lambda*epsilon < ell",
            });
        }
        Ok(())
    }

    /// Core disk radius λε.
    pub fn core_radius(&self) -> f64 {
        self.lambda * self.epsilon
    }

    /// Burgers quantum τε.
    pub fn burgers_quantum(&self) -> f64 {
        self.tau * self.epsilon
    }

    /// Copy with a different lattice spacing and angle.
    pub fn with_epsilon_alpha(&self, epsilon: f64, alpha: f64) -> Self {
        Self {
            epsilon,
            alpha,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_admissible_parameters() {
        assert!(Params::new(0.01, 0.125, 1.0, 1.0, 1.0, 0.2).is_ok());
    }

    #[test]
    fn rejects_each_violated_constraint() {
        assert!(Params::new(0.0, 0.1, 1.0, 1.0, 1.0, 0.2).is_err());
        assert!(Params::new(0.01, 0.2, 1.0, 1.0, 1.0, 0.2).is_err());
        assert!(Params::new(0.01, 0.1, 1.0, 1.0, 1.0, 0.25).is_err());
        assert!(Params::new(0.1, 0.1, 1.0, 1.0, 3.0, 0.2).is_err());
        assert!(Params::new(0.01, f64::NAN, 1.0, 1.0, 1.0, 0.2).is_err());
    }

    #[test]
    fn json_uses_physical_key_names() {
        let p = Params::new(0.01, 0.125, 1.0, 1.0, 1.0, 0.2).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"L\":1.0") && text.contains("\"ell\":0.2"));
        let back: Params = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Params>(r#"{"epsilon":1}"#).is_err());
    }
}
