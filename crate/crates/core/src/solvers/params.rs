use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{HnsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Model {
    /// Incompressible Navier–Stokes.
    Ns,
    /// Hyperbolic (Cattaneo) perturbation, incompressible.
    HnsEps,
    /// Hyperbolic perturbation with divergence penalty 1/α.
    HnsEpsAlpha,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Ns => "NS",
            Model::HnsEps => "HNS_EPS",
            Model::HnsEpsAlpha => "HNS_EPS_ALPHA",
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        !matches!(self, Model::Ns)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = HnsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NS" => Ok(Model::Ns),
            "HNS_EPS" => Ok(Model::HnsEps),
            "HNS_EPS_ALPHA" => Ok(Model::HnsEpsAlpha),
            _ => Err(HnsError::InvalidParams(format!("unknown model {s:?}"))),
        }
    }
}

/// Model selector and coefficients. The viscosity is fixed at 1.
///
/// `alpha = f64::INFINITY` switches the penalty off, so `HnsEpsAlpha` then
/// coincides with `HnsEps` on divergence-free data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub model: Model,
    pub epsilon: f64,
    pub alpha: f64,
    pub s: f64,
    pub delta: f64,
    /// Include the convective nonlinearity.
    pub nonlinear: bool,
    /// Include the `∂ₜu` damping term of the hyperbolic models.
    pub damped: bool,
}

impl ModelParams {
    pub fn ns() -> Self {
        ModelParams {
            model: Model::Ns,
            epsilon: 0.0,
            alpha: f64::INFINITY,
            s: 0.5,
            delta: 0.5,
            nonlinear: true,
            damped: true,
        }
    }

    pub fn hns_eps(epsilon: f64) -> Self {
        ModelParams {
            model: Model::HnsEps,
            epsilon,
            ..Self::ns()
        }
    }

    pub fn hns_eps_alpha(epsilon: f64, alpha: f64) -> Self {
        ModelParams {
            model: Model::HnsEpsAlpha,
            epsilon,
            alpha,
            ..Self::ns()
        }
    }

    pub fn linear(self) -> Self {
        ModelParams {
            nonlinear: false,
            ..self
        }
    }

    pub fn viscosity(&self) -> f64 {
        1.0
    }

    /// Whether the divergence penalty is active.
    pub fn penalized(&self) -> bool {
        self.model == Model::HnsEpsAlpha && self.alpha.is_finite()
    }

    /// Fastest characteristic speed `√((α+1)/(αε))`; equals `c₂` without penalty.
    pub fn c1(&self) -> f64 {
        if self.penalized() {
            ((self.alpha + 1.0) / (self.alpha * self.epsilon)).sqrt()
        } else {
            self.c2()
        }
    }

    /// Transverse speed `1/√ε`.
    pub fn c2(&self) -> f64 {
        1.0 / self.epsilon.sqrt()
    }

    /// Stiffness factor of the irrotational branch, `1 + 1/α`.
    pub fn q_factor(&self) -> f64 {
        if self.penalized() {
            1.0 + 1.0 / self.alpha
        } else {
            1.0
        }
    }

    pub fn damping(&self) -> f64 {
        if self.damped {
            1.0
        } else {
            0.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HnsError::InvalidParams(m));
        if self.model.is_hyperbolic() && !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.model == Model::HnsEpsAlpha && !(self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s must lie in (0, 1), got {}", self.s));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        Ok(())
    }
}
