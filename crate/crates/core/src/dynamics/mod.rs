//! Time integration in mild (variation-of-constants) form.
//!
//! Every model is written as `u_t + Λu + Q(u) = g` with `Λ` diagonal in the
//! sine basis and `Q(u) = P(b|∇u|² + u³)`. Exponential schemes treat a
//! diagonal part `κ` of `Λ` exactly; the rest of `Λ` stays in the explicit
//! term, as in the mild formulation with `L = Δ²`.

mod duhamel;
mod stepper;
mod tracking;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::scalar::Scalar;

pub use duhamel::duhamel_residual;
pub use stepper::{step, Stepper};
pub use tracking::{track_bounded_orbit, TrackingConfig};
pub use trajectory::{integrate, skew_orbit, SampleDiagnostics, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `u_t + Δ²u + 2Δu + au + b|∇u|² + u³ = g`.
    ModifiedSwiftHohenberg,
    /// `u_t − Δu − au + u³ = g`.
    ChafeeInfante,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<T> {
    pub kind: ModelKind,
    pub a: T,
    /// Ignored for Chafee–Infante.
    pub b: T,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn swift_hohenberg(a: T, b: T) -> Self {
        Self {
            kind: ModelKind::ModifiedSwiftHohenberg,
            a,
            b,
        }
    }

    pub fn chafee_infante(a: T) -> Self {
        Self {
            kind: ModelKind::ChafeeInfante,
            a,
            b: T::zero(),
        }
    }

    /// Coefficient of the gradient term actually in the equation.
    pub fn gradient_coefficient(&self) -> T {
        match self.kind {
            ModelKind::ModifiedSwiftHohenberg => self.b,
            ModelKind::ChafeeInfante => T::zero(),
        }
    }

    /// Symbol of the full linear part: `μ² − 2μ + a` or `μ − a`.
    pub fn lambda(&self, mu: T) -> T {
        match self.kind {
            ModelKind::ModifiedSwiftHohenberg => mu * mu - T::lit(2.0) * mu + self.a,
            ModelKind::ChafeeInfante => mu - self.a,
        }
    }

    /// Symbol of the principal part `L`: `μ²` or `μ`.
    pub fn principal(&self, mu: T) -> T {
        match self.kind {
            ModelKind::ModifiedSwiftHohenberg => mu * mu,
            ModelKind::ChafeeInfante => mu,
        }
    }

    /// `Λ` per stored coefficient.
    pub fn lambda_modes(&self, mode_mu: &[T]) -> Vec<T> {
        mode_mu.iter().map(|&mu| self.lambda(mu)).collect()
    }

    pub fn validate(&self) -> Result<(), DynamicsError<T>> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(DynamicsError::Config("model parameters must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Etd1,
    #[default]
    #[serde(rename = "etdrk4")]
    EtdRk4,
    ImexCn,
}

/// Which diagonal part of the linear operator is integrated exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// `κ = L` (Δ² or −Δ); lower-order linear terms are explicit.
    #[default]
    Principal,
    /// `κ = Λ`, the whole linear part.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    #[serde(default)]
    pub scheme: Scheme,
    pub t_end: T,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default = "yes")]
    pub padded: bool,
    #[serde(default)]
    pub splitting: Splitting,
    /// Drops `Q` (test harness for the exact linear substep).
    #[serde(default)]
    pub linear_only: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(1e-3),
            scheme: Scheme::EtdRk4,
            t_end: T::lit(200.0),
            record_every: 1,
            padded: true,
            splitting: Splitting::Principal,
            linear_only: false,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<(), DynamicsError<T>> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(DynamicsError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.t_end.is_finite() {
            return Err(DynamicsError::Config("t_end must be finite".into()));
        }
        if self.record_every == 0 {
            return Err(DynamicsError::Config("record_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps from `tau` to `t_end` (rounded to the nearest step).
    pub fn steps_from(&self, tau: T) -> Result<usize, DynamicsError<T>> {
        let span = self.t_end - tau;
        if span < T::zero() {
            return Err(DynamicsError::Config(format!(
                "t_end = {} precedes the start time {tau}",
                self.t_end
            )));
        }
        Ok((span / self.dt).round().as_f64() as usize)
    }
}
