//! Simulation and analysis toolkit for the nonautonomous modified
//! Swift–Hohenberg equation
//!
//! ```text
//! u_t + Δ²u + 2Δu + au + b|∇u|² + u³ = g(t, x),   u = Δu = 0 on ∂Ω,
//! ```
//!
//! with recurrent (periodic or quasi-periodic) forcing `g`. The crate covers
//! the sine-spectral discretization, exponential time integration in mild
//! (Duhamel) form, the Lyapunov/Morse structure of the autonomous problem,
//! a-priori absorbing bounds, and finite-horizon recurrence diagnostics.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the tolerances are tuned for.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod export;
pub mod forcing;
pub mod gradient;
pub(crate) mod linalg;
pub mod phi;
pub mod recurrence;
pub mod scalar;
pub mod spectral;

pub use error::{AnalysisError, BoundsError, DynamicsError, ExperimentError, ForcingError, SpectralError};
pub use scalar::Scalar;

pub type Domain = spectral::DomainSpec<f64>;
pub type Space = spectral::SpectralSpace<f64>;
pub type Field = spectral::SpectralField<f64>;
pub type Norms = spectral::NormBundle<f64>;
pub type Forcing = forcing::ForcingModel<f64>;
pub type Model = dynamics::ModelSpec<f64>;
pub type Integrator = dynamics::IntegratorConfig<f64>;
pub type Orbit = dynamics::Trajectory<f64>;
pub type Equilibrium = gradient::Equilibrium<f64>;
pub type MorseReport = gradient::MorseReport<f64>;
pub type Recurrence = recurrence::RecurrenceReport<f64>;
pub type Constants = bounds::AprioriConstants<f64>;

pub type Space32 = spectral::SpectralSpace<f32>;
pub type Field32 = spectral::SpectralField<f32>;
