//! tunnelkit: traversal times of evanescent barriers, in the frequency and time domains.
//!
//! The crate answers one question for several kinds of wave barriers: how long
//! does a transmitted packet take to cross? It provides
//!
//! - [`domain`]: physical constants, unit conversions, and the barrier /
//!   wave-packet description types shared by everything else;
//! - [`analytic`]: closed-form and transfer-matrix complex transmission
//!   amplitudes t(ω) for rectangular potential barriers, dielectric stacks,
//!   below-cutoff waveguide sections, and frustrated-total-reflection gaps;
//! - [`phasetime`]: the group-delay (phase-time) machinery — phase extraction,
//!   unwrapping, adaptive numerical dφ/dω, and barrier-length scans that
//!   exhibit the Hartman saturation;
//! - [`universal`]: the oscillation-period and h/E traversal-time relations,
//!   the barrier-dependent correction factor, and a comparison harness over a
//!   built-in table of measured tunneling times;
//! - [`tdse`]: a direct Crank-Nicolson integration of the 1D Schrödinger
//!   equation that measures traversal times dynamically, independent of the
//!   frequency-domain route.
//!
//! # Sign convention
//!
//! All amplitudes use the physics convention `e^{i(kx - ωt)}` and are
//! referenced exit-face to entry-face, so the phase of free propagation over a
//! distance x is `+kx` and the traversal delay is `+dφ/dω`. Literature that
//! writes the group delay as `-dφ/dω` is using the opposite Fourier
//! convention; with the convention fixed here, causal propagation always
//! yields positive delays.

pub mod analytic;
pub mod domain;
mod error;
pub mod phasetime;
pub mod tdse;
pub mod universal;

pub use error::{Result, TunnelError};
