//! Phase extraction, unwrapping, and the group-delay (phase-time) traversal
//! time τ = +dφ/dω.
//!
//! Free propagation over a distance x yields +x/v under the crate's
//! `e^{i(kx − ωt)}` convention; texts writing τ = −dφ/dω use the opposite
//! Fourier sign. The derivative is a central difference on unwrapped phases
//! with automatic step refinement; by default the returned value is the
//! absolute traversal time (no free-flight subtraction).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{transmission_amplitude, ComplexAmplitude};
use crate::domain::{BarrierModel, C_M_PER_S, HBAR_JS};
use crate::{Result, TunnelError};

use std::f64::consts::{PI, TAU};

/// Nine significant digits, scientific notation, lowercase `e`. All float
/// text emitted by this crate and its CLI goes through here so that identical
/// inputs produce byte-identical output.
pub fn sci9(x: f64) -> String {
    format!("{x:.8e}")
}

/// How a traversal time was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "phase_time")]
    PhaseTime,
    #[serde(rename = "universal_T")]
    UniversalT,
    #[serde(rename = "universal_hE")]
    UniversalHE,
    #[serde(rename = "tau_A")]
    TauA,
    #[serde(rename = "time_domain")]
    TimeDomain,
}

/// A traversal-time value in seconds, tagged with its method and free-form
/// metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayResult {
    /// Traversal time (s).
    pub value: f64,
    /// Always "s"; times are seconds everywhere in this crate.
    pub unit: String,
    pub method: Method,
    pub metadata: BTreeMap<String, String>,
}

impl DelayResult {
    pub fn new(value: f64, method: Method) -> Self {
        Self {
            value,
            unit: "s".into(),
            method,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: String) -> Self {
        self.metadata.insert(key.into(), value);
        self
    }
}

/// arg t on the branch (−π, π].
pub fn principal_phase(t: &ComplexAmplitude) -> Result<f64> {
    if t.magnitude() == 0.0 {
        return Err(TunnelError::OpaqueBarrier(
            "amplitude underflowed to zero; phase undefined".into(),
        ));
    }
    let mut p = t.im.atan2(t.re);
    if p == -PI {
        p = PI;
    }
    Ok(p)
}

/// A continuous (unwrapped) phase record over strictly ascending frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeries {
    /// Angular frequencies (rad/s), strictly ascending.
    pub omegas: Vec<f64>,
    /// Unwrapped phases (rad); neighbour jumps lie in (−π, π].
    pub phases: Vec<f64>,
    /// Set when a neighbour jump was exactly π: the tie was broken toward the
    /// +π offset and the series may be undersampled.
    pub tie_broken: bool,
}

impl PhaseSeries {
    /// Unwrap a series of principal phases sampled at the given frequencies.
    pub fn from_principal(omegas: Vec<f64>, principal: Vec<f64>) -> Result<Self> {
        if omegas.len() != principal.len() {
            return Err(TunnelError::Domain(format!(
                "{} frequencies vs {} phases",
                omegas.len(),
                principal.len()
            )));
        }
        if omegas.len() < 2 {
            return Err(TunnelError::Domain(
                "phase series needs at least 2 samples".into(),
            ));
        }
        if !omegas.windows(2).all(|w| w[0] < w[1]) {
            return Err(TunnelError::Domain(
                "frequencies must be strictly ascending".into(),
            ));
        }
        let (phases, tie_broken) = unwrap_phases(&principal);
        Ok(Self {
            omegas,
            phases,
            tie_broken,
        })
    }
}

/// Add integer multiples of 2π so neighbouring differences lie in (−π, π];
/// the first sample is unchanged. The returned flag reports a jump of exactly
/// π, which is tie-broken toward +π.
pub fn unwrap_phases(principal: &[f64]) -> (Vec<f64>, bool) {
    let mut out = Vec::with_capacity(principal.len());
    let mut tie = false;
    let mut offset = 0.0;
    for (i, &p) in principal.iter().enumerate() {
        if i == 0 {
            out.push(p);
            continue;
        }
        let raw = p - principal[i - 1];
        let mut wrapped = raw - TAU * (raw / TAU).round();
        if wrapped <= -PI {
            wrapped += TAU;
        } else if wrapped > PI {
            wrapped -= TAU;
        }
        if wrapped == PI {
            tie = true;
        }
        offset += wrapped - raw;
        out.push(p + offset);
    }
    (out, tie)
}

/// Smallest-magnitude representative of a phase difference, in (−π, π].
fn wrap_diff(d: f64) -> f64 {
    let mut w = d - TAU * (d / TAU).round();
    if w <= -PI {
        w += TAU;
    } else if w > PI {
        w -= TAU;
    }
    w
}

/// Single central-difference delay estimate at relative step `delta`:
/// [φ(ω₀(1+δ)) − φ(ω₀(1−δ))] / (2ω₀δ), phases pair-unwrapped.
pub fn central_difference_delay(model: &BarrierModel, omega0: f64, delta: f64) -> Result<f64> {
    let lo = transmission_amplitude(model, omega0 * (1.0 - delta))?;
    let hi = transmission_amplitude(model, omega0 * (1.0 + delta))?;
    let p_lo = principal_phase(&lo)?;
    let p_hi = principal_phase(&hi)?;
    Ok(wrap_diff(p_hi - p_lo) / (2.0 * omega0 * delta))
}

const DELTA_MIN: f64 = 1e-9;
const DELTA_MAX: f64 = 1e-2;
pub const DEFAULT_DELTA: f64 = 1e-5;

/// Phase time τ = dφ/dω at ω₀ by adaptive central differencing.
///
/// Starting from `delta` (relative), the step is halved until two successive
/// estimates agree to 1e-6 relative or the step reaches 1e-9; the final step,
/// a Richardson error estimate and the convergence flag land in the result
/// metadata. The value is the absolute traversal time; see
/// [`phase_time_relative`] for the delay against free flight.
pub fn phase_time(model: &BarrierModel, omega0: f64, delta: f64) -> Result<DelayResult> {
    model.validate()?;
    if !(omega0 > 0.0) {
        return Err(TunnelError::Domain(format!(
            "angular frequency must be positive, got {omega0} rad/s"
        )));
    }
    if !(DELTA_MIN..=DELTA_MAX).contains(&delta) {
        return Err(TunnelError::Domain(format!(
            "relative step must lie in [{DELTA_MIN:e}, {DELTA_MAX:e}], got {delta:e}"
        )));
    }

    let mut step = delta;
    let mut prev = central_difference_delay(model, omega0, step)?;
    let mut converged = false;
    let mut estimate = prev;
    let mut richardson = f64::NAN;
    while step / 2.0 >= DELTA_MIN {
        step /= 2.0;
        estimate = central_difference_delay(model, omega0, step)?;
        let diff = (estimate - prev).abs();
        richardson = diff / 3.0;
        if diff <= 1e-6 * estimate.abs() {
            converged = true;
            break;
        }
        prev = estimate;
    }

    Ok(DelayResult::new(estimate, Method::PhaseTime)
        .with_meta("delta", sci9(step))
        .with_meta(
            "richardson_error",
            if richardson.is_nan() {
                "n/a".into()
            } else {
                sci9(richardson)
            },
        )
        .with_meta("converged", converged.to_string()))
}

/// Group velocity of free propagation through the region the barrier
/// occupies, used when reporting delays relative to free flight.
pub fn free_flight_velocity(model: &BarrierModel, omega0: f64) -> f64 {
    match model {
        BarrierModel::Rectangular(b) => {
            // E = ħω ⇒ v = ħk/m
            let k = (2.0 * b.mass * HBAR_JS * omega0).sqrt() / HBAR_JS;
            HBAR_JS * k / b.mass
        }
        BarrierModel::Stack(s) => C_M_PER_S / s.ambient_index,
        BarrierModel::Guide(_) | BarrierModel::Ftir(_) => C_M_PER_S,
    }
}

/// Phase time minus the free flight over the barrier's geometric length.
pub fn phase_time_relative(model: &BarrierModel, omega0: f64, delta: f64) -> Result<DelayResult> {
    let absolute = phase_time(model, omega0, delta)?;
    let free = model.barrier_length() / free_flight_velocity(model, omega0);
    let mut out = absolute.clone();
    out.value = absolute.value - free;
    out.metadata
        .insert("free_flight_time".into(), sci9(free));
    out.metadata
        .insert("relative_to_free_flight".into(), "true".into());
    Ok(out)
}

/// One point of a Hartman scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartmanPoint {
    /// Barrier length (m).
    pub length: f64,
    /// Phase time, when the point evaluated cleanly.
    pub delay: Option<DelayResult>,
    /// Error message for points that failed (opaque beyond precision, ...).
    pub error: Option<String>,
}

/// A phase-time-vs-length scan with its saturation diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartmanScan {
    pub points: Vec<HartmanPoint>,
    /// max |τ(Lᵢ) − τ(L_ref)| / τ(L_ref) over the opaque tail κL > 5, with
    /// L_ref the largest valid tail length; 0 when the tail is empty.
    pub saturation_diagnostic: f64,
}

/// Phase time for a family of barriers sharing everything but their length.
///
/// Lengths must be ascending; per-point failures mark the point rather than
/// aborting the scan. Points are evaluated in parallel, output order follows
/// input order.
pub fn hartman_curve(
    model: &BarrierModel,
    lengths: &[f64],
    omega0: f64,
    delta: f64,
) -> Result<HartmanScan> {
    if lengths.is_empty() {
        return Err(TunnelError::Domain("no lengths to scan".into()));
    }
    if !lengths.windows(2).all(|w| w[0] < w[1]) {
        return Err(TunnelError::Domain(
            "scan lengths must be strictly ascending".into(),
        ));
    }

    let points: Vec<HartmanPoint> = lengths
        .par_iter()
        .map(|&length| match model
            .with_barrier_length(length)
            .and_then(|m| phase_time(&m, omega0, delta))
        {
            Ok(delay) => HartmanPoint {
                length,
                delay: Some(delay),
                error: None,
            },
            Err(e) => HartmanPoint {
                length,
                delay: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let saturation_diagnostic = match model.decay_constant(omega0) {
        Some(kappa) => {
            let tail: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| kappa * p.length > 5.0)
                .filter_map(|p| p.delay.as_ref().map(|d| (p.length, d.value)))
                .collect();
            match tail.last() {
                Some(&(_, tau_ref)) if tau_ref != 0.0 => tail
                    .iter()
                    .map(|&(_, tau)| ((tau - tau_ref) / tau_ref).abs())
                    .fold(0.0, f64::max),
                _ => 0.0,
            }
        }
        None => 0.0,
    };

    Ok(HartmanScan {
        points,
        saturation_diagnostic,
    })
}
