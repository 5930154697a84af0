//! Complex transmission amplitudes t(ω) for each barrier model.
//!
//! Every amplitude is referenced exit-face to entry-face under the global
//! `e^{i(kx − ωt)}` convention: the incident wave has unit amplitude at the
//! entry plane and t is the transmitted amplitude at the exit plane. Free
//! propagation over a length L therefore carries phase `+kL`, and the phase
//! time of module [`crate::phasetime`] is `+dφ/dω`. No propagation phase is
//! stripped here; callers that want delays relative to free flight subtract
//! the equivalent vacuum path themselves.
//!
//! All media are lossless, so transmission and reflection obey
//! |t|² + |r|² = 1; the reflection amplitude is computed alongside t and
//! exposed for that check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{
    BarrierModel, DielectricStack, EvanescentGuide, FtirGap, Polarization, RectangularBarrier,
    C_M_PER_S, EV_TO_JOULE, HBAR_JS,
};
use crate::{Result, TunnelError};

/// A complex amplitude, serialized as a `{re, im}` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    pub re: f64,
    pub im: f64,
}

impl ComplexAmplitude {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Principal argument in (−π, π].
    pub fn arg(&self) -> f64 {
        self.as_complex().arg()
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for ComplexAmplitude {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexAmplitude> for Complex64 {
    fn from(a: ComplexAmplitude) -> Self {
        a.as_complex()
    }
}

/// Forward characteristic matrix of a layer sequence: (exit fields) = M ·
/// (entry fields), fields being (E, −i(c/ω)E′). Unimodular for lossless
/// layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub m11: ComplexAmplitude,
    pub m12: ComplexAmplitude,
    pub m21: ComplexAmplitude,
    pub m22: ComplexAmplitude,
}

impl TransferMatrix {
    pub fn identity() -> Self {
        Self::from_complex(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn from_complex(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self {
            m11: m11.into(),
            m12: m12.into(),
            m21: m21.into(),
            m22: m22.into(),
        }
    }

    /// Single-layer matrix [[cos δ, i sin δ/p], [i p sin δ, cos δ]] with
    /// δ = p·(ω/c)·thickness and p the layer index (normal incidence).
    pub fn layer(omega: f64, refractive_index: f64, thickness: f64) -> Self {
        let delta = refractive_index * omega / C_M_PER_S * thickness;
        let (s, c) = delta.sin_cos();
        Self::from_complex(
            Complex64::new(c, 0.0),
            Complex64::new(0.0, s / refractive_index),
            Complex64::new(0.0, s * refractive_index),
            Complex64::new(c, 0.0),
        )
    }

    /// `self · rhs` (standard matrix product).
    pub fn mul(&self, rhs: &TransferMatrix) -> Self {
        let (a11, a12, a21, a22) = self.entries();
        let (b11, b12, b21, b22) = rhs.entries();
        Self::from_complex(
            a11 * b11 + a12 * b21,
            a11 * b12 + a12 * b22,
            a21 * b11 + a22 * b21,
            a21 * b12 + a22 * b22,
        )
    }

    pub fn determinant(&self) -> Complex64 {
        let (m11, m12, m21, m22) = self.entries();
        m11 * m22 - m12 * m21
    }

    fn entries(&self) -> (Complex64, Complex64, Complex64, Complex64) {
        (
            self.m11.into(),
            self.m12.into(),
            self.m21.into(),
            self.m22.into(),
        )
    }
}

/// tanh(z)/z for real z, stable through z = 0.
fn tanhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0
    } else {
        z.tanh() / z
    }
}

/// Transmission and reflection of a uniform segment of length `d` with
/// squared transverse wavenumber `kappa_sq` (positive: evanescent; negative:
/// propagating with q = √(−kappa_sq)), fed from media with wavenumber `k` on
/// both sides:
///
///   t = 1 / D,  D = cosh(κd) + (i/2)·((κ² − k²)/k)·sinh(κd)/κ
///   r = −(i/2)·((κ² + k²)/k)·(sinh(κd)/κ) / D
///
/// Evanescent branch: D is normalized by cosh(κd), so κd beyond f64 range
/// degrades gracefully (t underflows to exactly 0, |r| → 1) instead of
/// producing inf/inf. tanh(κd)/κ is analytic in κ², which also covers the
/// κ → 0 threshold (E = V₀, ω = ω_c) by series. Propagating branch: the
/// plain cos/sin form, whose entries are all bounded.
fn segment_amplitudes(k: f64, kappa_sq: f64, d: f64) -> (Complex64, Complex64) {
    if d == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    if kappa_sq >= 0.0 {
        let kappa = kappa_sq.sqrt();
        let th = d * tanhc(kappa * d); // tanh(κd)/κ
        let sech = 1.0 / (kappa * d).cosh(); // 0 at extreme opacity
        let denom = Complex64::new(1.0, 0.5 * (kappa_sq - k * k) / k * th);
        let t = Complex64::new(sech, 0.0) / denom;
        let r = Complex64::new(0.0, -0.5 * (kappa_sq + k * k) / k * th) / denom;
        (t, r)
    } else {
        let q = (-kappa_sq).sqrt();
        let s = (q * d).sin() / q; // sinh(κd)/κ continued to κ = iq
        let denom = Complex64::new((q * d).cos(), 0.5 * (kappa_sq - k * k) / k * s);
        let t = denom.finv();
        let r = Complex64::new(0.0, -0.5 * (kappa_sq + k * k) / k * s) * t;
        (t, r)
    }
}

/// t(E) of a square potential barrier for a particle of energy `energy` (eV).
///
/// Both the tunneling branch (E < V₀, κ real) and the propagating branch
/// (E > V₀, analytic continuation κ → −iq) are covered; E = V₀ goes through
/// the series limit.
pub fn rect_barrier_amplitude(energy: f64, barrier: &RectangularBarrier) -> Result<ComplexAmplitude> {
    Ok(rect_barrier_both(energy, barrier)?.0.into())
}

/// t and r together, for conservation checks.
pub fn rect_barrier_both(
    energy: f64,
    barrier: &RectangularBarrier,
) -> Result<(Complex64, Complex64)> {
    barrier.validate()?;
    if !(energy > 0.0) {
        return Err(TunnelError::Domain(format!(
            "energy must be positive, got {energy} eV"
        )));
    }
    let two_m = 2.0 * barrier.mass;
    let k = (two_m * energy * EV_TO_JOULE).sqrt() / HBAR_JS;
    let kappa_sq = two_m * (barrier.v0 - energy) * EV_TO_JOULE / (HBAR_JS * HBAR_JS);
    Ok(segment_amplitudes(k, kappa_sq, barrier.width))
}

/// Characteristic matrix of a dielectric stack at angular frequency `omega`:
/// per-layer matrices composed in traversal order, empty stack → identity.
pub fn stack_transfer_matrix(omega: f64, stack: &DielectricStack) -> Result<TransferMatrix> {
    stack.validate()?;
    if !(omega > 0.0) {
        return Err(TunnelError::Domain(format!(
            "angular frequency must be positive, got {omega} rad/s"
        )));
    }
    let mut m = TransferMatrix::identity();
    for layer in &stack.layers {
        m = TransferMatrix::layer(omega, layer.refractive_index, layer.thickness).mul(&m);
    }
    Ok(m)
}

/// Extract (t, r) from a forward characteristic matrix with impedance
/// parameter `p` on both sides.
fn extract_from_matrix(m: &TransferMatrix, p: Complex64) -> (Complex64, Complex64) {
    let (a, b, c, d) = m.entries();
    let r_num = c + p * d - p * a - p * p * b;
    let r_den = p * a - p * p * b - c + p * d;
    let r = r_num / r_den;
    let one = Complex64::new(1.0, 0.0);
    let t = a * (one + r) + p * b * (one - r);
    (t, r)
}

/// Transmission amplitude of a dielectric stack between identical ambient
/// half-spaces.
pub fn stack_amplitude(omega: f64, stack: &DielectricStack) -> Result<ComplexAmplitude> {
    Ok(stack_both(omega, stack)?.0.into())
}

pub fn stack_both(omega: f64, stack: &DielectricStack) -> Result<(Complex64, Complex64)> {
    let m = stack_transfer_matrix(omega, stack)?;
    Ok(extract_from_matrix(
        &m,
        Complex64::new(stack.ambient_index, 0.0),
    ))
}

/// Transmission of an undersized waveguide section: a 1D segment with
/// longitudinal wavenumber k_z² = (ω² − ω_c²)/c², fed from a section where
/// the mode propagates at k = ω/c. Below cutoff k_z is imaginary and the
/// segment is evanescent.
pub fn guide_amplitude(omega: f64, guide: &EvanescentGuide) -> Result<ComplexAmplitude> {
    Ok(guide_both(omega, guide)?.0.into())
}

pub fn guide_both(omega: f64, guide: &EvanescentGuide) -> Result<(Complex64, Complex64)> {
    guide.validate()?;
    if !(omega > 0.0) {
        return Err(TunnelError::Domain(format!(
            "angular frequency must be positive, got {omega} rad/s"
        )));
    }
    let wc = std::f64::consts::TAU * guide.cutoff_frequency;
    let k = omega / C_M_PER_S;
    let kappa_sq = (wc * wc - omega * omega) / (C_M_PER_S * C_M_PER_S);
    Ok(segment_amplitudes(k, kappa_sq, guide.length))
}

/// Impedance parameter of a medium with index n and transverse wavenumber
/// k_z, for the given polarization (p ∝ k_z for s, k_z/n² for p; common
/// factors cancel between media).
fn ftir_impedance(kz: Complex64, n: f64, pol: Polarization) -> Complex64 {
    match pol {
        Polarization::S => kz,
        Polarization::P => kz / (n * n),
    }
}

/// Photon tunneling across the air gap between two prisms (frustrated total
/// internal reflection), treated strictly 1D along the gap normal.
///
/// Below the critical angle the propagating-branch result is returned; use
/// [`FtirGap::is_evanescent`] to tell the branches apart.
pub fn ftir_amplitude(omega: f64, gap: &FtirGap) -> Result<ComplexAmplitude> {
    Ok(ftir_both(omega, gap)?.0.into())
}

pub fn ftir_both(omega: f64, gap: &FtirGap) -> Result<(Complex64, Complex64)> {
    gap.validate()?;
    if !(omega > 0.0) {
        return Err(TunnelError::Domain(format!(
            "angular frequency must be positive, got {omega} rad/s"
        )));
    }
    let k0 = omega / C_M_PER_S;
    let n = gap.prism_index;
    let sin_t = gap.angle.sin();
    // Transverse wavenumbers along the gap normal; k_parallel = k0·n·sinθ is
    // conserved across the interfaces.
    let kz_prism = Complex64::new(k0 * n * gap.angle.cos(), 0.0);
    let kz_gap = (Complex64::new(k0 * k0 * (1.0 - n * n * sin_t * sin_t), 0.0)).sqrt();
    let p_prism = ftir_impedance(kz_prism, n, gap.polarization);
    let p_gap = ftir_impedance(kz_gap, 1.0, gap.polarization);

    // Characteristic matrix of the gap layer with general complex k_z.
    let delta = kz_gap * gap.gap;
    let i = Complex64::new(0.0, 1.0);
    let m = TransferMatrix::from_complex(
        delta.cos(),
        i * delta.sin() / p_gap,
        i * p_gap * delta.sin(),
        delta.cos(),
    );
    Ok(extract_from_matrix(&m, p_prism))
}

/// Unified dispatch: t(ω) of any [`BarrierModel`].
///
/// For a massive particle the drive variable is still ω, with E = ħω.
pub fn transmission_amplitude(model: &BarrierModel, omega: f64) -> Result<ComplexAmplitude> {
    Ok(transmission_both(model, omega)?.0.into())
}

/// t and r of any [`BarrierModel`].
pub fn transmission_both(model: &BarrierModel, omega: f64) -> Result<(Complex64, Complex64)> {
    match model {
        BarrierModel::Rectangular(b) => {
            let energy = HBAR_JS * omega / EV_TO_JOULE;
            rect_barrier_both(energy, b)
        }
        BarrierModel::Stack(s) => stack_both(omega, s),
        BarrierModel::Guide(g) => guide_both(omega, g),
        BarrierModel::Ftir(f) => ftir_both(omega, f),
    }
}
