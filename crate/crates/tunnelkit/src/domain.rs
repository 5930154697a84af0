//! Physical constants, unit conversions, and the barrier / packet types
//! shared by all other modules.
//!
//! Everything downstream computes in SI; electron-volts, nanometres and
//! femtoseconds are accepted and emitted at the boundaries only. The
//! conversion helpers here are the single place where that translation
//! happens.

use serde::{Deserialize, Serialize};

use crate::{Result, TunnelError};

/// Planck constant, J·s (exact by definition).
pub const H_JS: f64 = 6.626_070_15e-34;
/// Elementary charge, C (exact); doubles as the eV → J conversion factor.
pub const EV_TO_JOULE: f64 = 1.602_176_634e-19;
/// Vacuum light speed, m/s (exact).
pub const C_M_PER_S: f64 = 299_792_458.0;
/// Electron rest mass, kg (CODATA 2018).
pub const M_E_KG: f64 = 9.109_383_701_5e-31;
/// Reduced Planck constant, J·s.
pub const HBAR_JS: f64 = H_JS / std::f64::consts::TAU;
/// Planck constant, eV·s.
pub const H_EVS: f64 = H_JS / EV_TO_JOULE;
/// Reduced Planck constant, eV·s.
pub const HBAR_EVS: f64 = HBAR_JS / EV_TO_JOULE;

/// A constant carrying both its J·s and eV·s values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionConstant {
    pub joule_s: f64,
    pub ev_s: f64,
}

/// The full constant set, exposed read-only as [`CONSTANTS`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub hbar: ActionConstant,
    pub h: ActionConstant,
    /// Vacuum light speed (m/s).
    pub c: f64,
    /// Electron rest mass (kg).
    pub m_e: f64,
    /// eV → J conversion factor.
    pub ev_to_joule: f64,
}

pub const CONSTANTS: Constants = Constants {
    hbar: ActionConstant {
        joule_s: HBAR_JS,
        ev_s: HBAR_EVS,
    },
    h: ActionConstant {
        joule_s: H_JS,
        ev_s: H_EVS,
    },
    c: C_M_PER_S,
    m_e: M_E_KG,
    ev_to_joule: EV_TO_JOULE,
};

/// Wavenumber k = √(2mE)/ħ of a free massive particle (1/m).
///
/// `energy` in eV, `mass` in kg.
pub fn energy_to_wavenumber(energy: f64, mass: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(TunnelError::Domain(format!(
            "energy must be positive, got {energy} eV"
        )));
    }
    if !(mass > 0.0) {
        return Err(TunnelError::Domain(format!(
            "mass must be positive, got {mass} kg"
        )));
    }
    Ok((2.0 * mass * energy * EV_TO_JOULE).sqrt() / HBAR_JS)
}

/// ν = E/h: photon/particle frequency (Hz) for an energy in eV.
pub fn energy_to_frequency(energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(TunnelError::Domain(format!(
            "energy must be positive, got {energy} eV"
        )));
    }
    Ok(energy / H_EVS)
}

/// E = hν: energy (eV) for a frequency in Hz.
pub fn frequency_to_energy(frequency: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(TunnelError::Domain(format!(
            "frequency must be positive, got {frequency} Hz"
        )));
    }
    Ok(frequency * H_EVS)
}

/// ω = E/ħ for an energy in eV (rad/s).
pub fn energy_to_angular_frequency(energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(TunnelError::Domain(format!(
            "energy must be positive, got {energy} eV"
        )));
    }
    Ok(energy * EV_TO_JOULE / HBAR_JS)
}

/// Square potential barrier for a massive particle.
///
/// `v0` is the height in eV, `width` the length d in m, `mass` in kg. A zero
/// height is allowed so the same description covers the free-flight control
/// used by the time-domain cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangularBarrier {
    /// Barrier height (eV).
    pub v0: f64,
    /// Barrier length d (m).
    pub width: f64,
    /// Particle mass (kg).
    pub mass: f64,
}

impl RectangularBarrier {
    pub fn new(v0: f64, width: f64, mass: f64) -> Result<Self> {
        let b = Self { v0, width, mass };
        b.validate()?;
        Ok(b)
    }

    /// Electron barrier shortcut.
    pub fn electron(v0: f64, width: f64) -> Result<Self> {
        Self::new(v0, width, M_E_KG)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0 >= 0.0) {
            return Err(TunnelError::Domain(format!(
                "barrier height must be non-negative, got {} eV",
                self.v0
            )));
        }
        if !(self.width >= 0.0) {
            return Err(TunnelError::Domain(format!(
                "barrier width must be non-negative, got {} m",
                self.width
            )));
        }
        if !(self.mass > 0.0) {
            return Err(TunnelError::Domain(format!(
                "mass must be positive, got {} kg",
                self.mass
            )));
        }
        Ok(())
    }

    /// Evanescent decay constant κ = √(2m(V₀−E))/ħ at kinetic energy
    /// `energy` (eV), or `None` in the propagating regime E ≥ V₀.
    pub fn decay_constant(&self, energy: f64) -> Option<f64> {
        if energy < self.v0 {
            Some((2.0 * self.mass * (self.v0 - energy) * EV_TO_JOULE).sqrt() / HBAR_JS)
        } else {
            None
        }
    }
}

/// One layer of a dielectric stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Refractive index (≥ 1, frequency-independent).
    pub refractive_index: f64,
    /// Layer thickness (m).
    pub thickness: f64,
}

/// A stratified dielectric stack embedded between identical half-spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DielectricStack {
    /// Layers in traversal order; may be empty (identity stack).
    pub layers: Vec<Layer>,
    /// Index of the surrounding half-spaces (same on both sides).
    pub ambient_index: f64,
}

impl DielectricStack {
    pub fn new(layers: Vec<Layer>, ambient_index: f64) -> Result<Self> {
        let s = Self {
            layers,
            ambient_index,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ambient_index >= 1.0) {
            return Err(TunnelError::Domain(format!(
                "ambient index must be >= 1, got {}",
                self.ambient_index
            )));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.refractive_index >= 1.0) {
                return Err(TunnelError::Domain(format!(
                    "layer {i} index must be >= 1, got {}",
                    l.refractive_index
                )));
            }
            if !(l.thickness >= 0.0) {
                return Err(TunnelError::Domain(format!(
                    "layer {i} thickness must be non-negative, got {} m",
                    l.thickness
                )));
            }
        }
        Ok(())
    }

    /// Total geometric thickness (m).
    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Total optical path Σ nᵢdᵢ (m).
    pub fn optical_path(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.refractive_index * l.thickness)
            .sum()
    }
}

/// A waveguide section operated near or below its cutoff frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvanescentGuide {
    /// Cutoff frequency of the undersized section (Hz).
    pub cutoff_frequency: f64,
    /// Section length (m).
    pub length: f64,
}

impl EvanescentGuide {
    pub fn new(cutoff_frequency: f64, length: f64) -> Result<Self> {
        let g = Self {
            cutoff_frequency,
            length,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_frequency > 0.0) {
            return Err(TunnelError::Domain(format!(
                "cutoff frequency must be positive, got {} Hz",
                self.cutoff_frequency
            )));
        }
        if !(self.length >= 0.0) {
            return Err(TunnelError::Domain(format!(
                "guide length must be non-negative, got {} m",
                self.length
            )));
        }
        Ok(())
    }

    /// Attenuation constant κ = √(ω_c² − ω²)/c below cutoff, `None` at or
    /// above it.
    pub fn decay_constant(&self, omega: f64) -> Option<f64> {
        let wc = std::f64::consts::TAU * self.cutoff_frequency;
        if omega < wc {
            Some((wc * wc - omega * omega).sqrt() / C_M_PER_S)
        } else {
            None
        }
    }
}

/// Field polarization for oblique-incidence interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    S,
    P,
}

/// An air gap between two prisms, crossed beyond the critical angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtirGap {
    /// Prism refractive index (> 1).
    pub prism_index: f64,
    /// Incidence angle inside the prism (rad).
    pub angle: f64,
    /// Gap width (m).
    pub gap: f64,
    pub polarization: Polarization,
}

impl FtirGap {
    pub fn new(prism_index: f64, angle: f64, gap: f64, polarization: Polarization) -> Result<Self> {
        let g = Self {
            prism_index,
            angle,
            gap,
            polarization,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.prism_index > 1.0) {
            return Err(TunnelError::Domain(format!(
                "prism index must be > 1, got {}",
                self.prism_index
            )));
        }
        if !(self.angle >= 0.0 && self.angle < std::f64::consts::FRAC_PI_2) {
            return Err(TunnelError::Domain(format!(
                "incidence angle must lie in [0, pi/2), got {} rad",
                self.angle
            )));
        }
        if !(self.gap >= 0.0) {
            return Err(TunnelError::Domain(format!(
                "gap must be non-negative, got {} m",
                self.gap
            )));
        }
        Ok(())
    }

    /// True when n·sinθ > 1, i.e. the gap carries an evanescent field.
    pub fn is_evanescent(&self) -> bool {
        self.prism_index * self.angle.sin() > 1.0
    }

    /// Transverse decay constant κ = (ω/c)·√(n²sin²θ − 1) in the evanescent
    /// regime, `None` below the critical angle.
    pub fn decay_constant(&self, omega: f64) -> Option<f64> {
        let s = self.prism_index * self.angle.sin();
        if s > 1.0 {
            Some(omega / C_M_PER_S * (s * s - 1.0).sqrt())
        } else {
            None
        }
    }
}

/// A Gaussian wave packet ψ(x) ∝ exp(−(x−x₀)²/4σ²)·exp(ik₀x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    /// Carrier wavenumber k₀ (1/m).
    pub center_wavenumber: f64,
    /// Width σ of the probability density (m).
    pub spatial_sigma: f64,
    /// Initial centre x₀ (m).
    pub center_position: f64,
}

impl GaussianPacket {
    pub fn new(center_wavenumber: f64, spatial_sigma: f64, center_position: f64) -> Result<Self> {
        let p = Self {
            center_wavenumber,
            spatial_sigma,
            center_position,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spatial_sigma > 0.0) {
            return Err(TunnelError::Domain(format!(
                "packet sigma must be positive, got {} m",
                self.spatial_sigma
            )));
        }
        Ok(())
    }

    /// k₀σ ≥ 5. Traversal-time measurements are only meaningful in this
    /// regime; violating it is a warning, not an error.
    pub fn is_quasi_monochromatic(&self) -> bool {
        self.center_wavenumber * self.spatial_sigma >= 5.0
    }
}

/// Any barrier the frequency-domain machinery can drive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BarrierModel {
    Rectangular(RectangularBarrier),
    Stack(DielectricStack),
    Guide(EvanescentGuide),
    Ftir(FtirGap),
}

impl BarrierModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            BarrierModel::Rectangular(b) => b.validate(),
            BarrierModel::Stack(s) => s.validate(),
            BarrierModel::Guide(g) => g.validate(),
            BarrierModel::Ftir(f) => f.validate(),
        }
    }

    /// Geometric length of the barrier section (m). For a stack this is the
    /// total layer thickness.
    pub fn barrier_length(&self) -> f64 {
        match self {
            BarrierModel::Rectangular(b) => b.width,
            BarrierModel::Stack(s) => s.total_thickness(),
            BarrierModel::Guide(g) => g.length,
            BarrierModel::Ftir(f) => f.gap,
        }
    }

    /// The same barrier with its length parameter replaced; the natural
    /// family for Hartman scans. Stacks have no single length and are
    /// rejected.
    pub fn with_barrier_length(&self, length: f64) -> Result<Self> {
        if !(length >= 0.0) {
            return Err(TunnelError::Domain(format!(
                "barrier length must be non-negative, got {length} m"
            )));
        }
        match self {
            BarrierModel::Rectangular(b) => Ok(BarrierModel::Rectangular(RectangularBarrier {
                width: length,
                ..*b
            })),
            BarrierModel::Guide(g) => Ok(BarrierModel::Guide(EvanescentGuide {
                length,
                ..*g
            })),
            BarrierModel::Ftir(f) => Ok(BarrierModel::Ftir(FtirGap { gap: length, ..*f })),
            BarrierModel::Stack(_) => Err(TunnelError::Domain(
                "a dielectric stack has no single length parameter to scan".into(),
            )),
        }
    }

    /// Evanescent decay constant at ω, `None` in a propagating regime.
    pub fn decay_constant(&self, omega: f64) -> Option<f64> {
        match self {
            BarrierModel::Rectangular(b) => {
                let energy = HBAR_JS * omega / EV_TO_JOULE;
                b.decay_constant(energy)
            }
            BarrierModel::Guide(g) => g.decay_constant(omega),
            BarrierModel::Ftir(f) => f.decay_constant(omega),
            BarrierModel::Stack(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn constants_match_codata() {
        assert_eq!(CONSTANTS.h.joule_s, 6.62607015e-34);
        assert!(rel(CONSTANTS.hbar.joule_s, 1.054571817e-34) < 1e-9);
        assert!(rel(CONSTANTS.hbar.ev_s, 6.582119569e-16) < 1e-9);
        assert!(rel(CONSTANTS.h.ev_s, 4.135667696e-15) < 1e-9);
        assert_eq!(CONSTANTS.c, 299_792_458.0);
        assert!(rel(CONSTANTS.m_e, 9.1093837015e-31) < 1e-10);
    }

    #[test]
    fn h_is_two_pi_hbar() {
        assert!(rel(CONSTANTS.h.joule_s, std::f64::consts::TAU * CONSTANTS.hbar.joule_s) < 1e-12);
        assert!(rel(CONSTANTS.h.ev_s, std::f64::consts::TAU * CONSTANTS.hbar.ev_s) < 1e-12);
    }

    #[test]
    fn wavenumber_of_one_ev_electron() {
        let k = energy_to_wavenumber(1.0, M_E_KG).unwrap();
        assert!(rel(k, 5.123167219674931e9) < 1e-12, "k = {k}");
    }

    #[test]
    fn wavenumber_rejects_non_positive_input() {
        assert!(energy_to_wavenumber(0.0, M_E_KG).is_err());
        assert!(energy_to_wavenumber(-1.0, M_E_KG).is_err());
        assert!(energy_to_wavenumber(1.0, 0.0).is_err());
    }

    #[test]
    fn wavenumber_sqrt_energy_scaling() {
        let k1 = energy_to_wavenumber(1.0, M_E_KG).unwrap();
        let k4 = energy_to_wavenumber(4.0, M_E_KG).unwrap();
        assert!(rel(k4, 2.0 * k1) < 1e-14);
    }

    #[test]
    fn frequency_of_ionization_energy() {
        let nu = energy_to_frequency(54.39).unwrap();
        assert!(rel(nu, 1.3151443487699868e16) < 1e-12, "nu = {nu}");
    }

    #[test]
    fn planck_energy_is_one_petahertz() {
        // h in eV·s is 4.135667696e-15, so 4.13567 eV sits at 1.0000e15 Hz.
        let nu = energy_to_frequency(4.13567).unwrap();
        assert!(rel(nu, 1.0e15) < 1e-5, "nu = {nu}");
    }

    #[test]
    fn energy_frequency_round_trip() {
        for &ev in &[1.0, 54.39, 1e-6, 3.5e4] {
            let back = frequency_to_energy(energy_to_frequency(ev).unwrap()).unwrap();
            assert!(rel(back, ev) < 1e-12);
        }
        assert!(energy_to_frequency(0.0).is_err());
        assert!(frequency_to_energy(-1.0).is_err());
    }

    #[test]
    fn wavenumber_monotone_in_energy() {
        let mut prev = 0.0;
        for i in 1..200 {
            let k = energy_to_wavenumber(0.05 * i as f64, M_E_KG).unwrap();
            assert!(k > prev);
            prev = k;
        }
    }

    #[test]
    fn barrier_validation() {
        assert!(RectangularBarrier::electron(10.0, 1e-9).is_ok());
        assert!(RectangularBarrier::electron(0.0, 1e-9).is_ok()); // free-flight control
        assert!(RectangularBarrier::electron(-1.0, 1e-9).is_err());
        assert!(RectangularBarrier::electron(10.0, -1e-9).is_err());
        assert!(RectangularBarrier::new(10.0, 1e-9, 0.0).is_err());
    }

    #[test]
    fn stack_validation_and_empty_stack() {
        let s = DielectricStack::new(vec![], 1.0).unwrap();
        assert_eq!(s.total_thickness(), 0.0);
        assert!(DielectricStack::new(
            vec![Layer {
                refractive_index: 0.5,
                thickness: 1e-6
            }],
            1.0
        )
        .is_err());
        assert!(DielectricStack::new(vec![], 0.9).is_err());
    }

    #[test]
    fn ftir_critical_angle() {
        let sub = FtirGap::new(1.5, 0.5, 1e-6, Polarization::S).unwrap();
        assert!(!sub.is_evanescent()); // 1.5·sin(0.5) ≈ 0.72
        let sup = FtirGap::new(1.5, 1.0472, 1e-6, Polarization::S).unwrap();
        assert!(sup.is_evanescent()); // 1.5·sin(60°) ≈ 1.3
        assert!(FtirGap::new(1.5, 1.6, 1e-6, Polarization::S).is_err());
        assert!(FtirGap::new(0.9, 0.5, 1e-6, Polarization::S).is_err());
    }

    #[test]
    fn packet_guard_is_a_flag_not_an_error() {
        let narrow = GaussianPacket::new(1e10, 1e-10, 0.0).unwrap();
        assert!(!narrow.is_quasi_monochromatic()); // k0·σ = 1
        let wide = GaussianPacket::new(1e10, 1e-9, 0.0).unwrap();
        assert!(wide.is_quasi_monochromatic()); // k0·σ = 10
        assert!(GaussianPacket::new(1e10, 0.0, 0.0).is_err());
    }

    #[test]
    fn json_field_names_are_stable() {
        let b = RectangularBarrier::electron(10.0, 1e-9).unwrap();
        let j = serde_json::to_value(&b).unwrap();
        assert!(j.get("v0").is_some() && j.get("width").is_some() && j.get("mass").is_some());

        let s = DielectricStack::new(
            vec![Layer {
                refractive_index: 1.5,
                thickness: 1e-7,
            }],
            1.0,
        )
        .unwrap();
        let j = serde_json::to_value(&s).unwrap();
        assert!(j.get("layers").is_some() && j.get("ambient_index").is_some());
        assert!(j["layers"][0].get("refractive_index").is_some());

        let g = EvanescentGuide::new(9e9, 0.1).unwrap();
        let j = serde_json::to_value(&g).unwrap();
        assert!(j.get("cutoff_frequency").is_some() && j.get("length").is_some());

        let f = FtirGap::new(1.5, 1.0, 1e-6, Polarization::P).unwrap();
        let j = serde_json::to_value(&f).unwrap();
        assert_eq!(j["polarization"], "p");
        assert!(j.get("prism_index").is_some() && j.get("angle").is_some());

        let p = GaussianPacket::new(1e10, 1e-9, -5e-9).unwrap();
        let j = serde_json::to_value(&p).unwrap();
        assert!(
            j.get("center_wavenumber").is_some()
                && j.get("spatial_sigma").is_some()
                && j.get("center_position").is_some()
        );

        let m = BarrierModel::Rectangular(b);
        let j = serde_json::to_string(&m).unwrap();
        assert!(j.contains("\"kind\":\"rectangular\""));
        let back: BarrierModel = serde_json::from_str(&j).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn with_barrier_length_covers_single_length_models() {
        let rect = BarrierModel::Rectangular(RectangularBarrier::electron(10.0, 1e-9).unwrap());
        assert_eq!(
            rect.with_barrier_length(2e-9).unwrap().barrier_length(),
            2e-9
        );
        let stack = BarrierModel::Stack(DielectricStack::new(vec![], 1.0).unwrap());
        assert!(stack.with_barrier_length(1e-9).is_err());
    }
}
