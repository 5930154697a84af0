//! The universal tunneling-time relations and the reference-data comparison
//! harness.
//!
//! Measured barrier traversal times across photonic, phononic and electronic
//! barriers cluster around the oscillation period of the carrier,
//!
//! ```text
//! τ ≈ 1/ν = T,        τ ≈ h/E,
//! ```
//!
//! with a barrier-dependent correction factor A refining the estimate to
//! τ_A = T·A. For a particle tunneling a square potential barrier the
//! correction has two published forms,
//!
//! ```text
//! τ_A = ħ/√(E(V₀−E))        (saturated phase time of the opaque barrier)
//! τ_A = (1/ν)·E/(4π²(V₀−E)) (period times the A factor)
//! ```
//!
//! which are numerically inconsistent with each other (their ratio is
//! 2π√((V₀−E)/E), ≈ 4.22 at the helium-ionization operating point). Both are
//! implemented: the ratio form reproduces the reference table, the square-root
//! form matches the opaque-limit phase time of [`crate::phasetime`]. The
//! inconsistency itself is pinned by a regression test.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::domain::{HBAR_EVS, H_EVS};
use crate::{Result, TunnelError};

/// Oscillation period T = 1/ν (s) of a carrier at frequency `nu` (Hz).
pub fn oscillation_period(nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(TunnelError::Domain(format!(
            "frequency must be positive, got {nu} Hz"
        )));
    }
    Ok(1.0 / nu)
}

/// T = h/E (s) for a massive particle of energy `energy` (eV).
pub fn massive_period(energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(TunnelError::Domain(format!(
            "energy must be positive, got {energy} eV"
        )));
    }
    Ok(H_EVS / energy)
}

/// τ_A = T·A.
pub fn tau_modified(period_t: f64, a_factor: f64) -> Result<f64> {
    if !(period_t > 0.0) || !(a_factor > 0.0) {
        return Err(TunnelError::Domain(format!(
            "period and A factor must be positive, got T = {period_t} s, A = {a_factor}"
        )));
    }
    Ok(period_t * a_factor)
}

/// Barrier factor A = E/(4π²(V₀−E)) of a square Schrödinger barrier;
/// energies in eV, tunneling regime 0 < E < V₀ only.
pub fn a_factor_schrodinger(energy: f64, v0: f64) -> Result<f64> {
    check_tunneling_regime(energy, v0)?;
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    Ok(energy / (four_pi_sq * (v0 - energy)))
}

/// τ_A via the period form: (h/E)·E/(4π²(V₀−E)) = ħ/(2π(V₀−E)).
///
/// This is the form that reproduces the reference table's ionization entry.
pub fn tau_a_ratio_form(energy: f64, v0: f64) -> Result<f64> {
    check_tunneling_regime(energy, v0)?;
    Ok(HBAR_EVS / (std::f64::consts::TAU * (v0 - energy)))
}

/// τ_A via the square-root form: ħ/√(E(V₀−E)), with ħ in eV·s.
///
/// This is the opaque-limit phase time of the same barrier and cross-checks
/// the [`crate::phasetime`] route; note it disagrees with
/// [`tau_a_ratio_form`] except where √(E(V₀−E)) = 2π(V₀−E).
pub fn tau_a_sqrt_form(energy: f64, v0: f64) -> Result<f64> {
    check_tunneling_regime(energy, v0)?;
    Ok(HBAR_EVS / (energy * (v0 - energy)).sqrt())
}

fn check_tunneling_regime(energy: f64, v0: f64) -> Result<()> {
    if !(energy > 0.0) {
        return Err(TunnelError::Domain(format!(
            "energy must be positive, got {energy} eV"
        )));
    }
    if !(energy < v0) {
        return Err(TunnelError::Domain(format!(
            "no tunneling regime: E = {energy} eV >= V0 = {v0} eV"
        )));
    }
    Ok(())
}

/// Barrier classes appearing in the reference table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Ftir,
    PhotonicLattice,
    UndersizedWaveguide,
    Ionization,
    Acoustic,
}

impl BarrierKind {
    pub fn label(&self) -> &'static str {
        match self {
            BarrierKind::Ftir => "ftir",
            BarrierKind::PhotonicLattice => "photonic_lattice",
            BarrierKind::UndersizedWaveguide => "undersized_waveguide",
            BarrierKind::Ionization => "ionization",
            BarrierKind::Acoustic => "acoustic",
        }
    }
}

/// One measured tunneling-time record: traversal time τ, carrier period T,
/// and the corrected estimate τ_A, all in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub barrier_kind: BarrierKind,
    pub reference: String,
    pub tau_measured: f64,
    #[serde(rename = "period_T")]
    pub period_t: f64,
    #[serde(rename = "tau_A")]
    pub tau_a: f64,
}

static TABLE_JSON: &str = include_str!("../data/table.json");
static TABLE: OnceLock<Vec<TableRecord>> = OnceLock::new();

/// The embedded reference table of measured tunneling times (8 records
/// spanning twelve orders of magnitude, microwave FTIR to helium ionization).
pub fn builtin_table() -> &'static [TableRecord] {
    TABLE.get_or_init(|| {
        serde_json::from_str(TABLE_JSON).expect("embedded table.json is well-formed")
    })
}

/// Universality tolerance on |log10(τ/T)|: wide enough that every reference
/// record passes (the ionization record sits at ≈ 1.1) while an order of
/// magnitude more, e.g. τ = 20·T, fails.
pub const UNIVERSALITY_LOG10_TOLERANCE: f64 = 1.2;

/// Per-record ratios against the universal relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub barrier_kind: BarrierKind,
    pub reference: String,
    /// τ/T.
    pub ratio_tau_over_period: f64,
    /// τ/τ_A.
    pub ratio_tau_over_tau_a: f64,
    /// |log10(τ/T)| < 1.2.
    pub within_first_order: bool,
}

/// The comparison report over a set of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub entries: Vec<ComparisonEntry>,
    /// True iff every record is within first order.
    pub universal_within_first_order: bool,
}

/// Compare records against τ ≈ T and τ ≈ τ_A.
pub fn compare(records: &[TableRecord]) -> Result<ComparisonReport> {
    if records.is_empty() {
        return Err(TunnelError::Domain("no records to compare".into()));
    }
    let entries: Vec<ComparisonEntry> = records
        .iter()
        .map(|r| {
            let ratio_t = r.tau_measured / r.period_t;
            let ratio_a = r.tau_measured / r.tau_a;
            ComparisonEntry {
                barrier_kind: r.barrier_kind,
                reference: r.reference.clone(),
                ratio_tau_over_period: ratio_t,
                ratio_tau_over_tau_a: ratio_a,
                within_first_order: ratio_t.log10().abs() < UNIVERSALITY_LOG10_TOLERANCE,
            }
        })
        .collect();
    let universal = entries.iter().all(|e| e.within_first_order);
    Ok(ComparisonReport {
        entries,
        universal_within_first_order: universal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn period_of_known_carriers() {
        // 8.696 GHz microwave carrier ↔ 115 ps period.
        assert!(rel(oscillation_period(8.696e9).unwrap(), 115e-12) < 2e-3);
        // 4.274e14 Hz optical carrier ↔ 2.34 fs period.
        assert!(rel(oscillation_period(4.274e14).unwrap(), 2.34e-15) < 1e-3);
        assert_eq!(oscillation_period(1.0).unwrap(), 1.0);
        assert!(oscillation_period(0.0).is_err());
    }

    #[test]
    fn massive_period_values() {
        // 54.39 eV → 76.0 as, within 2% of the tabulated 75 as.
        let t = massive_period(54.39).unwrap();
        assert!(rel(t, 7.603728069358079e-17) < 1e-12);
        assert!(rel(t, 75e-18) < 0.02);
        // h in eV·s pins 4.13567 eV at one femtosecond.
        assert!(rel(massive_period(4.13567).unwrap(), 1e-15) < 1e-5);
        // doubling E halves T
        assert!(rel(massive_period(5.0).unwrap(), 2.0 * massive_period(10.0).unwrap()) < 1e-14);
        assert!(massive_period(-2.0).is_err());
    }

    #[test]
    fn tau_modified_is_a_product() {
        // Haibel/Nimtz: T = 120 ps with A = 0.675 gives τ_A = 81 ps.
        assert!(rel(tau_modified(120e-12, 0.675).unwrap(), 81e-12) < 1e-12);
        assert_eq!(tau_modified(3.0, 1.0).unwrap(), 3.0);
        // ionization: T = 75 as, A ≈ 0.0567 → ≈ 4.25 as
        assert!(rel(tau_modified(75e-18, 0.0567).unwrap(), 4.25e-18) < 2e-3);
        assert!(tau_modified(-1.0, 1.0).is_err());
        assert!(tau_modified(1.0, 0.0).is_err());
    }

    #[test]
    fn a_factor_values() {
        let a = a_factor_schrodinger(54.39, 78.98).unwrap();
        assert!(rel(a, 0.05602744182906416) < 1e-12, "{a}");
        // E = 4π²(V0−E) pins A = 1.
        let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        let v0 = 10.0;
        let e = four_pi_sq * v0 / (1.0 + four_pi_sq);
        assert!(rel(a_factor_schrodinger(e, v0).unwrap(), 1.0) < 1e-12);
        // E → 0 ⇒ A → 0
        assert!(a_factor_schrodinger(1e-9, 10.0).unwrap() < 1e-9);
        assert!(a_factor_schrodinger(10.0, 10.0).is_err());
        assert!(a_factor_schrodinger(12.0, 10.0).is_err());
    }

    #[test]
    fn ratio_form_values() {
        let t = tau_a_ratio_form(54.39, 78.98).unwrap();
        assert!(rel(t, 4.260174320899821e-18) < 1e-12);
        assert!(rel(t, 4.25e-18) < 0.01); // reproduces the tabulated 4.25 as
        // depends on V0−E only
        assert!(
            rel(tau_a_ratio_form(1.0, 25.59).unwrap(), tau_a_ratio_form(54.39, 78.98).unwrap())
                < 1e-12
        );
        assert!(rel(tau_a_ratio_form(5.0, 10.0).unwrap(), 2.0951537310185325e-17) < 1e-12);
    }

    #[test]
    fn sqrt_form_values() {
        let t = tau_a_sqrt_form(54.39, 78.98).unwrap();
        assert!(rel(t, 1.7998112974471646e-17) < 1e-12);
        // symmetric point: ħ/(5 eV)
        assert!(rel(tau_a_sqrt_form(5.0, 10.0).unwrap(), 1.3164239139018134e-16) < 1e-12);
    }

    #[test]
    fn the_two_forms_disagree_by_a_fixed_factor() {
        // Pinned regression fact: at the ionization operating point the two
        // published forms differ by 2π√((V0−E)/E) ≈ 4.22.
        let ratio =
            tau_a_sqrt_form(54.39, 78.98).unwrap() / tau_a_ratio_form(54.39, 78.98).unwrap();
        assert!(rel(ratio, 4.224736271043045) < 1e-12, "{ratio}");
        assert!(rel(ratio, 4.22) < 0.01);
    }

    #[test]
    fn product_identity_holds() {
        // tau_modified(massive_period(E), a_factor(E,V0)) == tau_a_ratio_form(E,V0)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let v0: f64 = rng.gen_range(0.5..500.0);
            let e: f64 = rng.gen_range(1e-3 * v0..0.999 * v0);
            let lhs = tau_modified(
                massive_period(e).unwrap(),
                a_factor_schrodinger(e, v0).unwrap(),
            )
            .unwrap();
            let rhs = tau_a_ratio_form(e, v0).unwrap();
            assert!(rel(lhs, rhs) < 1e-12, "E={e} V0={v0}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn builtin_table_contents() {
        let t = builtin_table();
        assert_eq!(t.len(), 8);
        let ionization = t.iter().find(|r| r.barrier_kind == BarrierKind::Ionization).unwrap();
        assert_eq!(ionization.tau_measured, 6e-18);
        assert_eq!(ionization.period_t, 75e-18);
        assert_eq!(ionization.tau_a, 4.25e-18);
        let acoustic = t.iter().find(|r| r.barrier_kind == BarrierKind::Acoustic).unwrap();
        assert_eq!(acoustic.period_t, 1e-6);
        let enders = t.iter().find(|r| r.reference == "Enders/Nimtz").unwrap();
        assert_eq!(enders.tau_measured, 130e-12);
        assert_eq!(enders.period_t, 115e-12);
        for r in t {
            assert!(r.tau_measured > 0.0 && r.period_t > 0.0 && r.tau_a > 0.0);
            assert!(r.tau_measured.is_finite());
        }
    }

    #[test]
    fn builtin_table_serialization_is_byte_stable() {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(builtin_table()).unwrap();
        let hash = format!("{:x}", Sha256::digest(json.as_bytes()));
        // Frozen; any change to the embedded values or field order must be
        // deliberate and show up here.
        assert_eq!(
            hash,
            "e68c8306cba274ff44635778d6c43e2ba0ff89583729f7e146360d9404b45a04"
        );
    }

    #[test]
    fn comparison_ratios_and_verdict() {
        let report = compare(builtin_table()).unwrap();
        assert_eq!(report.entries.len(), 8);
        assert!(report.universal_within_first_order);

        let enders = report
            .entries
            .iter()
            .find(|e| e.reference == "Enders/Nimtz")
            .unwrap();
        assert!(rel(enders.ratio_tau_over_period, 130.0 / 115.0) < 1e-12);
        assert!(enders.within_first_order);

        let ion = report
            .entries
            .iter()
            .find(|e| e.barrier_kind == BarrierKind::Ionization)
            .unwrap();
        assert!(rel(ion.ratio_tau_over_period, 0.08) < 1e-12);
        assert!(ion.ratio_tau_over_period.log10().abs() > 1.0); // just inside 1.2
        assert!(ion.within_first_order);
        assert!(rel(ion.ratio_tau_over_tau_a, 6.0 / 4.25) < 1e-12);
    }

    #[test]
    fn hypothetical_twenty_t_fails_universality() {
        let mut records = builtin_table().to_vec();
        records.push(TableRecord {
            barrier_kind: BarrierKind::Ftir,
            reference: "hypothetical".into(),
            tau_measured: 20e-12,
            period_t: 1e-12,
            tau_a: 1e-12,
        });
        let report = compare(&records).unwrap();
        assert!(!report.universal_within_first_order);
    }

    #[test]
    fn compare_rejects_empty_input() {
        assert!(compare(&[]).is_err());
    }
}
