//! Direct time-domain integration of the 1D Schrödinger equation.
//!
//! A Crank-Nicolson step advances ψ through
//!
//! ```text
//! (I + i·dt·H/2ħ) ψ' = (I − i·dt·H/2ħ) ψ,   H = −ħ²/2m ∂²ₓ + V
//! ```
//!
//! with a three-point Laplacian and hard-wall (Dirichlet) boundaries. The
//! interior matrix is tridiagonal and Hermitian-derived, so the scheme is
//! unconditionally stable and norm-preserving; each step is one complex
//! tridiagonal solve. [`evolve`] runs many steps while feeding observers
//! (norm, centroid, peak locator, detector-plane density and flux), and
//! [`traversal`] builds the barrier-crossing measurement on top.

pub mod traversal;

pub use traversal::{measure_traversal, ArrivalRecord, TraversalOutcome, TraversalScenario};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{GaussianPacket, RectangularBarrier, EV_TO_JOULE, HBAR_JS};
use crate::{Result, TunnelError};

/// A uniform 1D grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(TunnelError::Domain(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 16 {
            return Err(TunnelError::Domain(format!(
                "grid needs at least 16 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn position(&self, index: usize) -> f64 {
        self.x_min + index as f64 * self.dx()
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let raw = ((x - self.x_min) / self.dx()).round();
        (raw.max(0.0) as usize).min(self.n_points - 1)
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.position(i))
    }
}

/// A discretized complex field on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
}

impl WaveFunction {
    /// Σ|ψ|²·dx.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let scale = 1.0 / n.sqrt();
            for v in &mut self.values {
                *v *= scale;
            }
        }
    }

    /// ⟨x⟩ over the whole grid.
    pub fn centroid(&self) -> f64 {
        let mut w = 0.0;
        let mut wx = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let p = v.norm_sqr();
            w += p;
            wx += p * self.grid.position(i);
        }
        wx / w
    }

    /// ⟨x²⟩ − ⟨x⟩² over the whole grid.
    pub fn variance(&self) -> f64 {
        let mut w = 0.0;
        let mut wx = 0.0;
        let mut wxx = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let p = v.norm_sqr();
            let x = self.grid.position(i);
            w += p;
            wx += p * x;
            wxx += p * x * x;
        }
        let mean = wx / w;
        wxx / w - mean * mean
    }

    /// ⟨p⟩ by the discrete central derivative (kg·m/s).
    pub fn momentum_expectation(&self) -> f64 {
        let dx = self.grid.dx();
        let mut acc = 0.0;
        for i in 1..self.values.len() - 1 {
            let dpsi = (self.values[i + 1] - self.values[i - 1]) / (2.0 * dx);
            acc += (self.values[i].conj() * Complex64::new(0.0, -HBAR_JS) * dpsi).re;
        }
        acc * dx
    }

    /// ⟨H⟩ = ⟨ψ|−ħ²/2m ∂² + V|ψ⟩ on the grid (J), Dirichlet ends.
    pub fn energy_expectation(&self, potential: &PotentialField, mass: f64) -> f64 {
        let dx = self.grid.dx();
        let kin = -HBAR_JS * HBAR_JS / (2.0 * mass * dx * dx);
        let mut acc = 0.0;
        for i in 0..self.values.len() {
            let left = if i > 0 { self.values[i - 1] } else { Complex64::default() };
            let right = if i + 1 < self.values.len() {
                self.values[i + 1]
            } else {
                Complex64::default()
            };
            let lap = left - 2.0 * self.values[i] + right;
            let h_psi = kin * lap + potential.values[i] * self.values[i];
            acc += (self.values[i].conj() * h_psi).re;
        }
        acc * dx
    }

    /// Σ|ψ|²·dx over grid points with x > boundary.
    pub fn probability_beyond(&self, boundary: f64) -> f64 {
        let dx = self.grid.dx();
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.position(*i) > boundary)
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * dx
    }

    /// ⟨x⟩ restricted to x > boundary; NaN when the region is empty of
    /// probability.
    pub fn centroid_beyond(&self, boundary: f64) -> f64 {
        let mut w = 0.0;
        let mut wx = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.position(i);
            if x > boundary {
                let p = v.norm_sqr();
                w += p;
                wx += p * x;
            }
        }
        if w > 0.0 {
            wx / w
        } else {
            f64::NAN
        }
    }
}

/// A real potential sampled on a grid, stored in joules.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: Grid1D,
    /// Potential energy per grid point (J).
    pub values: Vec<f64>,
}

impl PotentialField {
    pub fn zero(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points],
        }
    }

    /// The barrier occupying [start_x, start_x + width], height in eV
    /// converted to joules here.
    pub fn from_barrier(grid: Grid1D, barrier: &RectangularBarrier, start_x: f64) -> Self {
        let v0_j = barrier.v0 * EV_TO_JOULE;
        let end = start_x + barrier.width;
        let values = grid
            .positions()
            .map(|x| if x >= start_x && x <= end { v0_j } else { 0.0 })
            .collect();
        Self { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// ψ(x) ∝ exp(−(x−x₀)²/4σ²)·exp(ik₀x), normalized to Σ|ψ|²dx = 1.
///
/// Guards: the packet must fit (x₀ ± 5σ inside the grid) and be resolved
/// (k₀·dx < 0.5).
pub fn init_gaussian(grid: Grid1D, packet: &GaussianPacket) -> Result<WaveFunction> {
    packet.validate()?;
    let (k0, sigma, x0) = (
        packet.center_wavenumber,
        packet.spatial_sigma,
        packet.center_position,
    );
    if x0 - 5.0 * sigma < grid.x_min || x0 + 5.0 * sigma > grid.x_max {
        return Err(TunnelError::Guard {
            guard: "packet placement",
            detail: format!(
                "x0 ± 5σ = [{}, {}] must lie inside the grid [{}, {}]",
                x0 - 5.0 * sigma,
                x0 + 5.0 * sigma,
                grid.x_min,
                grid.x_max
            ),
        });
    }
    if !(k0.abs() * grid.dx() < 0.5) {
        return Err(TunnelError::Guard {
            guard: "resolution",
            detail: format!(
                "k0·dx = {} must stay below 0.5 to resolve the carrier",
                k0.abs() * grid.dx()
            ),
        });
    }
    let mut psi = WaveFunction {
        grid,
        values: grid
            .positions()
            .map(|x| {
                let envelope = (-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp();
                envelope * Complex64::new(0.0, k0 * x).exp()
            })
            .collect(),
    };
    psi.normalize();
    Ok(psi)
}

/// Solve a tridiagonal system with constant off-diagonals in place.
///
/// diag[i]·x[i] + off·(x[i−1] + x[i+1]) = rhs[i]; `cp`/`x` are caller scratch
/// so steppers can reuse allocations.
fn solve_tridiagonal_const_off(
    diag: &[f64],
    off: Complex64,
    diag_imag: f64,
    rhs: &[Complex64],
    cp: &mut [Complex64],
    x: &mut [Complex64],
) -> Result<()> {
    // diag entries are 1 + i·diag_imag·diag[i] style values packed by the
    // caller as (re, im) pairs: here diag[i] carries the imaginary part and
    // the real part is 1.
    let n = rhs.len();
    let mut denom = Complex64::new(1.0, diag_imag * diag[0]);
    if denom.norm_sqr() == 0.0 {
        return Err(TunnelError::Numerical("zero pivot at row 0".into()));
    }
    cp[0] = off / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = Complex64::new(1.0, diag_imag * diag[i]) - off * cp[i - 1];
        if denom.norm_sqr() == 0.0 {
            return Err(TunnelError::Numerical(format!("zero pivot at row {i}")));
        }
        cp[i] = off / denom;
        x[i] = (rhs[i] - off * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] = x[i] - cp[i] * x[i + 1];
    }
    Ok(())
}

/// Precomputed Crank-Nicolson stepper for one (grid, potential, mass, dt).
pub struct CrankNicolson {
    /// H diagonal (J) per interior point, scaled by dt/2ħ lazily.
    h_diag: Vec<f64>,
    /// dt/2ħ (1/J).
    alpha: f64,
    /// H off-diagonal (J), −ħ²/2m dx².
    h_off: f64,
    rhs: Vec<Complex64>,
    cp: Vec<Complex64>,
    sol: Vec<Complex64>,
    dt: f64,
}

impl CrankNicolson {
    pub fn new(grid: Grid1D, potential: &PotentialField, mass: f64, dt: f64) -> Result<Self> {
        if potential.grid != grid {
            return Err(TunnelError::Domain(
                "potential and wave function grids differ".into(),
            ));
        }
        if !(dt > 0.0) {
            return Err(TunnelError::Domain(format!(
                "time step must be positive, got {dt} s"
            )));
        }
        if !(mass > 0.0) {
            return Err(TunnelError::Domain(format!(
                "mass must be positive, got {mass} kg"
            )));
        }
        let dx = grid.dx();
        let kinetic_diag = HBAR_JS * HBAR_JS / (mass * dx * dx);
        let m = grid.n_points - 2;
        let h_diag: Vec<f64> = (0..m)
            .map(|i| kinetic_diag + potential.values[i + 1])
            .collect();
        Ok(Self {
            h_diag,
            alpha: dt / (2.0 * HBAR_JS),
            h_off: -HBAR_JS * HBAR_JS / (2.0 * mass * dx * dx),
            rhs: vec![Complex64::default(); m],
            cp: vec![Complex64::default(); m],
            sol: vec![Complex64::default(); m],
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance ψ by one step, in place. Hard walls: ψ = 0 at both ends.
    pub fn step(&mut self, psi: &mut WaveFunction) -> Result<()> {
        let n = psi.values.len();
        let m = n - 2;
        if self.h_diag.len() != m {
            return Err(TunnelError::Domain(
                "wave function grid does not match the stepper".into(),
            ));
        }
        let a_off = Complex64::new(0.0, self.alpha * self.h_off);
        // rhs = (I − i dt H / 2ħ) ψ on the interior
        for i in 0..m {
            let b_diag = Complex64::new(1.0, -self.alpha * self.h_diag[i]);
            self.rhs[i] =
                b_diag * psi.values[i + 1] - a_off * (psi.values[i] + psi.values[i + 2]);
        }
        solve_tridiagonal_const_off(
            &self.h_diag,
            a_off,
            self.alpha,
            &self.rhs,
            &mut self.cp,
            &mut self.sol,
        )?;
        psi.values[0] = Complex64::default();
        psi.values[n - 1] = Complex64::default();
        psi.values[1..n - 1].copy_from_slice(&self.sol);
        Ok(())
    }
}

/// One Crank-Nicolson step as a pure function.
pub fn step(
    psi: &WaveFunction,
    potential: &PotentialField,
    mass: f64,
    dt: f64,
) -> Result<WaveFunction> {
    let mut stepper = CrankNicolson::new(psi.grid, potential, mass, dt)?;
    let mut out = psi.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// What [`evolve`] should watch while stepping.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Keep a decimated [`TrajectorySample`] every this many steps (0: none).
    pub record_every: usize,
    /// Detector plane for per-step density/flux readout.
    pub detector_x: Option<f64>,
    /// Left edge of the "transmitted" region for per-step restricted moments.
    pub transmitted_boundary: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            record_every: 0,
            detector_x: None,
            transmitted_boundary: None,
        }
    }
}

/// Decimated observer row; mirrors the trajectory CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub step: usize,
    /// Time (s).
    pub t: f64,
    pub norm: f64,
    /// Full-grid ⟨x⟩ (m).
    pub centroid: f64,
    /// Location of max |ψ|² (m).
    pub peak_x: f64,
    /// Probability current at the detector plane (1/s), 0 when unset.
    pub detector_flux: f64,
}

/// Everything observed over an [`evolve`] run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
    /// |ψ(x_det)|² per step (when a detector is set).
    pub detector_density: Vec<f64>,
    /// Full-grid ⟨x⟩ per step.
    pub full_centroid: Vec<f64>,
    /// ⟨x⟩ over x > transmitted_boundary per step (NaN while empty).
    pub transmitted_centroid: Vec<f64>,
    /// Probability in x > transmitted_boundary per step.
    pub transmitted_probability: Vec<f64>,
    pub final_state: WaveFunction,
}

/// Step `n_steps` times from `psi0`, recording per the options. Errors carry
/// the step index at which they occurred.
pub fn evolve(
    psi0: &WaveFunction,
    potential: &PotentialField,
    mass: f64,
    dt: f64,
    n_steps: usize,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    let mut stepper = CrankNicolson::new(psi0.grid, potential, mass, dt)?;
    let mut psi = psi0.clone();
    let detector_index = options.detector_x.map(|x| psi.grid.nearest_index(x));
    let mut traj = Trajectory {
        dt,
        samples: Vec::new(),
        detector_density: Vec::with_capacity(if detector_index.is_some() { n_steps } else { 0 }),
        full_centroid: Vec::with_capacity(n_steps),
        transmitted_centroid: Vec::with_capacity(if options.transmitted_boundary.is_some() {
            n_steps
        } else {
            0
        }),
        transmitted_probability: Vec::with_capacity(if options.transmitted_boundary.is_some() {
            n_steps
        } else {
            0
        }),
        final_state: psi.clone(),
    };

    for s in 0..n_steps {
        stepper.step(&mut psi).map_err(|e| {
            TunnelError::Numerical(format!("step {s}: {e}"))
        })?;
        traj.full_centroid.push(psi.centroid());
        if let Some(j) = detector_index {
            traj.detector_density.push(psi.values[j].norm_sqr());
        }
        if let Some(b) = options.transmitted_boundary {
            traj.transmitted_centroid.push(psi.centroid_beyond(b));
            traj.transmitted_probability.push(psi.probability_beyond(b));
        }
        if options.record_every > 0 && (s + 1) % options.record_every == 0 {
            let peak_idx = psi
                .values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let flux = match detector_index {
                Some(j) if j > 0 && j + 1 < psi.values.len() => {
                    let dpsi = (psi.values[j + 1] - psi.values[j - 1]) / (2.0 * psi.grid.dx());
                    HBAR_JS / mass * (psi.values[j].conj() * dpsi).im
                }
                _ => 0.0,
            };
            traj.samples.push(TrajectorySample {
                step: s + 1,
                t: (s + 1) as f64 * dt,
                norm: psi.norm(),
                centroid: *traj.full_centroid.last().unwrap(),
                peak_x: psi.grid.position(peak_idx),
                detector_flux: flux,
            });
        }
    }
    traj.final_state = psi;
    Ok(traj)
}
