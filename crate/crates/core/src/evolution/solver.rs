//! Mode solvers for `D_t u_j + z u_j = f_j` with `z = λ_j ω`.
//!
//! * Fourier division: `û_k = f̂_k / (k + z)`.
//! * Quadrature, first form: `u(t) = i (1 − e^{−2πiz})⁻¹ ∫₀^{2π} e^{−izs} f(t − s) ds`.
//! * Quadrature, second form: `u(t) = i (e^{2πiz} − 1)⁻¹ ∫₀^{2π} e^{izs} f(t + s) ds`.
//! * Resonant integral (`z ∈ ℤ`): `u(t) = i e^{−izt} ∫₀^t e^{izs} f(s) ds`, the
//!   member of the solution family with `u(0) = 0`.
//!
//! The quadratures integrate the kernel exactly against the trigonometric
//! interpolant of `f`, which turns each integral into a periodic convolution
//! of the samples with precomputed weights.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{
    admissibility_check, resonant_frequency, resonant_set, track_norm, Admissibility, CoefficientField, Domain,
    EvolutionProblem, Resonance, TimeGrid, Transformer,
};
use crate::diophantine::{small_divisors, ModelSequence, DIVISOR_FLOOR};
use crate::error::{Error, Result};

/// Residual bound factor: `‖(k + z)û − f̂‖ ≤ RESIDUAL_FACTOR (1 + |ω|λ) ‖f̂‖`.
pub const RESIDUAL_FACTOR: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FourierDivision,
    Quadrature1,
    Quadrature2,
    ResonantIntegral,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::FourierDivision => "fourier-division",
            Method::Quadrature1 => "quadrature-1",
            Method::Quadrature2 => "quadrature-2",
            Method::ResonantIntegral => "resonant-integral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureVariant {
    /// Kernel `e^{−izs}`, bounded when `Im ω ≤ 0`.
    First,
    /// Kernel `e^{izs}`, bounded when `Im ω ≥ 0`.
    Second,
}

impl QuadratureVariant {
    /// The variant whose kernel does not grow on `[0, 2π]`.
    pub fn for_omega(omega: Complex64) -> Self {
        if omega.im <= 0.0 {
            QuadratureVariant::First
        } else {
            QuadratureVariant::Second
        }
    }
}

/// Solver for non-resonant modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    FourierDivision,
    Quadrature,
}

/// `e^w − 1` without cancellation for small `|w|`.
fn expm1(w: Complex64) -> Complex64 {
    let half_sin = (w.im / 2.0).sin();
    Complex64::new(
        w.re.exp_m1() * w.im.cos() - 2.0 * half_sin * half_sin,
        w.re.exp() * w.im.sin(),
    )
}

/// Frequency-track solve by division.
pub fn solve_mode_fourier(
    fhat: &[Complex64],
    grid: TimeGrid,
    lambda: f64,
    omega: Complex64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    check_len(fhat, grid)?;
    let z = omega * lambda;
    let norm = track_norm(fhat);
    grid.frequencies()
        .zip(fhat)
        .map(|(k, &f)| {
            let d = z + k as f64;
            if d.norm() <= tol {
                if f.norm() > tol * norm {
                    return Err(Error::ResonanceViolation {
                        j: 0,
                        k,
                        divisor: d.norm(),
                    });
                }
                Ok(Complex64::new(0.0, 0.0))
            } else {
                Ok(f / d)
            }
        })
        .collect()
}

/// Time-track solve by one of the two integral forms.
pub fn solve_mode_quadrature(
    f: &[Complex64],
    grid: TimeGrid,
    lambda: f64,
    omega: Complex64,
    variant: QuadratureVariant,
) -> Result<Vec<Complex64>> {
    check_len(f, grid)?;
    let z = omega * lambda;
    let sign = match variant {
        QuadratureVariant::First => -1.0,
        QuadratureVariant::Second => 1.0,
    };
    // First: ∫ e^{−i(z+k)s} = −expm1(−2πi(z+k)) / (i(z+k)), prefactor i / (−expm1(−2πiz)).
    // Second: ∫ e^{i(z+k)s} = expm1(2πi(z+k)) / (i(z+k)), prefactor i / expm1(2πiz).
    // e^{∓2πiz} depends on z mod 1; reducing first keeps integer z exact.
    let reduced = z - z.re.round();
    let divisor = sign * expm1(sign * TAU * I * reduced);
    if !(divisor.re.is_finite() && divisor.im.is_finite()) {
        return Err(Error::Range(format!(
            "quadrature kernel overflows for z = {z}; use the other variant"
        )));
    }
    if divisor.norm() < DIVISOR_FLOOR {
        return Err(Error::ResonanceViolation {
            j: 0,
            k: -(z.re.round() as i64),
            divisor: divisor.norm(),
        });
    }
    let t = grid.points();
    let moments: Vec<Complex64> = grid
        .frequencies()
        .map(|k| {
            let w = z + k as f64;
            if w.norm() == 0.0 {
                Complex64::new(TAU, 0.0)
            } else {
                sign * expm1(sign * TAU * I * w) / (I * w)
            }
        })
        .collect();
    let weights: Vec<Complex64> = (0..t)
        .map(|r| {
            let tr = grid.node(r);
            grid.frequencies()
                .zip(&moments)
                .map(|(k, m)| m * Complex64::from_polar(1.0, k as f64 * tr))
                .sum::<Complex64>()
                / t as f64
        })
        .collect();
    let prefactor = I / divisor;
    Ok((0..t)
        .map(|s| {
            let integral: Complex64 = (0..t).map(|q| weights[(s + t - q) % t] * f[q]).sum();
            prefactor * integral
        })
        .collect())
}

/// Time-track solve of a resonant mode, normalized by `u(0) = 0`.
pub fn solve_mode_resonant(
    f: &[Complex64],
    grid: TimeGrid,
    lambda: f64,
    omega: Complex64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    check_len(f, grid)?;
    let Some(k_star) = resonant_frequency(omega, lambda, tol) else {
        return Err(Error::Range(format!("ωλ = {} is not an integer", omega * lambda)));
    };
    let tr = Transformer::new(grid);
    let fhat = tr.forward(f);
    let uhat = resonant_coefficients(&fhat, grid, lambda, omega, k_star, tol)?;
    Ok(tr.inverse(&uhat))
}

fn resonant_coefficients(
    fhat: &[Complex64],
    grid: TimeGrid,
    lambda: f64,
    omega: Complex64,
    k_star: i64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let Some(star) = grid.index_of(k_star) else {
        return Err(Error::Band {
            tau: k_star.to_string(),
            points: grid.points(),
        });
    };
    let residual = fhat[star].norm();
    if residual > tol * track_norm(fhat) {
        return Err(Error::NotAdmissible { j: 0, k: k_star, residual });
    }
    let z = omega * lambda;
    // u = Σ_{k≠k*} f̂_k (e^{ikt} − e^{ik*t}) / (z + k).
    let mut uhat: Vec<Complex64> = grid
        .frequencies()
        .zip(fhat)
        .map(|(k, &f)| if k == k_star { Complex64::new(0.0, 0.0) } else { f / (z + k as f64) })
        .collect();
    uhat[star] = -uhat.iter().sum::<Complex64>();
    Ok(uhat)
}

/// `|u(2π⁻) − u(0)|` of the resonant integral, secular term included.
fn resonant_periodicity_defect(fhat: &[Complex64], grid: TimeGrid, lambda: f64, omega: Complex64, k_star: i64) -> f64 {
    let z = omega * lambda;
    let end = -expm1(-TAU * I * z);
    grid.frequencies()
        .zip(fhat)
        .map(|(k, &f)| {
            if k == k_star {
                f * TAU * I
            } else {
                f * end / (z + k as f64)
            }
        })
        .sum::<Complex64>()
        .norm()
}

fn check_len(track: &[Complex64], grid: TimeGrid) -> Result<()> {
    if track.len() != grid.points() {
        return Err(Error::LengthMismatch {
            expected: grid.points(),
            actual: track.len(),
        });
    }
    Ok(())
}

fn at_mode(err: Error, j: usize) -> Error {
    match err {
        Error::ResonanceViolation { k, divisor, .. } => Error::ResonanceViolation { j, k, divisor },
        Error::NotAdmissible { k, residual, .. } => Error::NotAdmissible { j, k, residual },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub resonances: Vec<Resonance>,
    pub admissibility: Vec<Admissibility>,
    pub methods: Vec<Method>,
    /// `‖(k + z)û_j − f̂_j‖` recomputed from the time samples of `u_j`.
    pub residuals: Vec<f64>,
    pub residual_bounds: Vec<f64>,
    /// `|u_j(2π⁻) − u_j(0)|` for resonant modes.
    pub periodicity_defects: Vec<Option<f64>>,
    /// Smallest and largest finite `Θ_j`.
    pub theta_range: Option<(f64, f64)>,
    /// Smallest and largest finite `Γ_j`.
    pub gamma_range: Option<(f64, f64)>,
}

impl SolveReport {
    pub fn residuals_within_bounds(&self) -> bool {
        self.residuals.iter().zip(&self.residual_bounds).all(|(r, b)| r <= b)
    }
}

/// Solves every mode; resonant modes use the resonant integral.
pub fn solve(problem: &EvolutionProblem) -> Result<(CoefficientField, SolveReport)> {
    solve_using(problem, Strategy::FourierDivision)
}

/// Solves every mode with the given non-resonant strategy. The returned
/// field holds frequency tracks.
pub fn solve_using(problem: &EvolutionProblem, strategy: Strategy) -> Result<(CoefficientField, SolveReport)> {
    let resonances = resonant_set(problem);
    let admissibility = admissibility_check(problem);
    if let Some(bad) = admissibility.iter().find(|a| !a.admissible) {
        return Err(Error::NotAdmissible {
            j: bad.j,
            k: bad.k,
            residual: bad.residual,
        });
    }
    let grid = problem.rhs.grid();
    let tr = Transformer::new(grid);
    let time_rhs = problem.rhs.to_time();
    let freq_rhs = problem.rhs.to_frequency();
    let omega = problem.omega;
    let tol = problem.tolerance;
    let modes = problem.modes();
    let mut out = CoefficientField::zeros(grid, modes, Domain::Frequency);
    let mut methods = Vec::with_capacity(modes);
    let mut residuals = Vec::with_capacity(modes);
    let mut residual_bounds = Vec::with_capacity(modes);
    let mut periodicity_defects = Vec::with_capacity(modes);
    for i in 0..modes {
        let j = i + 1;
        let lambda = problem.eigenvalues[i];
        let fhat = freq_rhs.row(i);
        let resonant = resonances.iter().find(|r| r.j == j);
        let (uhat, method) = match (resonant, strategy) {
            (Some(r), _) => {
                let u = resonant_coefficients(fhat, grid, lambda, omega, r.k, tol).map_err(|e| at_mode(e, j))?;
                periodicity_defects.push(Some(resonant_periodicity_defect(fhat, grid, lambda, omega, r.k)));
                (u, Method::ResonantIntegral)
            }
            (None, Strategy::FourierDivision) => {
                periodicity_defects.push(None);
                let u = solve_mode_fourier(fhat, grid, lambda, omega, tol).map_err(|e| at_mode(e, j))?;
                (u, Method::FourierDivision)
            }
            (None, Strategy::Quadrature) => {
                periodicity_defects.push(None);
                let variant = QuadratureVariant::for_omega(omega);
                let u = solve_mode_quadrature(time_rhs.row(i), grid, lambda, omega, variant)
                    .map_err(|e| at_mode(e, j))?;
                let method = match variant {
                    QuadratureVariant::First => Method::Quadrature1,
                    QuadratureVariant::Second => Method::Quadrature2,
                };
                (tr.forward(&u), method)
            }
        };
        // Differentiate the time samples spectrally and compare with f.
        let resampled = tr.forward(&tr.inverse(&uhat));
        let z = omega * lambda;
        let defect: Vec<f64> = grid
            .frequencies()
            .zip(resampled.iter().zip(fhat))
            .map(|(k, (u, f))| ((z + k as f64) * u - f).norm())
            .collect();
        residuals.push(crate::grid::euclidean_norm(&defect));
        residual_bounds.push(RESIDUAL_FACTOR * (1.0 + omega.norm() * lambda) * track_norm(fhat));
        out.row_mut(i).copy_from_slice(&uhat);
        methods.push(method);
    }
    let (theta_range, gamma_range) = if modes == 0 {
        (None, None)
    } else {
        let seq = ModelSequence::Measured(problem.eigenvalues[..modes].to_vec());
        let table = small_divisors(omega, &seq, modes as u64)?;
        (extrema(&table.theta), extrema(&table.gamma))
    };
    Ok((
        out,
        SolveReport {
            resonances,
            admissibility,
            methods,
            residuals,
            residual_bounds,
            periodicity_defects,
            theta_range,
            gamma_range,
        },
    ))
}

fn extrema(values: &[Option<f64>]) -> Option<(f64, f64)> {
    values.iter().flatten().fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}
