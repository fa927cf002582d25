//! Periodic evolution `(D_t + ωP) u = f` on the circle, mode by mode.
//!
//! Time is sampled at `t_s = 2πs/T`. Frequency coefficients use
//! `f̂_k = T⁻¹ Σ_s f(t_s) e^{−ikt_s}` for `k ∈ [−T/2 + 1, T/2]`, so that
//! `f(t_s) = Σ_k f̂_k e^{ikt_s}` and `D_t = −i∂_t` acts as multiplication by `k`.

mod classify;
mod counterexample;
mod solver;

pub use classify::{
    decay_classify, decay_classify_with, fprime_membership, gevrey_norm_proxy, ClassifierSettings, DecayReport,
    DecaySamples, FVerdict, GammaSlope, GrowthReport, DEFAULT_M_MAX, NOT_IN_F_SLOPE,
};
pub use counterexample::{
    counterexample_hypoellipticity, counterexample_solvability, CertificateRow, HypoellipticityCounterexample,
    SolvabilityCounterexample, SparseField, SparseTrack, MAX_CERTIFICATE_ROWS,
};
pub use solver::{
    solve, solve_mode_fourier, solve_mode_quadrature, solve_mode_resonant, solve_using, Method, QuadratureVariant,
    SolveReport, Strategy, RESIDUAL_FACTOR,
};

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::diophantine::RESONANCE_TOLERANCE;
use crate::error::{Error, Result};
use crate::spectral::EigenDecomposition;

/// Equispaced nodes on `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    points: usize,
}

impl TimeGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points < 8 || points % 2 == 1 {
            return Err(Error::param("T", format!("must be even and >= 8, got {points}")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn node(&self, s: usize) -> f64 {
        std::f64::consts::TAU * s as f64 / self.points as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|s| self.node(s)).collect()
    }

    pub fn min_frequency(&self) -> i64 {
        1 - (self.points / 2) as i64
    }

    pub fn max_frequency(&self) -> i64 {
        (self.points / 2) as i64
    }

    /// Frequency stored at position `index` of a frequency track.
    pub fn frequency(&self, index: usize) -> i64 {
        index as i64 + self.min_frequency()
    }

    /// Position of frequency `k` in a frequency track, if in band.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        (self.min_frequency()..=self.max_frequency())
            .contains(&k)
            .then(|| (k - self.min_frequency()) as usize)
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> {
        self.min_frequency()..=self.max_frequency()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Time samples to frequency coefficients.
    Forward,
    /// Frequency coefficients to time samples.
    Inverse,
}

/// Per-mode time tracks `f_j(t_s)` or frequency tracks `f̂_{j,k}`, stored row
/// by row. `domain` records which representation is held.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    grid: TimeGrid,
    modes: usize,
    domain: Domain,
    data: Vec<Complex64>,
}

impl CoefficientField {
    pub fn zeros(grid: TimeGrid, modes: usize, domain: Domain) -> Self {
        Self {
            grid,
            modes,
            domain,
            data: vec![Complex64::new(0.0, 0.0); modes * grid.points()],
        }
    }

    pub fn from_rows(grid: TimeGrid, domain: Domain, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let t = grid.points();
        let modes = rows.len();
        let mut data = Vec::with_capacity(modes * t);
        for row in rows {
            if row.len() != t {
                return Err(Error::LengthMismatch {
                    expected: t,
                    actual: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            grid,
            modes,
            domain,
            data,
        })
    }

    /// Builds a time-domain field from `g(j, t)` with 1-based `j`.
    pub fn from_fn(grid: TimeGrid, modes: usize, g: impl Fn(usize, f64) -> Complex64) -> Self {
        let data = (1..=modes)
            .flat_map(|j| (0..grid.points()).map(move |s| (j, s)))
            .map(|(j, s)| g(j, grid.node(s)))
            .collect();
        Self {
            grid,
            modes,
            domain: Domain::Time,
            data,
        }
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Track of mode `index + 1` in the stored representation.
    pub fn row(&self, index: usize) -> &[Complex64] {
        let t = self.grid.points();
        &self.data[index * t..(index + 1) * t]
    }

    pub fn row_mut(&mut self, index: usize) -> &mut [Complex64] {
        let t = self.grid.points();
        &mut self.data[index * t..(index + 1) * t]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_frequency(&self) -> Self {
        match self.domain {
            Domain::Frequency => self.clone(),
            Domain::Time => time_transform(self, Direction::Forward),
        }
    }

    pub fn to_time(&self) -> Self {
        match self.domain {
            Domain::Time => self.clone(),
            Domain::Frequency => time_transform(self, Direction::Inverse),
        }
    }

    /// Largest modulus over all entries.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }
}

/// Transform plans for one time grid.
pub(crate) struct Transformer {
    grid: TimeGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transformer {
    pub(crate) fn new(grid: TimeGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.points()),
            inverse: planner.plan_fft_inverse(grid.points()),
        }
    }

    /// Time samples to a frequency track in natural `k` order.
    pub(crate) fn forward(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let t = self.grid.points();
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / t as f64;
        self.grid
            .frequencies()
            .map(|k| buf[k.rem_euclid(t as i64) as usize] * scale)
            .collect()
    }

    /// Frequency track in natural `k` order to time samples.
    pub(crate) fn inverse(&self, track: &[Complex64]) -> Vec<Complex64> {
        let t = self.grid.points();
        let mut buf = vec![Complex64::new(0.0, 0.0); t];
        for (k, &c) in self.grid.frequencies().zip(track) {
            buf[k.rem_euclid(t as i64) as usize] = c;
        }
        self.inverse.process(&mut buf);
        buf
    }
}

/// Converts every track of `field` in the given direction.
pub fn time_transform(field: &CoefficientField, direction: Direction) -> CoefficientField {
    let tr = Transformer::new(field.grid);
    let (domain, apply): (Domain, &dyn Fn(&[Complex64]) -> Vec<Complex64>) = match direction {
        Direction::Forward => (Domain::Frequency, &|r| tr.forward(r)),
        Direction::Inverse => (Domain::Time, &|r| tr.inverse(r)),
    };
    let data = (0..field.modes).flat_map(|j| apply(field.row(j))).collect();
    CoefficientField {
        grid: field.grid,
        modes: field.modes,
        domain,
        data,
    }
}

/// `ℓ²` norm of a frequency track, equal to the RMS of the time samples.
pub(crate) fn track_norm(track: &[Complex64]) -> f64 {
    crate::grid::euclidean_norm(&track.iter().map(|c| c.norm()).collect::<Vec<_>>())
}

/// `(D_t + ωP) u = f` with eigenvalues `λ_1..λ_J` and right-hand side `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionProblem {
    pub omega: Complex64,
    pub eigenvalues: Vec<f64>,
    pub rhs: CoefficientField,
    pub tolerance: f64,
}

impl EvolutionProblem {
    pub fn new(omega: Complex64, eigenvalues: Vec<f64>, rhs: CoefficientField) -> Result<Self> {
        if !(omega.re.is_finite() && omega.im.is_finite()) {
            return Err(Error::param("omega", "must be finite"));
        }
        if rhs.modes() > eigenvalues.len() {
            return Err(Error::Range(format!(
                "right-hand side has {} modes but only {} eigenvalues are available",
                rhs.modes(),
                eigenvalues.len()
            )));
        }
        Ok(Self {
            omega,
            eigenvalues,
            rhs,
            tolerance: RESONANCE_TOLERANCE,
        })
    }

    /// Problem on the trusted eigenpairs of a measured decomposition.
    pub fn from_eigen(omega: Complex64, eig: &EigenDecomposition, rhs: CoefficientField) -> Result<Self> {
        Self::new(omega, eig.trusted_eigenvalues().to_vec(), rhs)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn modes(&self) -> usize {
        self.rhs.modes()
    }
}

/// A mode `j` (1-based) with `ωλ_j = −k` an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resonance {
    pub j: usize,
    pub k: i64,
}

/// Resonant frequency `k = −ωλ` when `ωλ` is within `tol` of an integer.
pub(crate) fn resonant_frequency(omega: Complex64, lambda: f64, tol: f64) -> Option<i64> {
    if (omega.im * lambda).abs() > tol {
        return None;
    }
    let p = omega.re * lambda;
    let err = omega.re.mul_add(lambda, -p);
    let nearest = p.round_ties_even();
    (((p - nearest) + err).abs() <= tol).then(|| -(nearest as i64))
}

pub fn resonant_set(problem: &EvolutionProblem) -> Vec<Resonance> {
    (0..problem.modes())
        .filter_map(|i| {
            resonant_frequency(problem.omega, problem.eigenvalues[i], problem.tolerance).map(|k| Resonance { j: i + 1, k })
        })
        .collect()
}

/// Resonant Fourier coefficient of one resonant mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub j: usize,
    pub k: i64,
    /// `|f̂_{j,k}|`; zero when `k` lies outside the band.
    pub residual: f64,
    /// `‖f̂_j‖`.
    pub norm: f64,
    pub admissible: bool,
}

pub fn admissibility_check(problem: &EvolutionProblem) -> Vec<Admissibility> {
    let rhs = problem.rhs.to_frequency();
    let grid = rhs.grid();
    resonant_set(problem)
        .into_iter()
        .map(|r| {
            let track = rhs.row(r.j - 1);
            let residual = grid.index_of(r.k).map_or(0.0, |i| track[i].norm());
            let norm = track_norm(track);
            Admissibility {
                j: r.j,
                k: r.k,
                residual,
                norm,
                admissible: residual <= problem.tolerance * norm,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_layout() {
        let g = TimeGrid::new(8).unwrap();
        assert_eq!(g.frequencies().collect::<Vec<_>>(), vec![-3, -2, -1, 0, 1, 2, 3, 4]);
        assert_eq!(g.index_of(0), Some(3));
        assert_eq!(g.index_of(5), None);
        assert!(TimeGrid::new(7).is_err());
        assert!(TimeGrid::new(6).is_err());
    }

    #[test]
    fn transform_examples() {
        let g = TimeGrid::new(16).unwrap();
        let constant = CoefficientField::from_fn(g, 1, |_, _| c(2.5, -1.0)).to_frequency();
        for (k, v) in g.frequencies().zip(constant.row(0)) {
            let want = if k == 0 { c(2.5, -1.0) } else { c(0.0, 0.0) };
            assert!((v - want).norm() < 1e-15);
        }
        let wave = CoefficientField::from_fn(g, 1, |_, t| Complex64::from_polar(1.0, 3.0 * t)).to_frequency();
        for (k, v) in g.frequencies().zip(wave.row(0)) {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - want).norm() < 1e-14);
        }
    }

    #[test]
    fn transform_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = TimeGrid::new(64).unwrap();
        let rows: Vec<Vec<Complex64>> = (0..5)
            .map(|_| (0..64).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        let f = CoefficientField::from_rows(g, Domain::Time, rows).unwrap();
        let back = time_transform(&time_transform(&f, Direction::Forward), Direction::Inverse);
        let err = f.data().iter().zip(back.data()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err <= 1e-12 * f.max_abs());
    }

    fn problem(omega: Complex64, lambdas: &[f64]) -> EvolutionProblem {
        let g = TimeGrid::new(16).unwrap();
        let rhs = CoefficientField::zeros(g, lambdas.len(), Domain::Time);
        EvolutionProblem::new(omega, lambdas.to_vec(), rhs).unwrap()
    }

    #[test]
    fn resonant_set_examples() {
        let l = [2.0, 6.0, 7.0];
        assert!(resonant_set(&problem(c(0.0, 1.0), &l)).is_empty());
        assert_eq!(
            resonant_set(&problem(c(1.0, 0.0), &l)),
            vec![Resonance { j: 1, k: -2 }, Resonance { j: 2, k: -6 }, Resonance { j: 3, k: -7 }]
        );
        assert_eq!(
            resonant_set(&problem(c(0.5, 0.0), &l)),
            vec![Resonance { j: 1, k: -1 }, Resonance { j: 2, k: -3 }]
        );
    }

    #[test]
    fn admissibility_examples() {
        let g = TimeGrid::new(16).unwrap();
        let ok = CoefficientField::from_fn(g, 1, |_, t| Complex64::from_polar(1.0, 2.0 * t));
        let p = EvolutionProblem::new(c(1.0, 0.0), vec![1.0], ok).unwrap();
        let a = admissibility_check(&p);
        assert_eq!(a.len(), 1);
        assert!(a[0].residual < 1e-15 && a[0].admissible);

        let bad = CoefficientField::from_fn(g, 1, |_, t| Complex64::from_polar(1.0, -t));
        let p = EvolutionProblem::new(c(1.0, 0.0), vec![1.0], bad).unwrap();
        let a = admissibility_check(&p);
        assert!((a[0].residual - 1.0).abs() < 1e-14 && !a[0].admissible);

        let p = EvolutionProblem::new(c(0.3, 0.0), vec![1.0], CoefficientField::zeros(g, 1, Domain::Time)).unwrap();
        assert!(admissibility_check(&p).is_empty());
    }
}
