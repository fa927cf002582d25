//! Truncated grids on `[-L, L]`, the model SG-elliptic operators and direct
//! weighted Sobolev norms.
//!
//! The continuum operator is `P = ⟨x⟩^{m/2} (1 − ∂²)^{μ/2} ⟨x⟩^{m/2}`. On a grid
//! with spacing `h` it becomes `A = W (I + K)^{μ/2} W` where
//! `W = diag(⟨x_i⟩^{m/2})` and `K` is the second-difference matrix with
//! Dirichlet closure (`K_ii = 2/h²`, `K_{i,i±1} = −1/h²`).

use crate::error::{Error, Result};

/// Default half-width of the truncated domain.
pub const DEFAULT_HALF_WIDTH: f64 = 40.0;
/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 1201;

/// `⟨x⟩ = √(1 + x²)`.
pub fn japanese_bracket(x: f64) -> f64 {
    1.0f64.hypot(x)
}

/// Equispaced grid on `[-L, L]` with an odd number of nodes, so that `0` is a
/// node and the nodes are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_width: f64,
    nodes: Vec<f64>,
    spacing: f64,
}

impl Grid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::param("half_width", format!("must be positive, got {half_width}")));
        }
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::param("points", format!("must be odd and >= 3, got {points}")));
        }
        let spacing = 2.0 * half_width / (points - 1) as f64;
        let mid = points / 2;
        let mut nodes = vec![0.0; points];
        for i in 0..mid {
            let x = -half_width + i as f64 * spacing;
            nodes[i] = x;
            nodes[points - 1 - i] = -x;
        }
        Ok(Self {
            half_width,
            nodes,
            spacing,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.nodes.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Order pair `(m, μ)` of a model operator. Both components are even and in
/// `{2, 4, 6}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorSpec {
    m: u32,
    mu: u32,
}

impl OperatorSpec {
    pub fn new(m: u32, mu: u32) -> Result<Self> {
        for (name, value) in [("m", m), ("mu", mu)] {
            if !matches!(value, 2 | 4 | 6) {
                return Err(Error::UnsupportedOrder { name, value });
            }
        }
        Ok(Self { m, mu })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    /// Exponent of the leading eigenvalue growth, `min(m, μ)/d` with `d = 1`.
    pub fn weyl_exponent(&self) -> f64 {
        self.m.min(self.mu) as f64
    }
}

/// Principal symbol of the model operator, `⟨x⟩^m ⟨ξ⟩^μ`.
pub fn symbol_eval(spec: OperatorSpec, x: f64, xi: f64) -> f64 {
    japanese_bracket(x).powi(spec.m as i32) * japanese_bracket(xi).powi(spec.mu as i32)
}

/// Symmetric band matrix stored by diagonals: `band[d][i] = B_{i, i+d}`.
#[derive(Debug, Clone)]
struct SymBand {
    n: usize,
    band: Vec<Vec<f64>>,
}

impl SymBand {
    /// `I + K` with Dirichlet closure.
    fn identity_plus_laplacian(n: usize, h: f64) -> Self {
        let inv_h2 = 1.0 / (h * h);
        Self {
            n,
            band: vec![vec![1.0 + 2.0 * inv_h2; n], vec![-inv_h2; n.saturating_sub(1)]],
        }
    }

    fn bandwidth(&self) -> usize {
        self.band.len() - 1
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bandwidth() {
            0.0
        } else {
            self.band[d][lo]
        }
    }

    /// Product of two symmetric band matrices that commute (powers of the same
    /// matrix). Only the upper triangle is evaluated.
    fn mul(&self, other: &SymBand) -> SymBand {
        let n = self.n;
        let (p, q) = (self.bandwidth(), other.bandwidth());
        let w = p + q;
        let mut band = Vec::with_capacity(w + 1);
        for d in 0..=w {
            let mut diag = vec![0.0; n.saturating_sub(d)];
            for (i, slot) in diag.iter_mut().enumerate() {
                let j = i + d;
                let lo = j.saturating_sub(q).max(i.saturating_sub(p));
                let hi = (i + p).min(j + q).min(n - 1);
                let mut acc = 0.0;
                for k in lo..=hi {
                    acc += self.get(i, k) * other.get(k, j);
                }
                *slot = acc;
            }
            band.push(diag);
        }
        SymBand { n, band }
    }

    fn pow(&self, exponent: u32) -> SymBand {
        let mut out = self.clone();
        for _ in 1..exponent {
            out = out.mul(self);
        }
        out
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let p = self.bandwidth();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(p);
                let hi = (i + p).min(n - 1);
                (lo..=hi).map(|k| self.get(i, k) * v[k]).sum()
            })
            .collect()
    }
}

/// Dense symmetric realization of a model operator on a grid.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    grid: Grid,
    spec: OperatorSpec,
    /// Row-major `N × N`.
    matrix: Vec<f64>,
}

impl DiscretizedOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> OperatorSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.grid.points()
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.dim() + j]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        self.matrix
            .chunks_exact(n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Assembles `A = W (I + K)^{μ/2} W`. Only the upper triangle is computed;
/// the lower triangle is a copy, so `A = Aᵀ` holds bit for bit.
pub fn assemble_operator(grid: &Grid, spec: OperatorSpec) -> DiscretizedOperator {
    let n = grid.points();
    let weight: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| japanese_bracket(x).powi(spec.m as i32 / 2))
        .collect();
    let smoothing = SymBand::identity_plus_laplacian(n, grid.spacing()).pow(spec.mu / 2);
    let width = smoothing.bandwidth();
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        for j in i..(i + width + 1).min(n) {
            let value = weight[i] * smoothing.get(i, j) * weight[j];
            matrix[i * n + j] = value;
            matrix[j * n + i] = value;
        }
    }
    DiscretizedOperator {
        grid: grid.clone(),
        spec,
        matrix,
    }
}

/// Discrete Sobolev-Kato norm `√(h · |⟨x⟩^r (I + K)^{ρ/2} v|²)`.
pub fn direct_norm(v: &[f64], r: i32, rho: u32, grid: &Grid) -> Result<f64> {
    if !rho.is_multiple_of(2) {
        return Err(Error::UnsupportedOrder { name: "rho", value: rho });
    }
    if v.len() != grid.points() {
        return Err(Error::LengthMismatch {
            expected: grid.points(),
            actual: v.len(),
        });
    }
    let smoothed = if rho == 0 {
        v.to_vec()
    } else {
        SymBand::identity_plus_laplacian(grid.points(), grid.spacing())
            .pow(rho / 2)
            .apply(v)
    };
    let weighted: Vec<f64> = smoothed
        .iter()
        .zip(grid.nodes())
        .map(|(&s, &x)| japanese_bracket(x).powi(r) * s)
        .collect();
    Ok(grid.spacing().sqrt() * euclidean_norm(&weighted))
}

/// Overflow-safe Euclidean norm.
pub(crate) fn euclidean_norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = v.iter().map(|x| (x / scale).powi(2)).sum();
    scale * sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn grid_examples() {
        let g = Grid::new(1.0, 3).unwrap();
        assert_eq!(g.nodes(), &[-1.0, 0.0, 1.0]);
        assert_eq!(g.spacing(), 1.0);
        let g = Grid::new(10.0, 5).unwrap();
        assert_eq!(g.nodes(), &[-10.0, -5.0, 0.0, 5.0, 10.0]);
        assert_eq!(g.spacing(), 5.0);
        let g = Grid::new(12.0, 801).unwrap();
        assert!((g.spacing() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn grid_is_exactly_symmetric() {
        let g = Grid::new(12.0, 801).unwrap();
        let x = g.nodes();
        for i in 0..x.len() {
            assert_eq!(x[i], -x[x.len() - 1 - i]);
        }
        assert_eq!(x[400], 0.0);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(matches!(Grid::new(1.0, 4), Err(Error::Parameter { name: "points", .. })));
        assert!(matches!(Grid::new(1.0, 1), Err(Error::Parameter { name: "points", .. })));
        assert!(matches!(Grid::new(0.0, 5), Err(Error::Parameter { name: "half_width", .. })));
        assert!(matches!(Grid::new(-2.0, 5), Err(Error::Parameter { .. })));
    }

    #[test]
    fn bracket_values() {
        assert_eq!(japanese_bracket(0.0), 1.0);
        assert!((japanese_bracket(3f64.sqrt()) - 2.0).abs() < 1e-15);
        assert!((japanese_bracket(1.0) - SQRT2).abs() < 1e-15);
        assert_eq!(japanese_bracket(-2.5), japanese_bracket(2.5));
    }

    #[test]
    fn symbol_values() {
        let s22 = OperatorSpec::new(2, 2).unwrap();
        assert_eq!(symbol_eval(s22, 0.0, 0.0), 1.0);
        assert!((symbol_eval(s22, 1.0, 1.0) - 4.0).abs() < 1e-14);
        let s42 = OperatorSpec::new(4, 2).unwrap();
        assert!((symbol_eval(s42, 3f64.sqrt(), 0.0) - 16.0).abs() < 1e-13);
    }

    #[test]
    fn odd_orders_are_rejected() {
        assert!(matches!(
            OperatorSpec::new(3, 2),
            Err(Error::UnsupportedOrder { name: "m", value: 3 })
        ));
        assert!(matches!(
            OperatorSpec::new(2, 1),
            Err(Error::UnsupportedOrder { name: "mu", value: 1 })
        ));
        assert!(OperatorSpec::new(8, 2).is_err());
    }

    #[test]
    fn hand_fixture() {
        let g = Grid::new(1.0, 3).unwrap();
        let op = assemble_operator(&g, OperatorSpec::new(2, 2).unwrap());
        let expected = [6.0, -SQRT2, 0.0, -SQRT2, 3.0, -SQRT2, 0.0, -SQRT2, 6.0];
        for (a, e) in op.matrix().iter().zip(expected) {
            assert!((a - e).abs() < 1e-14, "{a} vs {e}");
        }
    }

    #[test]
    fn quadratic_form_for_order_two() {
        // uᵀAu = |Wu|² + (K Wu, Wu) for m = μ = 2.
        let g = Grid::new(3.0, 13).unwrap();
        let op = assemble_operator(&g, OperatorSpec::new(2, 2).unwrap());
        let u: Vec<f64> = (0..13).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3).collect();
        let au = op.apply(&u);
        let lhs: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
        let wu: Vec<f64> = u.iter().zip(g.nodes()).map(|(v, &x)| japanese_bracket(x) * v).collect();
        let h2 = g.spacing() * g.spacing();
        let mut rhs: f64 = wu.iter().map(|v| v * v).sum();
        for i in 0..13 {
            let left = if i > 0 { wu[i - 1] } else { 0.0 };
            let right = if i < 12 { wu[i + 1] } else { 0.0 };
            rhs += wu[i] * (2.0 * wu[i] - left - right) / h2;
        }
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn exact_symmetry_and_reflection() {
        let g = Grid::new(5.0, 41).unwrap();
        for (m, mu) in [(2, 2), (2, 4), (4, 2), (4, 6), (6, 6)] {
            let op = assemble_operator(&g, OperatorSpec::new(m, mu).unwrap());
            let n = op.dim();
            let scale = op.matrix().iter().fold(0.0f64, |a, b| a.max(b.abs()));
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(op.get(i, j), op.get(j, i));
                    // R A R = A with R the index reversal.
                    let reflected = op.get(n - 1 - i, n - 1 - j);
                    assert!((op.get(i, j) - reflected).abs() <= 1e-12 * scale.max(1.0));
                }
            }
        }
    }

    #[test]
    fn band_power_matches_dense_square() {
        let n = 7;
        let b = SymBand::identity_plus_laplacian(n, 0.5);
        let sq = b.pow(2);
        for i in 0..n {
            for j in 0..n {
                let dense: f64 = (0..n).map(|k| b.get(i, k) * b.get(k, j)).sum();
                assert!((sq.get(i, j) - dense).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn direct_norm_examples() {
        let g = Grid::new(1.0, 3).unwrap();
        assert_eq!(direct_norm(&[0.0; 3], 2, 2, &g).unwrap(), 0.0);
        assert_eq!(direct_norm(&[3.0, 4.0, 0.0], 0, 0, &g).unwrap(), 5.0);
        assert_eq!(direct_norm(&[0.0, 1.0, 0.0], 1, 0, &g).unwrap(), 1.0);
        assert!(matches!(
            direct_norm(&[0.0; 3], 0, 1, &g),
            Err(Error::UnsupportedOrder { name: "rho", .. })
        ));
        assert!(matches!(direct_norm(&[0.0; 2], 0, 0, &g), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn direct_norm_plain_is_weighted_euclidean() {
        let g = Grid::new(2.0, 9).unwrap();
        let v: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let plain = (g.spacing() * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        assert!((direct_norm(&v, 0, 0, &g).unwrap() - plain).abs() < 1e-15);
    }
}
