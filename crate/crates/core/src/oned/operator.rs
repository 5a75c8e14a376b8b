use super::grid::Grid1D;
use super::twist::TwistProfile;
use crate::error::{check_delta, check_shift, LabError, Result};
use crate::geometry::TransverseBasis;
use crate::linalg::tridiag::SymTridiagonal;
use serde::{Deserialize, Serialize};

/// Physical parameters an [`Operator1D`] was assembled with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator1DParams {
    pub kappa: f64,
    pub twist: TwistProfile,
    pub c_s: f64,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub c: Option<f64>,
    /// Whether the two half-lines are decoupled by a Dirichlet wall at 0.
    pub dirichlet_at_origin: bool,
}

/// A Schrödinger operator `-d^2/dx^2 + W(x)` on a [`Grid1D`], stored as a
/// symmetric tridiagonal matrix. Because the grid is uniform, the matrix is
/// the same in nodal and L2-orthonormal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator1D {
    pub grid: Grid1D,
    pub matrix: SymTridiagonal,
    pub potential: Vec<f64>,
    pub params: Operator1DParams,
}

/// Second-difference matrix with Dirichlet walls at `+-L` and, optionally,
/// at the origin. A wall at distance `d` from its neighbouring node
/// contributes `2 / (h (h/2 + d))`, which is `2/h^2` at a half-cell offset.
pub fn second_difference(grid: &Grid1D, wall_at_origin: bool) -> SymTridiagonal {
    let n = grid.len();
    let h = grid.h;
    let wall = |d: f64| 2.0 / (h * (0.5 * h + d));
    let split = grid.split();
    let mut diag = vec![0.0; n];
    let mut off = vec![-1.0 / (h * h); n - 1];
    for i in 0..n - 1 {
        diag[i] += 1.0 / (h * h);
        diag[i + 1] += 1.0 / (h * h);
    }
    diag[0] += wall(grid.x[0] + grid.l);
    diag[n - 1] += wall(grid.l - grid.x[n - 1]);
    if wall_at_origin && split > 0 && split < n {
        off[split - 1] = 0.0;
        diag[split - 1] += wall(-grid.x[split - 1]) - 1.0 / (h * h);
        diag[split] += wall(grid.x[split]) - 1.0 / (h * h);
    }
    SymTridiagonal::new(diag, off)
}

fn check_grid(grid: &Grid1D) -> Result<()> {
    match grid.x.iter().position(|&v| v == 0.0) {
        Some(index) => Err(LabError::OriginOnGrid { index }),
        None => Ok(()),
    }
}

/// `H_D + alpha'^2 C(S)`: the Coulomb operator with Dirichlet condition at
/// the origin plus the twist potential.
pub fn assemble_hd(kappa: f64, grid: &Grid1D, twist: &TwistProfile, c_s: f64) -> Result<Operator1D> {
    check_grid(grid)?;
    twist.validate()?;
    let mut matrix = second_difference(grid, true);
    let potential: Vec<f64> = grid
        .x
        .iter()
        .map(|&x| -kappa / x.abs() + twist.rate(x).powi(2) * c_s)
        .collect();
    for (d, v) in matrix.diag.iter_mut().zip(&potential) {
        *d += v;
    }
    Ok(Operator1D {
        grid: grid.clone(),
        matrix,
        potential,
        params: Operator1DParams {
            kappa,
            twist: *twist,
            c_s,
            epsilon: None,
            delta: None,
            c: None,
            dirichlet_at_origin: true,
        },
    })
}

/// `V(x) = -kappa int_S u0^2 / (sqrt(x^2 + eps^2 |y|^2) + eps^delta) dy`.
pub fn eval_v_eps(x: f64, kappa: f64, epsilon: f64, delta: f64, basis: &TransverseBasis) -> Result<f64> {
    check_delta(delta)?;
    if !(epsilon > 0.0) {
        return Err(LabError::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    Ok(-kappa * basis.coulomb_average(x, epsilon, epsilon.powf(delta)))
}

/// The effective operator `T = -d^2/dx^2 + V + c/eps^delta` on the whole
/// line (no wall at the origin).
pub fn assemble_t_eps(
    kappa: f64,
    epsilon: f64,
    delta: f64,
    c: f64,
    grid: &Grid1D,
    basis: &TransverseBasis,
) -> Result<Operator1D> {
    check_grid(grid)?;
    check_delta(delta)?;
    if kappa > 0.0 {
        check_shift(kappa, c)?;
    }
    let shift = c / epsilon.powf(delta);
    let mut matrix = second_difference(grid, false);
    let potential = grid
        .x
        .iter()
        .map(|&x| eval_v_eps(x, kappa, epsilon, delta, basis))
        .collect::<Result<Vec<f64>>>()?;
    for (d, v) in matrix.diag.iter_mut().zip(&potential) {
        *d += v + shift;
    }
    Ok(Operator1D {
        grid: grid.clone(),
        matrix,
        potential,
        params: Operator1DParams {
            kappa,
            twist: TwistProfile::Zero,
            c_s: basis.c_s,
            epsilon: Some(epsilon),
            delta: Some(delta),
            c: Some(c),
            dirichlet_at_origin: false,
        },
    })
}

impl Operator1D {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// The constant `c / eps^delta` included in the matrix, zero for `H_D`.
    pub fn shift(&self) -> f64 {
        match (self.params.epsilon, self.params.delta, self.params.c) {
            (Some(e), Some(d), Some(c)) => c / e.powf(d),
            _ => 0.0,
        }
    }

    /// Lowest `count` eigenvalues with the constant shift removed.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        let s = self.shift();
        self.matrix.lowest(count).into_iter().map(|e| e - s).collect()
    }

    /// Diagonal block of one half-line, ordered outward from the origin.
    pub fn half_block(&self, positive: bool) -> SymTridiagonal {
        let split = self.grid.split();
        if positive {
            SymTridiagonal::new(self.matrix.diag[split..].to_vec(), self.matrix.off[split..].to_vec())
        } else {
            let diag = self.matrix.diag[..split].iter().rev().copied().collect();
            let off = self.matrix.off[..split.saturating_sub(1)].iter().rev().copied().collect();
            SymTridiagonal::new(diag, off)
        }
    }

    pub fn quad_form(&self, w: &[f64]) -> f64 {
        self.grid.h * self.matrix.quad_form(w)
    }
}

/// `(int w^2/x^2) / (4 int w'^2)` by grid quadrature for `w` vanishing at
/// the origin and at `+-L`; defined as 0 for the zero function.
pub fn hardy_check(w: &[f64], grid: &Grid1D) -> f64 {
    let h = grid.h;
    let split = grid.split();
    let n = grid.len();
    let hardy: f64 = w.iter().zip(&grid.x).map(|(v, x)| v * v / (x * x)).sum::<f64>() * h;
    let mut grad = 0.0;
    for i in 0..n - 1 {
        if i + 1 == split {
            continue;
        }
        grad += (w[i + 1] - w[i]).powi(2) / h;
    }
    if split > 0 {
        grad += w[split - 1].powi(2) / -grid.x[split - 1];
    }
    if split < n {
        grad += w[split].powi(2) / grid.x[split];
    }
    grad += w[0].powi(2) / (grid.x[0] + grid.l) + w[n - 1].powi(2) / (grid.l - grid.x[n - 1]);
    if grad == 0.0 {
        return 0.0;
    }
    hardy / (4.0 * grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_dirichlet_spectrum_matches_sine_modes() {
        let g = Grid1D::staggered(10.0, 0.05).unwrap();
        let op = assemble_hd(0.0, &g, &TwistProfile::Zero, 0.0).unwrap();
        let e = op.lowest_eigenvalues(2);
        let exact = (std::f64::consts::PI / 10.0).powi(2);
        assert!((e[0] - exact).abs() < 1e-4 * exact);
        assert!((e[1] - e[0]).abs() < 1e-9);
    }

    #[test]
    fn half_blocks_are_mirror_images() {
        let g = Grid1D::staggered(20.0, 0.1).unwrap();
        let op = assemble_hd(1.0, &g, &TwistProfile::Zero, 0.0).unwrap();
        assert_eq!(op.half_block(true), op.half_block(false));
        assert_eq!(op.matrix.off[g.split() - 1], 0.0);
    }

    #[test]
    fn hardy_ratio_of_zero_is_zero() {
        let g = Grid1D::staggered(5.0, 0.05).unwrap();
        assert_eq!(hardy_check(&vec![0.0; g.len()], &g), 0.0);
    }
}
