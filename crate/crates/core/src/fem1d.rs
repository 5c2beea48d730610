//! P1 finite elements on the unit interval with homogeneous Dirichlet data.
//!
//! All matrices and vectors live on the interior nodes `x_1..x_{M-1}`; vector
//! index `i` corresponds to node `x_{i+1}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{GaussLegendre, GAUSS2};

/// Uniform mesh of `(0, 1)` with `M` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh1D {
    cells: usize,
}

impl Mesh1D {
    pub fn new(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidParameter(format!(
                "mesh needs at least 2 cells, got {cells}"
            )));
        }
        Ok(Mesh1D { cells })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Number of interior degrees of freedom, `M - 1`.
    pub fn dofs(&self) -> usize {
        self.cells - 1
    }

    /// Coordinate of node `k`, `0 <= k <= M`.
    pub fn node(&self, k: usize) -> f64 {
        k as f64 / self.cells as f64
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..self.cells).map(|k| self.node(k))
    }

    /// Whether `x` coincides with a mesh node.
    pub fn has_node_at(&self, x: f64) -> bool {
        let k = (x * self.cells as f64).round();
        (k / self.cells as f64 - x).abs() <= 1e-14
    }

    /// Nodal interpolant of `g` at the interior nodes.
    pub fn interpolate(&self, g: impl Fn(f64) -> f64) -> Vec<f64> {
        self.interior_nodes().map(g).collect()
    }
}

/// Tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiag {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TriDiag {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty tridiagonal matrix".into()));
        }
        for len in [sub.len(), sup.len()] {
            if len != n - 1 {
                return Err(Error::Dimension {
                    expected: n - 1,
                    got: len,
                });
            }
        }
        Ok(TriDiag { sub, diag, sup })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.sub == self.sup
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.sup[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// `A x` accumulated into `y` with a scale: `y += c A x`.
    pub fn mul_vec_add(&self, c: f64, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.sup[i] * x[i + 1];
            }
            y[i] += c * s;
        }
    }

    /// `vᵀ A v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        v.iter().zip(self.mul_vec(v)).map(|(a, b)| a * b).sum()
    }

    /// `c A + B`.
    pub fn scaled_add(&self, c: f64, other: &TriDiag) -> TriDiag {
        let comb = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| c * a + b).collect();
        TriDiag {
            sub: comb(&self.sub, &other.sub),
            diag: comb(&self.diag, &other.diag),
            sup: comb(&self.sup, &other.sup),
        }
    }

    pub fn scale(&self, c: f64) -> TriDiag {
        let s = |x: &[f64]| x.iter().map(|a| c * a).collect();
        TriDiag {
            sub: s(&self.sub),
            diag: s(&self.diag),
            sup: s(&self.sup),
        }
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.sub[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.sup[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i > 0 {
                a[i][i - 1] = self.sub[i - 1];
            }
            if i + 1 < n {
                a[i][i + 1] = self.sup[i];
            }
        }
        a
    }
}

/// Solve `A x = rhs` by the Thomas algorithm.
///
/// No pivoting; every pivot must be positive, which holds for the symmetric
/// positive definite systems arising in the schemes.
pub fn solve_tridiag(a: &TriDiag, rhs: &[f64]) -> Result<Vec<f64>> {
    let mut x = rhs.to_vec();
    let mut scratch = vec![0.0; a.dim()];
    solve_tridiag_in_place(a, &mut x, &mut scratch)?;
    Ok(x)
}

/// In-place Thomas solve; `x` holds the right-hand side on entry and the
/// solution on exit. `scratch` must have length `a.dim()`.
pub fn solve_tridiag_in_place(a: &TriDiag, x: &mut [f64], scratch: &mut [f64]) -> Result<()> {
    let n = a.dim();
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    let check = |row: usize, pivot: f64| -> Result<f64> {
        if !(pivot > 0.0) || pivot.abs() < 1e-300 {
            Err(Error::Singular { row, pivot })
        } else {
            Ok(pivot)
        }
    };
    // forward sweep: scratch holds the modified super-diagonal
    let mut pivot = check(0, a.diag[0])?;
    if n > 1 {
        scratch[0] = a.sup[0] / pivot;
    }
    x[0] /= pivot;
    for i in 1..n {
        pivot = check(i, a.diag[i] - a.sub[i - 1] * scratch[i - 1])?;
        if i + 1 < n {
            scratch[i] = a.sup[i] / pivot;
        }
        x[i] = (x[i] - a.sub[i - 1] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
    Ok(())
}

/// Diffusion coefficient `a(x, t)` with ellipticity bound `λ`:
/// `1/λ <= a(x, t) <= λ` must hold wherever it is evaluated.
#[derive(Clone)]
pub struct Coefficient {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    lambda: f64,
    spatially_constant: bool,
}

impl std::fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Coefficient")
            .field("lambda", &self.lambda)
            .field("spatially_constant", &self.spatially_constant)
            .finish_non_exhaustive()
    }
}

impl Coefficient {
    pub fn new(lambda: f64, eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ellipticity constant must be a finite number >= 1, got {lambda}"
            )));
        }
        Ok(Coefficient {
            eval: Arc::new(eval),
            lambda,
            spatially_constant: false,
        })
    }

    /// `a ≡ a0`.
    pub fn constant(a0: f64) -> Result<Self> {
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constant coefficient must be positive, got {a0}"
            )));
        }
        let lambda = a0.max(1.0 / a0);
        let mut c = Coefficient::new(lambda, move |_, _| a0)?;
        c.spatially_constant = true;
        Ok(c)
    }

    /// `a(x, t) = 2 + cos t`, with `λ = 3`.
    pub fn two_plus_cos() -> Self {
        Coefficient {
            eval: Arc::new(|_, t: f64| 2.0 + t.cos()),
            lambda: 3.0,
            spatially_constant: true,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Whether `a` depends only on `t`.
    pub fn is_spatially_constant(&self) -> bool {
        self.spatially_constant
    }

    /// `a(x, t)` with the ellipticity check.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let v = (self.eval)(x, t);
        let lower = 1.0 / self.lambda;
        if !(v >= lower && v <= self.lambda) {
            return Err(Error::Ellipticity {
                x,
                t,
                value: v,
                lower,
                upper: self.lambda,
            });
        }
        Ok(v)
    }
}

/// Interior-node P1 mass matrix: `(h/6, 4h/6, h/6)` rows.
pub fn assemble_mass(mesh: &Mesh1D) -> TriDiag {
    let n = mesh.dofs();
    let h = mesh.h();
    TriDiag {
        sub: vec![h / 6.0; n - 1],
        diag: vec![4.0 * h / 6.0; n],
        sup: vec![h / 6.0; n - 1],
    }
}

/// Interior-node stiffness matrix `∫ a(x, t) φ_i' φ_j' dx`, two-point Gauss per cell.
pub fn assemble_stiffness(mesh: &Mesh1D, a: &Coefficient, t: f64) -> Result<TriDiag> {
    let m = mesh.cells();
    let h = mesh.h();
    // cell integrals ∫_{x_k}^{x_{k+1}} a dx
    let cell: Vec<f64> = (0..m)
        .map(|k| {
            let c = mesh.node(k) + 0.5 * h;
            let mut s = 0.0;
            for g in GAUSS2 {
                s += a.eval(c + 0.5 * h * g, t)?;
            }
            Ok(0.5 * h * s)
        })
        .collect::<Result<_>>()?;
    let inv_h2 = 1.0 / (h * h);
    let diag = (1..m).map(|k| (cell[k - 1] + cell[k]) * inv_h2).collect();
    let off: Vec<f64> = (1..m - 1).map(|k| -cell[k] * inv_h2).collect();
    Ok(TriDiag {
        sub: off.clone(),
        diag,
        sup: off,
    })
}

/// Load vector `(f(·, t), φ_i)`, two-point Gauss per cell.
///
/// Exact for integrands that are cubic on every cell; a source with a jump must
/// have the jump at a mesh node.
pub fn load_vector(mesh: &Mesh1D, f: impl Fn(f64, f64) -> f64, t: f64) -> Vec<f64> {
    let m = mesh.cells();
    let h = mesh.h();
    let mut b = vec![0.0; mesh.dofs()];
    for k in 0..m {
        let (xl, c) = (mesh.node(k), mesh.node(k) + 0.5 * h);
        let (mut left, mut right) = (0.0, 0.0);
        for g in GAUSS2 {
            let x = c + 0.5 * h * g;
            let fx = f(x, t);
            let phi_r = (x - xl) / h;
            left += fx * (1.0 - phi_r);
            right += fx * phi_r;
        }
        // cell k touches interior nodes k (left end) and k+1 (right end)
        if k >= 1 {
            b[k - 1] += 0.5 * h * left;
        }
        if k + 1 < m {
            b[k] += 0.5 * h * right;
        }
    }
    b
}

/// L² projection of `g` onto the P1 space, with four-point Gauss per cell.
pub fn l2_project(mesh: &Mesh1D, g: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let rule = GaussLegendre::new(4);
    let m = mesh.cells();
    let h = mesh.h();
    let mut b = vec![0.0; mesh.dofs()];
    for k in 0..m {
        let xl = mesh.node(k);
        let xr = mesh.node(k + 1);
        let right = rule.integrate(xl, xr, |x| g(x) * (x - xl) / h);
        let left = rule.integrate(xl, xr, |x| g(x) * (xr - x) / h);
        if !(left.is_finite() && right.is_finite()) {
            return Err(Error::NonConvergence(format!(
                "projection integrand not finite on cell [{xl}, {xr}]"
            )));
        }
        if k >= 1 {
            b[k - 1] += left;
        }
        if k + 1 < m {
            b[k] += right;
        }
    }
    solve_tridiag(&assemble_mass(mesh), &b)
}

/// `b^q - a^q` for `0 <= a <= b`, without cancellation when `b - a` is small.
fn pow_diff(a: f64, b: f64, q: f64) -> f64 {
    if a == 0.0 {
        b.powf(q)
    } else {
        a.powf(q) * (q * ((b - a) / a).ln_1p()).exp_m1()
    }
}

/// Load entries `(x^p, φ_i)` from closed-form antiderivatives; `p > -1`.
pub fn power_load(mesh: &Mesh1D, p: f64) -> Result<Vec<f64>> {
    if !(p > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "x^{p} is not integrable at 0"
        )));
    }
    let m = mesh.cells();
    let h = mesh.h();
    let mut b = vec![0.0; mesh.dofs()];
    for k in 0..m {
        let (xl, xr) = (mesh.node(k), mesh.node(k + 1));
        // ∫ x^p dx and ∫ x^p (x - xl) dx over the cell
        let j0 = pow_diff(xl, xr, p + 1.0) / (p + 1.0);
        let j1 = pow_diff(xl, xr, p + 2.0) / (p + 2.0) - xl * j0;
        let right = j1 / h;
        let left = j0 - right;
        if k >= 1 {
            b[k - 1] += left;
        }
        if k + 1 < m {
            b[k] += right;
        }
    }
    Ok(b)
}

/// L² projection of `x^p`, `p > -1`, using exact cell integrals.
pub fn l2_project_power(mesh: &Mesh1D, p: f64) -> Result<Vec<f64>> {
    solve_tridiag(&assemble_mass(mesh), &power_load(mesh, p)?)
}

/// Discrete L² norm `sqrt(vᵀ M v)`.
pub fn l2_norm(mass: &TriDiag, v: &[f64]) -> f64 {
    mass.quadratic_form(v).max(0.0).sqrt()
}

/// `‖u - v‖` in the discrete L² norm.
pub fn l2_distance(mass: &TriDiag, u: &[f64], v: &[f64]) -> f64 {
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    l2_norm(mass, &d)
}
