//! Independent reference solutions.
//!
//! For a constant coefficient `a0` and `f ≡ 0` the solution is
//! `u(x, t) = Σ_k c_k E_α(-a0 (kπ)² t^α) sin(kπx)` with `c_k = 2 (u_0, sin(kπ·))`.
//! Inhomogeneous modal contributions are Duhamel integrals against
//! `s^{α-1} E_{α,α}(-λ s^α)`.

use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem1d::{assemble_mass, assemble_stiffness, solve_tridiag, Coefficient, Mesh1D};
use crate::quad::adaptive_gk;
use crate::stepper::InitialData;

/// Tunables for [`mittag_leffler_with`].
#[derive(Debug, Clone, Copy)]
pub struct MlParams {
    /// Largest `|z|` tried with the power series.
    pub series_radius: f64,
    pub max_series_terms: usize,
    pub max_asymptotic_terms: usize,
    /// Relative accuracy demanded of the series and asymptotic branches.
    pub tolerance: f64,
    /// Half the number of nodes on the parabolic contour.
    pub contour_nodes: usize,
}

impl Default for MlParams {
    fn default() -> Self {
        MlParams {
            series_radius: 12.0,
            max_series_terms: 2000,
            max_asymptotic_terms: 200,
            tolerance: 1e-14,
            contour_nodes: 20,
        }
    }
}

/// `1/Γ(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
        (PI * x).sin() * gamma(1.0 - x) / PI
    } else if x > 170.0 {
        (-ln_gamma(x)).exp()
    } else {
        1.0 / gamma(x)
    }
}

/// Series Σ z^k / Γ(αk + β); `None` if cancellation would cost accuracy.
fn ml_series(alpha: f64, beta: f64, z: f64, p: &MlParams) -> Option<f64> {
    let lx = z.abs().ln();
    let mut sum = rgamma(beta);
    let mut biggest = sum.abs();
    let mut small_run = 0;
    for k in 1..p.max_series_terms {
        let arg = alpha * k as f64 + beta;
        let mag = (k as f64 * lx - ln_gamma(arg)).exp();
        let term = if z < 0.0 && k % 2 == 1 { -mag } else { mag };
        sum += term;
        biggest = biggest.max(mag);
        if mag <= 1e-17 * sum.abs() {
            small_run += 1;
            if small_run >= 3 {
                return (biggest * 1e-16 <= p.tolerance * sum.abs()).then_some(sum);
            }
        } else {
            small_run = 0;
        }
    }
    None
}

/// Asymptotic expansion for `z -> -∞`, `0 < α < 1`:
/// `E_{α,β}(z) ≈ -Σ_{k>=1} z^{-k} / Γ(β - αk)`.
fn ml_asymptotic(alpha: f64, beta: f64, z: f64, p: &MlParams) -> Option<f64> {
    let x = -z;
    let lx = x.ln();
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..=p.max_asymptotic_terms {
        let y = beta - alpha * k as f64;
        // |term| <= bound; the sine factor alone can make a term deceptively small
        let (term, bound) = if y < 0.5 {
            let m = (ln_gamma(1.0 - y) - k as f64 * lx).exp() / PI;
            let s = if y == y.floor() { 0.0 } else { (PI * y).sin() };
            (m * s, m)
        } else {
            let m = (-(k as f64) * lx).exp() * rgamma(y);
            (m, m)
        };
        if bound > prev && k > 2 {
            // divergence has set in before the terms got small enough
            return None;
        }
        prev = bound;
        // -(-x)^{-k} = (-1)^{k+1} x^{-k}
        sum += if k % 2 == 1 { term } else { -term };
        if bound <= p.tolerance * sum.abs() && k > 2 {
            return Some(sum);
        }
    }
    None
}

/// Inverse Laplace transform of `s^{α-β} / (s^α - z)` at `t = 1` on the parabola
/// `s(u) = μ (1 + iu)²` with the trapezoidal rule.
fn ml_contour(alpha: f64, beta: f64, z: f64, p: &MlParams) -> f64 {
    let n = p.contour_nodes as f64;
    let h = 3.0 / n;
    let mu = PI * n / 12.0;
    let term = |u: f64| -> f64 {
        // s = μ(1 - u² + 2iu), ds/du = 2iμ(1 + iu)
        let (sr, si) = (mu * (1.0 - u * u), 2.0 * mu * u);
        let (r, th) = ((sr * sr + si * si).sqrt(), si.atan2(sr));
        let lr = r.ln();
        // s^α and s^{α-β}
        let (a_mod, a_arg) = ((alpha * lr).exp(), alpha * th);
        let (g_mod, g_arg) = (((alpha - beta) * lr).exp(), (alpha - beta) * th);
        let (dr, di) = (a_mod * a_arg.cos() - z, a_mod * a_arg.sin());
        let den = dr * dr + di * di;
        // F = s^{α-β} / (s^α - z)
        let (nr, ni) = (g_mod * g_arg.cos(), g_mod * g_arg.sin());
        let (fr, fi) = ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den);
        // e^s (1 + iu) F
        let e = sr.exp();
        let (er, ei) = (e * si.cos(), e * si.sin());
        let (qr, qi) = (er - ei * u, ei + er * u);
        qr * fr - qi * fi
    };
    let mut s = 0.5 * term(0.0);
    for k in 1..=p.contour_nodes {
        s += term(k as f64 * h);
    }
    2.0 * mu * h * s / PI
}

/// Two-parameter Mittag-Leffler function `E_{α,β}(z)` on the non-positive real axis,
/// for `0 < α <= 1` and `β > 0`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    mittag_leffler_with(alpha, beta, z, &MlParams::default())
}

pub fn mittag_leffler_with(alpha: f64, beta: f64, z: f64, p: &MlParams) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Mittag-Leffler order {alpha} outside (0, 1]"
        )));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Mittag-Leffler parameter beta = {beta} must be positive"
        )));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Mittag-Leffler argument {z} must be finite and <= 0"
        )));
    }
    if z == 0.0 {
        return Ok(rgamma(beta));
    }
    if alpha == 1.0 {
        if beta == 1.0 {
            return Ok(z.exp());
        }
        if beta == 2.0 {
            return Ok(z.exp_m1() / z);
        }
        return ml_series(alpha, beta, z, p).ok_or_else(|| {
            Error::NonConvergence(format!("E_{{1,{beta}}}({z}) needs the series, which lost accuracy"))
        });
    }
    if -z <= p.series_radius {
        if let Some(v) = ml_series(alpha, beta, z, p) {
            return Ok(v);
        }
    }
    if let Some(v) = ml_asymptotic(alpha, beta, z, p) {
        return Ok(v);
    }
    let v = ml_contour(alpha, beta, z, p);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence(format!(
            "E_{{{alpha},{beta}}}({z}): contour quadrature not finite"
        )))
    }
}

/// Sine coefficient `c_k = 2 ∫_0^1 u_0(x) sin(kπx) dx`.
pub fn sine_coefficient(u0: &InitialData, k: usize) -> Result<f64> {
    let kp = k as f64 * PI;
    // one panel per half period keeps the adaptive rule well resolved
    let panels = (k + 1).max(4);
    let integrate = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| -> Result<f64> {
        let w = (b - a) / panels as f64;
        let mut s = 0.0;
        for i in 0..panels {
            let lo = a + i as f64 * w;
            s += adaptive_gk(g, lo, lo + w, 1e-15)?;
        }
        Ok(s)
    };
    match u0 {
        InitialData::Zero => Ok(0.0),
        InitialData::Sine { mode, amplitude } => Ok(if *mode == k { *amplitude } else { 0.0 }),
        InitialData::Power(pw) => {
            // x = w^q with q (p + 1) = 1 gives dx x^p = q dw
            let q = 1.0 / (pw + 1.0);
            integrate(&|w: f64| 2.0 * q * (kp * w.powf(q)).sin(), 0.0, 1.0)
        }
        InitialData::Function(g) => integrate(&|x: f64| 2.0 * g(x) * (kp * x).sin(), 0.0, 1.0),
        InitialData::Discrete(_) => Err(Error::InvalidParameter(
            "sine coefficients need pointwise initial data".into(),
        )),
    }
}

/// Spectral solution at the interior nodes for `a ≡ a0`, `f ≡ 0`.
///
/// Fails when mode `modes` still contributes more than `1e-12`.
pub fn exact_homogeneous(
    mesh: &Mesh1D,
    a0: f64,
    alpha: f64,
    u0: &InitialData,
    t: f64,
    modes: usize,
) -> Result<Vec<f64>> {
    if !(a0 > 0.0) || !(t >= 0.0) || modes == 0 {
        return Err(Error::InvalidParameter(format!(
            "spectral solution needs a0 > 0, t >= 0 and modes >= 1 (a0 = {a0}, t = {t}, modes = {modes})"
        )));
    }
    let nodes: Vec<f64> = mesh.interior_nodes().collect();
    let mut u = vec![0.0; nodes.len()];
    let mut last = 0.0;
    for k in 1..=modes {
        let c = sine_coefficient(u0, k)?;
        if c == 0.0 {
            last = 0.0;
            continue;
        }
        let lambda = a0 * (k as f64 * PI).powi(2);
        let decay = if t == 0.0 {
            1.0
        } else {
            mittag_leffler(alpha, 1.0, -lambda * t.powf(alpha))?
        };
        last = (c * decay).abs();
        let kp = k as f64 * PI;
        for (ui, &x) in u.iter_mut().zip(&nodes) {
            *ui += c * decay * (kp * x).sin();
        }
    }
    if last >= 1e-12 {
        return Err(Error::NonConvergence(format!(
            "spectral solution: mode {modes} still contributes {last:e}"
        )));
    }
    Ok(u)
}

/// Exact semidiscrete solution for `u_0 = sin(kπx)`, `a ≡ a0` on a uniform mesh.
///
/// The nodal vector of `sin(kπx)` is an eigenvector of both the mass and the
/// stiffness matrix, so the P1 Galerkin solution is `E_α(-λ_h t^α) P_h u_0` with
/// `λ_h = a0 (6/h²)(1 - cos θ)/(2 + cos θ)`, `θ = kπh`. Free of spatial error
/// when compared with the fully discrete P1 solution.
pub fn semidiscrete_sine(mesh: &Mesh1D, a0: f64, alpha: f64, mode: usize, t: f64) -> Result<Vec<f64>> {
    if !(a0 > 0.0) || !(t >= 0.0) || mode == 0 || mode >= mesh.cells() {
        return Err(Error::InvalidParameter(format!(
            "semidiscrete sine mode needs a0 > 0, t >= 0 and 1 <= mode < cells (mode = {mode})"
        )));
    }
    let h = mesh.h();
    let kp = mode as f64 * PI;
    let theta = kp * h;
    let c = theta.cos();
    // 1 - cos θ without cancellation
    let one_minus = 2.0 * (0.5 * theta).sin().powi(2);
    let lambda_h = a0 * 6.0 / (h * h) * one_minus / (2.0 + c);
    let proj = 6.0 * one_minus / (theta * theta * (2.0 + c));
    let decay = if t == 0.0 {
        1.0
    } else {
        mittag_leffler(alpha, 1.0, -lambda_h * t.powf(alpha))?
    };
    Ok(mesh.interior_nodes().map(|x| proj * decay * (kp * x).sin()).collect())
}

/// `∫_0^t (t-s)^{α-1} E_{α,α}(-λ (t-s)^α) g(s) ds`, to absolute accuracy `1e-10`.
///
/// With `σ = (t - s)^α` the integral becomes
/// `(1/α) ∫_0^{t^α} E_{α,α}(-λσ) g(t - σ^{1/α}) dσ`, which has no endpoint singularity.
pub fn duhamel_mode(alpha: f64, lambda: f64, g: impl Fn(f64) -> f64, t: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Duhamel integral needs lambda >= 0 and t >= 0 (lambda = {lambda}, t = {t})"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let top = t.powf(alpha);
    let mut failure = None;
    let v = adaptive_gk(
        |sigma| match mittag_leffler(alpha, alpha, -lambda * sigma) {
            Ok(e) => e * g(t - sigma.powf(1.0 / alpha)),
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        0.0,
        top,
        1e-10 * alpha,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(v? / alpha)
}

/// Classical implicit Euler for `u_t - a0 u_xx = 0` on the same P1 space, from the
/// coefficient vector `u0`; returns the state after `steps` steps of size `t/steps`.
pub fn implicit_euler_heat(mesh: &Mesh1D, a0: f64, u0: &[f64], t: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("implicit Euler needs at least one step".into()));
    }
    let tau = t / steps as f64;
    let mass = assemble_mass(mesh);
    let stiff = assemble_stiffness(mesh, &Coefficient::constant(a0)?, 0.0)?;
    let system = stiff.scale(tau).scaled_add(1.0, &mass);
    let mut u = u0.to_vec();
    for _ in 0..steps {
        u = solve_tridiag(&system, &mass.mul_vec(&u))?;
    }
    Ok(u)
}
