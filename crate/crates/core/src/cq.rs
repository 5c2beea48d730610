//! Convolution quadrature weights.
//!
//! The weights `b_j` are the Taylor coefficients at `ζ = 0` of `(τ δ(ζ))^α`,
//! where `δ` is the generating function of the underlying multistep method:
//!
//! - backward Euler: `τ δ(ζ) = 1 - ζ`
//! - BDF2: `τ δ(ζ) = (3 - 4ζ + ζ²) / 2 = (3/2) (1 - ζ) (1 - ζ/3)`
//!
//! The `1/τ^α` factor is applied by the time stepper.

use crate::error::{Error, Result};

/// Linear multistep method generating the quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bdf1,
    Bdf2,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Bdf1 => write!(f, "bdf1"),
            Method::Bdf2 => write!(f, "bdf2"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bdf1" | "be" | "backward-euler" | "backward_euler" => Ok(Method::Bdf1),
            "bdf2" => Ok(Method::Bdf2),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected bdf1 or bdf2)"
            ))),
        }
    }
}

/// Largest weight count accepted by [`generate_weights`].
pub const MAX_WEIGHTS: usize = 1 << 22;

/// Convolution quadrature weights `b_0..=b_n` for one `(α, method)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CqWeights {
    alpha: f64,
    method: Method,
    b: Vec<f64>,
}

impl CqWeights {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// Partial sums `S_n = Σ_{j<=n} b_j`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.b
            .iter()
            .scan(0.0, |acc, &b| {
                *acc += b;
                Some(*acc)
            })
            .collect()
    }
}

impl std::ops::Index<usize> for CqWeights {
    type Output = f64;

    fn index(&self, j: usize) -> &f64 {
        &self.b[j]
    }
}

/// Coefficients `g_0..=g_n` of `(1 - c ζ)^α`.
///
/// Uses `g_j = g_{j-1} (j - 1 - α) c / j`.
fn binomial_series(alpha: f64, c: f64, n: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(n + 1);
    g.push(1.0);
    for j in 1..=n {
        let jf = j as f64;
        let prev = g[j - 1];
        g.push(prev * (jf - 1.0 - alpha) / jf * c);
    }
    g
}

/// Weights `b_0..=b_n` for the given order and method.
pub fn generate_weights(alpha: f64, method: Method, n: usize) -> Result<CqWeights> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional order {alpha} outside (0, 1]"
        )));
    }
    if n >= MAX_WEIGHTS {
        return Err(Error::InvalidParameter(format!(
            "weight count {n} exceeds limit {MAX_WEIGHTS}"
        )));
    }
    let b = match method {
        Method::Bdf1 => binomial_series(alpha, 1.0, n),
        Method::Bdf2 => {
            let g = binomial_series(alpha, 1.0, n);
            let h = binomial_series(alpha, 1.0 / 3.0, n);
            let scale = 1.5f64.powf(alpha);
            (0..=n)
                .map(|j| {
                    // h decays like 3^{-k}; summing it from the tail keeps small terms first
                    let s: f64 = (0..=j).rev().map(|k| g[j - k] * h[k]).sum();
                    scale * s
                })
                .collect()
        }
    };
    Ok(CqWeights { alpha, method, b })
}

/// Coefficients `w_0..=w_n` of `p(ζ)^α` for a polynomial `p` with `p(0) > 0`,
/// from the recurrence implied by `p w' = α p' w`.
///
/// Independent of [`generate_weights`]; used to cross-check it.
pub fn recurrence_weights(p: &[f64], alpha: f64, n: usize) -> Vec<f64> {
    let mut w = vec![p[0].powf(alpha)];
    for j in 1..=n {
        let mut acc = 0.0;
        for (k, &pk) in p.iter().enumerate().skip(1) {
            if k > j {
                break;
            }
            acc += (alpha * k as f64 - (j - k) as f64) * pk * w[j - k];
        }
        w.push(acc / (j as f64 * p[0]));
    }
    w
}
