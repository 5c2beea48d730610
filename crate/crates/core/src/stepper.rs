//! Convolution quadrature time steppers.
//!
//! With `V^n = U^n - U^0`, every scheme solves at step `n`
//!
//! ```text
//! (b_0/τ^α M + S(t_n)) V^n = F_n - S(t_n) U^0 - (1/τ^α) M Σ_{j=1}^{n-1} b_j V^{n-j}
//! ```
//!
//! where `M` is the mass matrix, `S(t)` the stiffness matrix and `F_n` the load
//! vector of `f(·, t_n)`. The corrected BDF2 scheme adds `½ F_0 - ½ S(0) U^0` to the
//! right-hand side of the first step only.

use std::sync::Arc;

use crate::cq::{generate_weights, Method};
use crate::error::{Error, Result};
use crate::fem1d::{
    assemble_mass, assemble_stiffness, l2_project, l2_project_power, load_vector,
    solve_tridiag_in_place, Coefficient, Mesh1D,
};

/// Initial value `u_0`.
#[derive(Clone)]
pub enum InitialData {
    Zero,
    /// `x^p` with `p > -1/2`.
    Power(f64),
    /// `amplitude · sin(mode π x)`.
    Sine { mode: usize, amplitude: f64 },
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// A coefficient vector on the interior nodes of a fixed mesh.
    Discrete(Arc<Vec<f64>>),
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialData::Zero => write!(f, "Zero"),
            InitialData::Power(p) => write!(f, "Power({p})"),
            InitialData::Sine { mode, amplitude } => write!(f, "Sine({amplitude} sin({mode}πx))"),
            InitialData::Function(_) => write!(f, "Function"),
            InitialData::Discrete(v) => write!(f, "Discrete(len {})", v.len()),
        }
    }
}

impl InitialData {
    pub fn function(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        InitialData::Function(Arc::new(g))
    }

    /// Pointwise value, where defined.
    pub fn value(&self, x: f64) -> Option<f64> {
        match self {
            InitialData::Zero => Some(0.0),
            InitialData::Power(p) => Some(x.powf(*p)),
            InitialData::Sine { mode, amplitude } => {
                Some(amplitude * (*mode as f64 * std::f64::consts::PI * x).sin())
            }
            InitialData::Function(g) => Some(g(x)),
            InitialData::Discrete(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, InitialData::Zero)
    }

    /// L² projection onto the P1 space of `mesh`.
    pub fn project(&self, mesh: &Mesh1D) -> Result<Vec<f64>> {
        match self {
            InitialData::Zero => Ok(vec![0.0; mesh.dofs()]),
            InitialData::Power(p) => l2_project_power(mesh, *p),
            InitialData::Sine { .. } | InitialData::Function(_) => {
                l2_project(mesh, |x| self.value(x).unwrap_or(0.0))
            }
            InitialData::Discrete(v) => {
                if v.len() != mesh.dofs() {
                    return Err(Error::Dimension {
                        expected: mesh.dofs(),
                        got: v.len(),
                    });
                }
                Ok(v.as_ref().clone())
            }
        }
    }
}

type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type LoadFn = Arc<dyn Fn(&Mesh1D, f64) -> Vec<f64> + Send + Sync>;

/// Source term `f(x, t)`.
#[derive(Clone)]
pub enum Source {
    Zero,
    Function(SourceFn),
    /// Supplies the load vector `(f(·, t), φ_i)` directly.
    Load(LoadFn),
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::Function(_) => write!(f, "Function"),
            Source::Load(_) => write!(f, "Load"),
        }
    }
}

impl Source {
    pub fn function(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Source::Function(Arc::new(f))
    }

    pub fn load_fn(f: impl Fn(&Mesh1D, f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Source::Load(Arc::new(f))
    }

    pub fn load(&self, mesh: &Mesh1D, t: f64) -> Result<Vec<f64>> {
        let b = match self {
            Source::Zero => vec![0.0; mesh.dofs()],
            Source::Function(f) => load_vector(mesh, |x, t| f(x, t), t),
            Source::Load(f) => f(mesh, t),
        };
        if b.len() != mesh.dofs() {
            return Err(Error::Dimension {
                expected: mesh.dofs(),
                got: b.len(),
            });
        }
        Ok(b)
    }
}

/// One instance of the subdiffusion problem on `(0, 1) × (0, T]`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub alpha: f64,
    pub final_time: f64,
    pub coefficient: Coefficient,
    pub source: Source,
    pub initial: InitialData,
    pub label: String,
    /// Points that must be mesh nodes (jumps of the source in `x`).
    pub required_nodes: Vec<f64>,
}

impl Problem {
    pub fn new(
        label: impl Into<String>,
        alpha: f64,
        final_time: f64,
        coefficient: Coefficient,
        initial: InitialData,
        source: Source,
    ) -> Result<Self> {
        let p = Problem {
            alpha,
            final_time,
            coefficient,
            source,
            initial,
            label: label.into(),
            required_nodes: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fractional order {} outside (0, 1)",
                self.alpha
            )));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        Ok(())
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_final_time(mut self, t: f64) -> Result<Self> {
        self.final_time = t;
        self.validate()?;
        Ok(self)
    }

    pub fn check_mesh(&self, mesh: &Mesh1D) -> Result<()> {
        for &x in &self.required_nodes {
            if !mesh.has_node_at(x) {
                return Err(Error::InvalidParameter(format!(
                    "problem `{}` needs a mesh node at x = {x}; {} cells do not provide one",
                    self.label,
                    mesh.cells()
                )));
            }
        }
        Ok(())
    }
}

/// Time discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// BDF2 convolution quadrature without correction.
    Vanilla,
    /// BDF2 convolution quadrature with the first-step correction.
    Corrected,
    /// Backward Euler convolution quadrature.
    BackwardEuler,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Vanilla, Scheme::Corrected, Scheme::BackwardEuler];

    pub fn method(self) -> Method {
        match self {
            Scheme::Vanilla | Scheme::Corrected => Method::Bdf2,
            Scheme::BackwardEuler => Method::Bdf1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Vanilla => "vanilla",
            Scheme::Corrected => "corrected",
            Scheme::BackwardEuler => "backward_euler",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "vanilla" | "uncorrected" => Ok(Scheme::Vanilla),
            "corrected" => Ok(Scheme::Corrected),
            "backward_euler" | "be" | "bdf1" => Ok(Scheme::BackwardEuler),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme `{other}` (expected vanilla, corrected or backward_euler)"
            ))),
        }
    }
}

/// Which steps a run keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Snapshots {
    All,
    /// Only `U^N`.
    Final,
    /// `U^N` plus the listed steps.
    Steps(Vec<usize>),
}

/// Output of a time stepper.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mesh: Mesh1D,
    pub tau: f64,
    pub steps: usize,
    /// `(n, U^n)` in increasing `n`.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    pub initial: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        &self
            .snapshots
            .last()
            .expect("trajectory always keeps the final step")
            .1
    }

    pub fn at_step(&self, n: usize) -> Option<&[f64]> {
        if n == 0 {
            return Some(&self.initial);
        }
        self.snapshots
            .binary_search_by_key(&n, |s| s.0)
            .ok()
            .map(|i| self.snapshots[i].1.as_slice())
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

/// Steps per history block; rows older than the block are streamed once per block.
const BLOCK: usize = 32;
/// Nodes per chunk in the blocked history sum.
const CHUNK: usize = 128;

/// `acc[r] = Σ_{k=1}^{n0-1} b[n0 + r - k] V^k` for `r < rows`, over all nodes.
fn block_history(hist: &[f64], dofs: usize, b: &[f64], n0: usize, rows: usize, acc: &mut [f64]) {
    acc[..rows * dofs].iter_mut().for_each(|v| *v = 0.0);
    let mut c0 = 0;
    while c0 < dofs {
        let c1 = (c0 + CHUNK).min(dofs);
        for k in 1..n0 {
            let row = &hist[k * dofs + c0..k * dofs + c1];
            for r in 0..rows {
                let w = b[n0 + r - k];
                let out = &mut acc[r * dofs + c0..r * dofs + c1];
                for (o, v) in out.iter_mut().zip(row) {
                    *o += w * v;
                }
            }
        }
        c0 = c1;
    }
}

/// Run `scheme` for `n_steps` uniform steps up to `problem.final_time`.
pub fn run_scheme(
    problem: &Problem,
    mesh: &Mesh1D,
    n_steps: usize,
    scheme: Scheme,
    keep: &Snapshots,
) -> Result<Trajectory> {
    problem.validate()?;
    problem.check_mesh(mesh)?;
    if n_steps == 0 {
        return Err(Error::InvalidParameter("number of time steps must be >= 1".into()));
    }
    let dofs = mesh.dofs();
    let tau = problem.final_time / n_steps as f64;
    let weights = generate_weights(problem.alpha, scheme.method(), n_steps)?;
    let b = weights.as_slice();
    let scale = tau.powf(-problem.alpha);

    let mass = assemble_mass(mesh);
    let u0 = problem.initial.project(mesh)?;

    // V^0 = 0 occupies row 0
    let mut hist = vec![0.0; (n_steps + 1) * dofs];
    let mut acc = vec![0.0; BLOCK * dofs];
    let mut rhs = vec![0.0; dofs];
    let mut scratch = vec![0.0; dofs];
    let mut conv = vec![0.0; dofs];

    let keep_step = |n: usize| match keep {
        Snapshots::All => true,
        Snapshots::Final => n == n_steps,
        Snapshots::Steps(s) => n == n_steps || s.contains(&n),
    };
    let mut snapshots = Vec::new();

    let mut n0 = 1;
    while n0 <= n_steps {
        let rows = BLOCK.min(n_steps + 1 - n0);
        block_history(&hist, dofs, b, n0, rows, &mut acc);
        for r in 0..rows {
            let n = n0 + r;
            let t = n as f64 * tau;
            conv.copy_from_slice(&acc[r * dofs..(r + 1) * dofs]);
            for k in n0..n {
                let w = b[n - k];
                for (c, v) in conv.iter_mut().zip(&hist[k * dofs..(k + 1) * dofs]) {
                    *c += w * v;
                }
            }

            let stiff = assemble_stiffness(mesh, &problem.coefficient, t)
                .map_err(|e| e.context(format!("stiffness at step {n}")))?;
            rhs.copy_from_slice(&problem.source.load(mesh, t)?);
            stiff.mul_vec_add(-1.0, &u0, &mut rhs);
            mass.mul_vec_add(-scale, &conv, &mut rhs);
            if n == 1 && scheme == Scheme::Corrected {
                let s0 = assemble_stiffness(mesh, &problem.coefficient, 0.0)
                    .map_err(|e| e.context("stiffness at t = 0"))?;
                let f0 = problem.source.load(mesh, 0.0)?;
                for (r, f) in rhs.iter_mut().zip(&f0) {
                    *r += 0.5 * f;
                }
                s0.mul_vec_add(-0.5, &u0, &mut rhs);
            }

            let system = mass.scaled_add(scale * b[0], &stiff);
            solve_tridiag_in_place(&system, &mut rhs, &mut scratch)
                .map_err(|e| e.context(format!("{scheme} step {n} of {n_steps}")))?;
            hist[n * dofs..(n + 1) * dofs].copy_from_slice(&rhs);

            if keep_step(n) {
                let u: Vec<f64> = rhs.iter().zip(&u0).map(|(v, u)| v + u).collect();
                snapshots.push((n, u));
            }
        }
        n0 += rows;
    }

    Ok(Trajectory {
        mesh: *mesh,
        tau,
        steps: n_steps,
        snapshots,
        initial: u0,
    })
}

/// BDF2 convolution quadrature without correction, keeping every step.
pub fn run_vanilla_bdf2(problem: &Problem, mesh: &Mesh1D, n_steps: usize) -> Result<Trajectory> {
    run_scheme(problem, mesh, n_steps, Scheme::Vanilla, &Snapshots::All)
}

/// BDF2 convolution quadrature with the first-step correction, keeping every step.
pub fn run_corrected_bdf2(problem: &Problem, mesh: &Mesh1D, n_steps: usize) -> Result<Trajectory> {
    run_scheme(problem, mesh, n_steps, Scheme::Corrected, &Snapshots::All)
}

/// Backward Euler convolution quadrature, keeping every step.
pub fn run_backward_euler(problem: &Problem, mesh: &Mesh1D, n_steps: usize) -> Result<Trajectory> {
    run_scheme(problem, mesh, n_steps, Scheme::BackwardEuler, &Snapshots::All)
}
