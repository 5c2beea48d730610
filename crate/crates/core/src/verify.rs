//! Self-check suites run by `subdiff verify`.
//!
//! Each check is cheap (well under a second in release builds) and compares the
//! library against an independent route or an exact invariant.

use crate::config::{Overrides, RunConfig};
use crate::cq::{generate_weights, recurrence_weights, Method};
use crate::experiments::{Preset, StudySpec, TimeGrid};
use crate::fem1d::{
    assemble_mass, assemble_stiffness, l2_distance, solve_tridiag, Coefficient, Mesh1D, TriDiag,
};
use crate::oracle::{exact_homogeneous, mittag_leffler, semidiscrete_sine};
use crate::stepper::{run_scheme, InitialData, Problem, Scheme, Snapshots, Source};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

/// All checks, in the order `verify` runs them.
pub const CHECKS: &[(&str, Check)] = &[
    ("weights: BDF2 at alpha = 1", weights_alpha_one),
    ("weights: generating function vs recurrence", weights_dual_route),
    ("weights: partial sums decay", weights_partial_sums),
    ("stepper: stationary solution reproduced", constant_solution),
    ("fem: stiffness symmetry and ellipticity", stiffness_properties),
    ("fem: tridiagonal solve vs dense elimination", tridiag_vs_dense),
    ("oracle: Mittag-Leffler monotone on log grid", ml_monotone),
    ("oracle: corrected BDF2 vs spectral solution", oracle_equivalence),
    ("config: effective config round trip", config_round_trip),
];

pub fn run_all() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckOutcome { name, passed, detail }
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("nonempty column");
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn weights_alpha_one() -> Result<String, String> {
    let w = generate_weights(1.0, Method::Bdf2, 64).map_err(|e| e.to_string())?;
    let exact = [1.5, -2.0, 0.5];
    let worst = (0..=64)
        .map(|j| (w[j] - exact.get(j).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-15, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn weights_dual_route() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for alpha in [0.25, 0.5, 0.75] {
        let w = generate_weights(alpha, Method::Bdf2, 5000).map_err(|e| e.to_string())?;
        let r = recurrence_weights(&[1.5, -2.0, 0.5], alpha, 5000);
        for j in 0..=5000 {
            worst = worst.max((w[j] - r[j]).abs() / r[j].abs());
        }
    }
    ensure(worst <= 1e-13, || format!("max relative gap {worst:e}"))?;
    Ok(format!("max relative gap {worst:e} for j <= 5000"))
}

fn weights_partial_sums() -> Result<String, String> {
    for alpha in [0.25, 0.5, 0.75] {
        for method in [Method::Bdf1, Method::Bdf2] {
            let s = generate_weights(alpha, method, 5000)
                .map_err(|e| e.to_string())?
                .partial_sums();
            for n in 5..s.len() {
                ensure(s[n].abs() <= s[n - 1].abs(), || {
                    format!("alpha {alpha} {method}: |S_{n}| = {:e} > |S_{}| = {:e}", s[n], n - 1, s[n - 1])
                })?;
            }
        }
    }
    Ok("|S_n| nonincreasing for 4 <= n <= 5000".into())
}

fn constant_solution() -> Result<String, String> {
    let coef = Coefficient::new(3.0, |x, t| 2.0 + (t + x).cos()).map_err(|e| e.to_string())?;
    let u0 = InitialData::function(|x| x * (1.0 - x) * (3.0 * x).exp());
    let (c, g) = (coef.clone(), u0.clone());
    let f = Source::load_fn(move |mesh, t| {
        let u = g.project(mesh).expect("projection of a smooth function");
        assemble_stiffness(mesh, &c, t).expect("coefficient within bounds").mul_vec(&u)
    });
    let mesh = Mesh1D::new(100).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for alpha in [0.25, 0.5, 0.75] {
        let p = Problem::new("stationary", alpha, 1.0, coef.clone(), u0.clone(), f.clone())
            .map_err(|e| e.to_string())?;
        let base = u0.project(&mesh).map_err(|e| e.to_string())?;
        for s in Scheme::ALL {
            let tr = run_scheme(&p, &mesh, 64, s, &Snapshots::All).map_err(|e| e.to_string())?;
            for (_, u) in &tr.snapshots {
                worst = u.iter().zip(&base).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max nodal drift {worst:e}"))?;
    Ok(format!("max nodal drift {worst:e} over three schemes"))
}

fn stiffness_properties() -> Result<String, String> {
    let coefs = [
        Coefficient::two_plus_cos(),
        Coefficient::new(4.0, |x, t| 1.0 + 2.0 * x * x + t.sin().abs()).map_err(|e| e.to_string())?,
        Coefficient::new(10.0, |x, _| if x < 0.3 { 0.2 } else { 5.0 }).map_err(|e| e.to_string())?,
    ];
    let mut checked = 0;
    for cells in [2, 3, 17, 256] {
        let mesh = Mesh1D::new(cells).map_err(|e| e.to_string())?;
        let lap = assemble_stiffness(&mesh, &Coefficient::constant(1.0).map_err(|e| e.to_string())?, 0.0)
            .map_err(|e| e.to_string())?;
        for coef in &coefs {
            for t in [0.0, 0.7, 3.0] {
                let s = assemble_stiffness(&mesh, coef, t).map_err(|e| e.to_string())?;
                ensure(s.sub == s.sup, || format!("{cells} cells, t = {t}: not symmetric"))?;
                let l = coef.lambda();
                for k in 0..4 {
                    let v: Vec<f64> = (0..mesh.dofs()).map(|i| ((i * (k + 3)) as f64 * 0.91).sin() + 0.1).collect();
                    let (q, base) = (s.quadratic_form(&v), lap.quadratic_form(&v));
                    ensure(q >= base / l * (1.0 - 1e-12) && q <= base * l * (1.0 + 1e-12), || {
                        format!("{cells} cells, t = {t}: v'Sv = {q:e} outside [{:e}, {:e}]", base / l, base * l)
                    })?;
                }
                solve_tridiag(&s, &vec![1.0; mesh.dofs()])
                    .map_err(|e| format!("{cells} cells, t = {t}: {e}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} matrices symmetric with bounds inherited from the coefficient"))
}

fn tridiag_vs_dense() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 5, 40, 120] {
        for seed in 0..5 {
            let val = |i: usize, k: usize| ((i * 31 + k * 17 + seed * 7) as f64 * 0.37).sin();
            let sub: Vec<f64> = (0..n.saturating_sub(1)).map(|i| val(i, 1)).collect();
            let sup: Vec<f64> = if seed % 2 == 0 { sub.clone() } else { (0..n.saturating_sub(1)).map(|i| val(i, 2)).collect() };
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + val(i, 3)).collect();
            let a = TriDiag::new(sub, diag, sup).map_err(|e| e.to_string())?;
            let b: Vec<f64> = (0..n).map(|i| val(i, 4)).collect();
            let x = solve_tridiag(&a, &b).map_err(|e| e.to_string())?;
            let y = dense_solve(a.to_dense(), b);
            for (p, q) in x.iter().zip(&y) {
                worst = worst.max((p - q).abs() / q.abs().max(1.0));
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max gap {worst:e}"))?;
    Ok(format!("max gap {worst:e}"))
}

fn ml_monotone() -> Result<String, String> {
    let mut count = 0;
    for alpha in [0.25, 0.5, 0.75] {
        let mut prev = 1.0;
        let mut x = 1e-6;
        while x <= 1e6 {
            let v = mittag_leffler(alpha, 1.0, -x).map_err(|e| e.to_string())?;
            ensure(v > 0.0 && v < prev, || format!("alpha {alpha}: E(-{x:e}) = {v:e}, previous {prev:e}"))?;
            prev = v;
            x *= 10f64.powf(0.05);
            count += 1;
        }
    }
    Ok(format!("{count} points positive and strictly decreasing"))
}

fn oracle_equivalence() -> Result<String, String> {
    let mesh = Mesh1D::new(200).map_err(|e| e.to_string())?;
    let mass = assemble_mass(&mesh);
    let u0 = InitialData::Sine { mode: 1, amplitude: 1.0 };
    let mut summary = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let p = Problem::new("sine", alpha, 1.0, Coefficient::constant(1.0).map_err(|e| e.to_string())?, u0.clone(), Source::Zero)
            .map_err(|e| e.to_string())?;
        let semi = semidiscrete_sine(&mesh, 1.0, alpha, 1, 1.0).map_err(|e| e.to_string())?;
        let spectral = exact_homogeneous(&mesh, 1.0, alpha, &u0, 1.0, 2).map_err(|e| e.to_string())?;
        let run = |n| {
            run_scheme(&p, &mesh, n, Scheme::Corrected, &Snapshots::Final)
                .map(|t| t.final_state().to_vec())
                .map_err(|e| e.to_string())
        };
        let (u1, u2) = (run(160)?, run(320)?);
        let order = (l2_distance(&mass, &u1, &semi) / l2_distance(&mass, &u2, &semi)).log2();
        let err = l2_distance(&mass, &u2, &spectral);
        ensure(order >= 1.9, || format!("alpha {alpha}: order {order:.3}"))?;
        ensure(err <= 1e-5, || format!("alpha {alpha}: error {err:e} vs spectral solution"))?;
        summary.push(format!("alpha {alpha}: order {order:.2}"));
    }
    Ok(summary.join(", "))
}

fn config_round_trip() -> Result<String, String> {
    let cfg = RunConfig {
        studies: vec![
            StudySpec::defaults(Preset::A, Scheme::Corrected),
            StudySpec {
                alphas: vec![0.3, 0.123456789],
                t_finals: vec![1e-3, 0.7],
                ..StudySpec::defaults(Preset::C, Scheme::Vanilla)
            },
        ],
        output_dir: "out/dir".into(),
        time_grid: TimeGrid::StepsToFinal,
        verbosity: 2,
        jobs: Some(3),
    };
    let text = cfg.to_toml();
    let back = RunConfig::parse(&text, &Overrides::default()).map_err(|e| e.to_string())?;
    ensure(back == cfg, || format!("re-parsed config differs:\n{text}"))?;
    Ok("identical after emit and re-parse".into())
}
