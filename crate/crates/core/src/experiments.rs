//! Temporal convergence studies against fine-step reference solutions.
//!
//! The spatial mesh is shared between each run and its reference, so the reported
//! error `e(t_N) = ‖U^N - U_ref(t_N)‖_{L²}` isolates the time discretization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem1d::{assemble_mass, l2_distance, Coefficient, Mesh1D};
use crate::stepper::{run_scheme, InitialData, Problem, Scheme, Snapshots, Source};

/// The three benchmark problems, all with `a(x, t) = 2 + cos t` on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// `u_0 = x^{-1/4}`, `f ≡ 0`.
    #[serde(rename = "a")]
    A,
    /// `u_0 ≡ 0`, `f = e^t (1 + χ_{(0,1/2)}(x))`.
    #[serde(rename = "b")]
    B,
    /// `u_0 ≡ 0`, `f = t^{1/2} x (1 - x)`.
    #[serde(rename = "c")]
    C,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::A, Preset::B, Preset::C];

    pub fn name(self) -> &'static str {
        match self {
            Preset::A => "a",
            Preset::B => "b",
            Preset::C => "c",
        }
    }

    /// Step counts of the benchmark tables.
    pub fn default_steps(self) -> Vec<usize> {
        match self {
            Preset::A | Preset::B => vec![10, 20, 40, 80, 160, 320],
            Preset::C => vec![50, 100, 200, 400, 800, 1600],
        }
    }

    /// Reference step count; must exceed four times the largest study step count.
    pub fn default_reference_steps(self) -> usize {
        match self {
            Preset::A | Preset::B => 5000,
            Preset::C => 10000,
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Preset::A),
            "b" => Ok(Preset::B),
            "c" => Ok(Preset::C),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset `{other}` (expected a, b or c)"
            ))),
        }
    }
}

/// Benchmark problem with `α = 0.5` and `T = 1`; adjust with
/// [`Problem::with_alpha`] and [`Problem::with_final_time`].
pub fn preset_problem(preset: Preset) -> Problem {
    let (initial, source, required) = match preset {
        Preset::A => (InitialData::Power(-0.25), Source::Zero, vec![]),
        Preset::B => (
            InitialData::Zero,
            Source::function(|x, t: f64| t.exp() * if x < 0.5 { 2.0 } else { 1.0 }),
            vec![0.5],
        ),
        Preset::C => (
            InitialData::Zero,
            Source::function(|x, t: f64| t.sqrt() * x * (1.0 - x)),
            vec![],
        ),
    };
    Problem {
        alpha: 0.5,
        final_time: 1.0,
        coefficient: Coefficient::two_plus_cos(),
        source,
        initial,
        label: format!("example-{}", preset.name()),
        required_nodes: required,
    }
}

/// How a study reaches an output time `t_N` with `N` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeGrid {
    /// `N` steps of size `t_N / N`.
    #[default]
    StepsToFinal,
    /// Steps of size `1/N`; `N t_N` must be a positive integer.
    UnitStep,
}

impl TimeGrid {
    /// Number of steps needed to reach `t_final` for table column `n`.
    pub fn steps_for(self, n: usize, t_final: f64) -> Result<usize> {
        match self {
            TimeGrid::StepsToFinal => Ok(n),
            TimeGrid::UnitStep => {
                let k = n as f64 * t_final;
                let r = k.round();
                if r < 1.0 || (k - r).abs() > 1e-9 * k.max(1.0) {
                    Err(Error::InvalidParameter(format!(
                        "unit-step grid: t_N = {t_final} is not a positive multiple of 1/{n}"
                    )))
                } else {
                    Ok(r as usize)
                }
            }
        }
    }
}

/// One convergence study: a problem family, a scheme, and the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub preset: Preset,
    pub scheme: Scheme,
    pub alphas: Vec<f64>,
    pub t_finals: Vec<f64>,
    pub steps: Vec<usize>,
    pub cells: usize,
    pub reference_steps: usize,
    pub reference_scheme: Scheme,
    pub time_grid: TimeGrid,
}

impl StudySpec {
    /// The benchmark configuration for `preset`.
    pub fn defaults(preset: Preset, scheme: Scheme) -> Self {
        StudySpec {
            preset,
            scheme,
            alphas: vec![0.25, 0.5, 0.75],
            t_finals: vec![1.0, 1e-3],
            steps: preset.default_steps(),
            cells: 1000,
            reference_steps: preset.default_reference_steps(),
            reference_scheme: Scheme::Corrected,
            time_grid: TimeGrid::StepsToFinal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.alphas.is_empty() || self.t_finals.is_empty() || self.steps.is_empty() {
            return bad("study needs at least one alpha, one t_final and one step count".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha = {a} outside the open interval (0, 1)"));
        }
        if let Some(t) = self.t_finals.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return bad(format!("t_final = {t} must be positive"));
        }
        if self.steps.contains(&0) {
            return bad("step counts must be positive".into());
        }
        let max_n = *self.steps.iter().max().expect("nonempty");
        if self.reference_steps <= 4 * max_n {
            return bad(format!(
                "reference_steps = {} must exceed 4 x largest step count ({max_n})",
                self.reference_steps
            ));
        }
        let mesh = Mesh1D::new(self.cells)?;
        preset_problem(self.preset).check_mesh(&mesh)?;
        for &t in &self.t_finals {
            for &n in &self.steps {
                self.time_grid.steps_for(n, t)?;
            }
            self.time_grid.steps_for(self.reference_steps, t)?;
        }
        Ok(())
    }
}

/// Errors for one `(α, t_N)` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub alpha: f64,
    pub t_final: f64,
    /// `(N, e(t_N))` in the order of the study's step list.
    pub errors: Vec<(usize, f64)>,
    /// `rates[k]` compares entries `k` and `k + 1`; NaN where undefined.
    pub rates: Vec<f64>,
}

impl ReportRow {
    /// Rate of the last pair, the one quoted as the observed order.
    pub fn tail_rate(&self) -> f64 {
        self.rates.last().copied().unwrap_or(f64::NAN)
    }

    pub fn error_at(&self, n: usize) -> Option<f64> {
        self.errors.iter().find(|e| e.0 == n).map(|e| e.1)
    }
}

/// Result of [`run_study`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub label: String,
    pub scheme: Scheme,
    pub cells: usize,
    pub reference_steps: usize,
    pub reference_scheme: Scheme,
    pub time_grid: TimeGrid,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    pub fn row(&self, alpha: f64, t_final: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.alpha == alpha && r.t_final == t_final)
    }
}

/// Observed orders `log(e_k / e_{k+1}) / log(N_{k+1} / N_k)` for consecutive
/// pairs; `log₂` of the error ratio when `N` doubles. NaN where an error is not
/// positive.
pub fn fit_rate(errors: &[(usize, f64)]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs at least two entries, got {}",
            errors.len()
        )));
    }
    Ok(errors
        .windows(2)
        .map(|w| {
            let ((n0, e0), (n1, e1)) = (w[0], w[1]);
            if e0 > 0.0 && e1 > 0.0 && n1 != n0 {
                (e0 / e1).ln() / (n1 as f64 / n0 as f64).ln()
            } else {
                f64::NAN
            }
        })
        .collect())
}

/// `U` at `t_final` from `steps` steps of `scheme`.
pub fn solve_final(problem: &Problem, mesh: &Mesh1D, steps: usize, scheme: Scheme) -> Result<Vec<f64>> {
    let traj = run_scheme(problem, mesh, steps, scheme, &Snapshots::Final)?;
    Ok(traj.final_state().to_vec())
}

/// Corrected-scheme solution at `t_final` with `n_ref` steps.
pub fn reference_solution(problem: &Problem, mesh: &Mesh1D, n_ref: usize, t_final: f64) -> Result<Vec<f64>> {
    let p = problem.clone().with_final_time(t_final)?;
    solve_final(&p, mesh, n_ref, Scheme::Corrected)
}

/// Run a study for a preset problem.
pub fn run_study(spec: &StudySpec) -> Result<ConvergenceReport> {
    run_study_for(&preset_problem(spec.preset), spec)
}

/// Run a study for any problem; `spec.preset` only supplies the label check.
pub fn run_study_for(template: &Problem, spec: &StudySpec) -> Result<ConvergenceReport> {
    let refs = reference_set(template, spec)?;
    run_study_against(template, spec, &refs)
}

/// `(α, t_N)` pairs of a study in report order.
fn study_cases(spec: &StudySpec) -> Vec<(f64, f64)> {
    spec.alphas
        .iter()
        .flat_map(|&a| spec.t_finals.iter().map(move |&t| (a, t)))
        .collect()
}

fn case_problem(template: &Problem, alpha: f64, t: f64) -> Result<Problem> {
    template.clone().with_alpha(alpha)?.with_final_time(t)
}

/// Reference solutions for every `(α, t_N)` of `spec`, in report order. Studies
/// that differ only in `scheme` can share them through [`run_study_against`].
pub fn reference_set(template: &Problem, spec: &StudySpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mesh = Mesh1D::new(spec.cells)?;
    template.check_mesh(&mesh)?;
    study_cases(spec)
        .par_iter()
        .map(|&(alpha, t)| {
            let p = case_problem(template, alpha, t)?;
            let n = spec.time_grid.steps_for(spec.reference_steps, t)?;
            solve_final(&p, &mesh, n, spec.reference_scheme).map_err(|e| {
                e.context(format!("reference run alpha = {alpha}, t_N = {t}, {n} steps"))
            })
        })
        .collect()
}

/// Run a study against precomputed references from [`reference_set`].
pub fn run_study_against(
    template: &Problem,
    spec: &StudySpec,
    references: &[Vec<f64>],
) -> Result<ConvergenceReport> {
    spec.validate()?;
    let mesh = Mesh1D::new(spec.cells)?;
    template.check_mesh(&mesh)?;
    let mass = assemble_mass(&mesh);
    let cases = study_cases(spec);
    if references.len() != cases.len() || references.iter().any(|r| r.len() != mesh.dofs()) {
        return Err(Error::Dimension {
            expected: cases.len() * mesh.dofs(),
            got: references.iter().map(Vec::len).sum(),
        });
    }
    let problem_for = |alpha: f64, t: f64| case_problem(template, alpha, t);

    let runs: Vec<(usize, usize)> = (0..cases.len())
        .flat_map(|c| (0..spec.steps.len()).map(move |s| (c, s)))
        .collect();
    let errors: Vec<f64> = runs
        .par_iter()
        .map(|&(c, s)| {
            let (alpha, t) = cases[c];
            let p = problem_for(alpha, t)?;
            let n = spec.time_grid.steps_for(spec.steps[s], t)?;
            let u = solve_final(&p, &mesh, n, spec.scheme).map_err(|e| {
                e.context(format!("{} run alpha = {alpha}, t_N = {t}, {n} steps", spec.scheme))
            })?;
            Ok(l2_distance(&mass, &u, &references[c]))
        })
        .collect::<Result<_>>()?;

    let rows = cases
        .iter()
        .enumerate()
        .map(|(c, &(alpha, t_final))| {
            let errs: Vec<(usize, f64)> = spec
                .steps
                .iter()
                .enumerate()
                .map(|(s, &n)| (n, errors[c * spec.steps.len() + s]))
                .collect();
            let rates = if errs.len() >= 2 { fit_rate(&errs)? } else { vec![] };
            Ok(ReportRow {
                alpha,
                t_final,
                errors: errs,
                rates,
            })
        })
        .collect::<Result<_>>()?;

    Ok(ConvergenceReport {
        label: template.label.clone(),
        scheme: spec.scheme,
        cells: spec.cells,
        reference_steps: spec.reference_steps,
        reference_scheme: spec.reference_scheme,
        time_grid: spec.time_grid,
        rows,
    })
}

fn fmt_t(t: f64) -> String {
    if t == 1.0 {
        "1".into()
    } else {
        format!("{t:e}")
    }
}

/// CSV with columns `preset,scheme,alpha,t_final,N,error,rate`; the rate on a row
/// compares it with the previous step count and is empty on the first.
pub fn to_csv(report: &ConvergenceReport, preset: &str) -> String {
    let mut out = String::from("preset,scheme,alpha,t_final,N,error,rate\n");
    for row in &report.rows {
        for (k, &(n, e)) in row.errors.iter().enumerate() {
            let rate = match k.checked_sub(1).map(|i| row.rates[i]) {
                Some(r) if r.is_finite() => format!("{r:e}"),
                Some(_) => "nan".into(),
                None => String::new(),
            };
            out.push_str(&format!(
                "{preset},{},{:?},{:?},{n},{e:e},{rate}\n",
                report.scheme, row.alpha, row.t_final
            ));
        }
    }
    out
}

fn sci3(e: f64) -> String {
    if e == 0.0 {
        "0".into()
    } else {
        format!("{e:.2e}")
    }
}

/// Markdown table: one row per `(t_N, α)`, one column per `N`, tail rate last.
pub fn to_markdown(report: &ConvergenceReport, preset: &str) -> String {
    let steps: Vec<usize> = report
        .rows
        .first()
        .map(|r| r.errors.iter().map(|e| e.0).collect())
        .unwrap_or_default();
    let mut out = format!(
        "### Example ({preset}), {} scheme, M = {}, reference: {} with {} steps\n\n",
        report.scheme, report.cells, report.reference_scheme, report.reference_steps
    );
    out.push_str("| t_N | α \\ N |");
    for n in &steps {
        out.push_str(&format!(" {n} |"));
    }
    out.push_str(" rate |\n|---|---|");
    out.push_str(&"---|".repeat(steps.len() + 1));
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!("| {} | {:.2} |", fmt_t(row.t_final), row.alpha));
        for &(_, e) in &row.errors {
            out.push_str(&format!(" {} |", sci3(e)));
        }
        let r = row.tail_rate();
        if r.is_finite() {
            out.push_str(&format!(" {r:.2} |\n"));
        } else {
            out.push_str(" — |\n");
        }
    }
    out
}
