//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test --release -p subdiff --test acceptance`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::{Command, ExitCode};
use std::time::Instant;

use subdiff::cq::{generate_weights, recurrence_weights, Method};
use subdiff::experiments::{
    preset_problem, reference_set, run_study_against, to_markdown, ConvergenceReport, Preset, StudySpec,
};
use subdiff::fem1d::{assemble_mass, l2_distance, Coefficient, Mesh1D};
use subdiff::oracle::{exact_homogeneous, semidiscrete_sine};
use subdiff::stepper::{run_scheme, InitialData, Problem, Scheme, Snapshots, Source};

const TABLE_REL: f64 = 0.05;
const RATE_TOL: f64 = 0.05;
const C_TABLE_REL: f64 = 0.10;
const C_RATE_TOL: f64 = 0.10;
const TABLE_A_SECONDS: f64 = 60.0;
const ORACLE_ERR: f64 = 1e-7;
const ORACLE_ORDER: f64 = 1.9;
const WEIGHT_EXACT: f64 = 1e-15;
const WEIGHT_DUAL: f64 = 1e-13;

/// `(α, t_N, errors for the preset's step list, printed rate)`.
type Row = (f64, f64, [f64; 6], f64);

const A_CORRECTED: [Row; 6] = [
    (0.25, 1.0, [4.20e-5, 9.77e-6, 2.36e-6, 5.79e-7, 1.44e-7, 3.57e-8], 2.01),
    (0.50, 1.0, [8.82e-5, 2.04e-5, 4.91e-6, 1.20e-6, 2.98e-7, 7.41e-8], 2.01),
    (0.75, 1.0, [1.01e-4, 2.34e-5, 5.60e-6, 1.37e-6, 3.38e-7, 8.41e-8], 2.01),
    (0.25, 1e-3, [1.50e-4, 3.49e-5, 8.44e-6, 2.07e-6, 5.14e-7, 1.28e-7], 2.01),
    (0.50, 1e-3, [4.77e-4, 1.13e-4, 2.74e-5, 6.77e-6, 1.68e-6, 4.19e-7], 2.00),
    (0.75, 1e-3, [3.68e-4, 8.67e-5, 2.11e-5, 5.21e-6, 1.29e-6, 3.22e-7], 2.00),
];

const A_VANILLA: [Row; 6] = [
    (0.25, 1.0, [2.96e-4, 1.49e-4, 7.45e-5, 3.73e-5, 1.86e-5, 9.32e-6], 1.00),
    (0.50, 1.0, [4.12e-4, 2.12e-4, 1.07e-4, 5.37e-5, 2.69e-5, 1.35e-5], 1.00),
    (0.75, 1.0, [3.00e-4, 1.62e-4, 8.34e-5, 4.22e-5, 2.12e-5, 1.06e-5], 1.00),
    (0.25, 1e-3, [1.16e-3, 5.80e-4, 2.89e-4, 1.45e-4, 7.23e-5, 3.62e-5], 1.00),
    (0.50, 1e-3, [5.49e-3, 2.70e-3, 1.34e-3, 6.59e-4, 3.34e-4, 1.67e-4], 1.00),
    (0.75, 1e-3, [5.18e-3, 2.54e-3, 1.26e-3, 6.28e-4, 3.13e-4, 1.57e-4], 1.00),
];

/// Excluded from the vanilla-(a) comparison as a suspected misprint.
const A_VANILLA_SKIP: (f64, f64, usize) = (0.75, 1.0, 320);

const B_CORRECTED: [Row; 6] = [
    (0.25, 1.0, [4.46e-6, 1.04e-6, 2.51e-7, 6.16e-8, 1.53e-8, 3.80e-9], 2.01),
    (0.50, 1.0, [8.51e-6, 1.96e-6, 4.70e-7, 1.15e-7, 2.85e-8, 7.09e-9], 2.01),
    (0.75, 1.0, [8.13e-6, 1.85e-6, 4.40e-7, 1.07e-7, 2.64e-8, 6.56e-9], 2.01),
    (0.25, 1e-3, [1.18e-5, 2.75e-6, 6.64e-7, 1.63e-7, 4.05e-8, 1.01e-8], 2.01),
    (0.50, 1e-3, [3.70e-5, 8.75e-6, 2.13e-6, 5.26e-7, 1.31e-7, 3.26e-8], 2.00),
    (0.75, 1e-3, [5.66e-6, 1.38e-6, 3.42e-7, 8.52e-8, 2.12e-8, 5.30e-9], 2.00),
];

/// Vanilla-(b) entries; only the rates enter the criterion, the entries feed the
/// informational comparison below (N = 320, α = 0.75, t_N = 1 holds the
/// misprinted 8.36e-6).
const B_VANILLA: [Row; 6] = [
    (0.25, 1.0, [2.22e-5, 1.15e-5, 5.81e-6, 2.92e-6, 1.46e-6, 7.33e-7], 1.00),
    (0.50, 1.0, [3.09e-5, 1.64e-5, 8.35e-6, 4.21e-6, 2.11e-6, 1.06e-6], 1.00),
    (0.75, 1.0, [2.36e-5, 1.28e-5, 6.57e-6, 3.32e-6, 1.67e-6, 8.36e-6], 1.00),
    (0.25, 1e-3, [9.12e-5, 4.56e-5, 2.28e-5, 1.14e-5, 5.70e-6, 2.85e-6], 1.00),
    (0.50, 1e-3, [4.32e-4, 2.12e-4, 1.05e-4, 5.26e-5, 2.62e-5, 1.31e-5], 1.00),
    (0.75, 1e-3, [3.54e-4, 1.74e-4, 8.61e-5, 4.28e-5, 2.14e-5, 1.07e-5], 1.00),
];

const C_CORRECTED: [Row; 6] = [
    (0.25, 1.0, [2.31e-8, 8.65e-9, 3.18e-9, 1.15e-9, 4.11e-10, 1.44e-10], 1.52),
    (0.50, 1.0, [2.77e-8, 1.11e-8, 4.24e-9, 1.58e-9, 5.73e-10, 2.02e-10], 1.50),
    (0.75, 1.0, [6.59e-9, 4.94e-9, 2.40e-9, 1.01e-9, 3.93e-10, 1.45e-10], 1.44),
    (0.25, 1e-3, [3.65e-9, 1.27e-9, 4.41e-10, 1.54e-10, 5.37e-11, 1.84e-11], 1.54),
    (0.50, 1e-3, [1.72e-8, 5.92e-9, 2.05e-9, 7.15e-10, 2.48e-10, 8.51e-11], 1.55),
    (0.75, 1e-3, [1.24e-8, 4.37e-9, 1.55e-9, 5.45e-10, 1.91e-10, 6.59e-11], 1.54),
];

struct Outcome {
    passed: bool,
    summary: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            summary: String::new(),
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, note: String) {
        self.passed = false;
        self.notes.push(note);
    }
}

struct Comparison {
    worst_rel: f64,
    entries: usize,
    misses: Vec<String>,
}

/// Relative deviation of every computed entry from the target table.
fn compare_entries(report: &ConvergenceReport, table: &[Row], tol: f64, skip: Option<(f64, f64, usize)>) -> Comparison {
    let steps: Vec<usize> = report.rows[0].errors.iter().map(|e| e.0).collect();
    let mut c = Comparison {
        worst_rel: 0.0,
        entries: 0,
        misses: Vec::new(),
    };
    for &(alpha, t, expected, _) in table {
        let row = report.row(alpha, t).expect("study covers the table");
        for (k, &n) in steps.iter().enumerate() {
            if skip == Some((alpha, t, n)) {
                continue;
            }
            let got = row.error_at(n).expect("study covers the table");
            let rel = (got - expected[k]).abs() / expected[k];
            c.worst_rel = c.worst_rel.max(rel);
            c.entries += 1;
            if rel > tol {
                c.misses.push(format!(
                    "alpha {alpha}, t_N {t}, N {n}: {got:.3e} vs {:.3e} ({:+.1}%)",
                    expected[k],
                    100.0 * (got / expected[k] - 1.0)
                ));
            }
        }
    }
    c
}

/// Tail-rate check; `target` overrides the printed rate when given.
fn check_rates(report: &ConvergenceReport, table: &[Row], tol: f64, target: Option<f64>, out: &mut Outcome) -> f64 {
    let mut worst: f64 = 0.0;
    for &(alpha, t, _, printed) in table {
        let want = target.unwrap_or(printed);
        let got = report.row(alpha, t).expect("study covers the table").tail_rate();
        let dev = (got - want).abs();
        worst = worst.max(if dev.is_nan() { f64::INFINITY } else { dev });
        if !(dev <= tol) {
            out.fail(format!("alpha {alpha}, t_N {t}: tail rate {got:.3}, expected {want:.2} ± {tol}"));
        }
    }
    worst
}

fn entry_outcome(out: &mut Outcome, c: Comparison, tol: f64) {
    let n_miss = c.misses.len();
    for m in c.misses {
        out.fail(m);
    }
    out.summary.push_str(&format!(
        "{}/{} entries within {:.0}% (worst {:.1}%)",
        c.entries - n_miss,
        c.entries,
        100.0 * tol,
        100.0 * c.worst_rel
    ));
}

fn study(preset: Preset, scheme: Scheme) -> StudySpec {
    StudySpec::defaults(preset, scheme)
}

fn criterion_a(refs_time: f64, refs: &[Vec<f64>]) -> (Outcome, Outcome) {
    let p = preset_problem(Preset::A);
    let t = Instant::now();
    let corrected = run_study_against(&p, &study(Preset::A, Scheme::Corrected), refs).expect("corrected (a) study");
    let elapsed = refs_time + t.elapsed().as_secs_f64();
    let vanilla = run_study_against(&p, &study(Preset::A, Scheme::Vanilla), refs).expect("vanilla (a) study");
    print!("{}\n{}\n", to_markdown(&corrected, "a"), to_markdown(&vanilla, "a"));

    let mut c1 = Outcome::new();
    entry_outcome(&mut c1, compare_entries(&corrected, &A_CORRECTED, TABLE_REL, None), TABLE_REL);
    let w = check_rates(&corrected, &A_CORRECTED, RATE_TOL, None, &mut c1);
    if elapsed >= TABLE_A_SECONDS {
        c1.fail(format!("full table took {elapsed:.1} s, budget {TABLE_A_SECONDS} s"));
    }
    c1.summary.push_str(&format!("; worst tail-rate deviation {w:.3}; {elapsed:.1} s"));

    let mut c2 = Outcome::new();
    entry_outcome(&mut c2, compare_entries(&vanilla, &A_VANILLA, TABLE_REL, Some(A_VANILLA_SKIP)), TABLE_REL);
    let w = check_rates(&vanilla, &A_VANILLA, RATE_TOL, Some(1.0), &mut c2);
    c2.summary.push_str(&format!("; worst tail-rate deviation from 1.00: {w:.3}"));
    (c1, c2)
}

fn criterion_b() -> Outcome {
    let p = preset_problem(Preset::B);
    let refs = reference_set(&p, &study(Preset::B, Scheme::Corrected)).expect("(b) references");
    let corrected = run_study_against(&p, &study(Preset::B, Scheme::Corrected), &refs).expect("corrected (b) study");
    let vanilla = run_study_against(&p, &study(Preset::B, Scheme::Vanilla), &refs).expect("vanilla (b) study");
    print!("{}\n{}\n", to_markdown(&corrected, "b"), to_markdown(&vanilla, "b"));

    let mut out = Outcome::new();
    entry_outcome(&mut out, compare_entries(&corrected, &B_CORRECTED, TABLE_REL, None), TABLE_REL);
    let wc = check_rates(&corrected, &B_CORRECTED, RATE_TOL, None, &mut out);
    let wv = check_rates(&vanilla, &B_VANILLA, RATE_TOL, Some(1.0), &mut out);
    out.summary.push_str(&format!(
        "; worst corrected tail-rate deviation {wc:.3}; worst vanilla deviation from 1.00: {wv:.3}"
    ));
    out
}

/// Not a criterion: the same tables with `f = e^{-t} (1 + 2 χ_(0,1/2))`.
fn b_source_variant() -> String {
    let p = Problem {
        source: Source::function(|x, t: f64| (-t).exp() * if x < 0.5 { 3.0 } else { 1.0 }),
        ..preset_problem(Preset::B)
    };
    let refs = reference_set(&p, &study(Preset::B, Scheme::Corrected)).expect("variant references");
    let corrected = run_study_against(&p, &study(Preset::B, Scheme::Corrected), &refs).expect("variant study");
    let vanilla = run_study_against(&p, &study(Preset::B, Scheme::Vanilla), &refs).expect("variant study");
    let c = compare_entries(&corrected, &B_CORRECTED, TABLE_REL, None);
    let v = compare_entries(&vanilla, &B_VANILLA, TABLE_REL, Some((0.75, 1.0, 320)));
    format!(
        "source e^-t (1 + 2 chi): corrected {}/{} entries within 5% (worst {:.1}%), vanilla {}/{} (worst {:.1}%)",
        c.entries - c.misses.len(),
        c.entries,
        100.0 * c.worst_rel,
        v.entries - v.misses.len(),
        v.entries,
        100.0 * v.worst_rel
    )
}

fn criterion_c() -> Outcome {
    let p = preset_problem(Preset::C);
    let spec = study(Preset::C, Scheme::Corrected);
    let refs = reference_set(&p, &spec).expect("(c) references");
    let report = run_study_against(&p, &spec, &refs).expect("corrected (c) study");
    println!("{}", to_markdown(&report, "c"));
    let mut out = Outcome::new();
    entry_outcome(&mut out, compare_entries(&report, &C_CORRECTED, C_TABLE_REL, None), C_TABLE_REL);
    let w = check_rates(&report, &C_CORRECTED, C_RATE_TOL, None, &mut out);
    out.summary.push_str(&format!("; worst tail-rate deviation {w:.3}"));
    out
}

fn criterion_oracle() -> Outcome {
    let mesh = Mesh1D::new(1000).unwrap();
    let mass = assemble_mass(&mesh);
    let u0 = InitialData::Sine { mode: 1, amplitude: 1.0 };
    let mut out = Outcome::new();
    let mut parts = Vec::new();
    for alpha in [0.25, 0.5, 0.75] {
        let p = Problem::new("sine", alpha, 1.0, Coefficient::constant(1.0).unwrap(), u0.clone(), Source::Zero).unwrap();
        let spectral = exact_homogeneous(&mesh, 1.0, alpha, &u0, 1.0, 2).unwrap();
        let semi = semidiscrete_sine(&mesh, 1.0, alpha, 1, 1.0).unwrap();
        let run = |n| run_scheme(&p, &mesh, n, Scheme::Corrected, &Snapshots::Final).unwrap();
        let (half, full) = (run(1280), run(2560));
        let err = l2_distance(&mass, full.final_state(), &spectral);
        // order against the semidiscrete solution, which carries no spatial error
        let order = (l2_distance(&mass, half.final_state(), &semi) / l2_distance(&mass, full.final_state(), &semi)).log2();
        if !(err <= ORACLE_ERR) {
            out.fail(format!("alpha {alpha}: error {err:.3e} > {ORACLE_ERR:e}"));
        }
        if !(order >= ORACLE_ORDER) {
            out.fail(format!("alpha {alpha}: order {order:.3} < {ORACLE_ORDER}"));
        }
        parts.push(format!("alpha {alpha}: error {err:.2e}, order {order:.2}"));
    }
    out.summary = parts.join("; ");
    out
}

fn criterion_weights() -> Outcome {
    let mut out = Outcome::new();
    let w = generate_weights(1.0, Method::Bdf2, 5000).unwrap();
    let exact = [1.5, -2.0, 0.5];
    let dev = (0..=5000)
        .map(|j| (w[j] - exact.get(j).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    if !(dev <= WEIGHT_EXACT) {
        out.fail(format!("alpha = 1 weights deviate by {dev:e}"));
    }
    let mut gap: f64 = 0.0;
    for alpha in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let w = generate_weights(alpha, Method::Bdf2, 5000).unwrap();
        let r = recurrence_weights(&[1.5, -2.0, 0.5], alpha, 5000);
        for j in 0..=5000 {
            gap = gap.max((w[j] - r[j]).abs() / r[j].abs());
        }
        for method in [Method::Bdf1, Method::Bdf2] {
            let s = generate_weights(alpha, method, 5000).unwrap().partial_sums();
            if let Some(n) = (5..s.len()).find(|&n| s[n].abs() > s[n - 1].abs()) {
                out.fail(format!("alpha {alpha} {method}: |S_{n}| > |S_{}|", n - 1));
            }
        }
    }
    if !(gap <= WEIGHT_DUAL) {
        out.fail(format!("dual-route relative gap {gap:e} > {WEIGHT_DUAL:e}"));
    }
    out.summary = format!("alpha = 1 deviation {dev:e}; dual-route gap {gap:.2e} for j <= 5000; partial sums checked to 5000");
    out
}

fn criterion_verify() -> Outcome {
    let mut out = Outcome::new();
    match Command::new(env!("CARGO_BIN_EXE_subdiff")).arg("verify").output() {
        Ok(o) => {
            let text = String::from_utf8_lossy(&o.stdout);
            out.summary = format!(
                "exit status {}; {}",
                o.status.code().map_or("signal".into(), |c| c.to_string()),
                text.lines().last().unwrap_or("")
            );
            if !o.status.success() {
                for l in text.lines().filter(|l| l.starts_with("FAIL")) {
                    out.fail(l.to_string());
                }
                out.passed = false;
            }
        }
        Err(e) => out.fail(format!("could not run the binary: {e}")),
    }
    out
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let t = Instant::now();
    let refs_a = reference_set(&preset_problem(Preset::A), &study(Preset::A, Scheme::Corrected)).expect("(a) references");
    let (c1, c2) = criterion_a(t.elapsed().as_secs_f64(), &refs_a);
    results.push(("1 corrected scheme, example (a) table", c1));
    results.push(("2 vanilla scheme, example (a) table", c2));
    results.push(("3 example (b) tables", criterion_b()));
    let variant = b_source_variant();
    results.push(("4 example (c) corrected table", criterion_c()));
    results.push(("5 oracle equivalence, constant coefficient", criterion_oracle()));
    results.push(("6 weight suite", criterion_weights()));
    results.push(("7 verify subcommand", criterion_verify()));

    println!("acceptance criteria");
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.summary);
        for n in o.notes.iter().take(8) {
            println!("       {n}");
        }
        if o.notes.len() > 8 {
            println!("       ... {} more", o.notes.len() - 8);
        }
        failed += usize::from(!o.passed);
    }
    println!("[INFO] example (b) with {variant}");
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
