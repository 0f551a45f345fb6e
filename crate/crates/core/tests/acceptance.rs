//! Acceptance criteria 1–10. Each test prints one `criterion N: PASS|FAIL`
//! line with its measurements, then asserts the outcome.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qga_photonics::active_learning::{preset, run_loop, IterationRecord, LoopOutcome, SurrogateChoice};
use qga_photonics::baselines::{cga_evolve, exhaustive_search, CgaConfig, ExhaustiveResult};
use qga_photonics::commands::{
    cmd_compare, cmd_optimize, cmd_rmse_study, compare_preset, generations_to_threshold, rmse_study, summarize_rmse,
    Algorithm, Invocation,
};
use qga_photonics::config::RunConfig;
use qga_photonics::optics::{fom_from_transmittance, stack_response};
use qga_photonics::qga::{
    evolve_with, rotation_direction, ry_apply, x_apply, Incumbent, QgaConfig, QuantumChromosome, QubitPair,
};
use qga_photonics::rng::{seeded, stream};
use qga_photonics::surrogate::FmModel;
use qga_photonics::{StructureCode, TrcProblem};
use rand::Rng;
use rand_distr::{Distribution, Normal};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn report(criterion: u32, pass: bool, detail: String) {
    println!("criterion {criterion}: {}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn oracle(problem: &TrcProblem) -> ExhaustiveResult {
    exhaustive_search(|c| problem.fitness(c), problem.code_length(), 20).expect("small space")
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// TMM labels spent when the labeled set first contained an optimum.
fn labels_to_optimum(outcome: &LoopOutcome, initial: usize, truth: &ExhaustiveResult) -> Option<u64> {
    if outcome.records.is_empty() || outcome.dataset.codes()[..initial].iter().any(|c| truth.is_optimal(c)) {
        return Some(initial as u64);
    }
    outcome
        .records
        .iter()
        .find(|r: &&IterationRecord| truth.is_optimal(&r.labeled_code))
        .map(|r| r.tmm_evaluations)
}

#[test]
fn criterion_01_active_learning_matches_exhaustive_n6() {
    let problem = TrcProblem::bundled(6);
    let truth = oracle(&problem);
    let mut hits = 0;
    let mut slowest = Duration::ZERO;
    let mut finals = Vec::new();
    for seed in SEEDS {
        let start = Instant::now();
        let out = run_loop(&preset("n6").unwrap().loop_config(seed), &problem).unwrap();
        slowest = slowest.max(start.elapsed());
        if truth.is_optimal(&out.best_code) {
            hits += 1;
        }
        finals.push(format!("{:.4}", out.best_true_fom));
    }
    report(
        1,
        hits >= 4 && slowest < Duration::from_secs(300),
        format!(
            "{hits}/5 runs returned an exhaustive optimum (FOM {:.4}); final FOMs {finals:?}; slowest run {slowest:.1?}",
            -truth.best_fitness / 100.0
        ),
    );
}

#[test]
fn criterion_02_budget_accounting_n6() {
    let problem = TrcProblem::bundled(6);
    let p = preset("n6").unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for seed in SEEDS {
        let cfg = p.loop_config(seed);
        let out = run_loop(&cfg, &problem).unwrap();
        let tmm = out.records.last().unwrap().tmm_evaluations;
        let full = out.records.len() == cfg.max_iterations && out.records.iter().all(|r| r.generations == p.generations);
        ok &= out.surrogate_evaluations <= 25_000 && tmm <= 35 && (!full || out.surrogate_evaluations == 25_000);
        ok &= tmm == out.dataset.len() as u64;
        lines.push(format!("seed {seed}: {} surrogate, {tmm} TMM", out.surrogate_evaluations));
    }
    // No early exit: stagnation never fires and convergence needs more repeats than iterations.
    let mut cfg = p.loop_config(9);
    cfg.qga.stagnation_fraction = 1.0;
    cfg.convergence_repeats = 11;
    let out = run_loop(&cfg, &problem).unwrap();
    let exact = out.surrogate_evaluations == 25_000 && out.records.last().unwrap().tmm_evaluations == 35;
    lines.push(format!("no early exit: {} surrogate", out.surrogate_evaluations));
    report(2, ok && exact, lines.join("; "));
}

#[test]
fn criterion_03_labels_to_optimum_qga_vs_cga_n8() {
    let problem = TrcProblem::bundled(8);
    let truth = oracle(&problem);
    let p = preset("n8").unwrap();
    let mut qga = Vec::new();
    let mut cga = Vec::new();
    for seed in SEEDS {
        let out = run_loop(&p.loop_config(seed), &problem).unwrap();
        qga.push(labels_to_optimum(&out, p.initial_dataset_size, &truth).map_or(f64::INFINITY, |n| n as f64));

        // Evaluations capped at the size of the space.
        let cfg = CgaConfig { generations: 1 + (65_536 - 50) / 49, rng_seed: seed, ..CgaConfig::default() };
        let mut f = |c: &StructureCode| problem.fitness(c);
        let run = cga_evolve(&cfg, &mut f, 16).unwrap();
        let first = run
            .trace
            .iter()
            .find(|g| truth.is_optimal(&g.alltime_best_code))
            .map_or(f64::INFINITY, |g| g.evaluations as f64);
        cga.push(first);
    }
    let (mq, mc) = (median(qga.clone()), median(cga.clone()));
    report(
        3,
        mq < mc,
        format!("median labels to optimum: QGA+RF {mq} {qga:?}, CGA {mc} {cga:?} (inf = never)"),
    );
}

#[test]
fn criterion_04_gate_algebra() {
    let mut rng = seeded(4, stream::STUDY);
    let mut worst_norm: f64 = 0.0;
    let mut qubits: Vec<QubitPair> = (0..1000).map(|_| QubitPair::new(rng.random(), rng.random()).unwrap()).collect();
    for _ in 0..1000 {
        for q in &mut qubits {
            *q = if rng.random::<f64>() < 0.5 { ry_apply(*q, rng.random_range(-PI..PI)) } else { x_apply(*q) };
            worst_norm = worst_norm.max((q.norm_sqr() - 1.0).abs());
        }
    }
    let mut worst_compose: f64 = 0.0;
    for _ in 0..10_000 {
        let angle = rng.random_range(0.0..2.0 * PI);
        let q = QubitPair { a: angle.cos(), b: angle.sin() };
        let (t1, t2) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let lhs = ry_apply(ry_apply(q, t1), t2);
        let rhs = ry_apply(q, t1 + t2);
        worst_compose = worst_compose.max((lhs.a - rhs.a).abs().max((lhs.b - rhs.b).abs()));
    }
    // Zero rows of the direction table: equal bits, in every amplitude case.
    let mut zero_rows = true;
    for (x, best) in [(0, 0), (1, 1)] {
        for better in [false, true] {
            for (a, b) in [(0.6, 0.8), (0.6, -0.8), (0.0, 1.0), (1.0, 0.0)] {
                zero_rows &= rotation_direction(x, best, better, a, b, &mut rng) == 0;
            }
        }
    }
    // A chromosome whose every measurement equals the incumbent is never rotated.
    let chromosome = QuantumChromosome::new((0..12).map(|i| if i % 2 == 0 { QubitPair::one() } else { QubitPair::zero() }).collect());
    let cfg = QgaConfig { mutation_rate: 0.0, ..QgaConfig::default() };
    let incumbent = Incumbent { code: chromosome.mode(), fitness: 0.0 };
    let mut f = |_: &StructureCode| Ok(0.0);
    let out = evolve_with(&cfg, &mut f, chromosome.clone(), Some(incumbent), &mut rng).unwrap();
    let untouched = out.chromosome.qubits().iter().zip(chromosome.qubits()).all(|(p, q)| {
        p.a.to_bits() == q.a.to_bits() && p.b.to_bits() == q.b.to_bits()
    });
    report(
        4,
        worst_norm <= 1e-9 && worst_compose <= 1e-10 && zero_rows && untouched,
        format!(
            "max |norm−1| over 10⁶ gates {worst_norm:.1e}; max composition error {worst_compose:.1e}; zero rows {zero_rows}; bit-identical {untouched}"
        ),
    );
}

#[test]
fn criterion_05_measurement_statistics() {
    let mut rng = seeded(5, stream::STUDY);
    let shots = 100_000;
    let (mut within, mut total) = (0usize, 0usize);
    for _ in 0..100 {
        let chromosome = QuantumChromosome::new(
            (0..10)
                .map(|_| {
                    let angle = rng.random_range(0.0..2.0 * PI);
                    QubitPair { a: angle.cos(), b: angle.sin() }
                })
                .collect(),
        );
        let mut ones = vec![0usize; 10];
        for _ in 0..shots {
            for (k, &bit) in chromosome.measure(&mut rng).bits().iter().enumerate() {
                ones[k] += usize::from(bit);
            }
        }
        for (q, &count) in chromosome.qubits().iter().zip(&ones) {
            let p = q.p_one();
            let sd = (p * (1.0 - p) / shots as f64).sqrt();
            let freq = count as f64 / shots as f64;
            within += usize::from((freq - p).abs() <= 3.0 * sd);
            total += 1;
        }
    }
    let share = within as f64 / total as f64;
    report(5, share >= 0.99, format!("{within}/{total} bit frequencies within 3σ ({:.2}%)", 100.0 * share));
}

fn airy(n0: f64, film: Complex64, ns: f64, d: f64, w: f64) -> f64 {
    let (n0c, nsc) = (Complex64::new(n0, 0.0), Complex64::new(ns, 0.0));
    let r01 = (n0c - film) / (n0c + film);
    let r12 = (film - nsc) / (film + nsc);
    let t = 2.0 * n0c / (n0c + film) * 2.0 * film / (film + nsc);
    let phase = (-Complex64::i() * film * (2.0 * PI * d / w)).exp();
    ns / n0 * (t * phase / (1.0 + r01 * r12 * phase * phase)).norm_sqr()
}

#[test]
fn criterion_06_tmm_correctness() {
    let mut rng = seeded(6, stream::STUDY);
    let mut airy_err: f64 = 0.0;
    for _ in 0..1000 {
        let film = Complex64::new(rng.random_range(1.2..3.0), -rng.random_range(0.0..0.5));
        let (d, w) = (rng.random_range(1.0..500.0), rng.random_range(300.0..2500.0));
        let (n0, ns) = (rng.random_range(1.0..2.0), rng.random_range(1.0..2.0));
        let t = stack_response(&[film], &[d], w, n0, ns).unwrap().transmittance;
        airy_err = airy_err.max((t - airy(n0, film, ns, d, w)).abs());
    }
    let mut energy_err: f64 = 0.0;
    for _ in 0..10_000 {
        let layers = rng.random_range(1..=20);
        let idx: Vec<Complex64> = (0..layers).map(|_| Complex64::new(rng.random_range(1.2..3.0), 0.0)).collect();
        let d: Vec<f64> = (0..layers).map(|_| rng.random_range(1.0..400.0)).collect();
        let r = stack_response(&idx, &d, rng.random_range(300.0..2500.0), 1.0, rng.random_range(1.0..2.0)).unwrap();
        energy_err = energy_err.max((r.transmittance + r.reflectance - 1.0).abs());
    }
    let grid = TrcProblem::bundled(1).grid().clone();
    let ideal = fom_from_transmittance(&grid, grid.ideal()).value();
    report(
        6,
        airy_err <= 1e-10 && energy_err <= 1e-8 && ideal == 0.0,
        format!("max Airy deviation {airy_err:.1e}; max |R+T−1| {energy_err:.1e}; FOM(ideal) {ideal}"),
    );
}

#[test]
fn criterion_07_forest_error_not_above_fm_n16() {
    let mut config = RunConfig::default();
    config.run.seed = 7;
    config.study.layers = vec![16];
    config.study.train_sizes = vec![100];
    config.study.repeats = 10;
    let start = Instant::now();
    let rows = rmse_study(&config).unwrap();
    let elapsed = start.elapsed();
    let summary = summarize_rmse(&rows);
    let mean = |m| summary.iter().find(|s| s.0 == m).map(|s| (s.4, s.5)).unwrap();
    let (rf, fm) = (mean(SurrogateChoice::RandomForest), mean(SurrogateChoice::FactorizationMachine));
    report(
        7,
        rf.0 <= fm.0 && elapsed < Duration::from_secs(600),
        format!(
            "test RMSE RF {:.4} ± {:.4}, FM {:.4} ± {:.4} (mean ± SEM, 10 repeats); study took {elapsed:.1?}",
            rf.0, rf.1, fm.0, fm.1
        ),
    );
}

#[test]
fn criterion_08_fm_gradient_check() {
    let mut rng = seeded(8, stream::STUDY);
    let normal = Normal::new(0.0, 0.5).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (features, rank) = (rng.random_range(2..16), rng.random_range(1..6));
        let mut m = FmModel::zeros(features, rank);
        m.w0 = normal.sample(&mut rng);
        m.w.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
        m.v.iter_mut().flatten().for_each(|v| *v = normal.sample(&mut rng));
        let x: Vec<f64> = (0..features).map(|_| f64::from(u8::from(rng.random::<bool>()))).collect();
        let (y, l2) = (rng.random_range(-2.0..2.0), rng.random_range(0.0..0.1));
        let g = m.gradient(&x, y, l2);
        // Quadratic in each single parameter: central differences are exact up to rounding.
        let h = 1e-3;
        let numeric = |edit: &dyn Fn(&mut FmModel, f64)| {
            let (mut p, mut q) = (m.clone(), m.clone());
            edit(&mut p, h);
            edit(&mut q, -h);
            (p.loss(&x, y, l2) - q.loss(&x, y, l2)) / (2.0 * h)
        };
        let mut check = |a: f64, n: f64| worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(1e-8));
        check(g.w0, numeric(&|m, d| m.w0 += d));
        for i in 0..features {
            check(g.w[i], numeric(&|m, d| m.w[i] += d));
            for f in 0..rank {
                check(g.v[i][f], numeric(&|m, d| m.v[i][f] += d));
            }
        }
    }
    report(8, worst <= 1e-5, format!("max relative gradient error {worst:.1e} over 100 draws"));
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_09_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(
        &config,
        "[run]\nseed = 9\n[cga]\ngenerations = 30\n\
         [study]\nlayers = [6]\ntrain_sizes = [20, 40]\nrepeats = 2\ntest_size = 50\n\
         [compare]\npresets = [\"n8\"]\nmax_iterations = 3\nmax_generations = 30\n",
    )
    .unwrap();
    let inv = |name: &str, preset: Option<&str>| Invocation {
        config_path: Some(config.clone()),
        preset: preset.map(str::to_string),
        out_dir: dir.path().join(name),
        ..Default::default()
    };
    let mut compared = 0;
    let mut identical = true;
    for round in ["a", "b"] {
        cmd_optimize(&inv(&format!("{round}-qga"), Some("n6")), Algorithm::Qga).unwrap();
        cmd_optimize(&inv(&format!("{round}-cga"), Some("n6")), Algorithm::Cga).unwrap();
        cmd_rmse_study(&inv(&format!("{round}-study"), None)).unwrap();
        cmd_compare(&inv(&format!("{round}-compare"), None)).unwrap();
    }
    for run in ["qga", "cga", "study", "compare"] {
        let a = csv_files(&dir.path().join(format!("a-{run}")));
        let b = csv_files(&dir.path().join(format!("b-{run}")));
        identical &= !a.is_empty() && a == b;
        compared += a.len();
    }
    report(9, identical, format!("{compared} CSV files compared across optimize (qga, cga), rmse-study and compare"));
}

#[test]
fn criterion_10_forest_reaches_threshold_no_later_than_fm_n16() {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in SEEDS {
        // Full preset budget: 50 iterations × 800 generations × 100 measurements.
        let mut config = RunConfig::from_preset("n16").unwrap();
        config.run.seed = seed;
        let run = compare_preset(&config, "n16").unwrap();
        let t = run.threshold();
        let rf = generations_to_threshold(&run.forest.records, t);
        let fm = generations_to_threshold(&run.fm.records, t);
        let win = match (rf, fm) {
            (Some(r), Some(f)) => r <= f,
            (Some(_), None) => true,
            _ => false,
        };
        wins += usize::from(win);
        let show = |g: Option<usize>| g.map_or("never".into(), |g| g.to_string());
        lines.push(format!("seed {seed}: threshold {t:.4}, RF {} FM {}", show(rf), show(fm)));
    }
    report(
        10,
        wins >= 3,
        format!("RF no slower in {wins}/5 seeds; {}", lines.join("; ")),
    );
}
