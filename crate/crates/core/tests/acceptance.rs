//! End-to-end acceptance gates for the toolkit, one test per criterion.
//!
//! Every test prints a single `criterion N (...): PASS/FAIL` line (visible
//! with `--nocapture`, or in the failure output otherwise). All reported
//! numbers are deterministic for the seeds pinned below; wall times are the
//! only run-to-run variation. Desk-scale settings (truncation order 8,
//! 8 profile slices, 512 training pairs per class, 31-point fit grid) keep
//! the whole suite runnable on a laptop; the `full_scale_*` tests behind
//! `#[ignore]` run the same studies at full training size.

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scatfit_core::forward::{
    film_reflection, rcwa_orders, rcwa_reflection, simulate_signature, ConcreteLayer,
    ConcreteShape, ConcreteStructure, IncidenceConfig, Polarization, Signature, StructureModel,
};
use scatfit_core::lm::{lm_minimize, FitResult, LmConfig};
use scatfit_core::materials::{DispersionTable, MaterialLibrary};
use scatfit_core::pipeline::{
    child_seed, classifier_wavelengths, generate_training_sets, kernel_sweep, map_to_subranges,
    reconstruct, run_benchmark, simulate_at_points, train_classifiers, BenchReport,
    ClassifierBundle, Method, ParamSpec, ParameterSpace, SubrangeMapping, SweepCellResult,
    SweepCellSpec,
};
use scatfit_core::signature::{inject_errors, subsample, ErrorSpec};
use scatfit_core::svm::oracle::{dual_objective, kkt_max_violation, qp_dual_oracle};
use scatfit_core::svm::{
    classification_accuracy, kernel_eval, ovo_train, smo_train, KernelSpec, TrainConfig,
    TrainingSet,
};

const TRAIN_SEED: u64 = 41;
const BENCH_SEED: u64 = 101;
const SWEEP_SEED: u64 = 211;
const NOISE_SEED: u64 = 7;
const N_TEST: usize = 100;
const K_SI: usize = 11;
const K_ML: usize = 21;

fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn lm_cfg() -> LmConfig {
    LmConfig {
        max_iterations: 60,
        ..LmConfig::default()
    }
}

fn clean_spec() -> ErrorSpec {
    ErrorSpec {
        random_magnitude: 0.0,
        offset_magnitude: 0.0,
        seed: NOISE_SEED,
    }
}

/// Prints the per-criterion verdict line and panics with details on failure.
fn conclude(tag: &str, elapsed_s: f64, detail: &str, failures: Vec<String>) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("{tag}: {verdict} ({elapsed_s:.1} s) {detail}");
    assert!(
        failures.is_empty(),
        "{tag} failed:\n  {}",
        failures.join("\n  ")
    );
}

// ---------------------------------------------------------------------------
// Shared desk-scale setups (match data/configs/si_desk.toml and
// data/configs/multilayer.toml).
// ---------------------------------------------------------------------------

struct Setup {
    lib: MaterialLibrary,
    model: StructureModel,
    inc: IncidenceConfig,
    fit_inc: IncidenceConfig,
    space: ParameterSpace,
}

fn param(name: &str, range: (f64, f64), s_sub: usize, s_full: usize) -> ParamSpec {
    ParamSpec {
        name: name.into(),
        rough_range: range,
        n_subranges: 4,
        samples_per_subrange: s_sub,
        samples_full_range: s_full,
    }
}

static DESK: Lazy<Setup> = Lazy::new(|| {
    let lib = MaterialLibrary::load_dir(data_dir().join("materials")).unwrap();
    let mut model = StructureModel::load(data_dir().join("structures/si_grating.toml")).unwrap();
    model.slice_count = 8;
    let grid = IncidenceConfig::regular_grid(200.0, 800.0, 10.0).unwrap();
    let inc = IncidenceConfig::new(65.0, 0.0, grid.clone(), 8).unwrap();
    let fit_grid = classifier_wavelengths(&grid, 31).unwrap();
    let fit_inc = IncidenceConfig::new(65.0, 0.0, fit_grid, 8).unwrap();
    // 8 x 8 x 8 = 512 training pairs per class for every classifier.
    let space = ParameterSpace::new(vec![
        param("TCD", (250.0, 550.0), 8, 8),
        param("Hgt", (300.0, 600.0), 8, 8),
        param("BCD", (250.0, 550.0), 8, 8),
    ])
    .unwrap();
    Setup {
        lib,
        model,
        inc,
        fit_inc,
        space,
    }
});

static ML: Lazy<Setup> = Lazy::new(|| {
    let lib = MaterialLibrary::load_dir(data_dir().join("materials")).unwrap();
    let model = StructureModel::load(data_dir().join("structures/multilayer.toml")).unwrap();
    let grid = IncidenceConfig::regular_grid(200.0, 800.0, 10.0).unwrap();
    let inc = IncidenceConfig::new(65.0, 0.0, grid, 6).unwrap();
    // Thin lamellar stack: fitting uses the full 61-point grid.
    let fit_inc = inc.clone();
    // 2 x 3^5 = 486 training pairs per class for every classifier.
    let space = ParameterSpace::new(vec![
        param("D1", (50.0, 100.0), 2, 3),
        param("H1", (110.0, 160.0), 2, 3),
        param("D2", (60.0, 110.0), 2, 3),
        param("H2", (1.0, 19.0), 2, 3),
        param("D3", (100.0, 150.0), 2, 3),
        param("H3", (110.0, 160.0), 2, 3),
    ])
    .unwrap();
    Setup {
        lib,
        model,
        inc,
        fit_inc,
        space,
    }
});

fn train_si_bundle() -> ClassifierBundle {
    let d = &*DESK;
    train_classifiers(
        &d.lib,
        &d.space,
        &d.model,
        &d.inc,
        &KernelSpec::rbf(1.0),
        K_SI,
        &TrainConfig::default(),
        TRAIN_SEED,
    )
    .unwrap()
}

fn train_ml_bundle() -> ClassifierBundle {
    let m = &*ML;
    train_classifiers(
        &m.lib,
        &m.space,
        &m.model,
        &m.inc,
        &KernelSpec::rbf(1.0),
        K_ML,
        &TrainConfig::default(),
        TRAIN_SEED,
    )
    .unwrap()
}

/// (bundle, training wall seconds); trained once, shared by several tests.
static SI_BUNDLE: Lazy<(ClassifierBundle, f64)> = Lazy::new(|| {
    let t0 = Instant::now();
    let b = train_si_bundle();
    (b, t0.elapsed().as_secs_f64())
});

static ML_BUNDLE: Lazy<(ClassifierBundle, f64)> = Lazy::new(|| {
    let t0 = Instant::now();
    let b = train_ml_bundle();
    (b, t0.elapsed().as_secs_f64())
});

/// Held-out test truths drawn exactly like the sweep harness draws them.
fn sweep_test_truths(space: &ParameterSpace, n: usize, seed: u64) -> Vec<BTreeMap<String, f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 1));
    (0..n)
        .map(|_| {
            space
                .params
                .iter()
                .map(|p| {
                    let (lo, hi) = p.rough_range;
                    (p.name.clone(), rng.gen_range(lo..hi))
                })
                .collect()
        })
        .collect()
}

fn in_subrange(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

// ---------------------------------------------------------------------------
// Fingerprints: bit-exact encodings of every reported number, wall times
// excluded, used by the determinism criterion.
// ---------------------------------------------------------------------------

fn bits(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

fn fp_params(p: &BTreeMap<String, f64>) -> String {
    p.iter()
        .map(|(k, v)| format!("{k}={}", bits(*v)))
        .collect::<Vec<_>>()
        .join(",")
}

fn fp_mappings(ms: &[SubrangeMapping]) -> String {
    ms.iter()
        .map(|m| {
            format!(
                "{}:{}:{}:{}:{}",
                m.parameter,
                m.class_label,
                bits(m.subrange.0),
                bits(m.subrange.1),
                bits(m.median_nm)
            )
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn fp_sweep(cells: &[SweepCellResult]) -> String {
    cells
        .iter()
        .map(|c| format!("{} {} {}", c.spec.label, c.pairs_per_class, bits(c.accuracy)))
        .collect::<Vec<_>>()
        .join("\n")
}

fn fp_bench(r: &BenchReport) -> String {
    let mut out = String::new();
    for c in &r.cases {
        out.push_str(&format!(
            "{} {} {} {} | {} | {} | {} | {} | {}\n",
            c.case_index,
            c.method,
            c.converged,
            c.iterations,
            fp_params(&c.true_params),
            fp_params(&c.extracted),
            fp_params(&c.abs_errors_nm),
            c.mapped.as_deref().map_or("-".into(), fp_mappings),
            c.failure.as_deref().unwrap_or("-"),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 3: classification accuracy at desk scale.
// ---------------------------------------------------------------------------

struct Crit3 {
    sizes: Vec<SweepCellResult>,
    sigmoid: Vec<SweepCellResult>,
    elapsed_s: f64,
}

fn compute_crit3() -> Crit3 {
    let d = &*DESK;
    let t0 = Instant::now();
    let size_cells: Vec<SweepCellSpec> = [2usize, 4, 8]
        .iter()
        .map(|&s| SweepCellSpec {
            label: format!("rbf-{}", 64 * s),
            kernel: KernelSpec::rbf(1.0),
            k_points: K_SI,
            samples_per_subrange: s,
            error: clean_spec(),
        })
        .collect();
    let sizes = kernel_sweep(
        &d.lib,
        &d.space,
        &d.model,
        &d.inc,
        0,
        &size_cells,
        N_TEST,
        &TrainConfig::default(),
        SWEEP_SEED,
    )
    .unwrap();

    let sigmoid_cells: Vec<SweepCellSpec> = [0.01, 1.0, 100.0]
        .iter()
        .map(|&b| SweepCellSpec {
            label: format!("sigmoid-{b}"),
            kernel: KernelSpec::sigmoid(b),
            k_points: K_SI,
            samples_per_subrange: 8,
            error: clean_spec(),
        })
        .collect();
    // The sigmoid kernel is indefinite, so pair optimization has no
    // convergence guarantee; a finite update budget makes the sweep
    // terminate and the partially-optimized model is scored as-is.
    let sigmoid_cfg = TrainConfig {
        max_iter: 200_000,
        ..TrainConfig::default()
    };
    let sigmoid = kernel_sweep(
        &d.lib,
        &d.space,
        &d.model,
        &d.inc,
        0,
        &sigmoid_cells,
        N_TEST,
        &sigmoid_cfg,
        SWEEP_SEED,
    )
    .unwrap();

    Crit3 {
        sizes,
        sigmoid,
        elapsed_s: t0.elapsed().as_secs_f64(),
    }
}

static CRIT3: Lazy<Crit3> = Lazy::new(compute_crit3);

#[test]
fn criterion_3_classification_accuracy() {
    let c = &*CRIT3;
    let mut failures = Vec::new();

    let accs: Vec<f64> = c.sizes.iter().map(|r| r.accuracy).collect();
    let headline = *accs.last().unwrap();
    if headline < 0.85 {
        failures.push(format!(
            "rbf sigma=1 at 512 pairs/class: accuracy {headline} < 0.85"
        ));
    }
    for w in accs.windows(2) {
        if w[1] < w[0] {
            failures.push(format!(
                "accuracy not non-decreasing in training size: {:?}",
                accs
            ));
            break;
        }
    }
    for r in &c.sigmoid {
        if r.accuracy >= 0.60 {
            failures.push(format!(
                "sigmoid cell {} accuracy {} >= 0.60",
                r.spec.label, r.accuracy
            ));
        }
    }
    if c.elapsed_s > 1200.0 {
        failures.push(format!("runtime {:.0} s exceeds 20 min", c.elapsed_s));
    }

    let detail = format!(
        "rbf sizes 128/256/512 -> {:?}, sigmoid max {:.3}",
        accs,
        c.sigmoid
            .iter()
            .map(|r| r.accuracy)
            .fold(0.0f64, f64::max)
    );
    conclude(
        "criterion 3 (classification accuracy)",
        c.elapsed_s,
        &detail,
        failures,
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: noise robustness.
// ---------------------------------------------------------------------------

struct Crit4 {
    per_param: Vec<(String, f64)>,
    rbf: Vec<f64>,
    poly: Vec<f64>,
    elapsed_s: f64,
}

fn compute_crit4(bundle: &ClassifierBundle) -> Crit4 {
    let d = &*DESK;
    let t0 = Instant::now();
    let truths = sweep_test_truths(&d.space, N_TEST, SWEEP_SEED);
    let clean: Vec<Signature> = truths
        .iter()
        .map(|t| simulate_at_points(&d.lib, &d.model, t, &d.inc, &bundle.wavelengths).unwrap())
        .collect();

    // (a) per-parameter accuracy under random+offset errors of 0.05/0.05.
    let mut hits = vec![0usize; d.space.params.len()];
    for (t, (truth, sig)) in truths.iter().zip(&clean).enumerate() {
        let spec = ErrorSpec {
            random_magnitude: 0.05,
            offset_magnitude: 0.05,
            seed: child_seed(NOISE_SEED, t as u64),
        };
        let noisy = inject_errors(sig, &spec).unwrap();
        let mappings = map_to_subranges(bundle, &noisy).unwrap();
        for (i, m) in mappings.iter().enumerate() {
            if in_subrange(truth[&m.parameter], m.subrange) {
                hits[i] += 1;
            }
        }
    }
    let per_param: Vec<(String, f64)> = d
        .space
        .names()
        .into_iter()
        .zip(hits)
        .map(|(n, h)| (n, h as f64 / N_TEST as f64))
        .collect();

    // (b) rbf vs polynomial means under random error 0.10, three seeds.
    // Training matches the sweep harness (same draw stream); classifiers
    // are trained once per kernel and scored under each error seed.
    let ts = generate_training_sets(
        &d.lib,
        &d.space,
        0,
        &d.model,
        &d.inc,
        K_SI,
        child_seed(SWEEP_SEED, 0),
    )
    .unwrap();
    let class_map: BTreeMap<i32, (f64, f64)> = d
        .space
        .subranges(0)
        .into_iter()
        .enumerate()
        .map(|(j, r)| (j as i32, r))
        .collect();
    let labels: Vec<i32> = truths
        .iter()
        .map(|t| d.space.subrange_index(0, t["TCD"]).unwrap() as i32)
        .collect();
    let mut kernel_accs: Vec<Vec<f64>> = Vec::new();
    for kernel in [KernelSpec::rbf(1.0), KernelSpec::polynomial(5)] {
        let model = ovo_train(&ts, &kernel, &TrainConfig::default(), &class_map).unwrap();
        let mut accs = Vec::new();
        for s in 0..3u64 {
            let features: Vec<Vec<f64>> = clean
                .iter()
                .enumerate()
                .map(|(t, sig)| {
                    let spec = ErrorSpec {
                        random_magnitude: 0.10,
                        offset_magnitude: 0.0,
                        seed: child_seed(NOISE_SEED + s, t as u64),
                    };
                    let noisy = inject_errors(sig, &spec).unwrap();
                    subsample(&noisy, K_SI).unwrap().values
                })
                .collect();
            let set = TrainingSet::new(features, labels.clone()).unwrap();
            accs.push(classification_accuracy(&model, &set).unwrap());
        }
        kernel_accs.push(accs);
    }

    Crit4 {
        per_param,
        rbf: kernel_accs[0].clone(),
        poly: kernel_accs[1].clone(),
        elapsed_s: t0.elapsed().as_secs_f64(),
    }
}

static CRIT4: Lazy<Crit4> = Lazy::new(|| compute_crit4(&SI_BUNDLE.0));

fn fp_crit4(c: &Crit4) -> String {
    format!(
        "{} | rbf {} | poly {}",
        c.per_param
            .iter()
            .map(|(n, a)| format!("{n}={}", bits(*a)))
            .collect::<Vec<_>>()
            .join(","),
        c.rbf.iter().map(|a| bits(*a)).collect::<Vec<_>>().join(","),
        c.poly.iter().map(|a| bits(*a)).collect::<Vec<_>>().join(","),
    )
}

#[test]
fn criterion_4_noise_robustness() {
    let c = &*CRIT4;
    let mut failures = Vec::new();
    for (name, acc) in &c.per_param {
        if *acc < 0.80 {
            failures.push(format!(
                "{name}: accuracy {acc} < 0.80 at error magnitudes 0.05/0.05"
            ));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (rbf_mean, poly_mean) = (mean(&c.rbf), mean(&c.poly));
    if rbf_mean < poly_mean {
        failures.push(format!(
            "rbf mean {rbf_mean} < polynomial mean {poly_mean} at random magnitude 0.10"
        ));
    }
    let detail = format!(
        "noisy per-param {:?}, rbf mean {rbf_mean:.3} vs poly mean {poly_mean:.3}",
        c.per_param
            .iter()
            .map(|(n, a)| format!("{n} {a:.2}"))
            .collect::<Vec<_>>()
    );
    conclude(
        "criterion 4 (noise robustness)",
        c.elapsed_s,
        &detail,
        failures,
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: guided vs unguided benchmark.
// ---------------------------------------------------------------------------

struct Crit5 {
    report: BenchReport,
    elapsed_s: f64,
}

fn compute_crit5(bundle: &ClassifierBundle) -> Crit5 {
    let d = &*DESK;
    let t0 = Instant::now();
    let errors = ErrorSpec {
        random_magnitude: 0.05,
        offset_magnitude: 0.05,
        seed: 0, // replaced per case by the benchmark harness
    };
    let report = run_benchmark(
        &d.lib,
        &d.space,
        &d.model,
        &d.fit_inc,
        Some(bundle),
        50,
        &errors,
        &[Method::SvmLm, Method::LmOnly],
        &lm_cfg(),
        BENCH_SEED,
    )
    .unwrap();
    Crit5 {
        report,
        elapsed_s: t0.elapsed().as_secs_f64(),
    }
}

static CRIT5: Lazy<Crit5> = Lazy::new(|| compute_crit5(&SI_BUNDLE.0));

#[test]
fn criterion_5_guided_vs_unguided_benchmark() {
    let c = &*CRIT5;
    let r = &c.report;
    let mut failures = Vec::new();

    let mut medians = Vec::new();
    for p in &r.param_names {
        let m = r.median_abs_error(Method::SvmLm, p).unwrap();
        medians.push(format!("{p} {m:.2}"));
        if m > 2.0 {
            failures.push(format!("svm_lm median |error| for {p}: {m} nm > 2 nm"));
        }
    }
    let conv = r.convergence_rate(Method::SvmLm).unwrap();
    if conv < 0.95 {
        failures.push(format!("svm_lm convergence rate {conv} < 0.95"));
    }
    let bad_lm = r.bad_case_count(Method::LmOnly, 10.0);
    let bad_svm = r.bad_case_count(Method::SvmLm, 10.0);
    if bad_lm < 1 {
        failures.push("lm_only produced no non-converged or >10 nm case".into());
    }
    if bad_svm >= bad_lm {
        failures.push(format!(
            "svm_lm bad cases {bad_svm} not strictly fewer than lm_only {bad_lm}"
        ));
    }

    // Cases where both methods converged into the same basin must agree to
    // solver precision: far below any reported digit, far above float fuzz.
    let by_case = |m: Method| {
        r.cases
            .iter()
            .filter(move |c| c.method == m && c.failure.is_none())
            .map(|c| (c.case_index, c))
            .collect::<BTreeMap<_, _>>()
    };
    let svm_cases = by_case(Method::SvmLm);
    let lm_cases = by_case(Method::LmOnly);
    let mut same_optimum = 0usize;
    let mut worst_gap: f64 = 0.0;
    for (idx, s) in &svm_cases {
        let Some(l) = lm_cases.get(idx) else { continue };
        if !s.converged || !l.converged {
            continue;
        }
        let gap = r
            .param_names
            .iter()
            .map(|p| (s.extracted[p] - l.extracted[p]).abs())
            .fold(0.0f64, f64::max);
        if gap < 0.5 {
            same_optimum += 1;
            worst_gap = worst_gap.max(gap);
        }
    }
    if same_optimum == 0 {
        failures.push("no case had both methods converge to the same optimum".into());
    } else if worst_gap > 1e-3 {
        failures.push(format!(
            "same-optimum cases disagree by up to {worst_gap} nm (> 1e-3)"
        ));
    }

    let (w_svm, w_lm) = (
        r.median_wall_time(Method::SvmLm).unwrap(),
        r.median_wall_time(Method::LmOnly).unwrap(),
    );
    if w_svm > w_lm {
        failures.push(format!(
            "svm_lm median wall time {w_svm:.2} s > lm_only {w_lm:.2} s"
        ));
    }

    let budget_s = c.elapsed_s + SI_BUNDLE.1;
    if budget_s > 2700.0 {
        failures.push(format!(
            "runtime {budget_s:.0} s (bench + training) exceeds 45 min"
        ));
    }

    let detail = format!(
        "medians [{}] nm, conv {conv:.2}, bad svm/lm {bad_svm}/{bad_lm}, same-optimum {same_optimum} (gap {worst_gap:.1e}), wall {w_svm:.2}/{w_lm:.2} s",
        medians.join(", ")
    );
    conclude(
        "criterion 5 (guided vs unguided benchmark)",
        budget_s,
        &detail,
        failures,
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: noiseless round trips on both structures.
// ---------------------------------------------------------------------------

struct RoundTrip {
    truth: BTreeMap<String, f64>,
    mapped: Vec<SubrangeMapping>,
    fit: FitResult,
}

struct Crit6 {
    si: Vec<RoundTrip>,
    ml: Vec<RoundTrip>,
    elapsed_s: f64,
}

fn round_trips(
    setup: &Setup,
    bundle: &ClassifierBundle,
    n: usize,
    seed: u64,
) -> Vec<RoundTrip> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let truth: BTreeMap<String, f64> = setup
                .space
                .params
                .iter()
                .map(|p| {
                    let (lo, hi) = p.rough_range;
                    (p.name.clone(), rng.gen_range(lo..hi))
                })
                .collect();
            let target = simulate_signature(&setup.lib, &setup.model, &truth, &setup.fit_inc)
                .unwrap();
            let (mapped, fit) = reconstruct(
                &setup.lib,
                &target,
                &setup.model,
                &setup.space,
                bundle,
                &setup.fit_inc,
                &lm_cfg(),
            )
            .unwrap();
            RoundTrip { truth, mapped, fit }
        })
        .collect()
}

fn compute_crit6(si_bundle: &ClassifierBundle, ml_bundle: &ClassifierBundle) -> Crit6 {
    let t0 = Instant::now();
    let si = round_trips(&DESK, si_bundle, 20, 1301);
    let ml = round_trips(&ML, ml_bundle, 20, 1302);
    Crit6 {
        si,
        ml,
        elapsed_s: t0.elapsed().as_secs_f64(),
    }
}

static CRIT6: Lazy<Crit6> = Lazy::new(|| compute_crit6(&SI_BUNDLE.0, &ML_BUNDLE.0));

fn fp_crit6(c: &Crit6) -> String {
    let mut out = String::new();
    for (tag, cases) in [("si", &c.si), ("ml", &c.ml)] {
        for rt in cases.iter() {
            out.push_str(&format!(
                "{tag} {} | {} | {} | {} {}\n",
                fp_params(&rt.truth),
                fp_mappings(&rt.mapped),
                fp_params(&rt.fit.params),
                rt.fit.converged,
                rt.fit.iterations,
            ));
        }
    }
    out
}

#[test]
fn criterion_6_noiseless_round_trip() {
    let c = &*CRIT6;
    let mut failures = Vec::new();
    let mut worst = (0.0f64, String::new());
    for (tag, cases) in [("si", &c.si), ("ml", &c.ml)] {
        for (i, rt) in cases.iter().enumerate() {
            for (name, &t) in &rt.truth {
                let err = (rt.fit.params[name] - t).abs();
                if err > worst.0 {
                    worst = (err, format!("{tag} case {i} {name}"));
                }
                if err > 0.5 {
                    failures.push(format!(
                        "{tag} case {i}: {name} recovered {:.3} vs true {t:.3} ({err:.3} nm off)",
                        rt.fit.params[name]
                    ));
                }
            }
        }
    }
    let detail = format!("worst |error| {:.2e} nm ({})", worst.0, worst.1);
    conclude(
        "criterion 6 (noiseless round trip)",
        c.elapsed_s,
        &detail,
        failures,
    );
}

// ---------------------------------------------------------------------------
// Criterion 1: forward-model physics.
// ---------------------------------------------------------------------------

fn lib_with(entries: &[(&str, f64, f64)]) -> MaterialLibrary {
    let mut lib = MaterialLibrary::new();
    for &(name, n, k) in entries {
        lib.insert(DispersionTable::new(name, vec![(100.0, n, k), (2000.0, n, k)]).unwrap())
            .unwrap();
    }
    lib
}

fn bare(pitch: f64, ambient: &str, substrate: &str) -> ConcreteStructure {
    ConcreteStructure {
        pitch_nm: pitch,
        ambient: ambient.into(),
        substrate: substrate.into(),
        slice_count: 8,
        layers: vec![],
    }
}

fn fresnel(n1: f64, n2: (f64, f64), theta_deg: f64, pol: Polarization) -> num_complex::Complex64 {
    use num_complex::Complex64 as C;
    let n1 = C::new(n1, 0.0);
    let n2 = C::new(n2.0, n2.1);
    let sin_t = n1 * theta_deg.to_radians().sin();
    let cos1 = (n1 * n1 - sin_t * sin_t).sqrt() / n1;
    let cos2 = (n2 * n2 - sin_t * sin_t).sqrt() / n2;
    match pol {
        Polarization::Te => (n1 * cos1 - n2 * cos2) / (n1 * cos1 + n2 * cos2),
        Polarization::Tm => (n2 * cos1 - n1 * cos2) / (n2 * cos1 + n1 * cos2),
    }
}

#[test]
fn criterion_1_forward_model_physics() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let pols = [Polarization::Te, Polarization::Tm];

    // Energy conservation on two lossless gratings, 10 wavelengths x 2 pols.
    let lib = lib_with(&[("vac", 1.0, 0.0), ("glass", 1.48, 0.0), ("hi", 2.4, 0.0)]);
    let mut binary = bare(800.0, "vac", "glass");
    binary.layers.push(ConcreteLayer {
        thickness_nm: 250.0,
        line_material: "hi".into(),
        groove_material: "vac".into(),
        shape: ConcreteShape::Lamellar { line_width: 360.0 },
    });
    let mut sloped = bare(420.0, "vac", "glass");
    sloped.layers.push(ConcreteLayer {
        thickness_nm: 180.0,
        line_material: "hi".into(),
        groove_material: "vac".into(),
        shape: ConcreteShape::Trapezoid {
            top_width: 150.0,
            bottom_width: 260.0,
        },
    });
    sloped.layers.push(ConcreteLayer {
        thickness_nm: 90.0,
        line_material: "glass".into(),
        groove_material: "vac".into(),
        shape: ConcreteShape::Lamellar { line_width: 300.0 },
    });
    let lambdas = [230.0, 310.0, 400.0, 470.0, 520.0, 610.0, 680.0, 720.0, 770.0, 800.0];
    let inc = IncidenceConfig::new(65.0, 0.0, lambdas.to_vec(), 8).unwrap();
    let mut worst_energy = 0.0f64;
    for s in [&binary, &sloped] {
        for pol in pols {
            for &l in &lambdas {
                let orders = rcwa_orders(&lib, s, &inc, l, pol).unwrap();
                let dev = (orders.total_efficiency() - 1.0).abs();
                worst_energy = worst_energy.max(dev);
                if dev >= 1e-6 {
                    failures.push(format!(
                        "energy deviation {dev:.2e} at lambda {l} nm ({pol:?})"
                    ));
                }
            }
        }
    }

    // Uniform-film limit against the transfer-matrix oracle.
    let flib = lib_with(&[
        ("vac", 1.0, 0.0),
        ("filma", 2.1, 0.4),
        ("filmb", 1.7, 0.05),
        ("sub", 3.8, 0.02),
    ]);
    let mut stack = bare(800.0, "vac", "sub");
    for (m, d) in [("filma", 130.0), ("filmb", 75.0)] {
        stack.layers.push(ConcreteLayer {
            thickness_nm: d,
            line_material: m.into(),
            groove_material: m.into(),
            shape: ConcreteShape::Lamellar { line_width: 800.0 },
        });
    }
    let finc = IncidenceConfig::new(65.0, 0.0, vec![300.0, 500.0, 750.0], 8).unwrap();
    let mut worst_film = 0.0f64;
    for pol in pols {
        for &l in [300.0, 500.0, 750.0].iter() {
            let r = rcwa_reflection(&flib, &stack, &finc, l, pol).unwrap();
            let oracle = film_reflection(
                &flib,
                &[("filma".into(), 130.0), ("filmb".into(), 75.0)],
                "vac",
                "sub",
                65.0,
                l,
                pol,
            )
            .unwrap();
            let dev = (r - oracle).norm();
            worst_film = worst_film.max(dev);
            if dev >= 1e-8 {
                failures.push(format!("film-limit gap {dev:.2e} at {l} nm ({pol:?})"));
            }
        }
    }

    // Bare substrate against the closed-form single-interface coefficient.
    let slib = lib_with(&[("vac", 1.0, 0.0), ("si_like", 4.2, 0.05)]);
    let bare_s = bare(800.0, "vac", "si_like");
    let sinc = IncidenceConfig::new(65.0, 0.0, vec![250.0, 500.0, 800.0], 6).unwrap();
    let mut worst_fresnel = 0.0f64;
    for pol in pols {
        for &l in [250.0, 500.0, 800.0].iter() {
            let r = rcwa_reflection(&slib, &bare_s, &sinc, l, pol).unwrap();
            let dev = (r - fresnel(1.0, (4.2, 0.05), 65.0, pol)).norm();
            worst_fresnel = worst_fresnel.max(dev);
            if dev >= 1e-10 {
                failures.push(format!("bare-substrate gap {dev:.2e} at {l} nm ({pol:?})"));
            }
        }
    }

    let elapsed = t0.elapsed().as_secs_f64();
    if elapsed > 60.0 {
        failures.push(format!("runtime {elapsed:.1} s exceeds 1 min"));
    }
    let detail = format!(
        "max |1-sum eff| {worst_energy:.1e}, film gap {worst_film:.1e}, bare-interface gap {worst_fresnel:.1e}"
    );
    conclude("criterion 1 (forward-model physics)", elapsed, &detail, failures);
}

// ---------------------------------------------------------------------------
// Criterion 2: SVM trainer against independent oracles.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_svm_correctness() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = TrainConfig::default();
    let kernels = [
        KernelSpec::polynomial(1),
        KernelSpec::polynomial(2),
        KernelSpec::rbf(1.0),
        KernelSpec::rbf(0.5),
    ];

    let mut worst_rel = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for case in 0..50 {
        let n = rng.gen_range(2..=8usize);
        let dim = rng.gen_range(1..=3usize);
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let mut labels: Vec<i32> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        labels[0] = 1;
        if n > 1 {
            labels[1] = -1;
        }
        let kernel = &kernels[case % kernels.len()];

        let out = smo_train(&features, &labels, kernel, &cfg).unwrap();
        let smo_dual = dual_objective(&features, &labels, &out.alphas, kernel).unwrap();
        let oracle = qp_dual_oracle(&features, &labels, kernel, cfg.c, 200_000).unwrap();
        let rel = (smo_dual - oracle.dual_objective).abs()
            / oracle.dual_objective.abs().max(1.0);
        worst_rel = worst_rel.max(rel);
        if rel > 1e-4 {
            failures.push(format!(
                "case {case}: dual {smo_dual} vs oracle {} (rel {rel:.2e})",
                oracle.dual_objective
            ));
        }

        let kkt = kkt_max_violation(
            &features,
            &labels,
            &out.alphas,
            out.model.bias,
            cfg.c,
            kernel,
        )
        .unwrap();
        worst_kkt = worst_kkt.max(kkt);
        if kkt > cfg.tol {
            failures.push(format!("case {case}: KKT violation {kkt:.2e} > tol"));
        }
    }

    // Kernel symmetry over random pairs, all kernel families.
    let sym_kernels = [
        KernelSpec::polynomial(1),
        KernelSpec::polynomial(5),
        KernelSpec::rbf(0.5),
        KernelSpec::rbf(2.0),
        KernelSpec::sigmoid(0.01),
        KernelSpec::sigmoid(100.0),
    ];
    for i in 0..200 {
        let dim = rng.gen_range(1..=5usize);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let k = &sym_kernels[i % sym_kernels.len()];
        let (a, b) = (kernel_eval(k, &x, &y).unwrap(), kernel_eval(k, &y, &x).unwrap());
        if (a - b).abs() > 1e-12 {
            failures.push(format!("kernel asymmetry {a} vs {b} ({k:?})"));
        }
    }

    // Radial-kernel Gram matrices must be positive semi-definite.
    let mut worst_eig = 0.0f64;
    for set in 0..20 {
        let n = rng.gen_range(2..=12usize);
        let dim = rng.gen_range(1..=4usize);
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let sigma = [0.5, 1.0, 2.0][set % 3];
        let k = KernelSpec::rbf(sigma);
        let mut g = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                g[[i, j]] = kernel_eval(&k, &pts[i], &pts[j]).unwrap();
            }
        }
        let (eigs, _) = g.eigh(UPLO::Upper).unwrap();
        let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        worst_eig = worst_eig.min(min_eig);
        if min_eig < -1e-8 {
            failures.push(format!(
                "rbf Gram not PSD: min eigenvalue {min_eig:.2e} (n={n}, sigma={sigma})"
            ));
        }
    }

    let elapsed = t0.elapsed().as_secs_f64();
    if elapsed > 60.0 {
        failures.push(format!("runtime {elapsed:.1} s exceeds 1 min"));
    }
    let detail = format!(
        "worst dual rel {worst_rel:.1e}, worst KKT {worst_kkt:.1e}, min Gram eig {worst_eig:.1e}"
    );
    conclude("criterion 2 (svm correctness)", elapsed, &detail, failures);
}

// ---------------------------------------------------------------------------
// Criterion 7: least-squares solver suite.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_lm_solver() {
    let t0 = Instant::now();
    let mut failures = Vec::new();

    // Quadratic surrogate: linear residuals solve in a handful of steps.
    let quad = |p: &[f64]| Ok(vec![p[0] - 3.0, 2.0 * (p[1] + 1.0)]);
    let out = lm_minimize(&quad, &[10.0, -8.0], &[(-20.0, 20.0), (-20.0, 20.0)], &LmConfig::default())
        .unwrap();
    if !out.converged || out.iterations > 5 {
        failures.push(format!(
            "quadratic surrogate: converged={} in {} iterations",
            out.converged, out.iterations
        ));
    }
    let quad_iters = out.iterations;

    // Rosenbrock valley to high accuracy.
    let rosen = |p: &[f64]| Ok(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]);
    let out = lm_minimize(
        &rosen,
        &[-1.2, 1.0],
        &[(-2.0, 2.0), (-2.0, 2.0)],
        &LmConfig::default(),
    )
    .unwrap();
    let rosen_cost = out.cost;
    if out.cost > 1e-6 {
        failures.push(format!("Rosenbrock cost {:.2e} > 1e-6", out.cost));
    }
    if (out.params[0] - 1.0).abs() > 1e-3 || (out.params[1] - 1.0).abs() > 1e-3 {
        failures.push(format!("Rosenbrock minimizer off: {:?}", out.params));
    }

    // Invariants over 100 random smooth fits: accepted cost is monotone
    // non-increasing and iterates never leave the box.
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for fit in 0..100 {
        let dim = rng.gen_range(1..=4usize);
        let m = dim + 2;
        let a: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let b: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let bounds: Vec<(f64, f64)> = (0..dim)
            .map(|_| (rng.gen_range(-3.0..-0.5), rng.gen_range(0.5..3.0)))
            .collect();
        let t: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect();
        let init: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect();
        let residual = |p: &[f64]| -> scatfit_core::Result<Vec<f64>> {
            Ok((0..m)
                .map(|i| {
                    (0..dim)
                        .map(|j| a[i][j] * (p[j] - t[j]) + 0.2 * b[i][j] * (p[j] - t[j]).sin())
                        .sum()
                })
                .collect())
        };
        let out = match lm_minimize(&residual, &init, &bounds, &LmConfig::default()) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("random fit {fit} errored: {e}"));
                continue;
            }
        };
        for w in out.trace.windows(2) {
            if w[1].cost > w[0].cost + 1e-12 {
                failures.push(format!(
                    "random fit {fit}: accepted cost rose {} -> {}",
                    w[0].cost, w[1].cost
                ));
                break;
            }
        }
        for (j, (&p, &(lo, hi))) in out.params.iter().zip(&bounds).enumerate() {
            if !(lo..=hi).contains(&p) {
                failures.push(format!(
                    "random fit {fit}: parameter {j} = {p} outside [{lo}, {hi}]"
                ));
            }
        }
    }

    let elapsed = t0.elapsed().as_secs_f64();
    if elapsed > 60.0 {
        failures.push(format!("runtime {elapsed:.1} s exceeds 1 min"));
    }
    let detail = format!(
        "quadratic in {quad_iters} iterations, Rosenbrock cost {rosen_cost:.1e}, 100 random fits monotone and feasible"
    );
    conclude("criterion 7 (lm solver suite)", elapsed, &detail, failures);
}

// ---------------------------------------------------------------------------
// Criterion 8: determinism of the reported numbers.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_determinism() {
    // Force first runs (in test-name order these already ran).
    let first3 = format!("{}\n{}", fp_sweep(&CRIT3.sizes), fp_sweep(&CRIT3.sigmoid));
    let first4 = fp_crit4(&CRIT4);
    let first5 = fp_bench(&CRIT5.report);
    let first6 = fp_crit6(&CRIT6);

    let t0 = Instant::now();
    let mut failures = Vec::new();

    // Retraining must reproduce the classifier bundles exactly.
    let si2 = train_si_bundle();
    if si2 != SI_BUNDLE.0 {
        failures.push("retrained Si bundle differs from first training".into());
    }
    let ml2 = train_ml_bundle();
    if ml2 != ML_BUNDLE.0 {
        failures.push("retrained multilayer bundle differs from first training".into());
    }

    let c3 = compute_crit3();
    let again3 = format!("{}\n{}", fp_sweep(&c3.sizes), fp_sweep(&c3.sigmoid));
    if again3 != first3 {
        failures.push("criterion 3 numbers changed on rerun".into());
    }
    let again4 = fp_crit4(&compute_crit4(&si2));
    if again4 != first4 {
        failures.push("criterion 4 numbers changed on rerun".into());
    }
    let again5 = fp_bench(&compute_crit5(&si2).report);
    if again5 != first5 {
        failures.push("criterion 5 numbers changed on rerun".into());
    }
    let again6 = fp_crit6(&compute_crit6(&si2, &ml2));
    if again6 != first6 {
        failures.push("criterion 6 numbers changed on rerun".into());
    }

    let elapsed = t0.elapsed().as_secs_f64();
    let detail = "criteria 3-6 recomputed from scratch, all numbers bit-identical".to_string();
    conclude("criterion 8 (determinism)", elapsed, &detail, failures);
}

// ---------------------------------------------------------------------------
// Reference cases at desk scale (exercised on top of the criteria).
// ---------------------------------------------------------------------------

#[test]
fn mapping_assigns_reference_profile_to_expected_subranges() {
    let d = &*DESK;
    let bundle = &SI_BUNDLE.0;
    let truth = BTreeMap::from([
        ("TCD".to_string(), 350.0),
        ("Hgt".to_string(), 472.0),
        ("BCD".to_string(), 383.0),
    ]);
    let sig = simulate_signature(&d.lib, &d.model, &truth, &d.inc).unwrap();
    let mappings = map_to_subranges(bundle, &sig).unwrap();
    let expected = [
        ("TCD", (325.0, 400.0), 362.5),
        ("Hgt", (450.0, 525.0), 487.5),
        ("BCD", (325.0, 400.0), 362.5),
    ];
    for (m, (name, subrange, median)) in mappings.iter().zip(expected) {
        assert_eq!(m.parameter, name);
        assert_eq!(m.subrange, subrange, "{name} mapped to {:?}", m.subrange);
        assert_eq!(m.median_nm, median);
    }
}

#[test]
fn subrange_centers_map_to_their_own_subranges() {
    let d = &*DESK;
    let bundle = &SI_BUNDLE.0;
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut misses = Vec::new();
    for case in 0..20 {
        let mut chosen = Vec::new();
        let truth: BTreeMap<String, f64> = d
            .space
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let j = rng.gen_range(0..p.n_subranges);
                let (lo, hi) = d.space.subranges(i)[j];
                chosen.push((lo, hi));
                (p.name.clone(), (lo + hi) / 2.0)
            })
            .collect();
        let sig =
            simulate_at_points(&d.lib, &d.model, &truth, &d.inc, &bundle.wavelengths).unwrap();
        let mappings = map_to_subranges(bundle, &sig).unwrap();
        for (m, &expected) in mappings.iter().zip(&chosen) {
            if m.subrange != expected {
                misses.push(format!(
                    "case {case}: {} center of {:?} mapped to {:?}",
                    m.parameter, expected, m.subrange
                ));
            }
        }
    }
    assert!(misses.is_empty(), "{}", misses.join("\n"));
}

#[test]
fn self_classification_accuracy_is_high_on_training_data() {
    let d = &*DESK;
    let bundle = &SI_BUNDLE.0;
    for (i, (name, model)) in bundle.models.iter().enumerate() {
        let ts = generate_training_sets(
            &d.lib,
            &d.space,
            i,
            &d.model,
            &d.inc,
            K_SI,
            child_seed(TRAIN_SEED, i as u64),
        )
        .unwrap();
        let acc = classification_accuracy(model, &ts).unwrap();
        assert!(acc >= 0.95, "{name}: self-classification accuracy {acc}");
    }
}

#[test]
fn noisy_reconstruction_reference_case_stays_within_two_nanometers() {
    let d = &*DESK;
    let bundle = &SI_BUNDLE.0;
    let truth = BTreeMap::from([
        ("TCD".to_string(), 350.0),
        ("Hgt".to_string(), 472.0),
        ("BCD".to_string(), 383.0),
    ]);
    let clean = simulate_signature(&d.lib, &d.model, &truth, &d.fit_inc).unwrap();
    let noisy = inject_errors(
        &clean,
        &ErrorSpec {
            random_magnitude: 0.05,
            offset_magnitude: 0.05,
            seed: NOISE_SEED,
        },
    )
    .unwrap();
    let (_, fit) = reconstruct(
        &d.lib,
        &noisy,
        &d.model,
        &d.space,
        bundle,
        &d.fit_inc,
        &lm_cfg(),
    )
    .unwrap();
    for (name, &t) in &truth {
        let err = (fit.params[name] - t).abs();
        assert!(err <= 2.0, "{name}: {err:.3} nm from truth");
    }
}

#[test]
fn multilayer_reference_profile_round_trips() {
    let m = &*ML;
    let bundle = &ML_BUNDLE.0;
    let truth = BTreeMap::from([
        ("D1".to_string(), 75.0),
        ("H1".to_string(), 135.0),
        ("D2".to_string(), 86.0),
        ("H2".to_string(), 10.0),
        ("D3".to_string(), 124.0),
        ("H3".to_string(), 134.0),
    ]);
    let target = simulate_signature(&m.lib, &m.model, &truth, &m.fit_inc).unwrap();
    let (_, fit) = reconstruct(
        &m.lib,
        &target,
        &m.model,
        &m.space,
        bundle,
        &m.fit_inc,
        &lm_cfg(),
    )
    .unwrap();
    for (name, &t) in &truth {
        let err = (fit.params[name] - t).abs();
        assert!(err <= 0.5, "{name}: {err:.3} nm from truth");
    }
}

// ---------------------------------------------------------------------------
// Full-scale variants (slow; run with --ignored).
// ---------------------------------------------------------------------------

fn full_scale_space() -> ParameterSpace {
    // 15 x 15 x 15 = 3375 training pairs per class.
    ParameterSpace::new(vec![
        param("TCD", (250.0, 550.0), 15, 15),
        param("Hgt", (300.0, 600.0), 15, 15),
        param("BCD", (250.0, 550.0), 15, 15),
    ])
    .unwrap()
}

#[test]
#[ignore]
fn full_scale_rbf_and_polynomial_accuracies() {
    let d = &*DESK;
    let space = full_scale_space();
    let cells = vec![
        SweepCellSpec {
            label: "rbf-3375".into(),
            kernel: KernelSpec::rbf(1.0),
            k_points: 7,
            samples_per_subrange: 15,
            error: clean_spec(),
        },
        SweepCellSpec {
            label: "poly5-3375".into(),
            kernel: KernelSpec::polynomial(5),
            k_points: 7,
            samples_per_subrange: 15,
            error: clean_spec(),
        },
    ];
    let results = kernel_sweep(
        &d.lib,
        &space,
        &d.model,
        &d.inc,
        0,
        &cells,
        N_TEST,
        &TrainConfig::default(),
        SWEEP_SEED,
    )
    .unwrap();
    for r in &results {
        println!("{}: accuracy {:.3}", r.spec.label, r.accuracy);
        assert!(
            r.accuracy >= 0.90,
            "{}: accuracy {} < 0.90",
            r.spec.label,
            r.accuracy
        );
    }
}

#[test]
#[ignore]
fn full_scale_benchmark_per_parameter_accuracies() {
    let d = &*DESK;
    let space = full_scale_space();
    let bundle = train_classifiers(
        &d.lib,
        &space,
        &d.model,
        &d.inc,
        &KernelSpec::rbf(1.0),
        7,
        &TrainConfig::default(),
        TRAIN_SEED,
    )
    .unwrap();
    let errors = ErrorSpec {
        random_magnitude: 0.05,
        offset_magnitude: 0.05,
        seed: 0,
    };
    let report = run_benchmark(
        &d.lib,
        &space,
        &d.model,
        &d.fit_inc,
        Some(&bundle),
        100,
        &errors,
        &[Method::SvmLm],
        &lm_cfg(),
        BENCH_SEED,
    )
    .unwrap();
    for p in &report.param_names {
        let acc = report.classification_accuracy(p).unwrap();
        println!("{p}: classification accuracy {acc:.3}");
        assert!(acc >= 0.90, "{p}: classification accuracy {acc} < 0.90");
    }
}
