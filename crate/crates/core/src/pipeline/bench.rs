//! Paired benchmark of guided (classifier-seeded) versus unguided
//! (rough-median-seeded) fitting over randomly drawn true profiles with
//! synthetic measurement errors. Both methods see the SAME noisy signature
//! per case, which removes noise-draw variance from the comparison.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{child_seed, map_to_subranges, ClassifierBundle, ParameterSpace, SubrangeMapping};
use crate::forward::simulate_signature;
use crate::forward::structure::{IncidenceConfig, StructureModel};
use crate::lm::{lm_fit, LmConfig};
use crate::materials::MaterialLibrary;
use crate::signature::{inject_errors, ErrorSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SvmLm,
    LmOnly,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SvmLm => "svm_lm",
            Method::LmOnly => "lm_only",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "svm_lm" => Ok(Method::SvmLm),
            "lm_only" => Ok(Method::LmOnly),
            other => Err(Error::Validation(format!(
                "unknown method '{other}' (expected svm_lm or lm_only)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One (case, method) record. `failure` is set when the forward model or
/// solver errored out; such cases stay in the report but carry no
/// extracted values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCase {
    pub case_index: usize,
    pub method: Method,
    pub true_params: BTreeMap<String, f64>,
    pub mapped: Option<Vec<SubrangeMapping>>,
    pub extracted: BTreeMap<String, f64>,
    pub abs_errors_nm: BTreeMap<String, f64>,
    /// Classifier mapping time (0 for lm_only).
    pub svm_time_s: f64,
    /// Least-squares iteration time.
    pub lm_time_s: f64,
    pub wall_time_s: f64,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<String>,
}

/// Per-case records; every aggregate below recomputes from the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub param_names: Vec<String>,
    pub cases: Vec<BenchCase>,
}

fn median_of(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

impl BenchReport {
    fn method_cases(&self, method: Method) -> impl Iterator<Item = &BenchCase> {
        self.cases.iter().filter(move |c| c.method == method)
    }

    /// Fraction of guided cases whose mapped sub-range contains the true
    /// value of `param`.
    pub fn classification_accuracy(&self, param: &str) -> Option<f64> {
        let mut total = 0usize;
        let mut hit = 0usize;
        for case in self.method_cases(Method::SvmLm) {
            let Some(mapped) = &case.mapped else { continue };
            let Some(m) = mapped.iter().find(|m| m.parameter == param) else {
                continue;
            };
            let truth = case.true_params[param];
            total += 1;
            if truth >= m.subrange.0 && truth <= m.subrange.1 {
                hit += 1;
            }
        }
        (total > 0).then(|| hit as f64 / total as f64)
    }

    pub fn median_abs_error(&self, method: Method, param: &str) -> Option<f64> {
        median_of(
            self.method_cases(method)
                .filter(|c| c.failure.is_none())
                .filter_map(|c| c.abs_errors_nm.get(param).copied())
                .collect(),
        )
    }

    pub fn convergence_rate(&self, method: Method) -> Option<f64> {
        let (mut total, mut ok) = (0usize, 0usize);
        for c in self.method_cases(method) {
            total += 1;
            if c.converged {
                ok += 1;
            }
        }
        (total > 0).then(|| ok as f64 / total as f64)
    }

    /// Cases that failed, did not converge, or missed any parameter by
    /// more than `threshold_nm`.
    pub fn bad_case_count(&self, method: Method, threshold_nm: f64) -> usize {
        self.method_cases(method)
            .filter(|c| {
                c.failure.is_some()
                    || !c.converged
                    || c.abs_errors_nm.values().any(|&e| e > threshold_nm)
            })
            .count()
    }

    pub fn median_wall_time(&self, method: Method) -> Option<f64> {
        median_of(
            self.method_cases(method)
                .filter(|c| c.failure.is_none())
                .map(|c| c.wall_time_s)
                .collect(),
        )
    }

    pub fn median_svm_time(&self, method: Method) -> Option<f64> {
        median_of(
            self.method_cases(method)
                .filter(|c| c.failure.is_none())
                .map(|c| c.svm_time_s)
                .collect(),
        )
    }

    pub fn median_lm_time(&self, method: Method) -> Option<f64> {
        median_of(
            self.method_cases(method)
                .filter(|c| c.failure.is_none())
                .map(|c| c.lm_time_s)
                .collect(),
        )
    }

    fn methods_present(&self) -> Vec<Method> {
        let mut out = Vec::new();
        for m in [Method::SvmLm, Method::LmOnly] {
            if self.cases.iter().any(|c| c.method == m) {
                out.push(m);
            }
        }
        out
    }

    /// Tab-separated per-case table, one row per (case, method).
    pub fn to_tsv(&self) -> String {
        let mut head = vec![
            "case".to_string(),
            "method".to_string(),
            "converged".to_string(),
            "iterations".to_string(),
        ];
        for p in &self.param_names {
            head.push(format!("true_{p}"));
            head.push(format!("extracted_{p}"));
            head.push(format!("abs_err_{p}"));
            head.push(format!("subrange_{p}"));
        }
        head.extend(
            ["svm_time_s", "lm_time_s", "wall_time_s", "failure"]
                .map(String::from),
        );
        let mut out = head.join("\t");
        out.push('\n');
        for c in &self.cases {
            let mut row = vec![
                c.case_index.to_string(),
                c.method.to_string(),
                c.converged.to_string(),
                c.iterations.to_string(),
            ];
            for p in &self.param_names {
                row.push(c.true_params.get(p).map_or("-".into(), f64::to_string));
                row.push(c.extracted.get(p).map_or("-".into(), f64::to_string));
                row.push(c.abs_errors_nm.get(p).map_or("-".into(), f64::to_string));
                let sub = c
                    .mapped
                    .as_ref()
                    .and_then(|m| m.iter().find(|x| &x.parameter == p))
                    .map_or("-".to_string(), |m| {
                        format!("{}..{}", m.subrange.0, m.subrange.1)
                    });
                row.push(sub);
            }
            row.push(c.svm_time_s.to_string());
            row.push(c.lm_time_s.to_string());
            row.push(c.wall_time_s.to_string());
            row.push(c.failure.clone().unwrap_or_else(|| "-".into()));
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Human-readable aggregate block (wall times vary run to run; all
    /// other numbers are deterministic for fixed seeds).
    pub fn summary_text(&self) -> String {
        use std::fmt::Write as _;
        fn opt(v: Option<f64>) -> String {
            v.map_or("n/a".into(), |x| x.to_string())
        }
        let mut out = String::from("benchmark summary\n");
        for method in self.methods_present() {
            let n = self.method_cases(method).count();
            let _ = writeln!(out, "[{method}] cases {n}");
            let _ = writeln!(
                out,
                "[{method}] convergence_rate {}",
                opt(self.convergence_rate(method))
            );
            for p in &self.param_names {
                let _ = writeln!(
                    out,
                    "[{method}] median_abs_error_{p} {}",
                    opt(self.median_abs_error(method, p))
                );
            }
            if method == Method::SvmLm {
                for p in &self.param_names {
                    let _ = writeln!(
                        out,
                        "[{method}] classification_accuracy_{p} {}",
                        opt(self.classification_accuracy(p))
                    );
                }
            }
            let _ = writeln!(
                out,
                "[{method}] bad_cases_over_10nm {}",
                self.bad_case_count(method, 10.0)
            );
            let _ = writeln!(
                out,
                "[{method}] median_svm_time_s {}",
                opt(self.median_svm_time(method))
            );
            let _ = writeln!(
                out,
                "[{method}] median_lm_time_s {}",
                opt(self.median_lm_time(method))
            );
            let _ = writeln!(
                out,
                "[{method}] median_wall_time_s {}",
                opt(self.median_wall_time(method))
            );
        }
        out
    }
}

fn failed_case(
    case_index: usize,
    method: Method,
    true_params: &BTreeMap<String, f64>,
    mapped: Option<Vec<SubrangeMapping>>,
    message: String,
) -> BenchCase {
    BenchCase {
        case_index,
        method,
        true_params: true_params.clone(),
        mapped,
        extracted: BTreeMap::new(),
        abs_errors_nm: BTreeMap::new(),
        svm_time_s: 0.0,
        lm_time_s: 0.0,
        wall_time_s: 0.0,
        iterations: 0,
        converged: false,
        failure: Some(message),
    }
}

/// Runs `n_cases` synthetic extraction problems. True parameter vectors
/// are drawn uniformly in the rough ranges from `seed`; each case gets its
/// own error-injection seed derived from `seed`, and every requested
/// method fits the same noisy signature. Per-case failures are recorded,
/// not propagated.
#[allow(clippy::too_many_arguments)]
pub fn run_benchmark(
    lib: &MaterialLibrary,
    space: &ParameterSpace,
    model: &StructureModel,
    fit_incidence: &IncidenceConfig,
    bundle: Option<&ClassifierBundle>,
    n_cases: usize,
    errors: &ErrorSpec,
    methods: &[Method],
    lm_cfg: &LmConfig,
    seed: u64,
) -> Result<BenchReport> {
    space.validate()?;
    fit_incidence.validate()?;
    lm_cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::Validation("no methods requested".into()));
    }
    super::check_same_parameters(space, model)?;
    let guided = methods.contains(&Method::SvmLm);
    let bundle = match (guided, bundle) {
        (true, None) => {
            return Err(Error::Validation(
                "svm_lm requested but no classifier bundle given".into(),
            ))
        }
        (true, Some(b)) => {
            b.validate()?;
            if b.structure_hash != model.content_hash() {
                return Err(Error::Incompatible(
                    "classifier bundle was trained for a different structure".into(),
                ));
            }
            Some(b)
        }
        (false, b) => b,
    };

    // All truths drawn up front from one stream, so case c's truth does not
    // depend on which methods run.
    let mut truth_rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0));
    let truths: Vec<BTreeMap<String, f64>> = (0..n_cases)
        .map(|_| {
            space
                .params
                .iter()
                .map(|p| {
                    let (lo, hi) = p.rough_range;
                    (p.name.clone(), truth_rng.gen_range(lo..hi))
                })
                .collect()
        })
        .collect();

    let bounds = space.bounds();
    let rough_init = space.rough_medians();

    let per_case: Vec<Vec<BenchCase>> = truths
        .par_iter()
        .enumerate()
        .map(|(c, truth)| {
            let clean = match simulate_signature(lib, model, truth, fit_incidence) {
                Ok(s) => s,
                Err(e) => {
                    return methods
                        .iter()
                        .map(|&m| failed_case(c, m, truth, None, e.to_string()))
                        .collect()
                }
            };
            let case_errors = ErrorSpec {
                seed: child_seed(seed, 1 + c as u64),
                ..*errors
            };
            let noisy = match inject_errors(&clean, &case_errors) {
                Ok(s) => s,
                Err(e) => {
                    return methods
                        .iter()
                        .map(|&m| failed_case(c, m, truth, None, e.to_string()))
                        .collect()
                }
            };

            methods
                .iter()
                .map(|&method| {
                    let (init, mapped, svm_time_s) = match method {
                        Method::SvmLm => {
                            let t0 = Instant::now();
                            match map_to_subranges(bundle.expect("checked"), &noisy) {
                                Ok(m) => {
                                    let dt = t0.elapsed().as_secs_f64();
                                    let init: BTreeMap<String, f64> = m
                                        .iter()
                                        .map(|x| (x.parameter.clone(), x.median_nm))
                                        .collect();
                                    (init, Some(m), dt)
                                }
                                Err(e) => {
                                    return failed_case(c, method, truth, None, e.to_string())
                                }
                            }
                        }
                        Method::LmOnly => (rough_init.clone(), None, 0.0),
                    };
                    match lm_fit(lib, &noisy, model, &init, &bounds, fit_incidence, lm_cfg) {
                        Ok(fit) => {
                            let abs_errors_nm: BTreeMap<String, f64> = fit
                                .params
                                .iter()
                                .map(|(k, v)| (k.clone(), (v - truth[k]).abs()))
                                .collect();
                            BenchCase {
                                case_index: c,
                                method,
                                true_params: truth.clone(),
                                mapped,
                                extracted: fit.params,
                                abs_errors_nm,
                                svm_time_s,
                                lm_time_s: fit.wall_time_s,
                                wall_time_s: svm_time_s + fit.wall_time_s,
                                iterations: fit.iterations,
                                converged: fit.converged,
                                failure: None,
                            }
                        }
                        Err(e) => failed_case(c, method, truth, mapped, e.to_string()),
                    }
                })
                .collect()
        })
        .collect();

    Ok(BenchReport {
        param_names: space.names(),
        cases: per_case.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::test_fixtures::*;
    use crate::pipeline::SubrangeMapping;

    fn case(
        idx: usize,
        method: Method,
        truth: f64,
        extracted: f64,
        wall: f64,
        converged: bool,
        mapped: Option<(f64, f64)>,
    ) -> BenchCase {
        BenchCase {
            case_index: idx,
            method,
            true_params: BTreeMap::from([("p".to_string(), truth)]),
            mapped: mapped.map(|subrange| {
                vec![SubrangeMapping {
                    parameter: "p".to_string(),
                    class_label: 0,
                    subrange,
                    median_nm: (subrange.0 + subrange.1) / 2.0,
                }]
            }),
            extracted: BTreeMap::from([("p".to_string(), extracted)]),
            abs_errors_nm: BTreeMap::from([("p".to_string(), (extracted - truth).abs())]),
            svm_time_s: 0.01,
            lm_time_s: wall - 0.01,
            wall_time_s: wall,
            iterations: 5,
            converged,
            failure: None,
        }
    }

    #[test]
    fn aggregates_recompute_from_records() {
        let report = BenchReport {
            param_names: vec!["p".to_string()],
            cases: vec![
                case(0, Method::SvmLm, 100.0, 101.0, 1.0, true, Some((90.0, 110.0))),
                case(1, Method::SvmLm, 200.0, 203.0, 3.0, true, Some((150.0, 190.0))),
                case(2, Method::SvmLm, 300.0, 330.0, 2.0, false, Some((290.0, 310.0))),
                case(0, Method::LmOnly, 100.0, 115.0, 5.0, true, None),
                case(1, Method::LmOnly, 200.0, 200.5, 7.0, true, None),
            ],
        };
        // medians over sorted [1, 3, 30] and [0.5, 15]
        assert_eq!(report.median_abs_error(Method::SvmLm, "p"), Some(3.0));
        assert_eq!(report.median_abs_error(Method::LmOnly, "p"), Some(7.75));
        // classification: truths 100, 300 inside their mapped sub-ranges; 200 outside
        assert_eq!(report.classification_accuracy("p"), Some(2.0 / 3.0));
        assert_eq!(report.convergence_rate(Method::SvmLm), Some(2.0 / 3.0));
        assert_eq!(report.convergence_rate(Method::LmOnly), Some(1.0));
        // bad cases at 10 nm: case 2 (non-converged AND 30 nm), case 0 lm_only (15 nm)
        assert_eq!(report.bad_case_count(Method::SvmLm, 10.0), 1);
        assert_eq!(report.bad_case_count(Method::LmOnly, 10.0), 1);
        assert_eq!(report.median_wall_time(Method::SvmLm), Some(2.0));
        assert_eq!(report.median_wall_time(Method::LmOnly), Some(6.0));

        let tsv = report.to_tsv();
        assert_eq!(tsv.lines().count(), 1 + report.cases.len());
        assert!(tsv.starts_with("case\tmethod\tconverged"));
        let summary = report.summary_text();
        assert!(summary.contains("[svm_lm] median_abs_error_p 3"));
        assert!(summary.contains("[lm_only] convergence_rate 1"));
    }

    #[test]
    fn failed_cases_are_excluded_from_value_medians_but_count_as_bad() {
        let mut bad = case(0, Method::LmOnly, 100.0, 0.0, 1.0, false, None);
        bad.failure = Some("boom".into());
        bad.extracted.clear();
        bad.abs_errors_nm.clear();
        let report = BenchReport {
            param_names: vec!["p".to_string()],
            cases: vec![bad, case(1, Method::LmOnly, 50.0, 51.0, 2.0, true, None)],
        };
        assert_eq!(report.median_abs_error(Method::LmOnly, "p"), Some(1.0));
        assert_eq!(report.bad_case_count(Method::LmOnly, 10.0), 1);
        assert_eq!(report.convergence_rate(Method::LmOnly), Some(0.5));
    }

    #[test]
    fn empty_benchmark_produces_an_empty_report() {
        let (lib, model) = tiny_setup();
        let report = run_benchmark(
            &lib,
            &tiny_space(),
            &model,
            &tiny_incidence(),
            None,
            0,
            &ErrorSpec {
                random_magnitude: 0.05,
                offset_magnitude: 0.05,
                seed: 9,
            },
            &[Method::LmOnly],
            &LmConfig::default(),
            17,
        )
        .unwrap();
        assert!(report.cases.is_empty());
        assert_eq!(report.summary_text(), "benchmark summary\n");
    }

    #[test]
    fn guided_method_requires_a_bundle() {
        let (lib, model) = tiny_setup();
        let err = run_benchmark(
            &lib,
            &tiny_space(),
            &model,
            &tiny_incidence(),
            None,
            1,
            &ErrorSpec {
                random_magnitude: 0.0,
                offset_magnitude: 0.0,
                seed: 1,
            },
            &[Method::SvmLm],
            &LmConfig::default(),
            17,
        )
        .unwrap_err();
        assert_eq!(err.class(), "validation");
    }

    #[test]
    fn small_benchmark_is_deterministic_up_to_wall_times() {
        let (lib, model) = tiny_setup();
        let lm_cfg = LmConfig {
            max_iterations: 10,
            ..LmConfig::default()
        };
        let errors = ErrorSpec {
            random_magnitude: 0.02,
            offset_magnitude: 0.02,
            seed: 0, // replaced per case
        };
        let run = || {
            run_benchmark(
                &lib,
                &tiny_space(),
                &model,
                &tiny_incidence(),
                None,
                2,
                &errors,
                &[Method::LmOnly],
                &lm_cfg,
                99,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.cases.len(), 2);
        for (x, y) in a.cases.iter().zip(&b.cases) {
            assert_eq!(x.true_params, y.true_params);
            assert_eq!(x.extracted, y.extracted);
            assert_eq!(x.abs_errors_nm, y.abs_errors_nm);
            assert_eq!(x.iterations, y.iterations);
            assert_eq!(x.converged, y.converged);
            for (k, v) in &x.abs_errors_nm {
                assert_eq!(*v, (x.extracted[k] - x.true_params[k]).abs());
            }
        }
    }
}
