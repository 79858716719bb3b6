//! Command implementations behind the CLI surface.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use albscreen_core::alb::alb_all;
use albscreen_core::bayes::{self, BayesKdeModel};
use albscreen_core::cutoff::{
    cv_select, default_cv_candidates, percentile_select, permutation_null, top_d_select,
    zero_select, FeatureStats, ScreeningReport,
};
use albscreen_core::dataio::{
    drop_constant_features, load_csv, save_csv, stratified_split, write_mask, Dataset, LabelColumn,
};
use albscreen_core::error::Error as CoreError;
use albscreen_core::experiments::{
    run_bayes_curve, run_cdf_study, run_screen_compare, write_bayes_curve_csv, write_cdf_csv,
    write_compare_csv, BayesCurveSpec, CdfStudySpec, CompareSpec,
};
use albscreen_core::kernel::Kernel;
use albscreen_core::metrics::{confusion, rand_index};
use albscreen_core::simgen::{generate, Scenario, ScenarioConfig};
use albscreen_core::ttest::{ttest_screen, TTestScreenMode};

use crate::report::{hash_file, ClassifyMetrics, InputDigest, RunReport};
use crate::{
    ClassifyArgs, ExperimentArgs, ExperimentName, KernelArg, MethodArg, ScenarioArg, ScreenArgs,
    SimulateArgs,
};

/// Command failure with the exit-code class it maps to.
#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Data(String),
    NoViableCutoff,
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Usage(msg) => write!(f, "{msg}"),
            CmdError::Data(msg) => write!(f, "{msg}"),
            CmdError::NoViableCutoff => write!(f, "no candidate cutoff selects any feature"),
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::NoViableCutoff => CmdError::NoViableCutoff,
            other => CmdError::Data(other.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CmdError {
    CmdError::Usage(msg.into())
}

fn data(msg: impl fmt::Display) -> CmdError {
    CmdError::Data(msg.to_string())
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

fn parse_label_col(spec: &str) -> LabelColumn {
    match spec.parse::<usize>() {
        Ok(index) => LabelColumn::Index(index),
        Err(_) => LabelColumn::Name(spec.to_string()),
    }
}

/// Parsed form of the --cutoff grammar.
#[derive(Debug, Clone, PartialEq)]
enum CutoffSpec {
    Zero,
    TopD(Option<usize>),
    Perm { alpha: f64, covariates: usize, permutations: usize },
    Cv,
    PValue(f64),
}

fn parse_cutoff(spec: &str) -> Result<CutoffSpec, CmdError> {
    if spec == "zero" {
        return Ok(CutoffSpec::Zero);
    }
    if spec == "cv" {
        return Ok(CutoffSpec::Cv);
    }
    if spec == "top-d" {
        return Ok(CutoffSpec::TopD(None));
    }
    if let Some(rest) = spec.strip_prefix("top-d=") {
        let d = rest
            .parse::<usize>()
            .map_err(|_| usage(format!("top-d takes a positive integer, got {rest:?}")))?;
        if d == 0 {
            return Err(usage("top-d must be at least 1"));
        }
        return Ok(CutoffSpec::TopD(Some(d)));
    }
    if let Some(rest) = spec.strip_prefix("perm=") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(usage(format!(
                "perm cutoff is perm=ALPHA,B,D (three fields), got {rest:?}"
            )));
        }
        let alpha = parts[0]
            .parse::<f64>()
            .map_err(|_| usage(format!("perm alpha {:?} is not a number", parts[0])))?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(usage(format!("perm alpha {alpha} must be in (0, 1)")));
        }
        let covariates = parts[1]
            .parse::<usize>()
            .map_err(|_| usage(format!("perm covariate count {:?} is not an integer", parts[1])))?;
        let permutations = parts[2]
            .parse::<usize>()
            .map_err(|_| usage(format!("perm permutation count {:?} is not an integer", parts[2])))?;
        if covariates == 0 || permutations == 0 {
            return Err(usage("perm covariate and permutation counts must be at least 1"));
        }
        return Ok(CutoffSpec::Perm { alpha, covariates, permutations });
    }
    if let Some(rest) = spec.strip_prefix("p-value=") {
        let alpha = rest
            .parse::<f64>()
            .map_err(|_| usage(format!("p-value level {rest:?} is not a number")))?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(usage(format!("p-value level {alpha} must be in (0, 1)")));
        }
        return Ok(CutoffSpec::PValue(alpha));
    }
    Err(usage(format!(
        "unknown cutoff {spec:?}; expected zero | top-d[=K] | perm=ALPHA,B,D | cv | p-value=ALPHA"
    )))
}

fn input_digest(path: &Path, dataset: &Dataset) -> Result<InputDigest, CmdError> {
    Ok(InputDigest {
        path: path.display().to_string(),
        fnv1a64: hash_file(path).map_err(data)?,
        rows: dataset.n_rows(),
        features: dataset.n_features(),
        label_mapping: dataset.label_mapping().cloned(),
    })
}

/// Run one screening pass over `dataset` per method and cutoff spec.
fn run_screening(
    dataset: &Dataset,
    method: MethodArg,
    cutoff: &CutoffSpec,
    seed: u64,
) -> Result<ScreeningReport, CmdError> {
    let p = dataset.n_features();
    let (n0, n1) = dataset.class_counts();
    match method {
        MethodArg::Ttest => match cutoff {
            CutoffSpec::PValue(alpha) => {
                Ok(ttest_screen(dataset, TTestScreenMode::PValueBelow(*alpha))?)
            }
            CutoffSpec::TopD(d) => {
                let k = d.unwrap_or_else(|| (n0 + n1).min(p));
                if k > p {
                    return Err(usage(format!("top-d of {k} exceeds the {p} features")));
                }
                Ok(ttest_screen(dataset, TTestScreenMode::TopK(k))?)
            }
            other => Err(usage(format!(
                "cutoff {other:?} does not apply to t-test screening; use top-d[=K] or p-value=ALPHA"
            ))),
        },
        MethodArg::Alb => match cutoff {
            CutoffSpec::PValue(_) => Err(usage(
                "p-value cutoffs apply to t-test screening only".to_string(),
            )),
            CutoffSpec::Zero => Ok(zero_select(&alb_all(dataset)?)),
            CutoffSpec::TopD(d) => {
                let results = alb_all(dataset)?;
                let usable = results.iter().filter(|r| !r.degenerate).count();
                let k = d.unwrap_or_else(|| (n0 + n1).min(usable));
                if k > p {
                    return Err(usage(format!("top-d of {k} exceeds the {p} features")));
                }
                Ok(top_d_select(&results, k)?)
            }
            CutoffSpec::Perm { alpha, covariates, permutations } => {
                if *covariates > p {
                    return Err(usage(format!(
                        "perm covariate count {covariates} exceeds the {p} features"
                    )));
                }
                let results = alb_all(dataset)?;
                let null = permutation_null(dataset, *covariates, *permutations, seed)?;
                Ok(percentile_select(&results, &null, *alpha)?)
            }
            CutoffSpec::Cv => {
                let (train_a, train_b) = stratified_split(dataset, 0.5, seed)?;
                let candidates = default_cv_candidates(&alb_all(&train_a)?);
                Ok(cv_select(&train_a, &train_b, &candidates)?)
            }
        },
    }
}

/// Remap feature indices of a report back to original column numbers after
/// constant-column removal. `kept[j]` is the original index of reduced column j.
fn remap_report(report: &mut ScreeningReport, kept: &[usize]) {
    for idx in &mut report.selected {
        *idx = kept[*idx];
    }
    match &mut report.stats {
        FeatureStats::Alb(rs) => {
            for r in rs {
                r.feature_index = kept[r.feature_index];
            }
        }
        FeatureStats::TTest(rs) => {
            for r in rs {
                r.feature_index = kept[r.feature_index];
            }
        }
    }
}

fn write_selected_list(path: &Path, selected: &[usize]) -> Result<(), CmdError> {
    let mut text = String::new();
    for idx in selected {
        text.push_str(&idx.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(data)
}

fn method_name(method: MethodArg) -> &'static str {
    match method {
        MethodArg::Alb => "alb",
        MethodArg::Ttest => "ttest",
    }
}

// ---------------------------------------------------------------------------
// screen
// ---------------------------------------------------------------------------

pub fn screen(args: &ScreenArgs, threads: Option<usize>) -> Result<(), CmdError> {
    let started = Instant::now();
    let cutoff = parse_cutoff(&args.cutoff)?;
    let label = parse_label_col(&args.label_col);
    let dataset = load_csv(&args.input, &label)?;
    let digest = input_digest(&args.input, &dataset)?;

    let (work, kept, removed) = if args.drop_constant {
        let (reduced, removed) = drop_constant_features(&dataset);
        let kept: Vec<usize> = (0..dataset.n_features())
            .filter(|j| !removed.contains(j))
            .collect();
        (reduced, kept, Some(removed))
    } else {
        let kept: Vec<usize> = (0..dataset.n_features()).collect();
        (dataset, kept, None)
    };

    let mut screening = run_screening(&work, args.method, &cutoff, args.seed)?;
    remap_report(&mut screening, &kept);

    let mut report = RunReport::new("screen", threads, Some(args.seed));
    report.inputs.push(digest);
    report.removed_constant_features = removed;
    report.method = Some(method_name(args.method).to_string());
    report.rule = Some(screening.rule.clone());
    report.threshold = screening.threshold;
    report.selected = Some(screening.selected.clone());
    report.null_summary = screening.null_summary.clone();
    report.feature_stats = Some(screening.stats.clone());
    report.timing.total_ms = started.elapsed().as_millis();
    report.write(&args.out).map_err(data)?;

    let selected_path = args
        .selected_out
        .clone()
        .unwrap_or_else(|| default_selected_path(&args.out));
    write_selected_list(&selected_path, &screening.selected)?;
    println!(
        "selected {} of {} features -> {}",
        screening.selected.len(),
        report.inputs[0].features,
        args.out.display()
    );
    Ok(())
}

fn default_selected_path(out: &Path) -> PathBuf {
    let mut path = out.as_os_str().to_owned();
    path.push(".selected.txt");
    PathBuf::from(path)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn scenario_from_arg(arg: ScenarioArg) -> Scenario {
    match arg {
        ScenarioArg::Location => Scenario::Location,
        ScenarioArg::Scale => Scenario::Scale,
        ScenarioArg::Shape => Scenario::Shape,
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CmdError> {
    let config = ScenarioConfig {
        scenario: scenario_from_arg(args.scenario),
        n0: args.n,
        n1: args.m,
        p: args.p,
        r: args.r,
        seed: args.seed,
    };
    let sim = generate(&config).map_err(|e| match e {
        CoreError::InvalidArgument(msg) => usage(msg),
        other => other.into(),
    })?;

    let csv_path = args.out_prefix.with_extension("csv");
    let mask_path = args.out_prefix.with_extension("mask");
    save_csv(&sim.dataset, &csv_path)?;
    write_mask(&sim.important, &mask_path)?;
    println!(
        "wrote {} ({} rows x {} features) and {}",
        csv_path.display(),
        sim.dataset.n_rows(),
        sim.dataset.n_features(),
        mask_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

pub fn classify(args: &ClassifyArgs, threads: Option<usize>) -> Result<(), CmdError> {
    let started = Instant::now();
    let label = parse_label_col(&args.label_col);
    let train = load_csv(&args.train, &label)?;
    let test = load_csv(&args.test, &label)?;
    if train.n_features() != test.n_features() {
        return Err(data(format!(
            "train has {} features but test has {}",
            train.n_features(),
            test.n_features()
        )));
    }

    let mut report = RunReport::new("classify", threads, Some(args.seed));
    report.inputs.push(input_digest(&args.train, &train)?);
    report.inputs.push(input_digest(&args.test, &test)?);

    let model: BayesKdeModel = match &args.model_in {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(data)?;
            BayesKdeModel::from_json(&text)?
        }
        None => {
            let cutoff = parse_cutoff(&args.cutoff)?;
            let screening = run_screening(&train, args.method, &cutoff, args.seed)?;
            report.method = Some(method_name(args.method).to_string());
            report.rule = Some(screening.rule.clone());
            report.threshold = screening.threshold;
            report.selected = Some(screening.selected.clone());
            report.null_summary = screening.null_summary.clone();
            let kernel = match args.kernel {
                KernelArg::Hall => Kernel::Hall,
                KernelArg::Gaussian => Kernel::Gaussian,
            };
            bayes::fit_with_kernel(&train, &screening.selected, kernel)?
        }
    };
    for dropped in &model.dropped {
        report
            .warnings
            .push(format!("feature {} dropped: {}", dropped.index, dropped.reason));
    }

    if let Some(path) = &args.model_out {
        fs::write(path, model.to_json()).map_err(data)?;
    }

    let predictions = model.predict_dataset(&test)?;
    let mut csv = String::from("row,posterior_class0,predicted_label,true_label\n");
    for pred in &predictions {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            pred.row,
            pred.posterior0,
            pred.label,
            test.labels()[pred.row]
        ));
    }
    fs::write(&args.out, csv).map_err(data)?;

    let labels: Vec<u8> = predictions.iter().map(|p| p.label).collect();
    let rand = rand_index(&labels, test.labels())?;
    report.metrics = Some(ClassifyMetrics {
        rand_index: rand,
        confusion_positive_label_1: confusion(&labels, test.labels(), 1)?,
    });
    report.timing.total_ms = started.elapsed().as_millis();
    if let Some(path) = &args.report {
        report.write(path).map_err(data)?;
    }
    println!(
        "classified {} rows, rand index {:.4} -> {}",
        predictions.len(),
        rand,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

fn parse_sizes(spec: &Option<String>, default: &[usize]) -> Result<Vec<usize>, CmdError> {
    match spec {
        None => Ok(default.to_vec()),
        Some(text) => text
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("size {part:?} is not an integer")))
            })
            .collect(),
    }
}

pub fn experiment(args: &ExperimentArgs) -> Result<(), CmdError> {
    let mut out: Vec<u8> = Vec::new();
    match args.name {
        ExperimentName::Cdf => {
            let spec = CdfStudySpec {
                sizes: parse_sizes(&args.sizes, &[10, 20, 40])?,
                p: args.p.unwrap_or(500),
                r: args.r.unwrap_or(0.5),
                permutations: args.perm_d.unwrap_or(3),
                seed: args.seed,
            };
            let rows = run_cdf_study(&spec)?;
            write_cdf_csv(&rows, &mut out)?;
        }
        ExperimentName::Compare => {
            let scenario = scenario_from_arg(
                args.scenario
                    .ok_or_else(|| usage("compare needs --scenario"))?,
            );
            let mut spec = CompareSpec::for_scenario(
                scenario,
                parse_sizes(&args.sizes, &[20])?,
                args.reps.unwrap_or(50),
                args.seed,
            );
            if let Some(p) = args.p {
                spec.p = p;
            }
            if let Some(r) = args.r {
                spec.r = r;
            }
            if let Some(alpha) = args.ttest_alpha {
                spec.ttest_alpha = alpha;
            }
            if let Some(alpha) = args.alb_alpha {
                spec.alb_alpha = alpha;
            }
            if let Some(d) = args.perm_d {
                spec.alb_permutations = d;
            }
            let rows = run_screen_compare(&spec)?;
            write_compare_csv(&rows, &mut out)?;
        }
        ExperimentName::BayesCurve => {
            let spec = BayesCurveSpec {
                sizes: parse_sizes(&args.sizes, &[9])?,
                p: args.p.unwrap_or(500),
                r: args.r.unwrap_or(0.5),
                replications: args.reps.unwrap_or(100),
                seed: args.seed,
            };
            let rows = run_bayes_curve(&spec)?;
            write_bayes_curve_csv(&rows, &mut out)?;
        }
    }
    fs::write(&args.out, out).map_err(data)?;
    println!("wrote {}", args.out.display());
    Ok(())
}
