//! Command implementations: validate, compute, then write into the output
//! directory. Validation happens before any file is created, so an invalid
//! run leaves no partial outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use smoe_core::bound::{
    bound_report_csv, sweep, sweep_to_csv, generalization_bound, BoundBreakdown, BoundInputs, SweepGrid,
    BOUND_CAVEAT,
};
use smoe_core::complexity::corpus::{verification_corpus, VerificationClass};
use smoe_core::complexity::{
    binomial_log_bound_check, convex_hull_rademacher_check, growth_function,
    lipschitz_contraction_check, natarajan_dimension_exact, natarajan_growth_bound,
    ComplexityEstimate, FiniteClassTable,
};
use smoe_core::loss::LossFunction;
use smoe_core::trainer::{gap_experiment, gap_report_csv, gap_report_json, GapExperimentConfig, TrainConfig};

use crate::config::{BoundConfig, GapConfig, SweepConfig, VerifyConfig};
use crate::{CliError, CliResult};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn map_core(err: smoe_core::Error) -> CliError {
    match err {
        smoe_core::Error::InvalidInput(_)
        | smoe_core::Error::CapacityExceeded(_)
        | smoe_core::Error::Parse(_) => CliError::Validation(err.to_string()),
        smoe_core::Error::TrainingDiverged { .. } | smoe_core::Error::GradCheckFailed(_) => {
            CliError::Runtime(err.to_string())
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

fn write_outputs(
    dir: &Path,
    command: &str,
    config_json: serde_json::Value,
    seed: u64,
    files: &[(&str, String)],
) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    #[derive(Serialize)]
    struct Manifest<'a> {
        command: &'a str,
        version: &'a str,
        seed: u64,
        config: serde_json::Value,
    }
    let manifest = Manifest {
        command,
        version: VERSION,
        seed,
        config: config_json,
    };
    write_file(
        dir,
        "manifest.json",
        &format!("{}\n", serde_json::to_string_pretty(&manifest).expect("manifest serializes")),
    )?;
    for (name, contents) in files {
        write_file(dir, name, contents)?;
    }
    Ok(())
}

fn config_value<T: Serialize>(config: &T) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}

#[derive(Serialize)]
struct BoundReportDoc<'a> {
    caveat: &'a str,
    inputs: &'a BoundInputs,
    breakdown: &'a BoundBreakdown,
}

pub fn run_bound(cfg: &BoundConfig) -> CliResult<()> {
    let rademacher = if cfg.rademacher_stderr > 0.0 {
        // a Monte-Carlo estimate entered by hand keeps its uncertainty; the
        // draw count is unknown at this boundary
        ComplexityEstimate::monte_carlo(cfg.rademacher, cfg.rademacher_stderr, 0)
    } else {
        ComplexityEstimate::exact(cfg.rademacher)
    };
    let inputs = BoundInputs::new(
        cfg.lipschitz,
        rademacher,
        cfg.natarajan_dim,
        cfg.sample_count,
        cfg.expert_count,
        cfg.selected_count,
        cfg.delta,
    )
    .map_err(map_core)?;
    let breakdown = generalization_bound(&inputs);

    let doc = BoundReportDoc {
        caveat: BOUND_CAVEAT,
        inputs: &inputs,
        breakdown: &breakdown,
    };
    let json = format!("{}\n", serde_json::to_string_pretty(&doc).expect("report serializes"));
    let csv = bound_report_csv(&inputs, &breakdown);
    write_outputs(
        &cfg.output_dir,
        "bound",
        config_value(cfg),
        cfg.seed,
        &[("bound.json", json), ("bound.csv", csv)],
    )
}

pub fn run_sweep(cfg: &SweepConfig) -> CliResult<()> {
    let grid = SweepGrid {
        k: cfg.k.clone(),
        expert_count: cfg.expert_count.clone(),
        sample_count: cfg.sample_count.clone(),
        natarajan_dim: cfg.natarajan_dim.clone(),
        lipschitz: cfg.lipschitz.clone(),
        rademacher: cfg.rademacher.clone(),
        delta: cfg.delta.clone(),
    };
    let rows = sweep(&grid).map_err(map_core)?;

    #[derive(Serialize)]
    struct SweepDoc<'a> {
        caveat: &'a str,
        rows: &'a [smoe_core::bound::SweepRow],
    }
    let doc = SweepDoc {
        caveat: BOUND_CAVEAT,
        rows: &rows,
    };
    let json = format!("{}\n", serde_json::to_string_pretty(&doc).expect("report serializes"));
    let csv = sweep_to_csv(&rows);
    write_outputs(
        &cfg.output_dir,
        "sweep",
        config_value(cfg),
        cfg.seed,
        &[("sweep.json", json), ("sweep.csv", csv)],
    )
}

#[derive(Serialize)]
struct LemmaResult {
    class: String,
    check: String,
    passed: bool,
    detail: String,
}

fn load_corpus_dir(dir: &Path, seed: u64) -> CliResult<Vec<VerificationClass>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Validation(format!("reading corpus dir {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Validation(format!(
            "corpus dir {} contains no .csv class tables",
            dir.display()
        )));
    }
    let mut classes = Vec::with_capacity(paths.len());
    for (idx, path) in paths.iter().enumerate() {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("reading {}: {e}", path.display())))?;
        let table = FiniteClassTable::from_csv(&text).map_err(map_core)?;
        // labels are not part of the file format; derive them from the seed
        let labels = (0..table.points())
            .map(|i| if (seed + idx as u64 + i as u64).is_multiple_of(2) { 1 } else { -1 })
            .collect();
        classes.push(VerificationClass {
            name: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("class-{idx}")),
            table,
            labels,
        });
    }
    Ok(classes)
}

pub fn run_verify(cfg: &VerifyConfig) -> CliResult<()> {
    let corpus = match &cfg.corpus_dir {
        Some(dir) => load_corpus_dir(dir, cfg.seed)?,
        None => verification_corpus(cfg.seed, cfg.class_count),
    };

    let mut results: Vec<LemmaResult> = Vec::new();
    let mut record = |class: &str, check: &str, passed: bool, detail: String| {
        println!("{check} {class} {}", if passed { "PASS" } else { "FAIL" });
        results.push(LemmaResult {
            class: class.to_string(),
            check: check.to_string(),
            passed,
            detail,
        });
    };

    for class in &corpus {
        let rows = class.real_rows();

        let d_n = natarajan_dimension_exact(&class.table).map_err(map_core)?;
        let growth = growth_function(&class.table) as f64;
        let ceiling = natarajan_growth_bound(class.table.points(), class.table.arity(), d_n);
        record(
            &class.name,
            "growth-bound",
            growth <= ceiling,
            format!("growth {growth} vs ceiling {ceiling} at dimension {d_n}"),
        );

        let mut contraction_ok = true;
        let mut detail = String::new();
        for scale in [1.0, 0.5, 2.0] {
            let loss = LossFunction::clipped_hinge_scaled(scale).map_err(map_core)?;
            let (lhs, rhs) =
                lipschitz_contraction_check(&rows, &class.labels, &loss).map_err(map_core)?;
            if lhs > rhs + 1e-12 {
                contraction_ok = false;
            }
            detail.push_str(&format!("C={scale}: lhs {lhs} rhs {rhs}; "));
        }
        record(&class.name, "contraction", contraction_ok, detail);

        let (hull, base) =
            convex_hull_rademacher_check(&rows, cfg.grid_resolution).map_err(map_core)?;
        record(
            &class.name,
            "hull-equality",
            (hull - base).abs() <= 1e-12,
            format!("hull {hull} base {base}"),
        );
    }

    let mut binom_ok = true;
    for t in 1..=30u64 {
        for k in 1..=t {
            let (lhs, rhs) = binomial_log_bound_check(t, k).map_err(map_core)?;
            if lhs > rhs + 1e-12 {
                binom_ok = false;
            }
        }
    }
    record("T<=30-grid", "binomial-log", binom_ok, "log C(T,k) <= k(1+log(T/k))".to_string());

    let failed = results.iter().filter(|r| !r.passed).count();

    #[derive(Serialize)]
    struct VerifyDoc {
        classes: usize,
        checks: usize,
        failed: usize,
        results: Vec<LemmaResult>,
    }
    let doc = VerifyDoc {
        classes: corpus.len(),
        checks: results.len(),
        failed,
        results,
    };
    let json = format!("{}\n", serde_json::to_string_pretty(&doc).expect("report serializes"));
    write_outputs(
        &cfg.output_dir,
        "verify",
        config_value(cfg),
        cfg.seed,
        &[("verify.json", json)],
    )?;

    if failed > 0 {
        return Err(CliError::Runtime(format!("{failed} lemma checks failed")));
    }
    Ok(())
}

pub fn run_gap(cfg: &GapConfig) -> CliResult<()> {
    let experiment = GapExperimentConfig {
        expert_count: cfg.expert_count,
        k_values: cfg.k_values.clone(),
        train_size: cfg.train_size,
        test_size: cfg.test_size,
        feature_dim: cfg.feature_dim,
        clusters_per_class: cfg.clusters_per_class,
        norm_bound: cfg.norm_bound,
        expert_hidden: cfg.expert_hidden.clone(),
        router_hidden: cfg.router_hidden.clone(),
        train: TrainConfig {
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            seed: cfg.seed,
            loss: cfg.loss,
            weight_init_scale: cfg.weight_init_scale,
        },
        data_seed: cfg.seed,
        delta: cfg.delta,
        natarajan_constant: cfg.natarajan_constant,
    };
    let report = gap_experiment(&experiment).map_err(map_core)?;
    let json = format!("{}\n", gap_report_json(&report));
    let csv = gap_report_csv(&report);
    write_outputs(
        &cfg.output_dir,
        "gap",
        config_value(cfg),
        cfg.seed,
        &[("gap.json", json), ("gap.csv", csv)],
    )
}
