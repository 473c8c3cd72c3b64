//! The five harness subcommands. Each writes its artifacts under the
//! configured output directory, stamping every file with the config hash
//! and the seed.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use sgcp::experiment::{run_contraction_experiment, simulate_patterns, synthetic_report, ContractionReport};
use sgcp::inference::geweke_joint_test;
use sgcp::kernel::{check_exponential_moment, ExponentialMoment};
use sgcp::point_process::integrate_field;
use sgcp::prior::{estimate_sqrt_link_lipschitz, validate_length_scale_tail, validate_max_intensity_tail, ValidationReport};
use sgcp::seed::{derive_seed, rng_from_seed, tags};
use sgcp::stats::{effective_sample_size, geweke_drift_z};
use sgcp::{run_chain, Dataset, Grid, PointPattern};

use crate::config::HarnessConfig;
use crate::error::{CliError, CliResult};

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Provenance stamped into every output.
#[derive(Debug, Clone, Serialize)]
struct Stamp {
    config_hash: String,
    seed: u64,
}

impl Stamp {
    fn of(cfg: &HarnessConfig) -> Self {
        Self { config_hash: cfg.hash(), seed: cfg.seed }
    }

    fn comments(&self) -> Vec<String> {
        vec![format!("config_hash={}", self.config_hash), format!("seed={}", self.seed)]
    }
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(path))
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io { path: path.into(), source: e.into() })?;
    writeln!(w).and_then(|_| w.flush()).map_err(CliError::io(path))
}

/// Simulates `simulate.n` patterns from the configured truth.
pub fn simulate(cfg: &HarnessConfig) -> CliResult<Outcome> {
    let stamp = Stamp::of(cfg);
    let grid = cfg.grid()?;
    let truth = cfg.truth()?;
    let field = truth.field(&grid)?;
    let patterns = simulate_patterns(&field, cfg.simulate.n, derive_seed(cfg.seed, &[tags::SIMULATE]))?;

    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let mut files = Vec::new();
    let mut comments = stamp.comments();
    comments.push(format!("truth={}", truth.name));
    for (i, p) in patterns.iter().enumerate() {
        let path = dir.join(format!("pattern_{i:04}.csv"));
        let mut w = create(&path)?;
        p.write_csv(&mut w, &comments).and_then(|_| w.flush()).map_err(CliError::io(&path))?;
        files.push(path);
    }
    let counts: Vec<usize> = patterns.iter().map(|p| p.len()).collect();
    let manifest = json!({
        "config_hash": stamp.config_hash,
        "seed": stamp.seed,
        "truth": truth.name,
        "dim": grid.dim(),
        "resolution": grid.resolution(),
        "truth_integral": integrate_field(&field),
        "n": patterns.len(),
        "counts": counts,
        "total_points": counts.iter().sum::<usize>(),
        "files": files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
    });
    let path = dir.join("manifest.json");
    write_json(&path, &manifest)?;
    files.push(path);
    Ok(Outcome { summary: format!("simulated {} patterns ({} points)", patterns.len(), counts.iter().sum::<usize>()), files })
}

/// Reads every `.csv` file of a directory, in name order, as a pattern.
pub fn read_patterns(dir: &Path) -> CliResult<Vec<PointPattern>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let f = File::open(p).map_err(CliError::io(p))?;
            PointPattern::read_csv(BufReader::new(f)).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Fits the full hierarchy to the patterns in `data_dir`. An empty
/// directory yields a prior-only chain.
pub fn fit(cfg: &HarnessConfig, data_dir: &Path) -> CliResult<Outcome> {
    let stamp = Stamp::of(cfg);
    let model = cfg.model()?;
    let patterns = read_patterns(data_dir)?;
    if let Some(p) = patterns.iter().find(|p| p.dim() != model.grid.dim()) {
        return Err(CliError::Data(format!("pattern dimension {} does not match grid dimension {}", p.dim(), model.grid.dim())));
    }
    let data = Dataset::new(&model.grid, &patterns)?;
    let chain_cfg = cfg.chain_config(derive_seed(cfg.seed, &[tags::FIT]));
    let chain = run_chain(&model, &data, &chain_cfg)?;

    let dir = &cfg.output_dir;
    prepare_dir(dir)?;

    let path_chain = dir.join("chain.jsonl");
    let mut w = create(&path_chain)?;
    let io = CliError::io(&path_chain);
    let mut lines = vec![json!({"record": "meta", "config_hash": stamp.config_hash, "seed": stamp.seed}).to_string()];
    for i in 0..chain.len() {
        lines.push(
            json!({
                "record": "draw",
                "iteration": chain.iterations[i],
                "ell": chain.ell[i],
                "lambda_star": chain.lambda_star[i],
                "log_posterior": chain.log_posterior[i],
            })
            .to_string(),
        );
    }
    lines.iter().try_for_each(|l| writeln!(w, "{l}")).and_then(|_| w.flush()).map_err(io)?;

    let path_draws = dir.join("intensity_draws.csv");
    let mut w = create(&path_draws)?;
    let io = CliError::io(&path_draws);
    let write_draws = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        for c in stamp.comments() {
            writeln!(w, "# {c}")?;
        }
        let header: Vec<String> = (0..model.grid.node_count()).map(|k| format!("node_{k}")).collect();
        writeln!(w, "iteration,{}", header.join(","))?;
        for (it, field) in chain.iterations.iter().zip(&chain.draws) {
            let row: Vec<String> = field.values().iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{it},{}", row.join(","))?;
        }
        w.flush()
    };
    write_draws(&mut w).map_err(io)?;

    let traces = [("ell", &chain.ell), ("lambda_star", &chain.lambda_star), ("log_posterior", &chain.log_posterior)];
    let ess: BTreeMap<&str, f64> = traces.iter().map(|(k, t)| (*k, effective_sample_size(t))).collect();
    let drift: BTreeMap<&str, f64> = traces.iter().map(|(k, t)| (*k, geweke_drift_z(t))).collect();
    let diagnostics = json!({
        "config_hash": stamp.config_hash,
        "seed": stamp.seed,
        "prior_only": chain.prior_only,
        "n_patterns": data.n_patterns(),
        "total_points": data.total_points(),
        "kept_draws": chain.len(),
        "acceptance": chain.acceptance,
        "effective_sample_size": ess,
        "geweke_drift_z": drift,
        "final_step_ell": chain.final_step_ell,
        "final_step_lambda": chain.final_step_lambda,
        "factorization_failures": chain.factorization_failures,
        "max_checkpoint_drift": chain.max_checkpoint_drift,
    });
    let path_diag = dir.join("diagnostics.json");
    write_json(&path_diag, &diagnostics)?;

    Ok(Outcome {
        summary: format!(
            "fitted {} patterns: {} draws, ess(lambda_star) = {:.1}{}",
            data.n_patterns(),
            chain.len(),
            ess["lambda_star"],
            if chain.prior_only { " (prior only)" } else { "" }
        ),
        files: vec![path_chain, path_draws, path_diag],
    })
}

#[derive(Serialize)]
struct BenchReport<'a> {
    config_hash: &'a str,
    seed: u64,
    synthetic: bool,
    slope_band: [f64; 2],
    within_band: bool,
    #[serde(flatten)]
    report: &'a ContractionReport,
}

/// Runs the contraction experiment and checks the fitted slope against the
/// configured band.
pub fn bench(cfg: &HarnessConfig) -> CliResult<Outcome> {
    let stamp = Stamp::of(cfg);
    let truth = cfg.truth()?;
    let exp_cfg = cfg.experiment_config(derive_seed(cfg.seed, &[tags::BENCH]));
    let e = &cfg.experiment;
    let report = if e.synthetic {
        synthetic_report(&truth, cfg.grid.dim, &exp_cfg, e.synthetic_scale, e.synthetic_exponent)?
    } else {
        run_contraction_experiment(&truth, &cfg.model()?, &exp_cfg)?
    };
    let [lo, hi] = e.slope_band;
    let slope = report.fit.map(|f| f.slope);
    let within_band = slope.is_some_and(|s| lo <= s && s <= hi);

    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let path_json = dir.join("report.json");
    write_json(
        &path_json,
        &BenchReport {
            config_hash: &stamp.config_hash,
            seed: stamp.seed,
            synthetic: e.synthetic,
            slope_band: e.slope_band,
            within_band,
            report: &report,
        },
    )?;

    let path_csv = dir.join("report.csv");
    let mut w = create(&path_csv)?;
    let io = CliError::io(&path_csv);
    let write_csv = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        for c in stamp.comments() {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "n,replicate,seed,median_distance,mass_outside,credible_radius,error")?;
        for c in &report.cells {
            writeln!(
                w,
                "{},{},{},{:?},{:?},{:?},{}",
                c.n,
                c.replicate,
                c.seed,
                c.median_distance,
                c.mass_outside,
                c.credible_radius,
                c.error.as_deref().unwrap_or("").replace(',', ";")
            )?;
        }
        w.flush()
    };
    write_csv(&mut w).map_err(io)?;

    let files = vec![path_json, path_csv];
    let summary = match slope {
        Some(s) => format!("slope {s:.4} (target {:.4}, band [{lo}, {hi}])", report.target_exponent),
        None => "no slope could be fitted".into(),
    };
    if !within_band {
        return Err(CliError::CheckFailed(summary));
    }
    Ok(Outcome { files, summary })
}

/// Runs the joint-distribution calibration test on a coarse grid.
pub fn calibrate(cfg: &HarnessConfig) -> CliResult<Outcome> {
    let stamp = Stamp::of(cfg);
    let grid = Grid::new(cfg.grid.dim, cfg.calibrate.resolution)?;
    let model = sgcp::Model::new(cfg.prior()?, grid)?.with_likelihood(cfg.calibrate.mutation);
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[tags::CALIBRATE]));
    let report = geweke_joint_test(&model, &cfg.geweke_config(), &mut rng)?;

    prepare_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("geweke.json");
    write_json(
        &path,
        &json!({
            "config_hash": stamp.config_hash,
            "seed": stamp.seed,
            "likelihood": cfg.calibrate.mutation,
            "resolution": cfg.calibrate.resolution,
            "report": report,
        }),
    )?;
    let summary = format!("max |z| = {:.3} (threshold {})", report.max_abs_z, report.threshold);
    if !report.passed {
        return Err(CliError::CheckFailed(summary));
    }
    Ok(Outcome { files: vec![path], summary })
}

/// Runs the numeric prior validators and the link and kernel checks.
pub fn verify_priors(cfg: &HarnessConfig) -> CliResult<Outcome> {
    let stamp = Stamp::of(cfg);
    let prior = cfg.prior()?;
    let probes = cfg.probe_range();
    let mut records: Vec<ValidationReport> =
        vec![validate_length_scale_tail(&prior.length_scale, &probes), validate_max_intensity_tail(&prior.max_intensity, &probes)];

    let estimate = estimate_sqrt_link_lipschitz(prior.link);
    let bound = prior.link.lipschitz_sqrt_bound();
    records.push(ValidationReport {
        operation: format!("sqrt_link_lipschitz:{}", prior.link.name()),
        constants: BTreeMap::from([("estimate".to_string(), estimate), ("bound".to_string(), bound)]),
        passed: estimate <= bound * (1.0 + 1e-9),
        witness: None,
    });

    let moment = check_exponential_moment(&prior.kernel, cfg.grid.dim);
    records.push(ValidationReport {
        operation: "spectral_exponential_moment".into(),
        constants: BTreeMap::from([
            ("delta".to_string(), prior.kernel.delta),
            ("dim".to_string(), cfg.grid.dim as f64),
        ]),
        passed: moment.is_finite(),
        witness: match moment {
            ExponentialMoment::Finite(v) => Some(v),
            ExponentialMoment::Diverged => None,
        },
    });

    prepare_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("validators.json");
    write_json(&path, &json!({"config_hash": stamp.config_hash, "seed": stamp.seed, "validators": records}))?;
    let failed: Vec<&str> = records.iter().filter(|r| !r.passed).map(|r| r.operation.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::CheckFailed(format!("failed: {}", failed.join(", "))));
    }
    Ok(Outcome { files: vec![path], summary: format!("{} validators passed", records.len()) })
}
