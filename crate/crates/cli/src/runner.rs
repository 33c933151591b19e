//! Seeded experiment execution and result emission.
//!
//! Each runner maps a validated [`RunConfig`] to a table of rows (CSV) and a
//! JSON value (JSON output), both carrying the resolved config and seed as a
//! metadata block. Identical configs and seeds produce byte-identical files.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde_json::json;

use timebin_sim::contextuality::{
    chsh_value, hybrid_entangled_state, optimal_settings, simulate_chsh, white_noise_mix,
};
use timebin_sim::entangle::{correlation_table, spdc_entangled_state, PumpProfile};
use timebin_sim::hom::{
    displaced_overlap, hom_scan, simulate_counts, HomSetting, TemporalModeModel,
};
use timebin_sim::quantum::{DensityMatrix, PureState};
use timebin_sim::qwalk::synthesize;
use timebin_sim::tomography::{
    mub_states, run_tomography, standard_target_suite, MeasurementSchedule,
};

use crate::config::{
    Experiment, ExperimentKind, OutputFormat, RefsSpec, RunConfig, StateSpec,
};

/// What a run produced, for the caller's status line.
#[derive(Debug)]
pub struct RunSummary {
    pub path: PathBuf,
    pub data_rows: usize,
    pub experiment: &'static str,
}

struct RunOutput {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    results: serde_json::Value,
    /// Extra `# key: value` comment lines for the CSV metadata block.
    comments: Vec<(String, String)>,
}

/// Executes the configured experiment and writes the result file.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let output = match &config.params {
        Experiment::Tomography(params) => run_tomography_experiment(config, params)?,
        Experiment::Chsh(params) => run_chsh(config, params)?,
        Experiment::HomScan(params) => run_hom_scan(config, params)?,
        Experiment::QwalkSynth(params) => run_qwalk(config, params)?,
        Experiment::Entangle(params) => run_entangle(config, params)?,
    };
    let rendered = match config.output.format {
        OutputFormat::Csv => render_csv(config, &output),
        OutputFormat::Json => render_json(config, &output),
    };
    std::fs::write(&config.output.path, rendered)
        .with_context(|| format!("cannot write {}", config.output.path.display()))?;
    Ok(RunSummary {
        path: config.output.path.clone(),
        data_rows: output.rows.len(),
        experiment: config.experiment.as_str(),
    })
}

fn config_echo(config: &RunConfig) -> serde_json::Value {
    serde_json::to_value(config).expect("config serializes")
}

fn render_csv(config: &RunConfig, output: &RunOutput) -> String {
    let mut text = String::new();
    writeln!(text, "# schema_version: 1").unwrap();
    writeln!(
        text,
        "# config: {}",
        serde_json::to_string(&config_echo(config)).expect("compact json")
    )
    .unwrap();
    writeln!(
        text,
        "# warnings: {}",
        serde_json::to_string(&config.warnings).expect("compact json")
    )
    .unwrap();
    for (key, value) in &output.comments {
        writeln!(text, "# {key}: {value}").unwrap();
    }
    writeln!(text, "{}", output.header.join(",")).unwrap();
    for row in &output.rows {
        writeln!(text, "{}", row.join(",")).unwrap();
    }
    text
}

fn render_json(config: &RunConfig, output: &RunOutput) -> String {
    let document = json!({
        "schema_version": 1,
        "config": config_echo(config),
        "warnings": config.warnings,
        "results": output.results,
    });
    let mut text = serde_json::to_string_pretty(&document).expect("document serializes");
    text.push('\n');
    text
}

fn fmt(value: f64) -> String {
    format!("{value}")
}

fn resolve_density(spec: &StateSpec, path: &str) -> Result<DensityMatrix> {
    // Parse-time validation already normalized amplitudes, so no new
    // warnings can appear here.
    let mut scratch = spec.clone();
    let mut sink = Vec::new();
    Ok(scratch.resolve_density(path, &mut sink)?)
}

fn resolve_pure(spec: &StateSpec, path: &str) -> Result<PureState> {
    let mut scratch = spec.clone();
    let mut sink = Vec::new();
    Ok(scratch.resolve_pure(path, &mut sink)?)
}

fn run_tomography_experiment(
    config: &RunConfig,
    params: &crate::config::TomographyParams,
) -> Result<RunOutput> {
    let noise = config.noise.to_model()?;
    let schedule = MeasurementSchedule::mub(noise);
    let targets: Vec<(String, DensityMatrix)> = match (&params.targets, &params.suite) {
        (Some(entries), None) => entries
            .iter()
            .enumerate()
            .map(|(k, entry)| {
                let id = entry.id.clone().unwrap_or_else(|| format!("state_{k:02}"));
                let rho = resolve_density(&entry.state, &format!("params.targets[{k}].state"))?;
                Ok((id, rho))
            })
            .collect::<Result<_>>()?,
        (None, Some(_)) => standard_target_suite(),
        _ => bail!("params: exactly one of `targets` or `suite` must be given"),
    };

    let mut rows = Vec::with_capacity(targets.len());
    let mut states = Vec::with_capacity(targets.len());
    for (index, (id, target)) in targets.iter().enumerate() {
        let result = run_tomography(target, &schedule, config.seed.wrapping_add(index as u64))?;
        let fidelity = result
            .fidelity_to_target
            .expect("run_tomography fills the fidelity");
        let purity_true = target.purity();
        let purity_reconstructed = result.rho.purity();
        rows.push(vec![
            id.clone(),
            fmt(fidelity),
            fmt(purity_true),
            fmt(purity_reconstructed),
            result.converged.to_string(),
            result.iterations.to_string(),
        ]);
        states.push(json!({
            "state_id": id,
            "fidelity": fidelity,
            "purity_true": purity_true,
            "purity_reconstructed": purity_reconstructed,
            "converged": result.converged,
            "iterations": result.iterations,
            "log_likelihood": result.log_likelihood,
        }));
    }
    Ok(RunOutput {
        header: vec![
            "state_id",
            "fidelity",
            "purity_true",
            "purity_reconstructed",
            "converged",
            "iterations",
        ],
        rows,
        results: json!({ "states": states }),
        comments: Vec::new(),
    })
}

fn run_chsh(config: &RunConfig, params: &crate::config::ChshParams) -> Result<RunOutput> {
    let settings = optimal_settings();
    let ideal = hybrid_entangled_state().to_density();
    let state = white_noise_mix(&ideal, params.white_noise_visibility)?;
    let analytic = chsh_value(&state, &settings)?;
    let sim = simulate_chsh(&state, &settings, params.shots_per_setting, config.seed)?;
    let row = vec![
        fmt(sim.s_value),
        fmt(sim.correlators[0]),
        fmt(sim.correlators[1]),
        fmt(sim.correlators[2]),
        fmt(sim.correlators[3]),
        fmt(sim.standard_error),
        fmt(analytic),
    ];
    Ok(RunOutput {
        header: vec![
            "s_value",
            "correlator_a0b0",
            "correlator_a0b1",
            "correlator_a1b0",
            "correlator_a1b1",
            "standard_error",
            "analytic_s",
        ],
        rows: vec![row],
        results: json!({
            "s_value": sim.s_value,
            "correlators": sim.correlators,
            "standard_error": sim.standard_error,
            "analytic_s": analytic,
            "shots_per_setting": params.shots_per_setting,
            "white_noise_visibility": params.white_noise_visibility,
        }),
        comments: Vec::new(),
    })
}

fn run_hom_scan(config: &RunConfig, params: &crate::config::HomScanParams) -> Result<RunOutput> {
    let noise = config.noise.to_model()?;
    let target = resolve_density(&params.target, "params.target")?;
    let reference = resolve_pure(&params.reference, "params.reference")?;
    let delays = params.delays.expand("params.delays")?;
    let model = match &params.temporal_model {
        Some(spec) => TemporalModeModel::new(spec.bin_spacing_ps, spec.coherence_time_ps)?,
        None => TemporalModeModel::default(),
    };
    let points = hom_scan(&target, &reference, &delays, &model, &noise)?;

    let mut rows = Vec::with_capacity(points.len());
    let mut json_points = Vec::with_capacity(points.len());
    for (index, point) in points.iter().enumerate() {
        // Counts are drawn from the accidental-free model probability; the
        // accidental rate enters inside simulate_counts.
        let overlap = displaced_overlap(&target, &reference, point.delay_ps, &model)?;
        let p_model = ((1.0 - noise.visibility() * overlap) / 2.0).clamp(0.0, 0.5);
        let setting = HomSetting {
            reference: reference.clone(),
            delay_ps: point.delay_ps,
            noise,
        };
        let record = simulate_counts(p_model, &setting, config.seed.wrapping_add(index as u64))?;
        rows.push(vec![
            fmt(point.delay_ps),
            fmt(point.p_antibunch),
            fmt(point.p_bunch),
            record.antibunching.to_string(),
            record.bunching.to_string(),
        ]);
        json_points.push(json!({
            "delay_ps": point.delay_ps,
            "p_antibunch": point.p_antibunch,
            "p_bunch": point.p_bunch,
            "counts_antibunch": record.antibunching,
            "counts_bunch": record.bunching,
        }));
    }
    Ok(RunOutput {
        header: vec![
            "delay_ps",
            "p_antibunch",
            "p_bunch",
            "counts_antibunch",
            "counts_bunch",
        ],
        rows,
        results: json!({ "points": json_points }),
        comments: Vec::new(),
    })
}

fn run_qwalk(config: &RunConfig, params: &crate::config::QwalkParams) -> Result<RunOutput> {
    let target = resolve_pure(&params.target, "params.target")?;
    let result = synthesize(&target, params.n_steps, params.restarts, config.seed)?;
    let projection = [
        [result.projection.amplitude(0).re, result.projection.amplitude(0).im],
        [result.projection.amplitude(1).re, result.projection.amplitude(1).im],
    ];
    let rows: Vec<Vec<String>> = result
        .coins
        .iter()
        .enumerate()
        .map(|(step, coin)| {
            vec![
                step.to_string(),
                fmt(coin.theta),
                fmt(coin.phi1),
                fmt(coin.phi2),
            ]
        })
        .collect();
    let coins: Vec<serde_json::Value> = result
        .coins
        .iter()
        .map(|c| json!({ "theta": c.theta, "phi1": c.phi1, "phi2": c.phi2 }))
        .collect();
    Ok(RunOutput {
        header: vec!["step", "theta", "phi1", "phi2"],
        rows,
        results: json!({
            "fidelity": result.fidelity,
            "success_probability": result.success_probability,
            "projection": projection,
            "coins": coins,
        }),
        comments: vec![
            ("fidelity".into(), fmt(result.fidelity)),
            (
                "success_probability".into(),
                fmt(result.success_probability),
            ),
            (
                "projection".into(),
                serde_json::to_string(&projection).expect("compact json"),
            ),
        ],
    })
}

fn run_entangle(config: &RunConfig, params: &crate::config::EntangleParams) -> Result<RunOutput> {
    let noise = config.noise.to_model()?;
    let pump = PumpProfile::new(
        params
            .pump
            .iter()
            .map(|[re, im]| num_complex::Complex64::new(*re, *im))
            .collect(),
    )?;
    let state = spdc_entangled_state(&pump);
    let resolve_refs = |refs: &RefsSpec, field: &str| -> Result<(Vec<String>, Vec<PureState>)> {
        match refs {
            RefsSpec::Named(_) => {
                let names = ["t0", "t1", "plus", "minus", "plus_i", "minus_i"];
                Ok((
                    names.iter().map(|s| s.to_string()).collect(),
                    mub_states().into_iter().collect(),
                ))
            }
            RefsSpec::List(specs) => {
                let mut ids = Vec::with_capacity(specs.len());
                let mut states = Vec::with_capacity(specs.len());
                for (k, spec) in specs.iter().enumerate() {
                    ids.push(
                        spec.named
                            .clone()
                            .unwrap_or_else(|| format!("ref_{k:02}")),
                    );
                    states.push(resolve_pure(spec, &format!("{field}[{k}]"))?);
                }
                Ok((ids, states))
            }
        }
    };
    let (alice_ids, alice_refs) = resolve_refs(&params.alice_refs, "params.alice_refs")?;
    let (bob_ids, bob_refs) = resolve_refs(&params.bob_refs, "params.bob_refs")?;
    let table = correlation_table(&state, &alice_refs, &bob_refs, &noise)?;

    let mut rows = Vec::with_capacity(alice_ids.len() * bob_ids.len());
    for (i, alice) in alice_ids.iter().enumerate() {
        for (j, bob) in bob_ids.iter().enumerate() {
            rows.push(vec![alice.clone(), bob.clone(), fmt(table[i][j])]);
        }
    }
    Ok(RunOutput {
        header: vec!["alice_ref", "bob_ref", "p_joint"],
        rows,
        results: json!({
            "alice_refs": alice_ids,
            "bob_refs": bob_ids,
            "table": table,
        }),
        comments: Vec::new(),
    })
}

/// Checks that the CLI subcommand agrees with the config's experiment field.
pub fn ensure_experiment(config: &RunConfig, expected: ExperimentKind) -> Result<()> {
    if config.experiment != expected {
        bail!(
            "config declares experiment {:?} but the {:?} subcommand was invoked",
            config.experiment.as_str(),
            expected.as_str()
        );
    }
    Ok(())
}
