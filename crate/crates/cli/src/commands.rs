use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cspa_core::analysis::{compare, summarize, summarize_traces, SummaryTable};
use cspa_core::campaign::{run, run_triple, CampaignResult};
use cspa_core::config::{load_scenario, scenario_to_string};
use cspa_core::model::{
    fit, generate_interval_stationary, residual_diagnostics, Interval, IntervalPlan, H0Source,
    ModelParams, ResidualModel, SampleGrid, StaticChannelModel,
};
use cspa_core::{validate_scenario, Complex64, Error, Scenario, Strategy, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Cli, Command, Emit, Format, ModelCommand};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

type CliResult = Result<(), CliError>;

pub fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Scenario { clutter } => {
            let s = if *clutter {
                Scenario::default_clutter()
            } else {
                Scenario::default_free_space()
            };
            print!("{}", scenario_to_string(&s));
            Ok(())
        }
        Command::Simulate {
            scenario,
            strategy,
            emit,
        } => simulate(cli, scenario.as_deref(), strategy, emit),
        Command::Analyze { traces } => analyze(cli, traces),
        Command::Compare { first, second } => {
            let a = read_trace(first)?;
            let b = read_trace(second)?;
            let c = compare(&a, &b);
            match cli.format {
                Format::Text => print!("{c}"),
                Format::Csv => print!("{}", c.to_csv()),
            }
            Ok(())
        }
        Command::Model { mode } => match mode {
            ModelCommand::Gen {
                h0_db,
                h0_phase_rad,
                var_amp,
                var_phase,
                samples,
                intervals,
                output,
            } => model_gen(
                cli,
                ModelParams {
                    h0_db: *h0_db,
                    h0_phase_rad: *h0_phase_rad,
                    var_amp_db2: *var_amp,
                    var_phase_rad2: *var_phase,
                },
                *samples,
                *intervals,
                output.as_deref(),
            ),
            ModelCommand::Fit { trace } => model_fit(cli, trace),
        },
    }
}

fn load(path: Option<&Path>) -> Result<Scenario, CliError> {
    let scenario = match path {
        None => Scenario::default_free_space(),
        Some(p) => load_scenario(p).map_err(|e| match e {
            Error::Io(io) => CliError::config(format!("cannot read scenario {}: {io}", p.display())),
            other => CliError::config(format!("{}: {other}", p.display())),
        })?,
    };
    let violations = validate_scenario(&scenario);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(CliError::config(format!(
            "invalid scenario: {}",
            list.join("; ")
        )));
    }
    Ok(scenario)
}

fn ensure_out_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn print_table(format: Format, table: &SummaryTable) {
    let mut out = std::io::stdout().lock();
    let text = match format {
        Format::Text => table.to_text(),
        Format::Csv => table.to_csv(),
    };
    let _ = out.write_all(text.as_bytes());
}

fn simulate(cli: &Cli, scenario: Option<&Path>, strategy: &str, emit: &[Emit]) -> CliResult {
    let scenario = load(scenario)?;
    let seed = cli.seed.unwrap_or(scenario.noise.seed);
    let strategies: Vec<Strategy> = if strategy == "triple" {
        Strategy::TRIPLE.to_vec()
    } else {
        vec![strategy
            .parse()
            .map_err(|e: Error| CliError::config(format!("--strategy: {e}")))?]
    };

    let runtime = |e: Error| CliError::runtime(e.to_string());
    let result = if strategies.len() == 1 {
        let trace = run(&scenario, strategies[0], seed).map_err(runtime)?;
        CampaignResult {
            scenario_digest: trace.scenario_digest().to_string(),
            traces: vec![trace],
            strategies,
            seed,
        }
    } else {
        run_triple(&scenario, seed).map_err(runtime)?
    };

    ensure_out_dir(&cli.out)?;
    if emit.iter().any(|e| matches!(e, Emit::Trace | Emit::Plotdata)) {
        for (st, trace) in result.strategies.iter().zip(&result.traces) {
            let path = cli.out.join(format!("{}.csv", st.name()));
            write_file(&path, &trace.to_csv_string())?;
        }
    }
    if emit.contains(&Emit::Summary) {
        let table = summarize(&result);
        let (name, body) = match cli.format {
            Format::Text => ("summary.txt", table.to_text()),
            Format::Csv => ("summary.csv", table.to_csv()),
        };
        write_file(&cli.out.join(name), &body)?;
        print_table(cli.format, &table);
    }
    Ok(())
}

fn read_trace(path: &Path) -> Result<Trace, CliError> {
    let mut trace = Trace::load(path).map_err(|e| match e {
        Error::Io(io) => CliError::config(format!("cannot read {}: {io}", path.display())),
        Error::Parse { line, message } => {
            CliError::config(format!("{}:{line}: {message}", path.display()))
        }
        other => CliError::config(format!("{}: {other}", path.display())),
    })?;
    if trace.strategy_label().is_empty() {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        trace.set_strategy_label(stem);
    }
    Ok(trace)
}

fn analyze(cli: &Cli, paths: &[PathBuf]) -> CliResult {
    let traces = paths
        .iter()
        .map(|p| read_trace(p))
        .collect::<Result<Vec<_>, _>>()?;
    print_table(cli.format, &summarize_traces(&traces));
    Ok(())
}

fn model_gen(
    cli: &Cli,
    params: ModelParams,
    samples: usize,
    intervals: usize,
    output: Option<&Path>,
) -> CliResult {
    if samples == 0 {
        return Err(CliError::config("--samples must be at least 1"));
    }
    if intervals == 0 || intervals > samples {
        return Err(CliError::config("--intervals must be between 1 and --samples"));
    }
    let residual = ResidualModel::new(params.var_amp_db2, params.var_phase_rad2)
        .map_err(|e| CliError::config(format!("--var-amp/--var-phase: {e}")))?;
    let model = StaticChannelModel::from_db_phase(params.h0_db, params.h0_phase_rad, 0)
        .map_err(|e| CliError::config(format!("--h0-db/--h0-phase-rad: {e}")))?;

    let base = samples / intervals;
    let mut plan = IntervalPlan { intervals: Vec::with_capacity(intervals) };
    for i in 0..intervals {
        let length = if i + 1 == intervals {
            samples - base * (intervals - 1)
        } else {
            base
        };
        plan.intervals.push(Interval {
            start: i * base,
            length,
            h0: if i == 0 { H0Source::Given(model.h0()) } else { H0Source::Draw },
        });
    }

    let magnitude = model.h0().norm();
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(cspa_core::scenario::DEFAULT_SEED));
    let generated = generate_interval_stationary(
        &plan,
        &residual,
        &SampleGrid::default(),
        &mut rng,
        |r: &mut ChaCha8Rng| {
            Complex64::from_polar(magnitude, r.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        },
    )
    .map_err(|e| CliError::runtime(e.to_string()))?;

    let path = match output {
        Some(p) => p.to_path_buf(),
        None => {
            ensure_out_dir(&cli.out)?;
            cli.out.join("model.csv")
        }
    };
    write_file(&path, &generated.trace.to_csv_string())
}

fn model_fit(cli: &Cli, path: &Path) -> CliResult {
    let trace = read_trace(path)?;
    let fitted = fit(&trace).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let params = ModelParams::from_models(&fitted.0, &fitted.1);
    let report = residual_diagnostics(&trace, &fitted);
    match cli.format {
        Format::Text => {
            print!("{}", params.to_text());
            println!("# samples = {}", trace.len());
            println!("# residual_mean_db = {:e}", report.mean_amp_residual);
            println!("# residual_mean_rad = {:e}", report.mean_phase_residual);
            println!("# lag1_autocorr_db = {}", report.lag1_amp);
            println!("# lag1_autocorr_rad = {}", report.lag1_phase);
            println!("# phase_outside_3sigma = {}", report.phase_outlier_fraction);
        }
        Format::Csv => {
            println!("h0_db,h0_phase_rad,var_amp_db2,var_phase_rad2,lag1_autocorr_db,lag1_autocorr_rad,phase_outside_3sigma");
            println!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                params.h0_db,
                params.h0_phase_rad,
                params.var_amp_db2,
                params.var_phase_rad2,
                report.lag1_amp,
                report.lag1_phase,
                report.phase_outlier_fraction
            );
        }
    }
    Ok(())
}
