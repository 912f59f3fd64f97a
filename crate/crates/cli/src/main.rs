mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use gfperc_core::experiments::{
    circuit_scan, concentration_tail_test, crossing_curve, fkg_test, implication_audit, map_samples,
    quarter_bound_test, variance_scan, AuditFault, AuditParams,
};
use gfperc_core::io::{threshold_row, write_field_binary, write_field_csv, THRESHOLD_HEADER, THRESHOLD_SCHEMA};
use gfperc_core::{validate_conditions, BoundCheck, ThresholdEngine, Tolerances};

use config::{EventConfig, RunConfig, EXPERIMENTS};
use error::CliError;
use output::OutDir;

#[derive(Debug, Parser)]
#[command(name = "gfperc", version, about = "Percolation of Gaussian fields on the torus: Monte Carlo experiments")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample count; overrides `samples` in the config.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the kernel's regularity conditions and write conditions.json.
    ValidateKernel,
    /// Sample fields and write one threshold row per sample and event.
    Threshold {
        /// loop, loop2, cross, cross_dagger or circuit; repeatable. Defaults to the config's events, else loop.
        #[arg(long = "event")]
        events: Vec<String>,
        /// Also write every sampled field.
        #[arg(long, value_enum)]
        export: Option<ExportFormat>,
    },
    /// Run a Monte Carlo experiment and write <name>.csv and <name>.json.
    Experiment {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        name: String,
        /// Corrupts the audit's conclusions to exercise the failure exit.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExportFormat {
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fault {
    DropConclusions,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.samples = n;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.to_string_lossy().into_owned();
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    if cfg.jobs == Some(0) {
        return Err(CliError::Config("jobs must be at least 1".into()));
    }
    Ok(cfg)
}

fn report_checks(checks: &[BoundCheck]) {
    for c in checks {
        eprintln!("check {}: {} (lhs {}, rhs {}, se {})", c.name, if c.pass { "PASS" } else { "FAIL" }, c.lhs, c.rhs, c.se);
    }
}

fn validate_kernel(cfg: &RunConfig) -> Result<(), CliError> {
    let kernel = cfg.mc()?.make_kernel()?;
    let report = validate_conditions(&kernel, &Tolerances::default());
    let out = OutDir::new(&cfg.out);
    let flat: serde_json::Map<String, serde_json::Value> = report.flatten().into_iter().collect();
    out.write("conditions.json", output::summary_json("validate-kernel", cfg, &serde_json::json!({"report": report, "flat": flat})))?;
    out.write_config(cfg)?;
    let failures = report.required_failures();
    if failures.is_empty() {
        eprintln!("kernel conditions: all required conditions pass");
        Ok(())
    } else {
        Err(CliError::Conditions(failures))
    }
}

fn event_from_flag(flag: &str) -> Result<EventConfig, CliError> {
    let (kind, axis) = match flag {
        "loop" | "loop1" => ("loop", Some(0)),
        "loop2" => ("loop", Some(1)),
        "loop3" => ("loop", Some(2)),
        "cross" => ("cross", None),
        "cross_dagger" | "dagger" => ("cross_dagger", None),
        "circuit" => ("circuit", None),
        other => return Err(CliError::Config(format!("unknown event {other:?}"))),
    };
    Ok(EventConfig { kind: kind.into(), axis, scale: None, r1: None, r2: None, origin: [0.0, 0.0], rotation: 0 })
}

fn threshold(cfg: &mut RunConfig, flags: &[String], export: Option<ExportFormat>) -> Result<(), CliError> {
    if !flags.is_empty() {
        cfg.events = flags.iter().map(|f| event_from_flag(f)).collect::<Result<_, _>>()?;
    } else if cfg.events.is_empty() {
        cfg.events = vec![event_from_flag("loop")?];
    }
    let mc = cfg.mc()?;
    let kernel = mc.make_kernel()?;
    let events = cfg.events.iter().map(|e| cfg.event(e)).collect::<Result<Vec<_>, _>>()?;
    let engines = events
        .iter()
        .map(|e| ThresholdEngine::new(&kernel.grid, e, mc.connectivity))
        .collect::<Result<Vec<_>, _>>()?;
    let out = OutDir::new(&cfg.out);
    let rows: Vec<Vec<String>> = map_samples(&kernel, &mc, |i, f| {
        if let Some(fmt) = export {
            let mut buf = Vec::new();
            let name = match fmt {
                ExportFormat::Bin => {
                    write_field_binary(f, &mut buf)?;
                    format!("field_{i:06}.bin")
                }
                ExportFormat::Csv => {
                    write_field_csv(f, &mut buf)?;
                    format!("field_{i:06}.csv")
                }
            };
            out.write(&name, buf).map_err(|e| gfperc_core::Error::Io(e.to_string()))?;
        }
        engines.iter().map(|eng| Ok(threshold_row(f, eng.event(), &eng.sweep(f)?))).collect()
    })?;
    let body = format!("{THRESHOLD_SCHEMA}\n{THRESHOLD_HEADER}\n{}", rows.concat().iter().map(|r| format!("{r}\n")).collect::<String>());
    out.write("thresholds.csv", body)?;
    out.write_config(cfg)?;
    Ok(())
}

fn experiment(cfg: &mut RunConfig, name: &str, fault: Option<Fault>) -> Result<(), CliError> {
    cfg.resolve_experiment(name);
    let mc = cfg.mc()?;
    let x = cfg.experiment.clone();
    let unwrap = |v: Option<Vec<f64>>| v.expect("resolved");
    let (table, json, violations) = match name {
        "variance-scan" => {
            let r = variance_scan(&mc, &unwrap(x.sides))?;
            eprintln!("product nonincreasing: {:?}, variance decreasing: {:?}", r.product_nonincreasing, r.variance_decreasing);
            (output::variance_csv(&r), output::summary_json(name, cfg, &r), 0)
        }
        "quarter-bound" => {
            let r = quarter_bound_test(&mc)?;
            report_checks(&r.summary.checks);
            (output::quarter_csv(&r), output::summary_json(name, cfg, &r), 0)
        }
        "tails" => {
            let r = concentration_tail_test(&mc, &unwrap(x.eps))?;
            report_checks(&r.rows.iter().flat_map(|t| [t.upper_check.clone(), t.lower_check.clone()]).collect::<Vec<_>>());
            (output::tails_csv(&r), output::summary_json(name, cfg, &r), 0)
        }
        "crossing-curve" => {
            let r = crossing_curve(&mc, &unwrap(x.r_list), &unwrap(x.levels))?;
            (output::curve_csv(name, &r), output::summary_json(name, cfg, &r), 0)
        }
        "circuit-scan" => {
            let r = circuit_scan(&mc, &unwrap(x.r_list), &unwrap(x.l_list), &unwrap(x.levels))?;
            (output::curve_csv(name, &r), output::summary_json(name, cfg, &r), 0)
        }
        "fkg" => {
            let a = cfg.event(x.event_a.as_ref().expect("resolved"))?;
            let b = cfg.event(x.event_b.as_ref().expect("resolved"))?;
            let r = fkg_test(&mc, &a, &b, x.level.expect("resolved"))?;
            report_checks(std::slice::from_ref(&r.check));
            (output::fkg_csv(&r), output::summary_json(name, cfg, &r), 0)
        }
        "audit" => {
            let params = AuditParams {
                loop_level: x.loop_level.expect("resolved"),
                glue_level: x.glue_level.expect("resolved"),
                glue_l: x.glue_l.expect("resolved"),
                fault: fault.map(|Fault::DropConclusions| AuditFault::DropConclusions),
            };
            let r = implication_audit(&mc, &params)?;
            report_checks(&r.summary.checks);
            eprintln!(
                "loop-to-cross violations: {}, gluing violations: {}",
                r.loop_to_cross_violations, r.gluing_violations
            );
            (output::audit_csv(&r), output::summary_json(name, cfg, &r), r.violations())
        }
        other => return Err(CliError::Config(format!("unknown experiment {other:?}"))),
    };
    let out = OutDir::new(&cfg.out);
    out.write(&format!("{name}.csv"), table)?;
    out.write(&format!("{name}.json"), json)?;
    out.write_config(cfg)?;
    if violations > 0 {
        return Err(CliError::Audit(violations));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = load(cli)?;
    if let Some(j) = cfg.jobs {
        // a second initialization only happens in-process and keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match &cli.command {
        Command::ValidateKernel => validate_kernel(&cfg),
        Command::Threshold { events, export } => threshold(&mut cfg, events, *export),
        Command::Experiment { name, inject_fault } => experiment(&mut cfg, name, *inject_fault),
    }
}

fn main() {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    eprintln!("wall clock: {:.3}s", start.elapsed().as_secs_f64());
    if let Err(e) = result {
        eprintln!("gfperc: {e}");
        std::process::exit(e.exit_code());
    }
}
