//! `lab`: batch front end of the mixdiff laboratory.
//!
//! Every subcommand reads one JSON configuration, applies `--set key=value`
//! overrides, runs, and writes CSV series plus `report.json` into `--out`.
//! Exit codes: 0 success, 1 I/O, 2 configuration, 3 numeric or resolution.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use mixdiff::criteria::{blowup_certificate_scan, exponent_report, global_certificate};
use mixdiff::duhamel::evolve_with;
use mixdiff::kernels::{fractional_profile_with, mixed_kernel, verify_profile_bounds, KernelParams, ProfileTable};
use mixdiff::lab::config::ratio_to_f64;
use mixdiff::lab::{
    emit_report, load_config, run_sweep, testfn_experiment, write_sweep_csv, write_testfn_csv,
    CriteriaConfig, EvolveConfig, KernelConfig, KernelKind, RunRecord, RvfConfig, SweepConfig, TestfnConfig,
};
use mixdiff::rvf::{karamata_head_ratio, karamata_tail_ratio, slow_variation_ratio_test, CoefficientH};
use mixdiff::{Error, Result};
use num_rational::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lab", version, about = "Pseudospectral laboratory for mixed local-nonlocal semilinear heat equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set fixed.p=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "lab-out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the fractional or mixed kernel profile.
    Kernel(Common),
    /// Integrate one problem and classify the trajectory.
    Evolve(Common),
    /// Run a Cartesian parameter sweep.
    Sweep(Common),
    /// Exponent report and optional certificates.
    Criteria(Common),
    /// Slow-variation and Karamata diagnostics.
    Rvf(Common),
    /// Scaling of the test-function integrals.
    Testfn(Common),
}

fn read_doc(path: Option<&Path>) -> Result<Value> {
    match path {
        None => Ok(Value::Null),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.into(),
                source: e,
            })?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn resolve<T: serde::de::DeserializeOwned + serde::Serialize>(c: &Common) -> Result<(T, Value)> {
    let cfg: T = load_config(read_doc(c.config.as_deref())?, &c.sets)?;
    let echo = serde_json::to_value(&cfg)?;
    Ok((cfg, echo))
}

fn kernel(c: &Common) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = resolve::<KernelConfig<f64>>(c)?;
    let table = match cfg.kind {
        KernelKind::Fractional => fractional_profile_with(cfg.s, cfg.dim, &cfg.radii, &cfg.inversion)?,
        KernelKind::Mixed => {
            let params = KernelParams::new(cfg.s, cfg.dim, cfg.t)?;
            let values = cfg
                .radii
                .iter()
                .map(|&r| mixed_kernel(&params, r, cfg.nodes))
                .collect::<Result<Vec<_>>>()?;
            ProfileTable {
                s: cfg.s,
                dim: cfg.dim,
                radii: cfg.radii.clone(),
                positive: values.iter().map(|v| *v > 0.0).collect(),
                values,
                resolution: None,
            }
        }
    };
    mixdiff::lab::report::ensure_dir(&c.out)?;
    table.write_csv(c.out.join("kernel.csv"))?;
    let bounds = match cfg.kind {
        KernelKind::Fractional => serde_json::to_value(verify_profile_bounds(&table)?)?,
        KernelKind::Mixed => Value::Null,
    };
    let extra = json!({ "profile": "kernel.csv", "bounds": bounds, "resolution": table.resolution });
    emit_report::<f64>(&c.out, "kernel", &echo, &[], extra, start.elapsed())?;
    Ok(())
}

fn evolve(c: &Common) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = resolve::<EvolveConfig<f64>>(c)?;
    let spec = cfg.problem.to_spec()?;
    let traj = evolve_with(&spec, &cfg.tgrid, &cfg.options)?;
    let run = RunRecord {
        name: "evolve".into(),
        trajectory: &traj,
        config: echo.clone(),
    };
    emit_report(&c.out, "evolve", &echo, &[run], Value::Null, start.elapsed())?;
    println!("{}", traj.verdict.kind_name());
    Ok(())
}

fn sweep(c: &Common) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = resolve::<SweepConfig<f64>>(c)?;
    let result = run_sweep(&cfg)?;
    mixdiff::lab::report::ensure_dir(&c.out)?;
    let aggregate = c.out.join(&cfg.output);
    write_sweep_csv(&result, &aggregate)?;
    let runs: Vec<RunRecord<'_, f64>> = if cfg.series {
        result
            .rows
            .iter()
            .filter_map(|r| {
                r.trajectory.as_ref().map(|t| RunRecord {
                    name: format!("run_{:04}", r.index),
                    trajectory: t,
                    config: serde_json::to_value(r).unwrap_or(Value::Null),
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    for s in &result.skips {
        eprintln!("skipped tuple {}: {}", s.index, s.reason);
    }
    let extra = json!({
        "aggregate": cfg.output,
        "tuples": result.tuples,
        "rows": result.rows.len(),
        "skips": result.skips,
    });
    emit_report(&c.out, "sweep", &echo, &runs, extra, start.elapsed())?;
    println!("{} rows, {} skipped", result.rows.len(), result.skips.len());
    Ok(())
}

fn rational_json(q: &BigRational) -> Value {
    json!({ "exact": q.to_string(), "value": ratio_to_f64(q) })
}

fn criteria(c: &Common) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = resolve::<CriteriaConfig<f64>>(c)?;
    let q = |n: &mixdiff::lab::ExactNumber| n.to_rational();
    let report = exponent_report(cfg.dim, q(&cfg.s)?, q(&cfg.b)?, q(&cfg.gamma)?, q(&cfg.rho)?, q(&cfg.p)?)?;
    let opt = |v: &Option<BigRational>| v.as_ref().map(rational_json).unwrap_or(Value::Null);
    let window = report.r_window.as_ref().map(|w| {
        json!({
            "lower": rational_json(&w.lower),
            "upper": rational_json(&w.upper),
            "empty": w.empty,
            "first_case": w.first_case,
            "r_mid": opt(&w.r_mid),
            "mu": opt(&w.mu),
            "mu_residual": opt(&w.mu_residual),
        })
    });
    let mut extra = json!({
        "p": rational_json(&report.p),
        "p_f": rational_json(&report.p_f),
        "p_star": opt(&report.p_star),
        "p_c": opt(&report.p_c),
        "q_c": opt(&report.q_c),
        "r_window": window,
        "boundary_fujita": report.boundary_fujita,
        "boundary_forced": report.boundary_forced,
        "notes": report.notes,
    });
    if let Some(cert) = &cfg.certificates {
        let data = cert.data.realize(&cert.grid)?;
        let s = cfg.s.to_f64()?;
        let p = cfg.p.to_f64()?;
        let h = CoefficientH::new(cfg.gamma.to_f64()?, cfg.ell.build()?);
        let blow = blowup_certificate_scan(&data, s, &h, p, &cert.blowup_times)?;
        extra["blowup_certificates"] = serde_json::to_value(blow)?;
        if let Some(t) = cert.global_split {
            extra["global_certificate"] = serde_json::to_value(global_certificate(&data, s, &h, p, t)?)?;
        }
    }
    emit_report::<f64>(&c.out, "criteria", &echo, &[], extra, start.elapsed())?;
    Ok(())
}

fn rvf(c: &Common) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = resolve::<RvfConfig<f64>>(c)?;
    let ell = cfg.ell.build()?;
    let table = slow_variation_ratio_test(&ell, &cfg.x_values, &cfg.lambdas, cfg.tolerance)?;
    let l = |t: f64| t.powf(cfg.rho) * ell.eval(t).unwrap_or(f64::NAN);
    let mut karamata = Vec::new();
    for &x in &cfg.karamata_x {
        let (kind, r) = if cfg.rho >= -1.0 {
            ("head", karamata_head_ratio(l, x)?)
        } else {
            ("tail", karamata_tail_ratio(l, x)?)
        };
        karamata.push(json!({ "x": x, "kind": kind, "ratio": r.ratio, "integral": r.integral, "evaluations": r.evaluations }));
    }
    let limit = if cfg.rho >= -1.0 { cfg.rho + 1.0 } else { -cfg.rho - 1.0 };
    let extra = json!({
        "ratio_test": {
            "x_values": table.x_values,
            "lambda_values": table.lambda_values,
            "ratios": table.ratios,
            "tolerance": table.tolerance,
            "pass": table.pass,
        },
        "karamata": karamata,
        "karamata_limit": limit,
    });
    emit_report::<f64>(&c.out, "rvf", &echo, &[], extra, start.elapsed())?;
    Ok(())
}

fn testfn(c: &Common) -> Result<()> {
    let start = Instant::now();
    let (cfg, echo) = resolve::<TestfnConfig<f64>>(c)?;
    let spec = cfg.problem.to_spec()?;
    let table = testfn_experiment(&spec, &cfg.r_values, cfg.time_scaling)?;
    mixdiff::lab::report::ensure_dir(&c.out)?;
    write_testfn_csv(&table, c.out.join("testfn.csv"))?;
    let mut extra = serde_json::to_value(&table)?;
    extra["table"] = json!("testfn.csv");
    emit_report::<f64>(&c.out, "testfn", &echo, &[], extra, start.elapsed())?;
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Csv { .. } => 1,
        e if e.is_numeric() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Kernel(c) => kernel(c),
        Command::Evolve(c) => evolve(c),
        Command::Sweep(c) => sweep(c),
        Command::Criteria(c) => criteria(c),
        Command::Rvf(c) => rvf(c),
        Command::Testfn(c) => testfn(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
