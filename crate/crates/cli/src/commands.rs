//! Subcommand implementations: each runs its campaign, writes
//! `<name>.csv` and `<name>.report.json` into the output directory, adds a
//! line plot when asked, and reports whether any hard check failed.

use std::path::{Path, PathBuf};

use rshe_core::bridge::{empirical_to_ustar, read_samples, ustar_to_quantile};
use rshe_core::experiments::{
    bridge_suite, contraction_experiment, convergence_experiment, energy_experiment,
    heat_consistency_suite, key_inequality_suite, noise_law_suite, orthogonality_experiment,
    rearrangement_suite, reflection_experiment, riesz_polya_suite, smoothing_experiment,
    ExperimentReport, PropertiesConfig, SmoothingParams, Status,
};
use rshe_core::grid::CircleFunction;
use rshe_core::heat::heat_apply;
use rshe_core::noise::ConvIncrement;
use rshe_core::scheme::{simulate, simulate_with};
use rshe_core::{Error, Result};

use crate::config::RunConfig;
use crate::output::{float_cell, report_rows, write_csv, write_reports_json, REPORT_HEADER};
use crate::plot::{write_line_plot, Series};

pub struct CommandOutcome {
    /// Every hard verdict passed (warnings allowed).
    pub hard_ok: bool,
    pub files: Vec<PathBuf>,
}

fn emit(
    name: &str,
    out_dir: &Path,
    reports: &[&ExperimentReport],
    svg: bool,
) -> Result<CommandOutcome> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(format!("{name}.csv"));
    write_csv(&csv_path, &REPORT_HEADER, &report_rows(reports))?;
    let json_path = out_dir.join(format!("{name}.report.json"));
    write_reports_json(&json_path, reports)?;
    let mut files = vec![csv_path, json_path];

    if svg {
        let mut series: Vec<Series> = Vec::new();
        for report in reports {
            let mut labels: Vec<&str> = Vec::new();
            for e in &report.estimates {
                if !labels.contains(&e.label.as_str()) {
                    labels.push(&e.label);
                }
            }
            for label in labels {
                let points: Vec<(f64, f64)> = report
                    .estimates
                    .iter()
                    .filter(|e| e.label == label)
                    .map(|e| (e.x, e.value))
                    .collect();
                if points.len() >= 2 {
                    series.push(Series {
                        label: format!("{}/{label}", report.name),
                        points,
                    });
                }
            }
        }
        if !series.is_empty() {
            let svg_path = out_dir.join(format!("{name}.svg"));
            write_line_plot(&svg_path, name, &series)?;
            files.push(svg_path);
        }
    }

    let mut hard_ok = true;
    for report in reports {
        for v in &report.verdicts {
            let tag = match v.status {
                Status::Pass => "pass",
                Status::Warn => "WARN",
                Status::Fail => "FAIL",
            };
            println!("[{tag}] {}::{} - {}", report.name, v.check, v.detail);
            hard_ok &= v.status != Status::Fail;
        }
    }
    Ok(CommandOutcome { hard_ok, files })
}

fn properties_config(cfg: &RunConfig) -> PropertiesConfig {
    PropertiesConfig {
        master_seed: cfg.seed,
        functions_per_grid: cfg.properties_functions,
        triples: cfg.properties_triples,
        energy_pairs: cfg.properties_pairs,
        noise_samples: cfg.properties_noise_samples,
    }
}

pub fn properties(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    let pc = properties_config(cfg);
    let grids = [4, 16, cfg.grid_n.max(32)];
    let reports = vec![
        rearrangement_suite(&pc, &grids)?,
        riesz_polya_suite(&pc, &[cfg.grid_n.max(32)])?,
        key_inequality_suite(&pc, cfg.grid_n)?,
        heat_consistency_suite(&pc, cfg.grid_n)?,
        noise_law_suite(&pc)?,
    ];
    emit("properties", out_dir, &reports.iter().collect::<Vec<_>>(), svg)
}

pub fn simulate_cmd(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    let scheme = cfg.scheme()?;
    let x0 = CircleFunction::zero(scheme.grid);
    let traj = if cfg.zero_noise {
        simulate_with(&scheme, &x0, |_| ConvIncrement::zero(&scheme.noise, scheme.h))?
    } else {
        simulate(&scheme, &x0, 0)?
    };

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let n = scheme.grid.n();
    let mut header: Vec<String> = vec![
        "t".to_string(),
        "norm_l2".to_string(),
        "mean".to_string(),
        "min".to_string(),
        "max".to_string(),
    ];
    header.extend((0..n).map(|i| format!("v{i}")));
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut rows = Vec::new();
    let mut norm_series = Vec::new();
    for (t, x) in traj.times().iter().zip(traj.states()) {
        let vals = x.values();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut row = vec![
            float_cell(*t),
            float_cell(x.norm_l2()),
            float_cell(mean),
            float_cell(min),
            float_cell(max),
        ];
        row.extend(vals.iter().map(|v| float_cell(*v)));
        rows.push(row);
        norm_series.push((*t, x.norm_l2()));
    }
    let csv_path = out_dir.join("simulate.csv");
    write_csv(&csv_path, &header_refs, &rows)?;

    // Zero-noise runs are pure heat flow; report the deviation as a check.
    let mut verdicts = Vec::new();
    if cfg.zero_noise {
        let mut worst = 0.0f64;
        for (t, x) in traj.times().iter().zip(traj.states()) {
            worst = worst.max(x.sub(&heat_apply(*t, &x0)?).norm_l2());
        }
        verdicts.push(rshe_core::experiments::Verdict {
            check: "zero-noise trajectory equals heat flow <= 1e-10".to_string(),
            status: if worst <= 1e-10 {
                Status::Pass
            } else {
                Status::Fail
            },
            detail: format!("worst deviation {worst:.3e}"),
        });
    }
    let report = ExperimentReport {
        name: "simulate".to_string(),
        config: vec![
            ("grid.n".to_string(), scheme.grid.n().to_string()),
            ("noise.lambda".to_string(), scheme.noise.lambda().to_string()),
            ("noise.zero".to_string(), cfg.zero_noise.to_string()),
            ("scheme.h".to_string(), scheme.h.to_string()),
            ("scheme.T".to_string(), scheme.t_horizon.to_string()),
            ("seed".to_string(), cfg.seed.to_string()),
        ],
        estimates: norm_series
            .iter()
            .map(|(t, v)| rshe_core::experiments::Estimate {
                label: "norm_l2".to_string(),
                x: *t,
                value: *v,
                std_error: 0.0,
                samples: 1,
            })
            .collect(),
        verdicts,
        wall_clock_s: 0.0,
    };
    let json_path = out_dir.join("simulate.report.json");
    write_reports_json(&json_path, &[&report])?;
    let mut files = vec![csv_path, json_path];
    if svg {
        let svg_path = out_dir.join("simulate.svg");
        write_line_plot(
            &svg_path,
            "simulate",
            &[Series {
                label: "norm_l2".to_string(),
                points: norm_series,
            }],
        )?;
        files.push(svg_path);
    }
    let hard_ok = report.verdicts.iter().all(|v| v.status != Status::Fail);
    for v in &report.verdicts {
        println!(
            "[{}] simulate::{} - {}",
            if v.status == Status::Pass { "pass" } else { "FAIL" },
            v.check,
            v.detail
        );
    }
    Ok(CommandOutcome { hard_ok, files })
}

pub fn contraction(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    let report = contraction_experiment(&cfg.scheme()?, cfg.paths)?;
    emit("contraction", out_dir, &[&report], svg)
}

pub fn reflection(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    let scheme = cfg.scheme()?;
    let structure = reflection_experiment(&scheme, cfg.paths.min(200))?;
    let ortho = orthogonality_experiment(&scheme, &cfg.eps_grid, cfg.paths)?;
    emit("reflection", out_dir, &[&structure, &ortho], svg)
}

pub fn energy(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    let report = energy_experiment(&cfg.scheme()?, cfg.paths, cfg.epsilon)?;
    emit("energy", out_dir, &[&report], svg)
}

pub fn smoothing(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    let params = SmoothingParams {
        t_grid: cfg.t_grid.clone(),
        probes: cfg.probes,
        alpha: cfg.alpha,
        delta: cfg.delta,
        paths: cfg.paths,
    };
    let report = smoothing_experiment(&cfg.scheme()?, &params)?;
    emit("smoothing", out_dir, &[&report], svg)
}

pub fn convergence(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    let report = convergence_experiment(&cfg.scheme()?, cfg.levels, cfg.paths)?;
    emit("convergence", out_dir, &[&report], svg)
}

pub fn bridge(cfg: &RunConfig, out_dir: &Path, svg: bool) -> Result<CommandOutcome> {
    match &cfg.sample_file {
        None => {
            let report = bridge_suite(cfg.grid_n, cfg.paths, cfg.seed)?;
            emit("bridge", out_dir, &[&report], svg)
        }
        Some(path) => {
            let samples = read_samples(path)?;
            let grid = cfg.grid()?;
            let state = empirical_to_ustar(&samples, grid)?;
            let quantiles = ustar_to_quantile(&state)?;
            std::fs::create_dir_all(out_dir)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
            let rows: Vec<Vec<String>> = quantiles
                .u_grid()
                .iter()
                .zip(quantiles.values())
                .map(|(u, q)| vec![float_cell(*u), float_cell(*q)])
                .collect();
            let csv_path = out_dir.join("bridge.csv");
            write_csv(&csv_path, &["u", "quantile"], &rows)?;
            let report = ExperimentReport {
                name: "bridge".to_string(),
                config: vec![
                    ("grid.n".to_string(), grid.n().to_string()),
                    ("bridge.sample_file".to_string(), path.display().to_string()),
                    ("samples".to_string(), samples.len().to_string()),
                ],
                estimates: vec![],
                verdicts: vec![rshe_core::experiments::Verdict {
                    check: "ingested state is symmetric non-increasing".to_string(),
                    status: Status::Pass,
                    detail: format!("{} samples onto {} grid points", samples.len(), grid.n()),
                }],
                wall_clock_s: 0.0,
            };
            let json_path = out_dir.join("bridge.report.json");
            write_reports_json(&json_path, &[&report])?;
            Ok(CommandOutcome {
                hard_ok: true,
                files: vec![csv_path, json_path],
            })
        }
    }
}
