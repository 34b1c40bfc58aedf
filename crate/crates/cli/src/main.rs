// negated comparisons reject NaN inputs alongside out-of-range ones
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Command-line front door: classification, atlas rasters, dispersion
//! tables, simulation, virial checks, and decay reports.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcd_core::atlas::{rasterize, Axes, AxisRange, Predicate};
use abcd_core::diagnostics::{decay_report, virial_residual, Frame, ReportConfig};
use abcd_core::params::{ParamsSpec, PhysParams};
use abcd_core::regions::classify;
use abcd_core::solver::{evolve, gaussian, FieldPair, SolverConfig};
use abcd_core::spectral::Grid;
use abcd_core::traj::Trajectory;
use abcd_core::virial::{positivity_certificate, DiscreteWeight, ScaleLaw, WeightProfile};
use abcd_core::waves::{sample, zero_gv_wavenumbers};

/// Exit codes: 0 ok, 1 invariant failure, 2 configuration, 3 io,
/// 4 numerical failure.
#[derive(Debug, Clone, Copy)]
enum Code {
    Invariant = 1,
    Config = 2,
    Io = 3,
    Numerical = 4,
}

fn fail(code: Code, err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(code as u8)
}

#[derive(Parser)]
#[command(
    name = "abcd-lab",
    version,
    about = "Numerical laboratory for the 1-D Hamiltonian abcd Boussinesq system"
)]
struct Cli {
    /// Seed fixing all stochastic choices (none of the current commands
    /// draw randomness, but the flag is part of the run configuration)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a parameter triple against the decay-region predicates
    Classify {
        /// Path to a JSON parameter file, or inline JSON
        #[arg(long)]
        params: String,
        /// Frame-speed bound for the uniform-window predicate
        #[arg(long)]
        v0: Option<f64>,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rasterize region predicates over a parameter rectangle
    Atlas {
        /// Axis layout: `nu-b` or `a-c`
        #[arg(long, default_value = "nu-b")]
        axes: String,
        /// Fixed b for the a-c layout
        #[arg(long)]
        b: Option<f64>,
        /// Resolution `NxM`
        #[arg(long, default_value = "400x400")]
        res: String,
        /// Comma-separated predicates: dispersion_like, refined, ellipse,
        /// hyperbola, obstruction, r_sharp
        #[arg(long)]
        predicates: String,
        /// Frame-speed bound required by the r_sharp predicate
        #[arg(long)]
        v0: Option<f64>,
        /// Override the x range as `lo,hi`
        #[arg(long)]
        x_range: Option<String>,
        /// Override the y range as `lo,hi`
        #[arg(long)]
        y_range: Option<String>,
        /// Output path; `.svg` or `.csv` decides the format
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate dispersion relation, amplitude, and group velocity
    Waves {
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 50.0)]
        kmax: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// CSV output with columns k, omega, A, group_velocity
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the positive zero-group-velocity wavenumbers as JSON
        #[arg(long)]
        find_zero_gv: bool,
    },
    /// Integrate the normalized system and store the trajectory
    Simulate {
        #[arg(long)]
        params: String,
        /// `gaussian:amp,width[,center]` or a CSV file with rows x,u,eta
        #[arg(long, default_value = "gaussian:0.05,5")]
        init: String,
        /// Grid as `n,length`
        #[arg(long, default_value = "2048,628.3185307179587")]
        grid: String,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long = "T", default_value_t = 100.0)]
        t_end: f64,
        /// Snapshot stride in steps
        #[arg(long, default_value_t = 100)]
        stride: usize,
        /// Disable two-thirds dealiasing of the quadratic products
        #[arg(long)]
        no_dealias: bool,
        /// Output: `.bin` for the binary format, anything else is a
        /// directory of per-snapshot CSV files
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference check of the virial decomposition on a trajectory
    VirialCheck {
        #[arg(long)]
        traj: PathBuf,
        /// `auto` picks the certificate value for the trajectory parameters
        #[arg(long, default_value = "auto")]
        alpha: String,
        /// Weight profile: `tanh` or `sech2`
        #[arg(long, default_value = "tanh")]
        weight: String,
        /// Frame speed of the moving weight
        #[arg(long, default_value_t = 0.0)]
        v: f64,
        /// Residual CSV: t, dH_dt_fd, Q, SQ, NQ, VH, residual
        #[arg(long)]
        out: PathBuf,
    },
    /// Windowed and weighted decay report over a trajectory
    DecayReport {
        #[arg(long)]
        traj: PathBuf,
        /// Comma-separated window speeds
        #[arg(long, default_value = "0.0")]
        velocities: String,
        /// Comma-separated exterior frame speeds
        #[arg(long, default_value = "")]
        sigma: String,
        #[arg(long, default_value_t = 2.0)]
        t_start: f64,
        /// Fixed width of the exterior frames
        #[arg(long, default_value_t = 5.0)]
        exterior_l: f64,
        /// JSON report
        #[arg(long)]
        out: PathBuf,
        /// Optional series CSV: t, frame_id, window_h1, sech2, sech4, eloc
        #[arg(long)]
        series: Option<PathBuf>,
    },
}

fn load_params(arg: &str) -> Result<PhysParams> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading parameter file {arg}"))?
    };
    let spec: ParamsSpec = serde_json::from_str(&text).context("parsing parameter JSON")?;
    Ok(spec.resolve()?)
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let mut it = s.split(',');
    let a = it
        .next()
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| anyhow!("bad {what} `{s}`"))?;
    let b = it
        .next()
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| anyhow!("bad {what} `{s}`"))?;
    Ok((a, b))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| anyhow!("bad list entry `{v}`"))
        })
        .collect()
}

fn write_out(path: &Path, data: &str) -> Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn build_init(grid: &Grid, spec: &str) -> Result<FieldPair> {
    if let Some(rest) = spec.strip_prefix("gaussian:") {
        let parts: Vec<f64> = rest
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| anyhow!("bad gaussian spec `{spec}`"))
            })
            .collect::<Result<_>>()?;
        if parts.len() < 2 || parts.len() > 3 {
            bail!("gaussian spec needs amp,width[,center]");
        }
        let (amp, width) = (parts[0], parts[1]);
        let center = parts.get(2).copied().unwrap_or(0.0);
        if !(width > 0.0) {
            bail!("gaussian width must be positive");
        }
        let bump = gaussian(grid, amp, width, center);
        return Ok(FieldPair {
            u: bump.clone(),
            eta: bump,
            t: 0.0,
        });
    }
    // CSV file with rows x,u,eta (header lines ignored)
    let text = fs::read_to_string(spec).with_context(|| format!("reading init file {spec}"))?;
    let mut u = Vec::new();
    let mut eta = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let mut cols = line.split(',');
        let _x = cols.next();
        let uv: f64 = cols
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| anyhow!("bad init row `{line}`"))?;
        let ev: f64 = cols
            .next()
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| anyhow!("bad init row `{line}`"))?;
        u.push(uv);
        eta.push(ev);
    }
    if u.len() != grid.n {
        bail!("init file has {} rows, grid needs {}", u.len(), grid.n);
    }
    Ok(FieldPair { u, eta, t: 0.0 })
}

fn run(cli: Cli) -> Result<(), (Code, anyhow::Error)> {
    match cli.command {
        Command::Classify { params, v0, out } => {
            let p = load_params(&params).map_err(|e| (Code::Config, e))?;
            let scenario = classify(&p, v0).map_err(|e| (Code::Config, e.into()))?;
            let json = serde_json::to_string_pretty(&scenario).map_err(|e| (Code::Io, e.into()))?;
            match out {
                Some(path) => write_out(&path, &json).map_err(|e| (Code::Io, e))?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Atlas {
            axes,
            b,
            res,
            predicates,
            v0,
            x_range,
            y_range,
            out,
        } => {
            let (nx, ny) = {
                let mut it = res.split('x');
                let nx: usize = it
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| (Code::Config, anyhow!("bad resolution `{res}`")))?;
                let ny: usize = it
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| (Code::Config, anyhow!("bad resolution `{res}`")))?;
                (nx, ny)
            };
            let preds: Vec<Predicate> = predicates
                .split(',')
                .map(|name| Predicate::parse(name.trim(), v0))
                .collect::<Result<_, _>>()
                .map_err(|e| (Code::Config, e.into()))?;
            let (layout, xr, yr) = match axes.as_str() {
                "nu-b" => (
                    Axes::NuB,
                    AxisRange { lo: 0.0, hi: 1.0 },
                    AxisRange {
                        lo: 1.0 / 6.0,
                        hi: 0.5,
                    },
                ),
                "a-c" => {
                    let b =
                        b.ok_or_else(|| (Code::Config, anyhow!("a-c axes require --b <fixed b>")))?;
                    let lo = -b - 1.0 / 6.0;
                    (
                        Axes::AcAtFixedB { b },
                        AxisRange { lo, hi: -1e-4 },
                        AxisRange { lo, hi: -1e-4 },
                    )
                }
                other => {
                    return Err((Code::Config, anyhow!("unknown axes `{other}`")));
                }
            };
            let xr = match x_range {
                Some(s) => {
                    let (lo, hi) = parse_pair(&s, "x range").map_err(|e| (Code::Config, e))?;
                    AxisRange { lo, hi }
                }
                None => xr,
            };
            let yr = match y_range {
                Some(s) => {
                    let (lo, hi) = parse_pair(&s, "y range").map_err(|e| (Code::Config, e))?;
                    AxisRange { lo, hi }
                }
                None => yr,
            };
            let map =
                rasterize(&preds, layout, xr, yr, nx, ny).map_err(|e| (Code::Config, e.into()))?;
            let rendered = match out.extension().and_then(|e| e.to_str()) {
                Some("svg") => map.to_svg(),
                Some("csv") => map.to_csv(),
                _ => {
                    return Err((
                        Code::Config,
                        anyhow!("atlas output must end in .svg or .csv"),
                    ));
                }
            };
            write_out(&out, &rendered).map_err(|e| (Code::Io, e))?;
            Ok(())
        }
        Command::Waves {
            params,
            kmax,
            samples,
            out,
            find_zero_gv,
        } => {
            let p = load_params(&params).map_err(|e| (Code::Config, e))?;
            if find_zero_gv {
                let roots = zero_gv_wavenumbers(&p);
                let json = serde_json::json!({ "zero_group_velocity_wavenumbers": roots });
                println!("{json}");
            }
            if let Some(path) = out {
                if samples < 2 || !(kmax > 0.0) {
                    return Err((Code::Config, anyhow!("need samples >= 2 and kmax > 0")));
                }
                let mut csv = String::from("k,omega,A,group_velocity\n");
                for i in 0..samples {
                    let k = kmax * i as f64 / (samples - 1) as f64;
                    let row = sample(&p, k);
                    let _ = writeln!(
                        csv,
                        "{k},{},{},{}",
                        row.omega, row.amplitude, row.group_velocity
                    );
                }
                write_out(&path, &csv).map_err(|e| (Code::Io, e))?;
            }
            Ok(())
        }
        Command::Simulate {
            params,
            init,
            grid,
            dt,
            t_end,
            stride,
            no_dealias,
            out,
        } => {
            let p = load_params(&params).map_err(|e| (Code::Config, e))?;
            let (n, length) = parse_pair(&grid, "grid").map_err(|e| (Code::Config, e))?;
            let grid = Grid::new(n as usize, length).map_err(|e| (Code::Config, e.into()))?;
            let init = build_init(&grid, &init).map_err(|e| (Code::Config, e))?;
            let cfg = SolverConfig {
                dt,
                t_end,
                dealias: !no_dealias,
                stride,
            };
            let np = p.normalized();
            let snapshots = evolve(&grid, init, &np, &cfg).map_err(|e| match e {
                abcd_core::solver::SolverError::InvalidConfig(_) => (Code::Config, e.into()),
                abcd_core::solver::SolverError::NonFiniteState { .. } => {
                    (Code::Numerical, e.into())
                }
            })?;
            let traj = Trajectory {
                grid,
                params: p,
                solver_dt: dt,
                dealias: !no_dealias,
                snapshots,
            };
            let result = if out.extension().and_then(|e| e.to_str()) == Some("bin") {
                traj.save_binary(&out)
            } else {
                traj.save_csv_dir(&out)
            };
            result.map_err(|e| (Code::Io, e.into()))?;
            println!(
                "wrote {} snapshots (n = {}, length = {:.6}) to {}",
                traj.snapshots.len(),
                traj.grid.n,
                traj.grid.length,
                out.display()
            );
            Ok(())
        }
        Command::VirialCheck {
            traj,
            alpha,
            weight,
            v,
            out,
        } => {
            let traj = Trajectory::load(&traj).map_err(|e| (Code::Io, e.into()))?;
            let alpha = match alpha.as_str() {
                "auto" => {
                    let cert = positivity_certificate(&traj.params);
                    cert.alpha.unwrap_or(0.0)
                }
                s => s
                    .parse()
                    .map_err(|_| (Code::Config, anyhow!("bad alpha `{s}`")))?,
            };
            let profile = match weight.as_str() {
                "tanh" => WeightProfile::Tanh,
                "sech2" => WeightProfile::Sech2,
                other => {
                    return Err((Code::Config, anyhow!("unknown weight `{other}`")));
                }
            };
            let w = DiscreteWeight::new(profile, v, ScaleLaw::LogSquared);
            let series =
                virial_residual(&traj, alpha, &w).map_err(|e| (Code::Numerical, e.into()))?;
            let mut csv = String::from("t,dH_dt_fd,Q,SQ,NQ,VH,residual\n");
            for s in &series {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    s.t, s.dh_dt_fd, s.q, s.sq, s.nq, s.vh, s.residual
                );
            }
            write_out(&out, &csv).map_err(|e| (Code::Io, e))?;
            let worst = series
                .iter()
                .map(|s| s.residual.abs() / s.dh_dt_fd.abs().max(1.0))
                .fold(0.0, f64::max);
            println!(
                "alpha = {alpha}, {} samples, worst relative residual {worst:.3e}",
                series.len()
            );
            Ok(())
        }
        Command::DecayReport {
            traj,
            velocities,
            sigma,
            t_start,
            exterior_l,
            out,
            series,
        } => {
            let traj = Trajectory::load(&traj).map_err(|e| (Code::Io, e.into()))?;
            let velocities = parse_list(&velocities).map_err(|e| (Code::Config, e))?;
            let sigmas = parse_list(&sigma).map_err(|e| (Code::Config, e))?;
            let cfg = ReportConfig {
                t_start,
                exterior_l,
                ..Default::default()
            };
            let report = decay_report(&traj, &velocities, &sigmas, &cfg)
                .map_err(|e| (Code::Numerical, e.into()))?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| (Code::Io, e.into()))?;
            write_out(&out, &json).map_err(|e| (Code::Io, e))?;
            if let Some(path) = series {
                let mut csv = String::from("t,frame_id,window_h1,sech2,sech4,eloc\n");
                for (fid, frame) in report.frames.iter().enumerate() {
                    let label = match &frame.frame {
                        Frame::Cone { v } => format!("cone_v_{v}"),
                        Frame::Exterior { sigma, .. } => format!("exterior_sigma_{sigma}"),
                    };
                    for p in &frame.series {
                        let _ = writeln!(
                            csv,
                            "{},{label}_{fid},{},{},{},{}",
                            p.t, p.window_h1, p.sech2, p.sech4, p.eloc
                        );
                    }
                }
                write_out(&path, &csv).map_err(|e| (Code::Io, e))?;
            }
            if !report.flags.is_empty() {
                for f in &report.flags {
                    eprintln!("flag: {f}");
                }
                return Err((
                    Code::Invariant,
                    anyhow!(
                        "{} frame(s) violate the decay prediction",
                        report.flags.len()
                    ),
                ));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ABCD_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, err)) => fail(code, err),
    }
}
