//! Command-line front end.
//!
//! Exit codes: 0 success, 2 validation error, 3 solver non-convergence,
//! 4 topological rejection. Errors are also emitted as single-line JSON
//! diagnostics on stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::atlas::{sweep, verify_scaling, AtlasRow};
use crate::config::{load_mesh_source, ComponentConfig, TripleConfig};
use crate::disk::{disk_c_hat, disk_curvature, disk_length, rho_from_length, DiskParameter};
use crate::error::{Error, Result};
use crate::junction::{all_disk_case, match_junction, uniqueness_probe, MatchOptions};
use crate::operators::{build_operators, ConformalState};
use crate::report::{atlas_csv, disk_csv, emit_plot, match_result_json, solve_report_json};
use crate::scalar::fmt_g17;
use crate::solver::{solve, CurvatureTarget, SolverOptions};

#[derive(Parser)]
#[command(
    name = "confform",
    version,
    about = "Constant-curvature conformal metrics on surfaces with one boundary loop, and triple-junction matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the conformal metric with constant curvatures (k, c)
    Solve {
        /// OFF mesh path, or a .cfg generator config
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// Output directory for report.json (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Residual tolerance override
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Sweep L, A, L_hat, A_hat over a (k, c) grid
    Atlas {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        kmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        kmax: f64,
        #[arg(long, allow_hyphen_values = true)]
        cmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        cmax: f64,
        /// Grid points per axis
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit SVG plots of (c, L) and (c, L_hat) per k line (needs --out)
        #[arg(long)]
        plot: bool,
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<f64>,
    },
    /// Closed-form hyperbolic disk family tables
    Disk {
        /// Evaluate at one boundary length
        #[arg(long, allow_hyphen_values = true)]
        l: Option<f64>,
        /// Evaluate at one disk parameter
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<f64>,
        /// Tabulate this many rows over [rho-min, rho-max]
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        rho_min: f64,
        #[arg(long, default_value_t = 0.99)]
        rho_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weak uniformization of a triple junction spec
    Triple {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Rerun the matcher this many times with randomized brackets/inits
        #[arg(long, default_value_t = 0)]
        probe: usize,
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<f64>,
    },
    /// Mesh and operator verification checks
    Verify {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses and executes an argument vector, returning the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.exit_code()
        }
    }
}

fn write_artifact(out: &Option<PathBuf>, name: &str, text: &str) -> Result<Option<PathBuf>> {
    match out {
        None => {
            print!("{text}");
            Ok(None)
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            Ok(Some(path))
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * (i as f64) / ((n - 1) as f64))
        .collect()
}

fn solver_options(tol: Option<f64>, max_iters: Option<usize>) -> SolverOptions<f64> {
    SolverOptions {
        tol_residual: tol,
        max_newton_iters: max_iters.unwrap_or(100),
        ..Default::default()
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Solve {
            mesh,
            k,
            c,
            out,
            tol,
            max_iters,
        } => {
            let mesh = load_mesh_source(&mesh)?;
            let ops = build_operators(&mesh)?;
            let target = CurvatureTarget::new(k, c)?;
            let opts = solver_options(tol, max_iters);
            let report = solve(
                &ops,
                &target,
                ConformalState::zeros(ops.vertex_count()),
                &opts,
            )?;
            let json = solve_report_json(k, c, &report);
            if let Some(path) = write_artifact(&out, "report.json", &json)? {
                println!(
                    "converged in {} iterations: residual {}, area {}, length {} -> {}",
                    report.iterations,
                    fmt_g17(report.residual_inf_norm),
                    fmt_g17(report.area),
                    fmt_g17(report.boundary_length),
                    path.display()
                );
            }
            Ok(())
        }
        Command::Atlas {
            mesh,
            kmin,
            kmax,
            cmin,
            cmax,
            steps,
            out,
            plot,
            tol,
        } => {
            if plot && out.is_none() {
                return Err(Error::Precondition("--plot requires --out".into()));
            }
            let mesh = load_mesh_source(&mesh)?;
            let ops = build_operators(&mesh)?;
            let ks = linspace(kmin, kmax, steps);
            let cs = linspace(cmin, cmax, steps);
            let opts = solver_options(tol, None);
            let rows = sweep(&ops, &ks, &cs, &opts);
            let csv = atlas_csv(&rows);
            let written = write_artifact(&out, "atlas.csv", &csv)?;
            if let Some(path) = &written {
                println!("{} rows -> {}", rows.len(), path.display());
            }
            if plot {
                let dir = out.as_ref().expect("checked above");
                for (i, line) in rows.chunks(cs.len()).enumerate() {
                    emit_line_plots(dir, i, line)?;
                }
            }
            Ok(())
        }
        Command::Disk {
            l,
            rho,
            steps,
            rho_min,
            rho_max,
            out,
        } => {
            let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
            match (l, rho, steps) {
                (Some(l), None, None) => {
                    let p = rho_from_length(l)?;
                    rows.push((p.rho(), disk_length(p), disk_curvature(p), disk_c_hat(l)?));
                }
                (None, Some(rho), None) => {
                    let p = DiskParameter::new(rho)?;
                    let length = disk_length(p);
                    rows.push((rho, length, disk_curvature(p), disk_c_hat(length)?));
                }
                (None, None, steps) => {
                    let n = steps.unwrap_or(25).max(2);
                    if !(rho_min > 0.0 && rho_max < 1.0 && rho_min < rho_max) {
                        return Err(Error::Precondition(
                            "rho range must satisfy 0 < rho-min < rho-max < 1".into(),
                        ));
                    }
                    for r in linspace(rho_min, rho_max, n) {
                        let p = DiskParameter::new(r)?;
                        let length = disk_length(p);
                        rows.push((r, length, disk_curvature(p), disk_c_hat(length)?));
                    }
                }
                _ => {
                    return Err(Error::Precondition(
                        "disk takes exactly one of --l, --rho, or --steps".into(),
                    ));
                }
            }
            let csv = disk_csv(&rows);
            if let Some(path) = write_artifact(&out, "disk.csv", &csv)? {
                println!("{} rows -> {}", rows.len(), path.display());
            }
            Ok(())
        }
        Command::Triple {
            spec,
            out,
            seed,
            probe,
            tol,
        } => {
            let cfg = TripleConfig::load(&spec)?;
            let tj = cfg.build_spec()?;
            let all_disks = cfg
                .components
                .iter()
                .all(|c| matches!(c, ComponentConfig::Disk));
            let result = if all_disks {
                all_disk_case(&tj)?
            } else {
                let opts = MatchOptions {
                    solver: solver_options(tol, None),
                    ..Default::default()
                };
                match_junction(&tj, &opts)?
            };
            let json = match_result_json(&result);
            let written = write_artifact(&out, "match.json", &json)?;
            let c_sum: f64 = result.c.iter().sum();
            if let Some(path) = &written {
                println!(
                    "l0 = {}, c = [{}, {}, {}], |sum c| = {} -> {}",
                    fmt_g17(result.l0),
                    fmt_g17(result.c[0]),
                    fmt_g17(result.c[1]),
                    fmt_g17(result.c[2]),
                    fmt_g17(c_sum.abs()),
                    path.display()
                );
            }
            if probe > 0 {
                let deviation = uniqueness_probe(&tj, &result, probe, seed)?;
                println!(
                    "uniqueness probe over {probe} reruns: max relative l0 deviation {}",
                    fmt_g17(deviation)
                );
            }
            Ok(())
        }
        Command::Verify {
            mesh,
            k,
            c,
            lambda,
            out,
        } => {
            let mesh = load_mesh_source(&mesh)?;
            let ops = build_operators(&mesh)?;
            let chi = ops.euler_characteristic();
            let two_pi_chi = 2.0 * std::f64::consts::PI * (chi as f64);
            let defect = (ops.total_curvature() - two_pi_chi).abs();
            let n = ops.vertex_count();
            let ones = vec![1.0f64; n];
            let mut su = vec![0.0f64; n];
            ops.stiffness().mul_vec(&ones, &mut su);
            let kernel = su.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            let kernel_bound = 1e-12 * ops.stiffness().max_abs_row_sum();
            let q = ops.quality();

            let scaling = match (k, c, lambda) {
                (Some(k), Some(c), Some(lambda)) => {
                    Some(verify_scaling(&ops, k, c, lambda, &SolverOptions::default())?)
                }
                (None, None, None) => None,
                _ => {
                    return Err(Error::Precondition(
                        "scaling check needs all of --k, --c, --lambda".into(),
                    ));
                }
            };

            let mut pass = defect <= 1e-10 && kernel <= kernel_bound;
            if let Some(dev) = scaling {
                pass = pass && dev <= 1e-8;
            }

            let mut json = String::from("{");
            json.push_str(&format!("\"vertices\":{n},"));
            json.push_str(&format!("\"chi\":{chi},"));
            json.push_str(&format!("\"gauss_bonnet_defect\":{},", fmt_g17(defect)));
            json.push_str(&format!("\"kernel_residual\":{},", fmt_g17(kernel)));
            json.push_str(&format!("\"min_angle\":{},", fmt_g17(q.min_angle)));
            json.push_str(&format!(
                "\"negative_weight_edges\":{},",
                q.negative_weight_edges
            ));
            json.push_str(&format!("\"base_area\":{},", fmt_g17(ops.base_area())));
            json.push_str(&format!(
                "\"base_boundary_length\":{},",
                fmt_g17(ops.base_boundary_length())
            ));
            match scaling {
                Some(dev) => json.push_str(&format!("\"scaling_deviation\":{},", fmt_g17(dev))),
                None => json.push_str("\"scaling_deviation\":null,"),
            }
            json.push_str(&format!("\"pass\":{pass}}}"));
            json.push('\n');

            if let Some(path) = write_artifact(&out, "verify.json", &json)? {
                println!("verification {} -> {}", if pass { "passed" } else { "FAILED" }, path.display());
            }
            if !pass {
                return Err(Error::Precondition(format!(
                    "verification failed: gauss_bonnet_defect {defect:e}, kernel_residual {kernel:e}"
                )));
            }
            Ok(())
        }
    }
}

fn emit_line_plots(dir: &Path, index: usize, line: &[AtlasRow<f64>]) -> Result<()> {
    let converged: Vec<&AtlasRow<f64>> = line.iter().filter(|r| r.converged).collect();
    if converged.len() < 2 {
        return Ok(());
    }
    let length_points: Vec<(f64, f64)> = converged.iter().map(|r| (r.c, r.length)).collect();
    let lhat_points: Vec<(f64, f64)> = converged.iter().map(|r| (r.c, r.l_hat)).collect();
    let svg_l = emit_plot(&length_points, "c", "L")?;
    let svg_lhat = emit_plot(&lhat_points, "c", "L_hat")?;
    std::fs::write(dir.join(format!("L_k{index}.svg")), svg_l)?;
    std::fs::write(dir.join(format!("Lhat_k{index}.svg")), svg_lhat)?;
    Ok(())
}
