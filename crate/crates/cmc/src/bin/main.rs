//! Command-line interface: gallery checks, surface verification, Delaunay
//! classification and profile generation, identity suite, CMC search, and
//! mesh export. Machine-readable output (CSV or single-line JSON) goes to
//! stdout; prose goes to stderr. Identical arguments and seeds produce
//! byte-identical output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use separable_cmc::delaunay::{
    classify, waist_profile, waist_radii, DelaunayClass, DelaunayParams, ProfileCurve,
    StepControl,
};
use separable_cmc::gallery;
use separable_cmc::identities;
use separable_cmc::mesh::{export_csv, export_obj, tessellate_revolution};
use separable_cmc::solver::{fit, FitOptions, SplineModel};
use separable_cmc::surface::{SeparableSurface, SurfaceSpec};

#[derive(Parser)]
#[command(
    name = "separable-cmc",
    about = "Separable constant-mean-curvature surfaces: verification, \
             Delaunay profiles, identity checks, solver search, and meshing",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List or verify the built-in surface gallery
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Verify a surface spec (JSON) against a target mean curvature
    Verify {
        /// Path to the surface spec JSON file
        #[arg(long)]
        spec: PathBuf,
        /// Target mean curvature (signed; sphere of radius r is -1/r)
        #[arg(long = "H", allow_hyphen_values = true)]
        mean: f64,
        /// Number of sampled surface points
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Sampling seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Pass threshold on the sup residual
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Classify a Delaunay surface from (H, c) and print its waist radii
    Classify {
        #[arg(long = "H", allow_hyphen_values = true)]
        mean: f64,
        /// First-integral constant
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
    },
    /// Integrate a rotational profile and write it as CSV (z,h,hp)
    Generate {
        #[arg(long = "H", allow_hyphen_values = true)]
        mean: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// Half-span of the z range
        #[arg(long)]
        zmax: f64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the algebraic identity suite
    Identities {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Levenberg-Marquardt search for separable CMC surfaces
    Search {
        #[arg(long = "H", allow_hyphen_values = true)]
        mean: f64,
        #[arg(long, default_value_t = 40)]
        knots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Build a revolution mesh from a profile CSV
    Mesh {
        /// Input profile CSV with header z,h,hp
        #[arg(long)]
        from: PathBuf,
        /// Angular resolution
        #[arg(long, default_value_t = 64)]
        angular: usize,
        /// Output path (.obj or .csv)
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    /// Print the built-in entries as CSV
    List,
    /// Verify one entry by name (all parameter sets with that name)
    Verify { name: String },
}

#[derive(Serialize)]
struct VerifyOut {
    sup_residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SearchOut {
    residual_rms: f64,
    residual_max: f64,
    iterations: usize,
    delaunay_distance: f64,
    converged: bool,
}

fn run() -> Result<ExitCode, Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::Gallery { action } => run_gallery(action),
        Command::Verify {
            spec,
            mean,
            n,
            seed,
            tol,
        } => {
            let text = fs::read_to_string(&spec)?;
            let parsed: SurfaceSpec = serde_json::from_str(&text)?;
            let surface = SeparableSurface::from_spec(&parsed)?;
            let sup = surface.is_cmc(mean, n, seed)?;
            let pass = sup <= tol;
            println!(
                "{}",
                serde_json::to_string(&VerifyOut {
                    sup_residual: sup,
                    pass
                })?
            );
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Classify { mean, c } => {
            let params = DelaunayParams { mean, c };
            let class = classify(&params)?;
            let radii = waist_radii(&params)?;
            let line = match class {
                DelaunayClass::Sphere => {
                    format!("Sphere r_max={}", radii.last().copied().unwrap_or(0.0))
                }
                DelaunayClass::Cylinder => format!("Cylinder r={}", radii[0]),
                DelaunayClass::Unduloid => {
                    format!("Unduloid r_min={} r_max={}", radii[0], radii[1])
                }
                DelaunayClass::Nodoid => {
                    // the second waist root is negative for nodoids; its
                    // magnitude is the inner radius of the self-intersecting
                    // profile
                    let disc = (1.0 - 4.0 * mean.abs() * c).sqrt();
                    let inner = ((1.0 - disc) / (2.0 * mean.abs())).abs();
                    format!("Nodoid r_min={} r_max={}", inner, radii[0])
                }
            };
            println!("{line}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate { mean, c, zmax, out } => {
            let params = DelaunayParams { mean, c };
            let profile = waist_profile(&params, zmax, &StepControl::default())?;
            let mut text = String::from("z,h,hp\n");
            for i in 0..profile.len() {
                text.push_str(&format!(
                    "{},{},{}\n",
                    profile.z[i], profile.h[i], profile.hp[i]
                ));
            }
            fs::write(&out, text)?;
            eprintln!(
                "wrote {} rows to {} (truncated: {})",
                profile.len(),
                out.display(),
                profile.truncated
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Identities { seed, trials } => {
            let reports = identities::run_all(seed, trials)?;
            let mut all_pass = true;
            for report in &reports {
                all_pass &= report.pass;
                println!("{report}");
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Search {
            mean,
            knots,
            seed,
            max_iter,
        } => {
            let start = SplineModel::random_positive(knots, seed);
            let grid = start.grid(24);
            let opts = FitOptions {
                max_iter,
                ..FitOptions::default()
            };
            let (_, result) = fit(&start, mean, &grid, &opts)?;
            println!(
                "{}",
                serde_json::to_string(&SearchOut {
                    residual_rms: result.residual_rms,
                    residual_max: result.residual_max,
                    iterations: result.iterations,
                    delaunay_distance: result.delaunay_distance,
                    converged: result.converged,
                })?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Mesh { from, angular, out } => {
            let profile = read_profile_csv(&from)?;
            let mesh = tessellate_revolution(&profile, angular)?;
            let mut buf = Vec::new();
            if out.extension().is_some_and(|e| e == "csv") {
                export_csv(&mesh, &mut buf)?;
            } else {
                export_obj(&mesh, &mut buf)?;
            }
            fs::write(&out, buf)?;
            eprintln!(
                "wrote {} vertices, {} triangles to {}",
                mesh.vertices.len(),
                mesh.triangles.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_gallery(action: GalleryAction) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match action {
        GalleryAction::List => {
            println!("name,params");
            for (name, params) in gallery::default_entries() {
                let joined: Vec<String> = params.iter().map(|p| p.to_string()).collect();
                println!("{},{}", name, joined.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        GalleryAction::Verify { name } => {
            let entries: Vec<_> = gallery::default_entries()
                .into_iter()
                .filter(|(n, _)| *n == name)
                .collect();
            if entries.is_empty() {
                eprintln!("unknown gallery entry: {name}");
                return Ok(ExitCode::from(2));
            }
            println!("name,params,sup_residual,pass");
            let mut all_pass = true;
            for (entry_name, params) in entries {
                let entry = gallery::make(entry_name, &params)?;
                let (sup, pass) = entry.verify(200, 1)?;
                all_pass &= pass;
                let joined: Vec<String> = params.iter().map(|p| p.to_string()).collect();
                println!("{},{},{:e},{}", entry_name, joined.join(" "), sup, pass);
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn read_profile_csv(path: &PathBuf) -> Result<ProfileCurve, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty profile CSV")?;
    if header.trim() != "z,h,hp" {
        return Err(format!("expected header z,h,hp, found {header:?}").into());
    }
    let mut profile = ProfileCurve {
        z: Vec::new(),
        h: Vec::new(),
        hp: Vec::new(),
        truncated: false,
    };
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(format!("bad profile row {line:?}").into());
        }
        profile.z.push(cols[0].trim().parse()?);
        profile.h.push(cols[1].trim().parse()?);
        profile.hp.push(cols[2].trim().parse()?);
    }
    Ok(profile)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
