use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gmsurf::covers::{
    cover_exists_bruteforce, find_cover, parity_check, verify_cover, CoverCertificate, CoverError,
    CoverSpec, SearchBudget,
};
use gmsurf::generate::{generate_manifold, GenError, Profile};
use gmsurf::input::{parse_manifold, parse_matrix};
use gmsurf::linalg::SymMatrix;
use gmsurf::manifold::DecompositionGraph;
use gmsurf::reduction::{verify_reduction, ReductionCertificate};
use gmsurf::report::Report;
use gmsurf::surface::{
    build_surface_certificate_with, verify_surface_certificate, SurfaceCertificate, SurfaceError,
    SurfaceOptions,
};

const HOLDS: u8 = 0;
const FAILS: u8 = 1;
const INPUT_ERROR: u8 = 2;
const UNAVAILABLE: u8 = 3;
const INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "gmsurf", version, about = "Surfaces in graph manifolds, decided exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide properties I and VE for a manifold file (exit 0 iff I holds).
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Build and check a surface certificate.
    Certify {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Check a certificate against a manifold file or matrix literal.
    Verify {
        file: String,
        cert: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Surface)]
        kind: Kind,
    },
    /// Print a random manifold file with a given inertia profile.
    Gen {
        #[arg(long)]
        pieces: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "any")]
        profile: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide and reduce a raw matrix given as argument or on stdin.
    Matrix {
        matrix: Option<String>,
        #[arg(long)]
        json: bool,
        /// Write the singular reduction certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite covers of surfaces with prescribed boundary degrees.
    Cover {
        #[command(subcommand)]
        action: CoverAction,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Surface,
    Reduction,
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long)]
    genus: usize,
    #[arg(long)]
    alpha: usize,
    /// Degrees per boundary component, e.g. "2,1;1,1,1".
    #[arg(long)]
    boundary: String,
}

#[derive(Subcommand)]
enum CoverAction {
    /// Parity test (exit 0 iff a connected cover exists).
    Check {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Search for a cover and print its generators.
    Find {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random attempts before exhaustive search.
        #[arg(long, default_value_t = SearchBudget::default().random_attempts)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive existence test (small cases only).
    Brute {
        #[command(flatten)]
        spec: SpecArgs,
        /// Maximum number of generator tuples to enumerate.
        #[arg(long, default_value_t = SearchBudget::default().exhaustive_tuples)]
        budget: u64,
    },
    /// Check a cover certificate.
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        cert: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze { file, json } => analyze(&file, json),
        Command::Certify {
            file,
            out,
            seed,
            json,
        } => certify(&file, &out, seed, json),
        Command::Verify { file, cert, kind } => verify(&file, &cert, kind),
        Command::Gen {
            pieces,
            seed,
            profile,
            out,
        } => gen(pieces, seed, &profile, out.as_deref()),
        Command::Matrix { matrix, json, out } => matrix_mode(matrix, json, out.as_deref()),
        Command::Cover { action } => cover(action),
    };
    ExitCode::from(code)
}

fn fail(code: u8, message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    code
}

fn read(path: &Path) -> Result<String, u8> {
    fs::read_to_string(path).map_err(|e| fail(INPUT_ERROR, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), u8> {
    fs::write(path, text).map_err(|e| fail(INPUT_ERROR, format!("{}: {e}", path.display())))
}

fn load_manifold(path: &Path) -> Result<DecompositionGraph, u8> {
    let text = read(path)?;
    parse_manifold(&text).map_err(|errs| {
        for e in errs {
            eprintln!("error: {}: {e}", path.display());
        }
        INPUT_ERROR
    })
}

fn matrix_of(g: &DecompositionGraph) -> Result<SymMatrix, u8> {
    g.decomposition_matrix().map_err(|e| fail(INPUT_ERROR, e))
}

fn report_for(a: &SymMatrix) -> Result<Report, u8> {
    Report::new(a).map_err(|e| fail(INPUT_ERROR, e))
}

fn print_report(report: &Report, json: bool) {
    if json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
}

fn analyze(file: &Path, json: bool) -> u8 {
    let run = || -> Result<u8, u8> {
        let a = matrix_of(&load_manifold(file)?)?;
        let report = report_for(&a)?;
        print_report(&report, json);
        Ok(if report.verdict.property_i { HOLDS } else { FAILS })
    };
    run().unwrap_or_else(|code| code)
}

fn certify(file: &Path, out: &Path, seed: u64, json: bool) -> u8 {
    let run = || -> Result<u8, u8> {
        let g = load_manifold(file)?;
        let options = SurfaceOptions {
            seed,
            ..SurfaceOptions::default()
        };
        let cert = match build_surface_certificate_with(&g, options) {
            Ok(c) => c,
            Err(e @ (SurfaceError::Model(_) | SurfaceError::Decision(_))) => {
                return Err(fail(INPUT_ERROR, e))
            }
            Err(e) => return Err(fail(UNAVAILABLE, e)),
        };
        if let Err(violations) = verify_surface_certificate(&g, &cert) {
            for v in violations {
                eprintln!("error: {v}");
            }
            return Err(fail(INVALID, "constructed certificate failed verification"));
        }
        let text = serde_json::to_string_pretty(&cert).expect("certificate serializes");
        write(out, &text)?;
        let mut report = report_for(&matrix_of(&g)?)?;
        report.certificates.push(out.display().to_string());
        print_report(&report, json);
        if !json {
            let a: Vec<String> = cert.a.iter().map(ToString::to_string).collect();
            println!("surface degrees: [{}]", a.join(", "));
            println!("scale: {}", cert.scale);
            println!("verified: ok");
        }
        Ok(HOLDS)
    };
    run().unwrap_or_else(|code| code)
}

/// `file` is a manifold file path, or a matrix literal for `--kind reduction`.
fn verify(file: &str, cert: &Path, kind: Kind) -> u8 {
    let run = || -> Result<u8, u8> {
        let text = read(cert)?;
        let problems: Vec<String> = match kind {
            Kind::Surface => {
                let g = load_manifold(Path::new(file))?;
                let c: SurfaceCertificate = serde_json::from_str(&text)
                    .map_err(|e| fail(INPUT_ERROR, format!("{}: {e}", cert.display())))?;
                match verify_surface_certificate(&g, &c) {
                    Ok(()) => Vec::new(),
                    Err(v) => v.iter().map(ToString::to_string).collect(),
                }
            }
            Kind::Reduction => {
                let a = if file.trim_start().starts_with("[[") {
                    parse_matrix(file).map_err(|e| fail(INPUT_ERROR, e))?
                } else {
                    matrix_of(&load_manifold(Path::new(file))?)?
                };
                let c: ReductionCertificate = serde_json::from_str(&text)
                    .map_err(|e| fail(INPUT_ERROR, format!("{}: {e}", cert.display())))?;
                match verify_reduction(&a, &c) {
                    Ok(()) => Vec::new(),
                    Err(v) => v.iter().map(ToString::to_string).collect(),
                }
            }
        };
        if problems.is_empty() {
            println!("ok");
            Ok(HOLDS)
        } else {
            for p in &problems {
                println!("violation: {p}");
            }
            Ok(INVALID)
        }
    };
    run().unwrap_or_else(|code| code)
}

fn gen(pieces: usize, seed: u64, profile: &str, out: Option<&Path>) -> u8 {
    let run = || -> Result<u8, u8> {
        let profile: Profile = profile.parse().map_err(|e| fail(INPUT_ERROR, e))?;
        let g = generate_manifold(pieces, seed, profile).map_err(|e| match e {
            GenError::Unsatisfiable { .. } => fail(FAILS, e),
            _ => fail(INPUT_ERROR, e),
        })?;
        let text = serde_json::to_string_pretty(&g).expect("manifold serializes");
        match out {
            Some(path) => write(path, &text)?,
            None => println!("{text}"),
        }
        Ok(HOLDS)
    };
    run().unwrap_or_else(|code| code)
}

fn matrix_mode(literal: Option<String>, json: bool, out: Option<&Path>) -> u8 {
    let run = || -> Result<u8, u8> {
        let text = match literal {
            Some(t) => t,
            None => {
                let mut buf = String::new();
                std::io::stdin()
                    .read_to_string(&mut buf)
                    .map_err(|e| fail(INPUT_ERROR, e))?;
                buf
            }
        };
        let a = parse_matrix(&text).map_err(|e| fail(INPUT_ERROR, e))?;
        let report = report_for(&a)?.with_reduction(&a);
        if let Some(path) = out {
            match &report.reduction {
                Some(r) => {
                    let text = serde_json::to_string_pretty(r).expect("certificate serializes");
                    write(path, &text)?;
                }
                None => {
                    print_report(&report, json);
                    return Err(fail(UNAVAILABLE, "A₋ is negative definite: no singular reduction"));
                }
            }
        }
        print_report(&report, json);
        Ok(if report.verdict.property_i { HOLDS } else { FAILS })
    };
    run().unwrap_or_else(|code| code)
}

fn cover_spec(args: &SpecArgs) -> Result<CoverSpec, u8> {
    let degrees = CoverSpec::parse_boundary(&args.boundary).map_err(|e| fail(INPUT_ERROR, e))?;
    CoverSpec::new(args.genus, args.alpha, degrees).map_err(|e| fail(INPUT_ERROR, e))
}

fn cover(action: CoverAction) -> u8 {
    let run = || -> Result<u8, u8> {
        match action {
            CoverAction::Check { spec } => {
                let spec = cover_spec(&spec)?;
                let holds = parity_check(&spec);
                println!("parity: {}", if holds { "holds" } else { "fails" });
                Ok(if holds { HOLDS } else { FAILS })
            }
            CoverAction::Find {
                spec,
                seed,
                budget,
                out,
            } => {
                let spec = cover_spec(&spec)?;
                let budget = SearchBudget {
                    random_attempts: budget,
                    ..SearchBudget::default()
                };
                let cert = find_cover(&spec, seed, budget).map_err(|e| match e {
                    CoverError::ParityFails => fail(FAILS, e),
                    CoverError::InvalidSpec(_) => fail(INPUT_ERROR, e),
                    _ => fail(UNAVAILABLE, e),
                })?;
                match out {
                    Some(path) => write(&path, &cert.to_string())?,
                    None => print!("{cert}"),
                }
                Ok(HOLDS)
            }
            CoverAction::Brute { spec, budget } => {
                let spec = cover_spec(&spec)?;
                let exists = cover_exists_bruteforce(&spec, budget).map_err(|e| match e {
                    CoverError::BudgetExceeded { .. } => fail(UNAVAILABLE, e),
                    _ => fail(INPUT_ERROR, e),
                })?;
                println!("exists: {exists}");
                Ok(if exists { HOLDS } else { FAILS })
            }
            CoverAction::Verify { spec, cert } => {
                let spec = cover_spec(&spec)?;
                let text = read(&cert)?;
                let c: CoverCertificate = text
                    .parse()
                    .map_err(|e| fail(INPUT_ERROR, format!("{}: {e}", cert.display())))?;
                match verify_cover(&spec, &c) {
                    Ok(()) => {
                        println!("ok");
                        Ok(HOLDS)
                    }
                    Err(v) => {
                        for p in v {
                            println!("violation: {p}");
                        }
                        Ok(INVALID)
                    }
                }
            }
        }
    };
    run().unwrap_or_else(|code| code)
}
