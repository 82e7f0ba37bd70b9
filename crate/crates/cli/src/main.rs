//! `ssqw`: command-line front end.
//!
//! Exit codes: 0 success, 1 admissibility failure (or incomparable walks),
//! 2 not equivalent, 3 I/O, parse or other errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssqw::io::{self, WalkFile};
use ssqw::{
    apply_gauge, build_kitagawa, canonicalize, check_admissibility, chiral_factorize,
    chiral_search, decide_equivalence, distribution, evolve, evolve_line, random_admissible_walk,
    random_gauge, random_ssqw_params, random_suzuki_params, suzuki_certificate, window_spectrum,
    ChiralCertificate, EquivalenceStatus, Error, Geometry, KitagawaParams, TailedCanonical,
    TailedSuzuki, WalkOperator, WalkProfile, Window,
};

#[derive(Parser)]
#[command(
    name = "ssqw",
    version,
    about = "Split-step quantum walks: admissibility, canonical forms, equivalence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct WalkInput {
    /// Walk file (matrix dump, canonical spec or Suzuki spec)
    input: Option<PathBuf>,
    /// Kitagawa walk with angles θ₁ θ₂ instead of a file
    #[arg(long, num_args = 2, value_names = ["THETA1", "THETA2"], allow_negative_numbers = true, conflicts_with = "input")]
    kitagawa: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true, requires = "kitagawa")]
    lo: Option<i64>,
    #[arg(long, allow_negative_numbers = true, requires = "kitagawa")]
    hi: Option<i64>,
    /// Undo the per-site σx of the Kitagawa form
    #[arg(long, requires = "kitagawa")]
    unconjugated: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Line,
    HalfLeft,
    HalfRight,
    Finite,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Line => Geometry::Line,
            GeometryArg::HalfLeft => Geometry::HalfLeft,
            GeometryArg::HalfRight => Geometry::HalfRight,
            GeometryArg::Finite => Geometry::Finite,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RandomKind {
    Canonical,
    Suzuki,
    Matrix,
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility report (band, unitarity, rank, Assumptions A and B)
    #[command(alias = "report")]
    Check {
        #[command(flatten)]
        walk: WalkInput,
    },
    /// Reduce to canonical parameters
    Canonicalize {
        #[command(flatten)]
        walk: WalkInput,
        #[arg(long, value_enum)]
        geometry: GeometryArg,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the gauge W with W U W* canonical
        #[arg(long)]
        gauge_out: Option<PathBuf>,
    },
    /// Decide unitary equivalence of two walks
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum)]
        geometry: GeometryArg,
        /// Write the witness gauge when equivalent
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Chiral symmetry certificate
    Chiral {
        #[command(flatten)]
        walk: WalkInput,
        /// Numerical search over site-diagonal symmetries
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        gamma_out: Option<PathBuf>,
        #[arg(long)]
        coin_out: Option<PathBuf>,
    },
    /// Evolve a state and print its position distribution
    Simulate {
        #[command(flatten)]
        walk: WalkInput,
        /// Initial state CSV
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        steps: usize,
        /// Continue the end sites as constant tails and grow the window
        #[arg(long)]
        auto_grow: bool,
        /// Write the distribution here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues of the window matrix
    Spectrum {
        #[command(flatten)]
        walk: WalkInput,
    },
    /// Random instances, or a random gauge image of a given walk
    Random {
        #[arg(long, value_enum, default_value = "canonical")]
        kind: RandomKind,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        lo: i64,
        #[arg(long, default_value_t = 7, allow_negative_numbers = true)]
        hi: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        zero_p: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        zero_r: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        cuts: Vec<i64>,
        /// Suzuki coefficients p, a drawn from [0, 1) instead of (−1, 1)
        #[arg(long)]
        nonnegative: bool,
        /// Emit W U W* for this walk file as a matrix dump
        #[arg(long)]
        conjugate: Option<PathBuf>,
        /// Restrict the random gauge to diagonal phases
        #[arg(long, requires = "conjugate")]
        diagonal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotAdmissible(_)
            | Error::RankViolation { .. }
            | Error::OrthogonalityFailure { .. }
            | Error::DegenerateFrame { .. }
            | Error::InfeasibleProfile(_) => 1,
            _ => 3,
        };
        Fail {
            code,
            msg: e.to_string(),
        }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Fail {
    Fail {
        code: 3,
        msg: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<u8, Fail>;

fn load(input: &WalkInput) -> Result<WalkFile, Fail> {
    if let Some(k) = &input.kitagawa {
        let (Some(lo), Some(hi)) = (input.lo, input.hi) else {
            return Err(Fail {
                code: 3,
                msg: "--kitagawa needs --lo and --hi".into(),
            });
        };
        let mut params = KitagawaParams::new(Window::new(lo, hi)?, k[0], k[1]);
        params.unconjugated = input.unconjugated;
        return Ok(WalkFile::Matrix(build_kitagawa(&params)));
    }
    let path = input.input.as_ref().ok_or_else(|| Fail {
        code: 3,
        msg: "no walk given (pass a file or --kitagawa)".into(),
    })?;
    let text = fs::read_to_string(path).map_err(|e| io_fail(path, e))?;
    io::parse_walk_str(&text).map_err(|e| {
        let f = Fail::from(e);
        Fail {
            msg: format!("{}: {}", path.display(), f.msg),
            ..f
        }
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_fail(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_certificate(cert: &ChiralCertificate) {
    for (name, v) in cert.residuals.as_array() {
        println!("{name}: {v:e}");
    }
    println!(
        "certificate: {}",
        if cert.residuals.is_valid() {
            "valid"
        } else {
            "invalid"
        }
    );
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check { walk } => {
            let file = load(&walk)?;
            let u = file.operator();
            let report = check_admissibility(&u);
            println!("kind: {}", file.kind());
            println!("{report}");
            Ok(if report.all_ok() { 0 } else { 1 })
        }
        Command::Canonicalize {
            walk,
            geometry,
            out,
            gauge_out,
        } => {
            let u = load(&walk)?.operator();
            let form = canonicalize(&u, geometry.into())?;
            emit(out.as_deref(), &io::write_canonical_report(&form))?;
            if let Some(p) = gauge_out {
                emit(Some(&p), &io::write_gauge(&form.gauge()))?;
            }
            Ok(0)
        }
        Command::Equiv {
            left,
            right,
            geometry,
            witness_out,
        } => {
            let load_path = |p: &PathBuf| {
                load(&WalkInput {
                    input: Some(p.clone()),
                    kitagawa: None,
                    lo: None,
                    hi: None,
                    unconjugated: false,
                })
            };
            let (u, v) = (load_path(&left)?.operator(), load_path(&right)?.operator());
            let verdict = decide_equivalence(&u, &v, geometry.into());
            println!("{verdict}");
            if let (Some(p), Some(w)) = (witness_out, &verdict.witness) {
                emit(Some(&p), &io::write_gauge(w))?;
                println!("witness: {}", p.display());
            }
            Ok(match verdict.status {
                EquivalenceStatus::Equivalent => 0,
                EquivalenceStatus::NotEquivalent => 2,
                EquivalenceStatus::Incomparable => 1,
            })
        }
        Command::Chiral {
            walk,
            search,
            budget,
            seed,
            gamma_out,
            coin_out,
        } => {
            let file = load(&walk)?;
            let cert = if search {
                let found = chiral_search(&file.operator(), budget, seed);
                if found.is_none() {
                    println!("search: inconclusive after {budget} sweeps (seed {seed})");
                }
                found
            } else {
                match &file {
                    WalkFile::Canonical(p) => {
                        let c = chiral_factorize(p);
                        if c.is_none() {
                            println!("no certificate: theta or kappa is nonzero (this does not rule out a symmetry)");
                        }
                        c
                    }
                    WalkFile::Suzuki(s) => Some(suzuki_certificate(s)),
                    WalkFile::Matrix(_) => {
                        return Err(Fail {
                            code: 3,
                            msg: "a matrix dump has no known factorization; use --search".into(),
                        })
                    }
                }
            };
            if let Some(cert) = cert {
                print_certificate(&cert);
                if let Some(p) = gamma_out {
                    emit(Some(&p), &io::write_dense(cert.window, &cert.gamma))?;
                }
                if let Some(p) = coin_out {
                    emit(Some(&p), &io::write_dense(cert.window, &cert.coin))?;
                }
            }
            Ok(0)
        }
        Command::Simulate {
            walk,
            state,
            steps,
            auto_grow,
            out,
        } => {
            let file = load(&walk)?;
            let u = file.operator();
            let text = fs::read_to_string(&state).map_err(|e| io_fail(&state, e))?;
            let psi = io::parse_state_str(&text, Some(u.window()))?;
            let end = if auto_grow {
                match &file {
                    WalkFile::Canonical(p) => {
                        let tails = TailedCanonical {
                            left: p.sites()[0],
                            core: p.window(),
                            core_sites: p.sites().to_vec(),
                            cuts: p.cuts(),
                            right: *p.sites().last().unwrap(),
                        };
                        evolve_line(&tails, &psi, steps)?
                    }
                    WalkFile::Suzuki(s) => {
                        let tails = TailedSuzuki {
                            left: s.sites()[0],
                            core: s.window(),
                            core_sites: s.sites().to_vec(),
                            right: *s.sites().last().unwrap(),
                        };
                        evolve_line(&tails, &psi, steps)?
                    }
                    WalkFile::Matrix(_) => {
                        return Err(Fail {
                            code: 3,
                            msg: "--auto-grow needs a canonical or Suzuki spec".into(),
                        })
                    }
                }
            } else {
                evolve(&u, &psi, steps)?
            };
            let d = distribution(&end);
            emit(out.as_deref(), &io::write_distribution(&d))?;
            print!("{}", io::write_summary(steps, &d));
            Ok(0)
        }
        Command::Spectrum { walk } => {
            let u: WalkOperator = load(&walk)?.operator();
            println!("index,re,im,arg");
            for (k, z) in window_spectrum(&u).iter().enumerate() {
                println!("{k},{},{},{}", z.re, z.im, z.arg());
            }
            Ok(0)
        }
        Command::Random {
            kind,
            lo,
            hi,
            seed,
            zero_p,
            zero_r,
            cuts,
            nonnegative,
            conjugate,
            diagonal,
            out,
        } => {
            let text = if let Some(path) = conjugate {
                let u = load(&WalkInput {
                    input: Some(path),
                    kitagawa: None,
                    lo: None,
                    hi: None,
                    unconjugated: false,
                })?
                .operator();
                let g = random_gauge(seed, u.window(), diagonal);
                io::write_matrix(&apply_gauge(&u, &g)?)
            } else {
                let window = Window::new(lo, hi)?;
                let profile = WalkProfile {
                    zero_p,
                    zero_r,
                    cuts,
                };
                match kind {
                    RandomKind::Canonical => {
                        io::write_canonical_spec(&random_ssqw_params(seed, window, &profile)?)
                    }
                    RandomKind::Suzuki => io::write_suzuki_spec(&random_suzuki_params(
                        seed,
                        window,
                        &profile.cuts,
                        nonnegative,
                    )),
                    RandomKind::Matrix => {
                        io::write_matrix(&random_admissible_walk(seed, window, &profile)?)
                    }
                }
            };
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
