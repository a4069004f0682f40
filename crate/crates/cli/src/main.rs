//! `stable-forms`: classify forms, run the Lorentz and G2 checks, torus flows and invariant suites.
//!
//! Exit codes: 0 ok, 2 parse or usage error, 3 orbit error, 4 stalled flow.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stable_forms::forms6::{self, DecompositionKind, Orbit6};
use stable_forms::io::{read_form, FormRecord};
use stable_forms::lorentz6::{self, Subspace};
use stable_forms::report::to_json;
use stable_forms::torus::{
    descend, initial_potential, transverse_hessian, CohomologyClass, FlowConfig, FlowStatus, FourierForm, Mode,
};
use stable_forms::{g2, suite, Error, Form, VolumeElement};

#[derive(Parser)]
#[command(name = "stable-forms", version, about = "Stable 3-forms in dimensions 6 and 7")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit type and invariants of a 3-form on R^6 or R^7.
    Classify {
        #[arg(long)]
        input: PathBuf,
        /// Expected dimension; the file's own `dim` must agree.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Randomized self-duality checks in signature (5,1).
    Lorentz {
        #[arg(long, value_enum)]
        check: LorentzCheck,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Subspace for `--check lagrangian`.
        #[arg(long, value_enum, default_value_t = Side::Plus)]
        subspace: Side,
        /// Profile f for `--check graph`.
        #[arg(long, value_enum, default_value_t = Profile::Identity)]
        profile: Profile,
        /// Value of the constant profile.
        #[arg(long, default_value_t = 1.0)]
        constant: f64,
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
    },
    /// Metric, volume and related data of a positive 3-form on R^7.
    G2 {
        #[arg(long)]
        input: PathBuf,
        /// Include Θ = ∗Ω.
        #[arg(long)]
        star: bool,
        /// Split a second 3-form into its 1, 7 and 27 components.
        #[arg(long)]
        project: Option<PathBuf>,
        /// Include the eigenvalues of the pointwise second variation.
        #[arg(long)]
        hessian: bool,
    },
    /// Critical-point search for the volume functional on T^6 or T^7.
    Flow {
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        modes: usize,
        /// Grid points per axis; defaults to 8 on T^6 and 5 on T^7.
        #[arg(long)]
        grid: Option<usize>,
        /// Size of the initial exact perturbation relative to the constant form.
        #[arg(long, default_value_t = 0.05)]
        perturb: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run an invariant suite: all, forms6, lorentz, g2 or flow.
    Suite {
        name: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Attach wall times (output is then no longer reproducible byte for byte).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LorentzCheck {
    Lambda,
    Hat,
    Lagrangian,
    Graph,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Zero,
    Constant,
    Identity,
}

enum Failure {
    Error(Error),
    Stalled(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Orbit(_) => 3,
        Error::FlowStalled { .. } => 4,
        _ => 2,
    }
}

fn form_json(f: &Form) -> Value {
    serde_json::to_value(FormRecord::from_form(f)).expect("form records serialize")
}

fn matrix_json(m: &[Vec<f64>]) -> Value {
    json!(m)
}

fn metric_rows(s: &g2::G2Structure) -> Vec<Vec<f64>> {
    s.g.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn three_form(path: &PathBuf) -> Result<Form, Error> {
    let f = read_form(path)?;
    if f.degree() != 3 {
        return Err(Error::Degree(format!("degree must be 3, got {}", f.degree())));
    }
    if f.is_complex() {
        return Err(Error::Parse("coefficients must be real".into()));
    }
    Ok(f)
}

fn classify(input: &PathBuf, dim: Option<usize>) -> Result<String, Failure> {
    let f = three_form(input)?;
    if let Some(d) = dim {
        if d != f.dim() {
            return Err(Error::Dim(format!("--dim {d} but the file has dim {}", f.dim())).into());
        }
    }
    let out = match f.dim() {
        6 => {
            let lambda = forms6::lambda_inv(&f)?;
            let orbit = forms6::classify6(&f)?;
            let mut v = json!({"dim": 6, "orbit": orbit.name(), "lambda": lambda});
            if orbit != Orbit6::Degenerate {
                let d = forms6::decompose6(&f, &VolumeElement::standard())?;
                let kind = match d.kind {
                    DecompositionKind::RealPair => "real_pair",
                    DecompositionKind::ComplexConjugatePair => "complex_conjugate_pair",
                };
                v["decomposition"] = json!({"kind": kind, "alpha": form_json(&d.alpha), "beta": form_json(&d.beta)});
            }
            v
        }
        7 => {
            if g2::is_positive(&f) {
                let s = g2::g2_metric(&f)?;
                json!({"dim": 7, "positive": true, "phi": s.phi, "orientation": s.orientation, "metric": matrix_json(&metric_rows(&s))})
            } else {
                json!({"dim": 7, "positive": false})
            }
        }
        n => return Err(Error::Dim(format!("3-forms are classified on R^6 and R^7, not R^{n}")).into()),
    };
    Ok(to_json(&out))
}

fn lorentz(
    check: LorentzCheck,
    samples: usize,
    seed: u64,
    side: Side,
    profile: Profile,
    constant: f64,
    fd_step: f64,
) -> String {
    let rep = match check {
        LorentzCheck::Lambda => lorentz6::check_sd_lambda(samples, seed),
        LorentzCheck::Hat => lorentz6::check_hat_antiselfdual(samples, seed),
        LorentzCheck::Lagrangian => lorentz6::check_lagrangian(
            match side {
                Side::Plus => Subspace::Plus,
                Side::Minus => Subspace::Minus,
            },
            samples,
            seed,
        ),
        LorentzCheck::Graph => {
            let f: Box<dyn Fn(f64) -> f64> = match profile {
                Profile::Zero => Box::new(|_| 0.0),
                Profile::Constant => Box::new(move |_| constant),
                Profile::Identity => Box::new(|x| x),
            };
            lorentz6::check_lagrangian_graph(&*f, samples, fd_step, seed)
        }
    };
    to_json(&rep)
}

fn g2_cmd(input: &PathBuf, star: bool, project: Option<&PathBuf>, hessian: bool) -> Result<String, Failure> {
    let f = three_form(input)?;
    if f.dim() != 7 {
        return Err(Error::Dim(format!("g2 needs a 3-form on R^7, got R^{}", f.dim())).into());
    }
    let s = g2::g2_metric(&f)?;
    let mut v = json!({
        "positive": true,
        "metric": matrix_json(&metric_rows(&s)),
        "vol": s.vol,
        "phi": s.phi,
        "orientation": s.orientation,
    });
    if star {
        v["star_omega"] = form_json(&g2::star_omega(&f)?);
    }
    if let Some(p) = project {
        let alpha = three_form(p)?;
        let sp = g2::project_137(&f, &alpha)?;
        v["projection"] = json!({"p1": form_json(&sp.p1), "p7": form_json(&sp.p7), "p27": form_json(&sp.p27)});
    }
    if hessian {
        v["spectrum"] = json!(g2::sorted_eigenvalues(&g2::hessian7_matrix(&f)?));
    }
    Ok(to_json(&v))
}

#[allow(clippy::too_many_arguments)]
fn flow(
    dim: usize,
    modes: usize,
    grid: Option<usize>,
    perturb: f64,
    seed: u64,
    tol: f64,
    max_iter: usize,
    report: Option<&PathBuf>,
) -> Result<String, Failure> {
    let mode = Mode::from_dim(dim)?;
    let defaults = FlowConfig::new(mode);
    let config = FlowConfig { grid: grid.unwrap_or(defaults.grid), cutoff: modes, tol, max_iter, seed, ..defaults };
    config.validate()?;
    let class = CohomologyClass::new(mode.standard_form())?;
    let beta = initial_potential(&class, modes, perturb, seed)?;
    let mut rep = descend(&class, &beta, &config)?;
    // second variation at the flat representative of the class
    let flat = FourierForm::constant(&class.constant, modes);
    rep.hessian = Some(transverse_hessian(&flat, &config)?.summary());
    let text = to_json(&rep);
    if let Some(path) = report {
        std::fs::write(path, &text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    if rep.status == FlowStatus::Stalled {
        let last = rep.residual_history.last().copied().unwrap_or(f64::NAN);
        print!("{text}");
        return Err(Failure::Stalled(format!("flow stalled after {} iterations (residual {last:e})", rep.iterations)));
    }
    Ok(text)
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Classify { input, dim } => classify(&input, dim),
        Command::Lorentz { check, samples, seed, subspace, profile, constant, fd_step } => {
            Ok(lorentz(check, samples, seed, subspace, profile, constant, fd_step))
        }
        Command::G2 { input, star, project, hessian } => g2_cmd(&input, star, project.as_ref(), hessian),
        Command::Flow { dim, modes, grid, perturb, seed, tol, max_iter, report } => {
            flow(dim, modes, grid, perturb, seed, tol, max_iter, report.as_ref())
        }
        Command::Suite { name, seed, timing } => Ok(to_json(&suite::run_suite(&name, seed, timing)?)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Stalled(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
