//! Command-line front end: `validate`, `build`, `check-covariance`, `norm`,
//! `check-pd`, `induce-ucp`, `certify`, `chain` and `generate`.
//!
//! Every command prints a [`Report`]; the exit code is 0 when every check
//! passes, 1 when some check fails and 2 when the input cannot be read.

pub mod input;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{AlgebraElement, TracialState};
use crate::crossed_product::{BaseRepresentation, CrossedProduct, RegularRepresentation};
use crate::gns::{GnsSpace, LinearMap};
use crate::haagerup::{self, HaagerupStage, PdConvention};
use crate::inductive_limit::{self, Chain};
use crate::linalg::{self, random_unitary, C64, ONE};
use crate::partial_action::PartialAction;
use crate::random::Budget;

pub use input::{generate_random_system, InputError, Preset, SystemDescription};
pub use report::{Check, Report};

/// Environment variable holding the default tolerance; `--tol` wins.
pub const TOL_ENV: &str = "PARTIAL_HAAGERUP_TOL";

#[derive(Debug, Parser)]
#[command(name = "partial-haagerup", version, about = "Certify partial crossed products and Haagerup data of finite partial dynamical systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Tolerance for every check (default 1e-9, or $PARTIAL_HAAGERUP_TOL).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for random systems and random probes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// System description: a JSON file or inline JSON.
    #[arg(long, conflicts_with_all = ["preset", "random"])]
    pub system: Option<String>,
    #[arg(long, value_enum, conflicts_with = "random")]
    pub preset: Option<Preset>,
    /// Generate the system from `--seed`.
    #[arg(long)]
    pub random: bool,
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// Scalar positive-definite function, one value per group element; `h = η·1_g`.
    #[arg(long, conflicts_with = "h")]
    pub eta: Option<String>,
    /// Center values `h(g)_b`, one row of block scalars per group element.
    #[arg(long)]
    pub h: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    #[value(name = "paper")]
    Literal,
    Cutdown,
    ColumnCutdown,
    Both,
}

/// UCP maps on the algebra selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiChoice {
    Identity,
    /// `a ↦ Σ_b (tr(a_b)/n_b)·1_b`.
    CentralExpectation,
    /// `a ↦ τ(a)·1`.
    TraceState,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group axioms, partial-action axioms, trace invariance and faithfulness.
    Validate(SystemArgs),
    /// Crossed-product structure constants, algebra laws and regular-representation sizes.
    Build(SystemArgs),
    /// Covariance of the regular representation on a basis.
    CheckCovariance(SystemArgs),
    /// Reduced norm of an element, compared across equivalent representations.
    Norm {
        #[command(flatten)]
        system: SystemArgs,
        /// `{"terms": [{"g": .., "entries": [{"block", "i", "j", "value"}]}]}` inline or as a file.
        element: String,
        /// Expected norm.
        #[arg(long)]
        expect: Option<f64>,
    },
    /// Positive definiteness of `h` with respect to the action.
    CheckPd {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, value_enum, default_value_t = ConventionArg::Cutdown)]
        convention: ConventionArg,
    },
    /// Induced map `Σ a_g δ_g ↦ Σ φ(a_g)h(g)δ_g`: preconditions and certification.
    InduceUcp {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, value_enum, default_value_t = PhiChoice::Identity)]
        phi: PhiChoice,
    },
    /// Haagerup data `h_n(g) = (1 − 1/n)·1_g` (g ≠ e) with `φ_n = phi`, stages `n = 1..=stages`.
    Certify {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 5)]
        stages: usize,
        #[arg(long, value_enum, default_value_t = PhiChoice::Identity)]
        phi: PhiChoice,
    },
    /// Stagewise certification of a chain of algebras (and crossed products).
    Chain {
        /// Chain description: a JSON file or inline JSON.
        #[arg(long, conflicts_with_all = ["preset", "random"])]
        chain: Option<String>,
        /// `W1`: the W1 system amplified by `a ↦ I₂ ⊗ a` at every stage.
        #[arg(long, value_enum, conflicts_with = "random")]
        preset: Option<Preset>,
        /// A random 4-stage chain from `--seed`.
        #[arg(long)]
        random: bool,
        /// Keep only the first `k` stages.
        #[arg(long)]
        stages: Option<usize>,
        /// Also write per-stage deviations as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print a random system description for `--seed`.
    Generate {
        #[arg(long, default_value_t = 8)]
        max_group_order: usize,
        #[arg(long, default_value_t = 6)]
        max_fiber: usize,
    },
}

/// What a command produced: the text to print and the exit code.
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
}

/// Parses arguments, runs the command, prints or writes the output and
/// returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = cli.out.clone();
    match run(&cli) {
        Ok(outcome) => {
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &outcome.output) {
                        eprintln!("{}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{}", outcome.output),
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn tolerance(cli: &Cli) -> Result<f64, InputError> {
    let tol = match cli.tol {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| InputError(format!("${TOL_ENV}: not a number: {s:?}")))?,
            Err(_) => linalg::DEFAULT_TOL,
        },
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(InputError(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

pub fn run(cli: &Cli) -> Result<Outcome, InputError> {
    let tol = tolerance(cli)?;
    let start = Instant::now();
    if let Command::Generate {
        max_group_order,
        max_fiber,
    } = &cli.command
    {
        let d = generate_random_system(
            cli.seed,
            Budget {
                max_group_order: *max_group_order,
                max_fiber: *max_fiber,
            },
        );
        let mut output = serde_json::to_string_pretty(&d).expect("descriptions serialize");
        output.push('\n');
        return Ok(Outcome { output, exit_code: 0 });
    }
    let (name, inputs, checks) = match &cli.command {
        Command::Validate(s) => {
            let d = load_system(s, cli.seed)?;
            ("validate", json!({ "system": d }), validate(&d.materialize()?, tol))
        }
        Command::Build(s) => {
            let d = load_system(s, cli.seed)?;
            ("build", json!({ "system": d }), with_valid_system(&d, tol, |a, t| build(a, t, tol))?)
        }
        Command::CheckCovariance(s) => {
            let d = load_system(s, cli.seed)?;
            let checks = with_valid_system(&d, tol, |a, _| {
                let cp = CrossedProduct::new(a.clone());
                let r = RegularRepresentation::build(&cp, BaseRepresentation::defining()).check_covariance(tol);
                Ok(vec![Check::new("covariance", r.pass, &r, tol, r.max_deviation)])
            })?;
            ("check-covariance", json!({ "system": d }), checks)
        }
        Command::Norm { system, element, expect } => {
            let d = load_system(system, cli.seed)?;
            let el: input::ElementDescription = input::parse_json(element, "element")?;
            let checks = with_valid_system(&d, tol, |a, _| norm(a, &el, *expect, cli.seed, tol))?;
            ("norm", json!({ "system": d, "element": el, "expect": expect }), checks)
        }
        Command::CheckPd {
            system,
            function,
            convention,
        } => {
            let d = load_system(system, cli.seed)?;
            let f = load_function(function)?;
            let conventions: Vec<PdConvention> = match convention {
                ConventionArg::Literal => vec![PdConvention::Literal],
                ConventionArg::Cutdown => vec![PdConvention::Cutdown],
                ConventionArg::ColumnCutdown => vec![PdConvention::ColumnCutdown],
                ConventionArg::Both => vec![PdConvention::Cutdown, PdConvention::Literal],
            };
            let checks = with_valid_system(&d, tol, |a, _| check_pd(a, &f, &conventions, tol))?;
            let names: Vec<String> = conventions.iter().map(|c| c.to_string()).collect();
            ("check-pd", json!({ "system": d, "function": f, "conventions": names }), checks)
        }
        Command::InduceUcp { system, function, phi } => {
            let d = load_system(system, cli.seed)?;
            let f = load_function(function)?;
            let checks = with_valid_system(&d, tol, |a, t| induce(a, t, &f, *phi, tol))?;
            ("induce-ucp", json!({ "system": d, "function": f, "phi": phi }), checks)
        }
        Command::Certify { system, stages, phi } => {
            let d = load_system(system, cli.seed)?;
            let checks = with_valid_system(&d, tol, |a, t| certify(a, t, *stages, *phi, tol))?;
            ("certify", json!({ "system": d, "stages": stages, "phi": phi }), checks)
        }
        Command::Chain {
            chain,
            preset,
            random,
            stages,
            csv,
        } => {
            let desc = match (chain, preset, random) {
                (Some(c), _, _) => input::parse_json::<input::ChainDescription>(c, "chain")?,
                (None, Some(Preset::W1), _) => input::w1_doubling_chain(stages.unwrap_or(4)),
                (None, Some(p), _) => {
                    return Err(InputError(format!("no chain preset for {}", preset_name(*p))));
                }
                (None, None, true) => random_chain_description(cli.seed),
                (None, None, false) => return Err(InputError("give --chain, --preset W1 or --random".into())),
            };
            let mut built = desc.build(tol)?;
            if let Some(k) = stages {
                built = built.truncate(*k);
            }
            let (checks, rows) = chain_checks(&built, tol)?;
            if let Some(path) = csv {
                std::fs::write(path, rows).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            }
            ("chain", json!({ "chain": desc, "stages": stages }), checks)
        }
        Command::Generate { .. } => unreachable!("handled above"),
    };
    let inputs = json!({ "command": name, "tolerance": tol, "inputs": inputs });
    let report = Report::new(name, &inputs, cli.seed, tol, checks, start.elapsed().as_secs_f64() * 1e3);
    let output = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    Ok(Outcome {
        output,
        exit_code: report.exit_code(),
    })
}

fn preset_name(p: Preset) -> String {
    serde_json::to_value(p).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn load_system(s: &SystemArgs, seed: u64) -> Result<SystemDescription, InputError> {
    let d = match (&s.system, s.preset, s.random) {
        (Some(arg), _, _) => input::parse_json(arg, "system")?,
        (None, Some(p), _) => SystemDescription::preset(p),
        (None, None, true) => generate_random_system(seed, Budget::default()),
        (None, None, false) => return Err(InputError("give --system, --preset or --random".into())),
    };
    d.expand()
}

fn load_function(f: &FunctionArgs) -> Result<input::FunctionInput, InputError> {
    match (&f.eta, &f.h) {
        (Some(e), _) => input::parse_function(e, true),
        (None, Some(h)) => input::parse_function(h, false),
        (None, None) => Err(InputError("give --eta or --h".into())),
    }
}

fn validate(sys: &input::System, tol: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    match &sys.group {
        Ok(g) => checks.push(Check::new("group_axioms", true, json!({ "order": g.order() }), tol, 0.0)),
        Err(v) => checks.push(Check::new("group_axioms", false, v, tol, v.len() as f64)),
    }
    if let Some(action) = &sys.action {
        let r = action.validate(tol);
        checks.push(Check::new("partial_action_axioms", r.valid, &r, tol, r.max_deviation));
        let t = action.check_invariant_trace(&sys.trace, tol);
        checks.push(Check::new(
            "trace_invariant",
            t.invariant && t.numeric_deviation <= tol,
            &t,
            tol,
            t.numeric_deviation,
        ));
    }
    let min_w = sys.trace.weights().iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "trace_faithful",
        sys.trace.is_faithful(),
        json!({ "weights": sys.trace.weights(), "min_weight": min_w }),
        tol,
        (-min_w).max(0.0),
    ));
    checks
}

/// Runs `f` on a system that passes [`validate`]; otherwise reports a failed
/// `system_valid` check and nothing else.
fn with_valid_system(
    d: &SystemDescription,
    tol: f64,
    f: impl FnOnce(&PartialAction, &TracialState) -> Result<Vec<Check>, InputError>,
) -> Result<Vec<Check>, InputError> {
    let sys = d.materialize()?;
    let v = validate(&sys, tol);
    let ok = v.iter().all(|c| c.pass);
    let summary: Value = v.iter().map(|c| (c.name.clone(), Value::Bool(c.pass))).collect::<serde_json::Map<_, _>>().into();
    let dev = v.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let mut checks = vec![Check::new("system_valid", ok, summary, tol, dev)];
    if ok {
        let action = sys.action.expect("valid systems have an action");
        checks.extend(f(&action, &sys.trace)?);
    }
    Ok(checks)
}

fn build(action: &PartialAction, trace: &TracialState, tol: f64) -> Result<Vec<Check>, InputError> {
    let cp = CrossedProduct::new(action.clone());
    let n = cp.dim();
    let basis: Vec<_> = (0..n).map(|k| cp.basis_element(k)).collect();
    let rep = RegularRepresentation::build(&cp, BaseRepresentation::defining());
    let constants: Vec<Value> = cp
        .structure_constants()
        .into_iter()
        .map(|(i, j, k, c)| json!([i, j, k, c]))
        .collect();
    let mut checks = vec![Check::new(
        "structure",
        true,
        json!({
            "group_order": cp.group().order(),
            "algebra_shape": cp.shape().dims(),
            "crossed_product_dim": n,
            "basis": cp.basis_labels(),
            "structure_constants": constants,
            "regular_representation_dim": rep.total_dim(),
            "fiber_dim": rep.fiber_dim(),
        }),
        tol,
        0.0,
    )];
    let products: Vec<Vec<_>> = basis
        .iter()
        .map(|x| basis.iter().map(|y| cp.multiply(x, y)).collect())
        .collect();
    let mut assoc: f64 = 0.0;
    for (i, x) in basis.iter().enumerate() {
        for j in 0..n {
            for (k, z) in basis.iter().enumerate() {
                let left = cp.multiply(&products[i][j], z);
                let right = cp.multiply(x, &products[j][k]);
                assoc = assoc.max(left.max_abs_diff(&right));
            }
        }
    }
    checks.push(Check::bound("associativity", json!({ "max_deviation": assoc }), tol, assoc));
    let mut inv: f64 = 0.0;
    let mut ideal: f64 = 0.0;
    for (i, x) in basis.iter().enumerate() {
        inv = inv.max(cp.adjoint(&cp.adjoint(x)).max_abs_diff(x));
        for (j, y) in basis.iter().enumerate() {
            let lhs = cp.adjoint(&products[i][j]);
            let rhs = cp.multiply(&cp.adjoint(y), &cp.adjoint(x));
            inv = inv.max(lhs.max_abs_diff(&rhs));
            ideal = ideal.max(cp.ideal_violation(&products[i][j]));
        }
    }
    checks.push(Check::bound("involution", json!({ "max_deviation": inv }), tol, inv));
    checks.push(Check::bound("ideal_coefficients", json!({ "max_deviation": ideal }), tol, ideal));
    let unit = cp.unit();
    let unit_dev = basis
        .iter()
        .map(|x| cp.multiply(&unit, x).max_abs_diff(x).max(cp.multiply(x, &unit).max_abs_diff(x)))
        .fold(0.0, f64::max);
    checks.push(Check::bound("unit", json!({ "max_deviation": unit_dev }), tol, unit_dev));
    let tt = cp.induced_trace(trace, tol)?;
    let mut tracial: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            tracial = tracial.max((tt.evaluate(&products[i][j]) - tt.evaluate(&products[j][i])).norm());
        }
    }
    let space = GnsSpace::crossed(&cp, &tt)?;
    let min_gram = space.min_gram_eigenvalue();
    let unital = (tt.evaluate(&unit) - ONE).norm();
    checks.push(Check::new(
        "induced_trace",
        tracial <= tol && unital <= tol && min_gram > 1e-12,
        json!({ "tracial_deviation": tracial, "unit_deviation": unital, "min_gram_eigenvalue": min_gram }),
        tol,
        tracial.max(unital),
    ));
    Ok(checks)
}

fn norm(
    action: &PartialAction,
    el: &input::ElementDescription,
    expect: Option<f64>,
    seed: u64,
    tol: f64,
) -> Result<Vec<Check>, InputError> {
    let cp = CrossedProduct::new(action.clone());
    let x = el.build(&cp, tol)?;
    let ideal = cp.ideal_violation(&x);
    let mut checks = vec![Check::bound("element_in_crossed_product", json!({ "ideal_violation": ideal }), tol, ideal)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_unitary(&mut rng, cp.shape().fiber_dim());
    let n1 = RegularRepresentation::build(&cp, BaseRepresentation::defining()).reduced_norm(&x);
    let n2 = RegularRepresentation::build(&cp, BaseRepresentation::amplified(2)).reduced_norm(&x);
    let n3 = RegularRepresentation::build(&cp, BaseRepresentation::defining().conjugated(v)).reduced_norm(&x);
    let scale = n1.max(1.0);
    let dev = ((n1 - n2).abs()).max((n1 - n3).abs()) / scale;
    checks.push(Check::bound(
        "reduced_norm",
        json!({ "norm": n1, "amplified_norm": n2, "conjugated_norm": n3 }),
        tol,
        dev,
    ));
    if let Some(e) = expect {
        let dev = (n1 - e).abs();
        checks.push(Check::bound(
            "norm_matches_expected",
            json!({ "norm": n1, "expected": e }),
            tol,
            dev,
        ));
    }
    Ok(checks)
}

fn pd_deviation(c: &haagerup::PdCertificate) -> f64 {
    (-c.min_eigenvalue).max(c.hermitian_deviation).max(0.0)
}

fn check_pd(
    action: &PartialAction,
    f: &input::FunctionInput,
    conventions: &[PdConvention],
    tol: f64,
) -> Result<Vec<Check>, InputError> {
    let mut checks = Vec::new();
    if let Some(eta) = f.eta(action.group())? {
        let c = eta.is_positive_definite(action.group(), tol);
        let dev = (-c.min_eigenvalue).max(c.hermitian_deviation).max(0.0);
        checks.push(Check::new(
            "eta_positive_definite",
            c.pass,
            json!({ "certificate": c, "gram": input::matrix_to_json(&eta.gram_matrix(action.group())) }),
            tol,
            dev,
        ));
    }
    let h = f.h(action, tol)?;
    for &conv in conventions {
        let c = haagerup::is_pd_wrt_action(action, &h, conv, tol);
        checks.push(Check::new(format!("pd_{conv}"), c.pass, &c, tol, pd_deviation(&c)));
    }
    Ok(checks)
}

pub fn phi_map(choice: PhiChoice, action: &PartialAction, trace: &TracialState) -> LinearMap {
    let shape = action.shape();
    match choice {
        PhiChoice::Identity => LinearMap::identity(shape.linear_dim()),
        PhiChoice::CentralExpectation => crate::random::central_expectation(shape),
        PhiChoice::TraceState => {
            let one = AlgebraElement::identity(shape);
            let t = trace.clone();
            LinearMap::on_algebra(shape, move |a| one.scale(t.evaluate(a).expect("same shape")))
        }
    }
}

fn induce(
    action: &PartialAction,
    trace: &TracialState,
    f: &input::FunctionInput,
    phi: PhiChoice,
    tol: f64,
) -> Result<Vec<Check>, InputError> {
    let cp = CrossedProduct::new(action.clone());
    let a_space = GnsSpace::algebra(action.shape(), trace)?;
    let tt = cp.induced_trace(trace, tol)?;
    let cp_space = GnsSpace::crossed(&cp, &tt)?;
    let phi = phi_map(phi, action, trace);
    let h = f.h(action, tol)?;
    let mut checks = Vec::new();
    let big = match haagerup::induce_ucp_on_crossed(&cp, &a_space, &phi, &h, tol) {
        Ok((big, pre)) => {
            checks.push(Check::new("preconditions", true, &pre, tol, 0.0));
            big
        }
        Err(crate::Error::Precondition { what, certificate }) => {
            checks.push(Check::new(
                "preconditions",
                false,
                json!({ "failure": what, "certificate": certificate }),
                tol,
                certificate.abs(),
            ));
            return Ok(checks);
        }
        Err(e) => return Err(e.into()),
    };
    let r = haagerup::certify_induced(&a_space, &cp_space, &phi, &big, tol);
    let dev = (-r.ucp.cp.min_choi_eigenvalue)
        .max(r.ucp.cp.choi_hermitian_deviation)
        .max(r.ucp.unital_deviation)
        .max(0.0);
    checks.push(Check::new("induced_ucp", r.pass, &r, tol, dev));
    let eta = haagerup::eta_from_ucp(&cp, &tt, &big);
    let e_dev = (eta.value(cp.group().identity()) - ONE).norm();
    let pd = eta.is_positive_definite(cp.group(), tol);
    checks.push(Check::new(
        "eta_from_induced_map",
        pd.pass && e_dev <= tol,
        json!({ "eta": eta.values(), "identity_deviation": e_dev, "positive_definite": pd }),
        tol,
        e_dev.max(-pd.min_eigenvalue).max(0.0),
    ));
    let c = haagerup::certify_compression(&cp, &a_space, &cp_space, &big, &phi, tol);
    checks.push(Check::new("compression", c.pass, &c, tol, c.contraction_deviation.max(0.0)));
    Ok(checks)
}

fn certify(
    action: &PartialAction,
    trace: &TracialState,
    stages: usize,
    phi: PhiChoice,
    tol: f64,
) -> Result<Vec<Check>, InputError> {
    let cp = CrossedProduct::new(action.clone());
    let grp = cp.group();
    let phi = phi_map(phi, action, trace);
    let data: Vec<HaagerupStage> = (1..=stages.max(1))
        .map(|n| {
            let t = 1.0 - 1.0 / n as f64;
            let values: Vec<C64> = grp
                .elements()
                .map(|g| if g == grp.identity() { ONE } else { C64::new(t, 0.0) })
                .collect();
            let eta = crate::group::ScalarPDFunction::new(grp, values).expect("one value per element");
            HaagerupStage {
                phi: phi.clone(),
                h: haagerup::CenterValuedPDFunction::from_scalar(action, &eta),
                epsilon: 1.0 / n as f64,
            }
        })
        .collect();
    let r = haagerup::certify_haagerup_data(&cp, trace, &data, tol)?;
    Ok(r
        .stages
        .iter()
        .map(|s| Check::new(format!("stage_{}", s.stage + 1), s.pass, s, s.epsilon + tol, s.big_phi_deviation))
        .collect())
}

fn random_chain_description(seed: u64) -> input::ChainDescription {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chain = crate::random::random_chain(&mut rng, 4, 12);
    input::ChainDescription {
        stages: chain
            .stages()
            .iter()
            .map(|s| SystemDescription {
                shape: Some(s.shape().dims().to_vec()),
                weights: Some(s.trace().weights().to_vec()),
                ..Default::default()
            })
            .collect(),
        embeddings: chain
            .embeddings()
            .iter()
            .map(|e| input::EmbeddingDescription {
                multiplicity: e.multiplicity().to_vec(),
                intertwiners: Some(e.intertwiners().iter().map(input::matrix_to_json).collect()),
            })
            .collect(),
    }
}

fn chain_checks(chain: &Chain, tol: f64) -> Result<(Vec<Check>, String), InputError> {
    let spaces = chain.gns_spaces()?;
    let mut checks = Vec::new();
    let mut csv = String::from(
        "stage,embedding_valid,isometry_deviation,functoriality_deviation,expectation_idempotent_deviation,lift_compatibility_deviation,crossed_pass\n",
    );
    let crossed = if chain.stages().iter().all(|s| s.action().is_some()) {
        Some(inductive_limit::equivariant_chain_crossed_products(chain, tol)?)
    } else {
        None
    };
    let mut composite_u: Option<linalg::CMatrix> = None;
    for (n, emb) in chain.embeddings().iter().enumerate() {
        let (s, t) = (&chain.stages()[n], &chain.stages()[n + 1]);
        let r = emb.validate(s.trace(), t.trace(), tol);
        let dev = r.homomorphism_deviation.max(r.unit_deviation).max(r.trace_deviation);
        checks.push(Check::new(format!("embedding_{n}"), r.valid, &r, tol, dev));
        let u = inductive_limit::gns_isometry(emb, &spaces[n], &spaces[n + 1]);
        let iso = inductive_limit::isometry_deviation(&u);
        checks.push(Check::bound(format!("gns_isometry_{n}"), json!({ "deviation": iso }), tol, iso));
        let func = match composite_u.take() {
            None => {
                composite_u = Some(u.clone());
                0.0
            }
            Some(prev) => {
                let direct = inductive_limit::gns_isometry(&chain.composite(0, n + 1)?, &spaces[0], &spaces[n + 1]);
                let product = &u * &prev;
                let d = linalg::max_abs_diff(&direct, &product);
                checks.push(Check::bound(format!("functoriality_0_{}", n + 1), json!({ "deviation": d }), tol, d));
                composite_u = Some(product);
                d
            }
        };
        let e = inductive_limit::certify_expectation(emb, &spaces[n], &spaces[n + 1], tol);
        let e_dev = e.idempotent_deviation.max(e.trace_deviation).max(e.bimodule_deviation);
        checks.push(Check::new(format!("expectation_{n}"), e.pass, &e, tol, e_dev));
        let phi = crate::random::central_expectation(s.shape());
        let psi = inductive_limit::lift_ucp(&phi, emb, &spaces[n], &spaces[n + 1]);
        let l = inductive_limit::certify_lift(&phi, &psi, emb, &spaces[n], &spaces[n + 1], tol);
        let l_dev = l.compatibility_deviation.max(l.deviation_transfer);
        checks.push(Check::new(format!("lift_{n}"), l.pass, &l, tol, l_dev));
        let crossed_pass = crossed.as_ref().map(|c| {
            let st = &c.stages[n];
            let dev = st
                .ideal_deviation
                .max(st.homomorphism_deviation)
                .max(st.norm_relative_deviation)
                .max(st.expectation_deviation)
                .max(st.trace_deviation);
            checks.push(Check::new(format!("crossed_embedding_{n}"), st.pass, st, tol, dev));
            st.pass
        });
        csv.push_str(&format!(
            "{n},{},{iso:e},{func:e},{:e},{:e},{}\n",
            r.valid,
            e.idempotent_deviation,
            l.compatibility_deviation,
            crossed_pass.map_or(String::new(), |p| p.to_string())
        ));
    }
    if chain.embeddings().is_empty() {
        checks.push(Check::new("single_stage", true, json!({ "stages": 1 }), tol, 0.0));
    }
    Ok((checks, csv))
}
