//! Command-line driver: model verification, sample generation, trajectory
//! integration and linear relation composition.
//!
//! Exit codes: `0` when every check passes, `1` when a check fails (the
//! report carries a witness), `2` on input errors (unreadable or malformed
//! model files, bad flags, role/command mismatches).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;

use liouville_core::bundles::TTStarPoint;
use liouville_core::conventions::agree;
use liouville_core::integrate::{
    is_separable_at, leapfrog, residual_along, rk4, rk4_hamiltonian, symplectic_euler,
    DriftSummary, Status, Trajectory,
};
use liouville_core::jets::{gradient, hessian};
use liouville_core::liouville::{functor_hamilton, PropertyCheck, VerificationReport};
use liouville_core::mechanics::{
    generate_constrained, generate_from_function, generate_two_point, hamiltonian_dynamics,
    lagrangian_dynamics, proper_function, write_samples_csv, GeneratedSet,
};
use liouville_core::modelio::{load_model, Method, ModelError, ModelFile, RelationSpec, Role};
use liouville_core::sampling::Sampler;
use liouville_core::symplin::{
    compose_linear_relations, is_lagrangian, linear_graph, product_form,
};
use liouville_core::{Error, ScalarField, Subspace, SymplecticSpace};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const SEED: u64 = 0x11_0c;
const PROPER_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(
    name = "liouville",
    version,
    about = "Verify Liouville structures and the dynamics they generate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build each model's structure and run its verification checks.
    Check {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        /// Overrides the model's sample count.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Dump points of the generated set with their membership residuals (CSV).
    Generate {
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = SEED)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Integrate the model's dynamics and write the trajectory (CSV).
    Dynamics {
        model: PathBuf,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Trajectory file; defaults to `<model>-<method>.csv` in the
        /// current directory.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Largest acceptable finite-difference membership residual.
        #[arg(long, default_value_t = 0.1)]
        residual_tol: f64,
    },
    /// Compose two linear symplectic relations (`second ∘ first`).
    Relation { first: PathBuf, second: PathBuf },
}

/// Outcome of one model job.
#[derive(Debug, Serialize)]
pub struct ModelReport {
    pub model: String,
    pub path: String,
    pub role: String,
    pub passed: bool,
    pub checks: Vec<PropertyCheck>,
}

enum Failure {
    Input(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure::Input(message.into())
}

fn check(property: &str, tolerance: f64, witness: Option<Vec<f64>>) -> PropertyCheck {
    PropertyCheck {
        property: property.into(),
        pass: witness.is_none(),
        witness,
        tolerance,
    }
}

/// A failed construction step, with the error's witness when it has one.
fn construction_failure(property: &str, e: &Error) -> PropertyCheck {
    let witness = match e {
        Error::Singular {
            witness, condition, ..
        } => {
            let mut w = witness.clone();
            w.push(*condition);
            w
        }
        Error::PathDependent {
            witness, deviation, ..
        } => {
            let mut w = witness.clone();
            w.push(*deviation);
            w
        }
        Error::RankDeficient { rank, expected, .. } => vec![*rank as f64, *expected as f64],
        Error::IllDefined { deviation, .. } => vec![*deviation],
        _ => vec![f64::NAN],
    };
    check(property, 0.0, Some(witness))
}

fn first_failure(
    samples: usize,
    seed: u64,
    mut trial: impl FnMut(&mut Sampler) -> Option<Vec<f64>>,
) -> Option<Vec<f64>> {
    let mut s = Sampler::new(seed);
    (0..samples).find_map(|_| trial(&mut s))
}

/// Lagrangian tangent spaces and membership of sampled points.
fn set_checks(
    set: &GeneratedSet,
    samples: usize,
    tol: f64,
    expected_dim: Option<usize>,
) -> Vec<PropertyCheck> {
    let mut out = vec![
        check(
            "lagrangian tangent spaces",
            tol,
            first_failure(samples, SEED, |s| {
                let t = set.random_params(s);
                (!set.is_lagrangian_at(&t).unwrap_or(false)).then_some(t)
            }),
        ),
        check(
            "sampled points are members",
            tol,
            first_failure(samples, SEED + 1, |s| {
                let t = set.random_params(s);
                (!set.contains(&set.sample(&t), tol)).then_some(t)
            }),
        ),
    ];
    if let Some(dim) = expected_dim {
        out.push(check(
            "dimension equals dim Q",
            0.0,
            first_failure(samples, SEED + 2, |s| {
                let t = set.random_params(s);
                let d = set.tangent_basis(&t).dim();
                (d != dim).then(|| [t, vec![d as f64]].concat())
            }),
        ));
    }
    out
}

fn structure_checks(
    model: &ModelFile,
    samples: usize,
) -> (liouville_core::LiouvilleStructure, VerificationReport) {
    let l = model.structure();
    let report = l.verify(samples, model.tolerances.identity);
    (l, report)
}

fn negated(f: &ScalarField) -> ScalarField {
    let f = f.clone();
    ScalarField::new(f.dim(), move |x| -f.eval_jet(x))
}

/// Tangent space of a relation graph at the origin in `(x_out, x_in)` order.
fn relation_graph(model: &ModelFile) -> Result<Subspace, Failure> {
    let n = model.dim;
    match &model.role {
        Role::Relation(RelationSpec::Matrix(a)) => Ok(linear_graph(a)),
        Role::Relation(RelationSpec::Generating(f)) => {
            let set = generate_two_point(&f.field()).map_err(|e| input(e.to_string()))?;
            // (qf, qi, pf, pi) -> (qf, pf, qi, pi)
            let basis = set.tangent_basis(&vec![0.0; 2 * n]);
            let order: Vec<usize> = (0..n)
                .chain(2 * n..3 * n)
                .chain(n..2 * n)
                .chain(3 * n..4 * n)
                .collect();
            let b = basis.basis();
            Ok(Subspace::from_matrix(&DMatrix::from_fn(
                4 * n,
                b.ncols(),
                |r, c| b[(order[r], c)],
            )))
        }
        _ => Err(input(format!(
            "{} is a {} model, not a relation",
            model.name,
            model.kind()
        ))),
    }
}

fn relation_check(property: &str, graph: &Subspace, n: usize) -> PropertyCheck {
    let s = SymplecticSpace::standard(n);
    let ok = is_lagrangian(graph, &product_form(&s, &s)).unwrap_or(false);
    check(property, 0.0, (!ok).then(|| vec![graph.dim() as f64]))
}

fn run_checks(model: &ModelFile, samples: usize) -> Result<Vec<PropertyCheck>, Failure> {
    model.probe_domains(samples, SEED)?;
    let n = model.dim;
    let tol = model.tolerances.membership;
    let mut checks = Vec::new();
    match &model.role {
        Role::Generating { u } => {
            let (l, report) = structure_checks(model, samples);
            checks.extend(report.checks);
            let u = u.field();
            match generate_from_function(&l, &u) {
                Ok(set) => {
                    checks.extend(set_checks(&set, samples, tol, Some(n)));
                    checks.push(match proper_function(&l, set.sampler(), None, PROPER_TOL) {
                        Ok(proper) => {
                            let offset = u.eval(&vec![0.0; n]);
                            check(
                                "proper function recovers U",
                                PROPER_TOL,
                                first_failure(samples, SEED + 3, |s| {
                                    let q = s.vector(n);
                                    (!agree(proper.eval(&q) + offset, u.eval(&q), PROPER_TOL))
                                        .then_some(q)
                                }),
                            )
                        }
                        Err(e) => construction_failure("proper function recovers U", &e),
                    });
                }
                Err(e) => checks.push(construction_failure("generated set", &e)),
            }
        }
        Role::Constrained { u, .. } => {
            let (l, report) = structure_checks(model, samples);
            checks.extend(report.checks);
            let g = model.constraint_map().expect("constrained role");
            match generate_constrained(&l, &u.field(), &g) {
                Ok(set) => checks.extend(set_checks(&set, samples, tol, Some(n))),
                Err(e) => checks.push(construction_failure("generated set", &e)),
            }
        }
        Role::TwoPoint { w } => match generate_two_point(&w.field()) {
            Ok(set) => {
                checks.extend(
                    set.structure
                        .verify(samples, model.tolerances.identity)
                        .checks,
                );
                checks.extend(set_checks(&set, samples, tol, Some(2 * n)));
            }
            Err(e) => checks.push(construction_failure("generated set", &e)),
        },
        Role::Lagrangian { l } => match lagrangian_dynamics(&l.field()) {
            Ok(dynamics) => {
                checks.extend(
                    dynamics
                        .set
                        .structure
                        .verify(samples, model.tolerances.identity)
                        .checks,
                );
                checks.extend(set_checks(&dynamics.set, samples, tol, Some(2 * n)));
            }
            Err(e) => checks.push(construction_failure("Lagrangian dynamics", &e)),
        },
        Role::Hamiltonian { h, separable } => {
            let (l, report) = structure_checks(model, samples);
            checks.extend(report.checks);
            let h = h.field();
            let omega = l.omega();
            let field = hamiltonian_dynamics(&h, &omega).map_err(|e| input(e.to_string()))?;
            match functor_hamilton(2 * n, &omega)
                .and_then(|hl| generate_from_function(&hl, &negated(&h)))
            {
                Ok(set) => {
                    checks.extend(set_checks(&set, samples, tol, Some(2 * n)));
                    checks.push(check(
                        "Hamiltonian field lies on the generated set",
                        tol,
                        first_failure(samples, SEED + 4, |s| {
                            let x = s.vector(2 * n);
                            let ok = field
                                .field(&x)
                                .is_ok_and(|v| set.contains(&[x.clone(), v].concat(), tol));
                            (!ok).then_some(x)
                        }),
                    ));
                }
                Err(e) => checks.push(construction_failure("Hamilton functor set", &e)),
            }
            checks.push(check(
                "energy is conserved by the field",
                tol,
                first_failure(samples, SEED + 5, |s| {
                    let x = s.vector(2 * n);
                    let rate = field.field(&x).and_then(|v| {
                        Ok(gradient(&h, &x)?
                            .iter()
                            .zip(&v)
                            .map(|(a, b)| a * b)
                            .sum::<f64>())
                    });
                    (!rate.is_ok_and(|r| agree(r, 0.0, tol))).then_some(x)
                }),
            ));
            if *separable {
                checks.push(check(
                    "separable",
                    0.0,
                    first_failure(samples, SEED + 6, |s| {
                        let x = s.vector(2 * n);
                        (!is_separable_at(&h, &x).unwrap_or(false)).then_some(x)
                    }),
                ));
            }
        }
        Role::Relation(_) => {
            let graph = relation_graph(model)?;
            checks.push(relation_check("graph is Lagrangian", &graph, n));
        }
    }
    Ok(checks)
}

fn report(model: &ModelFile, path: &Path, checks: Vec<PropertyCheck>) -> ModelReport {
    ModelReport {
        model: model.name.clone(),
        path: path.display().to_string(),
        role: model.kind().to_string(),
        passed: checks.iter().all(|c| c.pass),
        checks,
    }
}

fn check_one(path: &Path, samples: Option<usize>) -> Result<ModelReport, Failure> {
    let model = load_model(path)?;
    let samples = samples.unwrap_or(model.tolerances.samples);
    let checks = run_checks(&model, samples)?;
    Ok(report(&model, path, checks))
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    passed: bool,
    reports: Vec<&'a ModelReport>,
}

fn cmd_check(
    models: &[PathBuf],
    samples: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let results: Vec<Result<ModelReport, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = models
            .iter()
            .map(|p| scope.spawn(move || check_one(p, samples)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(input("model job panicked")))
            })
            .collect()
    });
    let mut code = EXIT_PASS;
    let mut reports = Vec::new();
    for (path, result) in models.iter().zip(&results) {
        match result {
            Ok(r) => {
                if !r.passed {
                    code = code.max(EXIT_FAIL);
                    for c in r.checks.iter().filter(|c| !c.pass) {
                        writeln!(
                            err,
                            "{}: FAIL {} (witness {:?})",
                            path.display(),
                            c.property,
                            c.witness
                        )?;
                    }
                }
                reports.push(r);
            }
            Err(Failure::Input(message)) => {
                code = EXIT_INPUT;
                writeln!(err, "error: {}: {message}", path.display())?;
            }
        }
    }
    let output = CheckOutput {
        passed: code == EXIT_PASS,
        reports,
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&output).expect("reports serialize")
    )?;
    Ok(code)
}

fn generated_set(model: &ModelFile) -> Result<GeneratedSet, Failure> {
    let n = model.dim;
    let built = match &model.role {
        Role::Generating { u } => generate_from_function(&model.structure(), &u.field()),
        Role::Constrained { u, .. } => generate_constrained(
            &model.structure(),
            &u.field(),
            &model.constraint_map().expect("constrained"),
        ),
        Role::TwoPoint { w } => generate_two_point(&w.field()),
        Role::Lagrangian { l } => lagrangian_dynamics(&l.field()).map(|d| d.set),
        Role::Hamiltonian { h, .. } => functor_hamilton(2 * n, &model.structure().omega())
            .and_then(|hl| generate_from_function(&hl, &negated(&h.field()))),
        Role::Relation(_) => {
            return Err(input(
                "`generate` needs a set-producing role, not a relation",
            ))
        }
    };
    built.map_err(|e| input(format!("cannot build the generated set: {e}")))
}

fn cmd_generate(
    path: &Path,
    samples: usize,
    seed: u64,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let model = load_model(path)?;
    model.probe_domains(samples.min(100), seed)?;
    let set = generated_set(&model)?;
    let mut s = Sampler::new(seed);
    let params: Vec<Vec<f64>> = (0..samples).map(|_| set.random_params(&mut s)).collect();
    let records = set.dump(&params);
    let written = match output {
        Some(p) => File::create(p)
            .map_err(|e| input(format!("cannot create {}: {e}", p.display())))
            .and_then(|f| write_samples_csv(&records, f).map_err(|e| input(e.to_string()))),
        None => write_samples_csv(&records, &mut *out).map_err(|e| input(e.to_string())),
    };
    written?;
    let worst = records.iter().map(|r| r.residual).fold(0.0, f64::max);
    let tol = model.tolerances.membership;
    let _ = writeln!(
        err,
        "{}: {} samples, max residual {worst:.3e} (tolerance {tol:.1e})",
        model.name,
        records.len()
    );
    Ok(if worst < tol { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct DynamicsSummary {
    model: String,
    method: String,
    steps: usize,
    t_end: f64,
    complete: bool,
    status: Status,
    final_state: Vec<f64>,
    drift: DriftSummary,
    residual_along: f64,
    residual_tol: f64,
    trajectory: String,
}

struct Integrated {
    trajectory: Trajectory,
    residual: f64,
    invariant: &'static str,
}

fn integrate_hamiltonian(
    model: &ModelFile,
    method: Method,
    x0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<Integrated, Failure> {
    let Role::Hamiltonian { h: ham, separable } = &model.role else {
        unreachable!()
    };
    let ham = ham.field();
    let field =
        hamiltonian_dynamics(&ham, &model.structure().omega()).map_err(|e| input(e.to_string()))?;
    if method != Method::Rk4 && model.theta.is_some() {
        return Err(input(format!(
            "{method} needs canonical coordinates; remove [structure] or use rk4"
        )));
    }
    if method == Method::Leapfrog && !separable {
        return Err(input(
            "leapfrog needs `separable = true` declared in the model",
        ));
    }
    let trajectory = match method {
        Method::Rk4 => rk4_hamiltonian(&field, x0, t_end, h),
        Method::SymplecticEuler => symplectic_euler(&ham, x0, t_end, h),
        Method::Leapfrog => leapfrog(&ham, x0, t_end, h),
    }
    .map_err(|e| input(e.to_string()))?;
    let residual =
        residual_along(&trajectory, |x, xdot| field.residual(x, xdot)).unwrap_or(f64::INFINITY);
    Ok(Integrated {
        trajectory,
        residual,
        invariant: "H",
    })
}

fn integrate_lagrangian(
    model: &ModelFile,
    method: Method,
    x0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<Integrated, Failure> {
    let Role::Lagrangian { l } = &model.role else {
        unreachable!()
    };
    if method != Method::Rk4 {
        return Err(input(format!(
            "{method} integrates Hamiltonian models; use rk4 for a Lagrangian"
        )));
    }
    let lagrangian = l.field();
    let dynamics = lagrangian_dynamics(&lagrangian).map_err(|e| input(e.to_string()))?;
    let n = model.dim;
    let energy = |x: &[f64]| match gradient(&lagrangian, x) {
        Ok(g) => (0..n).map(|i| x[n + i] * g[n + i]).sum::<f64>() - lagrangian.eval(x),
        Err(_) => f64::NAN,
    };
    let trajectory = rk4(|x| dynamics.explicit_ode(x), energy, x0, t_end, h)
        .map_err(|e| input(e.to_string()))?;
    // Lift (q, v) and its finite-difference derivative to (q, p, q̇, ṗ).
    let membership = |x: &[f64], xdot: &[f64]| -> f64 {
        let (Ok(g), Ok(hess)) = (gradient(&lagrangian, x), hessian(&lagrangian, x)) else {
            return f64::INFINITY;
        };
        let p = g[n..].to_vec();
        let pdot: Vec<f64> = (0..n)
            .map(|i| (0..2 * n).map(|j| hess[(n + i, j)] * xdot[j]).sum())
            .collect();
        dynamics.residual(&TTStarPoint::new(
            x[..n].to_vec(),
            p,
            xdot[..n].to_vec(),
            pdot,
        ))
    };
    let residual = residual_along(&trajectory, membership).unwrap_or(f64::INFINITY);
    Ok(Integrated {
        trajectory,
        residual,
        invariant: "E",
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_dynamics(
    path: &Path,
    method: Option<Method>,
    h: Option<f64>,
    t_end: Option<f64>,
    output: Option<&Path>,
    residual_tol: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let model = load_model(path)?;
    let settings = model.integrator.clone().ok_or_else(|| {
        input(format!(
            "missing key `integrator` required by `dynamics` for {}",
            model.name
        ))
    })?;
    let method = method.unwrap_or(settings.method);
    let h = h.unwrap_or(settings.h);
    let t_end = t_end.unwrap_or(settings.t_end);
    model.probe_domains(model.tolerances.samples, SEED)?;
    let integrated = match model.role {
        Role::Hamiltonian { .. } => integrate_hamiltonian(&model, method, &settings.x0, t_end, h)?,
        Role::Lagrangian { .. } => integrate_lagrangian(&model, method, &settings.x0, t_end, h)?,
        _ => {
            return Err(input(format!(
                "`dynamics` needs a hamiltonian or lagrangian model, got {}",
                model.kind()
            )))
        }
    };
    let target = output.map(Path::to_path_buf).unwrap_or_else(|| {
        let stem = path
            .file_stem()
            .map_or_else(|| "trajectory".into(), |s| s.to_string_lossy().into_owned());
        PathBuf::from(format!("{stem}-{method}.csv"))
    });
    let file = File::create(&target)
        .map_err(|e| input(format!("cannot create {}: {e}", target.display())))?;
    integrated
        .trajectory
        .write_csv(io::BufWriter::new(file), integrated.invariant)
        .map_err(|e| input(e.to_string()))?;

    let traj = &integrated.trajectory;
    let summary = DynamicsSummary {
        model: model.name.clone(),
        method: method.to_string(),
        steps: traj.len().saturating_sub(1),
        t_end,
        complete: traj.is_complete(),
        status: traj.status.clone(),
        final_state: traj.final_state().to_vec(),
        drift: traj.drift(),
        residual_along: integrated.residual,
        residual_tol,
        trajectory: target.display().to_string(),
    };
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    let passed = summary.complete && integrated.residual <= residual_tol;
    if !passed {
        let _ = writeln!(
            err,
            "{}: FAIL dynamics (status {:?}, residual {:.3e}, witness {:?})",
            model.name, summary.status, integrated.residual, summary.final_state
        );
    }
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct RelationOutput {
    first: String,
    second: String,
    composite_dim: usize,
    passed: bool,
    checks: Vec<PropertyCheck>,
}

fn cmd_relation(
    first: &Path,
    second: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let (m1, m2) = (load_model(first)?, load_model(second)?);
    if m1.dim != m2.dim {
        return Err(input(format!(
            "relations act on dimensions {} and {}",
            m1.dim, m2.dim
        )));
    }
    let n = m1.dim;
    let (g1, g2) = (relation_graph(&m1)?, relation_graph(&m2)?);
    let composite = compose_linear_relations(&g2, &g1, 2 * n).map_err(|e| input(e.to_string()))?;
    let checks = vec![
        relation_check("first graph is Lagrangian", &g1, n),
        relation_check("second graph is Lagrangian", &g2, n),
        relation_check("composite is Lagrangian", &composite, n),
    ];
    let passed = checks.iter().all(|c| c.pass);
    for c in checks.iter().filter(|c| !c.pass) {
        let _ = writeln!(err, "FAIL {} (witness {:?})", c.property, c.witness);
    }
    let output = RelationOutput {
        first: m1.name,
        second: m2.name,
        composite_dim: composite.dim(),
        passed,
        checks,
    };
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&output).expect("report serializes")
    );
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

/// Runs the CLI on `argv` (program name first) with explicit streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_PASS;
        }
    };
    let result = match cli.command {
        Command::Check { models, samples } => {
            cmd_check(&models, samples, out, err).map_err(|e| input(e.to_string()))
        }
        Command::Generate {
            model,
            samples,
            seed,
            output,
        } => cmd_generate(&model, samples, seed, output.as_deref(), out, err),
        Command::Dynamics {
            model,
            method,
            h,
            t_end,
            output,
            residual_tol,
        } => cmd_dynamics(
            &model,
            method,
            h,
            t_end,
            output.as_deref(),
            residual_tol,
            out,
            err,
        ),
        Command::Relation { first, second } => cmd_relation(&first, &second, out, err),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_INPUT
        }
    }
}

/// Runs the CLI against the process's standard streams.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
