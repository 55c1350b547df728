use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use super::expr::{Compiled, DomainError, ParseError};
use crate::conventions::{IDENTITY_TOL, MEMBERSHIP_TOL};
use crate::forms::Form;
use crate::jets::{MultiJet, ScalarField, SmoothMap};
use crate::liouville::LiouvilleStructure;
use crate::sampling::Sampler;

const DEFAULT_SAMPLES: usize = 50;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed model file: {0}")]
    Syntax(String),
    #[error("unknown role `{0}` (expected generating, constrained, two_point, lagrangian, hamiltonian or relation)")]
    UnknownRole(String),
    #[error("missing key `{key}` required by role {role}")]
    MissingKey { key: String, role: RoleKind },
    #[error("key `{key}` is not allowed for role {role}")]
    UnexpectedKey { key: String, role: RoleKind },
    #[error("in `{key}`: {error}")]
    Parse { key: String, error: ParseError },
    #[error("in `{key}`: {error}")]
    Domain { key: String, error: DomainError },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoleKind {
    Generating,
    Constrained,
    TwoPoint,
    Lagrangian,
    Hamiltonian,
    Relation,
}

impl RoleKind {
    pub fn name(self) -> &'static str {
        match self {
            RoleKind::Generating => "generating",
            RoleKind::Constrained => "constrained",
            RoleKind::TwoPoint => "two_point",
            RoleKind::Lagrangian => "lagrangian",
            RoleKind::Hamiltonian => "hamiltonian",
            RoleKind::Relation => "relation",
        }
    }
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoleKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        Ok(match s {
            "generating" => RoleKind::Generating,
            "constrained" => RoleKind::Constrained,
            "two_point" => RoleKind::TwoPoint,
            "lagrangian" => RoleKind::Lagrangian,
            "hamiltonian" => RoleKind::Hamiltonian,
            "relation" => RoleKind::Relation,
            other => return Err(ModelError::UnknownRole(other.to_string())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4,
    SymplecticEuler,
    Leapfrog,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "symplectic-euler" => Ok(Method::SymplecticEuler),
            "leapfrog" => Ok(Method::Leapfrog),
            other => Err(format!(
                "unknown method `{other}` (expected rk4, symplectic-euler or leapfrog)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::SymplecticEuler => "symplectic-euler",
            Method::Leapfrog => "leapfrog",
        })
    }
}

/// A model expression together with the key it was read from.
#[derive(Clone, Debug)]
pub struct ModelExpr {
    pub key: String,
    pub compiled: Compiled,
}

impl ModelExpr {
    fn new(key: impl Into<String>, source: &str, vars: &[String]) -> Result<Self, ModelError> {
        let key = key.into();
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        let compiled = Compiled::new(source, &names).map_err(|error| ModelError::Parse {
            key: key.clone(),
            error,
        })?;
        Ok(Self { key, compiled })
    }

    pub fn arity(&self) -> usize {
        self.compiled.arity()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.compiled.eval(x).map_err(|error| ModelError::Domain {
            key: self.key.clone(),
            error,
        })
    }

    /// The expression as a smooth function; domain violations become NaN.
    pub fn field(&self) -> ScalarField {
        let c = self.compiled.clone();
        ScalarField::new(c.arity(), move |x| c.eval_unchecked::<MultiJet>(x))
    }
}

#[derive(Clone, Debug)]
pub enum RelationSpec {
    /// Two-point generating function `F(qf, qi)` in the difference structure.
    Generating(ModelExpr),
    /// A linear map `(q, p) ↦ A (q, p)`.
    Matrix(DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub enum Role {
    Generating { u: ModelExpr },
    Constrained { u: ModelExpr, g: Vec<ModelExpr> },
    TwoPoint { w: ModelExpr },
    Lagrangian { l: ModelExpr },
    Hamiltonian { h: ModelExpr, separable: bool },
    Relation(RelationSpec),
}

impl Role {
    pub fn kind(&self) -> RoleKind {
        match self {
            Role::Generating { .. } => RoleKind::Generating,
            Role::Constrained { .. } => RoleKind::Constrained,
            Role::TwoPoint { .. } => RoleKind::TwoPoint,
            Role::Lagrangian { .. } => RoleKind::Lagrangian,
            Role::Hamiltonian { .. } => RoleKind::Hamiltonian,
            Role::Relation(_) => RoleKind::Relation,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorSettings {
    pub method: Method,
    pub h: f64,
    pub t_end: f64,
    pub x0: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub membership: f64,
    pub identity: f64,
    pub samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            membership: MEMBERSHIP_TOL,
            identity: IDENTITY_TOL,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelFile {
    pub name: String,
    pub description: Option<String>,
    pub dim: usize,
    pub role: Role,
    /// Coefficients of `θ` on `dq1..dqn, dp1..dpn`; canonical when absent.
    pub theta: Option<Vec<ModelExpr>>,
    pub integrator: Option<IntegratorSettings>,
    pub tolerances: Tolerances,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    description: Option<String>,
    role: String,
    dim: usize,
    #[serde(rename = "U")]
    u: Option<String>,
    #[serde(rename = "L")]
    l: Option<String>,
    #[serde(rename = "H")]
    h: Option<String>,
    #[serde(rename = "W")]
    w: Option<String>,
    #[serde(rename = "F")]
    f: Option<String>,
    g: Option<Vec<String>>,
    matrix: Option<Vec<Vec<f64>>>,
    separable: Option<bool>,
    structure: Option<RawStructure>,
    integrator: Option<RawIntegrator>,
    tolerances: Option<RawTolerances>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    theta: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    method: Option<String>,
    h: f64,
    t_end: f64,
    x0: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    membership: Option<f64>,
    identity: Option<f64>,
    samples: Option<usize>,
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Variables of `q`-only expressions.
pub fn configuration_vars(n: usize) -> Vec<String> {
    names("q", n)
}

/// `(q, v)` for Lagrangians.
pub fn tangent_vars(n: usize) -> Vec<String> {
    [names("q", n), names("v", n)].concat()
}

/// `(q, p)` for Hamiltonians and Liouville forms.
pub fn phase_vars(n: usize) -> Vec<String> {
    [names("q", n), names("p", n)].concat()
}

/// `(qf, qi)` for two-point functions: final configuration first.
pub fn two_point_vars(n: usize) -> Vec<String> {
    [names("qf", n), names("qi", n)].concat()
}

fn positive(key: &str, v: f64) -> Result<f64, ModelError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ModelError::Invalid {
            key: key.into(),
            message: format!("must be positive, got {v}"),
        })
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let raw: RawModel = toml::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
        let kind: RoleKind = raw.role.parse()?;
        let n = raw.dim;
        if n == 0 {
            return Err(ModelError::Invalid {
                key: "dim".into(),
                message: "must be at least 1".into(),
            });
        }
        let missing = |key: &str| ModelError::MissingKey {
            key: key.into(),
            role: kind,
        };
        let present: [(&str, bool); 10] = [
            ("U", raw.u.is_some()),
            ("L", raw.l.is_some()),
            ("H", raw.h.is_some()),
            ("W", raw.w.is_some()),
            ("F", raw.f.is_some()),
            ("g", raw.g.is_some()),
            ("matrix", raw.matrix.is_some()),
            ("separable", raw.separable.is_some()),
            ("structure", raw.structure.is_some()),
            ("integrator", raw.integrator.is_some()),
        ];
        let allowed: &[&str] = match kind {
            RoleKind::Generating => &["U", "structure"],
            RoleKind::Constrained => &["U", "g", "structure"],
            RoleKind::TwoPoint => &["W"],
            RoleKind::Lagrangian => &["L", "integrator"],
            RoleKind::Hamiltonian => &["H", "separable", "structure", "integrator"],
            RoleKind::Relation => &["F", "matrix"],
        };
        if let Some((key, _)) = present
            .iter()
            .find(|(key, set)| *set && !allowed.contains(key))
        {
            return Err(ModelError::UnexpectedKey {
                key: key.to_string(),
                role: kind,
            });
        }

        let role = match kind {
            RoleKind::Generating => Role::Generating {
                u: ModelExpr::new(
                    "U",
                    raw.u.as_deref().ok_or_else(|| missing("U"))?,
                    &configuration_vars(n),
                )?,
            },
            RoleKind::Constrained => {
                let u = ModelExpr::new(
                    "U",
                    raw.u.as_deref().ok_or_else(|| missing("U"))?,
                    &configuration_vars(n),
                )?;
                let sources = raw.g.ok_or_else(|| missing("g"))?;
                if sources.len() >= n {
                    return Err(ModelError::Invalid {
                        key: "g".into(),
                        message: format!(
                            "{} constraints leave no configurations in dimension {n}",
                            sources.len()
                        ),
                    });
                }
                let g = sources
                    .iter()
                    .enumerate()
                    .map(|(i, s)| ModelExpr::new(format!("g[{i}]"), s, &configuration_vars(n)))
                    .collect::<Result<_, _>>()?;
                Role::Constrained { u, g }
            }
            RoleKind::TwoPoint => Role::TwoPoint {
                w: ModelExpr::new(
                    "W",
                    raw.w.as_deref().ok_or_else(|| missing("W"))?,
                    &two_point_vars(n),
                )?,
            },
            RoleKind::Lagrangian => Role::Lagrangian {
                l: ModelExpr::new(
                    "L",
                    raw.l.as_deref().ok_or_else(|| missing("L"))?,
                    &tangent_vars(n),
                )?,
            },
            RoleKind::Hamiltonian => Role::Hamiltonian {
                h: ModelExpr::new(
                    "H",
                    raw.h.as_deref().ok_or_else(|| missing("H"))?,
                    &phase_vars(n),
                )?,
                separable: raw.separable.unwrap_or(false),
            },
            RoleKind::Relation => match (raw.f, raw.matrix) {
                (Some(f), None) => Role::Relation(RelationSpec::Generating(ModelExpr::new(
                    "F",
                    &f,
                    &two_point_vars(n),
                )?)),
                (None, Some(rows)) => {
                    if rows.len() != 2 * n || rows.iter().any(|r| r.len() != 2 * n) {
                        return Err(ModelError::Invalid {
                            key: "matrix".into(),
                            message: format!("expected {0} rows of {0} entries", 2 * n),
                        });
                    }
                    Role::Relation(RelationSpec::Matrix(DMatrix::from_fn(
                        2 * n,
                        2 * n,
                        |i, j| rows[i][j],
                    )))
                }
                (None, None) => return Err(missing("F")),
                (Some(_), Some(_)) => {
                    return Err(ModelError::Invalid {
                        key: "matrix".into(),
                        message: "give either `F` or `matrix`, not both".into(),
                    })
                }
            },
        };

        let theta = match raw.structure {
            None => None,
            Some(s) => {
                if s.theta.len() != 2 * n {
                    return Err(ModelError::Invalid {
                        key: "structure.theta".into(),
                        message: format!("expected {} coefficients, got {}", 2 * n, s.theta.len()),
                    });
                }
                Some(
                    s.theta
                        .iter()
                        .enumerate()
                        .map(|(i, src)| {
                            ModelExpr::new(format!("structure.theta[{i}]"), src, &phase_vars(n))
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
        };

        let integrator = match raw.integrator {
            None => None,
            Some(i) => {
                let method = match i.method {
                    None => Method::Rk4,
                    Some(m) => m.parse().map_err(|message| ModelError::Invalid {
                        key: "integrator.method".into(),
                        message,
                    })?,
                };
                if i.x0.len() != 2 * n {
                    return Err(ModelError::Invalid {
                        key: "integrator.x0".into(),
                        message: format!("expected {} entries, got {}", 2 * n, i.x0.len()),
                    });
                }
                if !(i.t_end >= 0.0 && i.t_end.is_finite()) {
                    return Err(ModelError::Invalid {
                        key: "integrator.t_end".into(),
                        message: format!("got {}", i.t_end),
                    });
                }
                Some(IntegratorSettings {
                    method,
                    h: positive("integrator.h", i.h)?,
                    t_end: i.t_end,
                    x0: i.x0,
                })
            }
        };

        let mut tolerances = Tolerances::default();
        if let Some(t) = raw.tolerances {
            if let Some(v) = t.membership {
                tolerances.membership = positive("tolerances.membership", v)?;
            }
            if let Some(v) = t.identity {
                tolerances.identity = positive("tolerances.identity", v)?;
            }
            if let Some(v) = t.samples {
                if v == 0 {
                    return Err(ModelError::Invalid {
                        key: "tolerances.samples".into(),
                        message: "must be positive".into(),
                    });
                }
                tolerances.samples = v;
            }
        }

        Ok(Self {
            name: raw.name,
            description: raw.description,
            dim: n,
            role,
            theta,
            integrator,
            tolerances,
        })
    }

    pub fn kind(&self) -> RoleKind {
        self.role.kind()
    }

    /// The Liouville structure on `T*R^n` the model lives in.
    pub fn structure(&self) -> LiouvilleStructure {
        let n = self.dim;
        match &self.theta {
            None => LiouvilleStructure::canonical(n),
            Some(coeffs) => {
                let coeffs = coeffs.clone();
                let theta = Form::one_form(2 * n, move |x| {
                    coeffs
                        .iter()
                        .map(|c| c.compiled.eval_unchecked(x))
                        .collect()
                });
                LiouvilleStructure::new(n, n, theta, format!("θ of {}", self.name))
                    .expect("coefficient count checked at load time")
            }
        }
    }

    /// Constraint map `g: R^n -> R^k` of a constrained model.
    pub fn constraint_map(&self) -> Option<SmoothMap> {
        match &self.role {
            Role::Constrained { g, .. } => {
                let g = g.clone();
                Some(SmoothMap::new(self.dim, g.len(), move |x| {
                    g.iter().map(|c| c.compiled.eval_unchecked(x)).collect()
                }))
            }
            _ => None,
        }
    }

    pub fn expressions(&self) -> Vec<&ModelExpr> {
        let mut out: Vec<&ModelExpr> = match &self.role {
            Role::Generating { u } => vec![u],
            Role::Constrained { u, g } => std::iter::once(u).chain(g).collect(),
            Role::TwoPoint { w } => vec![w],
            Role::Lagrangian { l } => vec![l],
            Role::Hamiltonian { h, .. } => vec![h],
            Role::Relation(RelationSpec::Generating(f)) => vec![f],
            Role::Relation(RelationSpec::Matrix(_)) => vec![],
        };
        if let Some(theta) = &self.theta {
            out.extend(theta);
        }
        out
    }

    /// Evaluates every expression with domain checks at `samples` seeded
    /// points of `[-1, 1]^arity` and at the initial state, if any.
    pub fn probe_domains(&self, samples: usize, seed: u64) -> Result<(), ModelError> {
        let mut s = Sampler::new(seed);
        for e in self.expressions() {
            for _ in 0..samples {
                e.eval(&s.vector(e.arity()))?;
            }
            if let Some(i) = &self.integrator {
                if e.arity() == i.x0.len() {
                    e.eval(&i.x0)?;
                }
            }
        }
        Ok(())
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ModelFile::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HARMONIC: &str = r#"
name = "harmonic oscillator"
role = "hamiltonian"
dim = 1
H = "p1^2/2 + q1^2/2"
separable = true

[integrator]
method = "leapfrog"
h = 0.01
t_end = 6.283185307179586
x0 = [1.0, 0.0]
"#;

    #[test]
    fn loads_hamiltonian_model() {
        let m = ModelFile::parse(HARMONIC).unwrap();
        assert_eq!(m.kind(), RoleKind::Hamiltonian);
        let Role::Hamiltonian { h, separable } = &m.role else {
            panic!()
        };
        assert!(*separable);
        assert_eq!(h.eval(&[1.0, 2.0]).unwrap(), 2.5);
        assert_eq!(h.field().eval(&[1.0, 2.0]), 2.5);
        assert_eq!(m.integrator.as_ref().unwrap().method, Method::Leapfrog);
        assert_eq!(m.tolerances, Tolerances::default());
        assert!(m.structure().verify(20, 1e-10).passed());
    }

    #[test]
    fn schema_errors_name_the_key() {
        let no_h = HARMONIC.replace("H = \"p1^2/2 + q1^2/2\"\n", "");
        let e = ModelFile::parse(&no_h).unwrap_err();
        assert_eq!(
            e,
            ModelError::MissingKey {
                key: "H".into(),
                role: RoleKind::Hamiltonian
            }
        );
        assert!(e.to_string().contains("`H`"));

        let extra = HARMONIC.replace("dim = 1", "dim = 1\nU = \"q1\"");
        assert!(
            matches!(ModelFile::parse(&extra), Err(ModelError::UnexpectedKey { key, .. }) if key == "U")
        );

        let unknown = HARMONIC.replace("dim = 1", "dim = 1\nbogus = 3");
        assert!(ModelFile::parse(&unknown)
            .unwrap_err()
            .to_string()
            .contains("bogus"));

        let bad_x0 = HARMONIC.replace("x0 = [1.0, 0.0]", "x0 = [1.0]");
        assert!(
            matches!(ModelFile::parse(&bad_x0), Err(ModelError::Invalid { key, .. }) if key == "integrator.x0")
        );

        let bad_var = HARMONIC.replace("q1^2/2", "v1^2/2");
        let e = ModelFile::parse(&bad_var).unwrap_err();
        assert!(
            matches!(&e, ModelError::Parse { key, error } if key == "H" && error.column == 10),
            "{e}"
        );

        assert!(matches!(
            ModelFile::parse(&HARMONIC.replace("hamiltonian", "dynamics")),
            Err(ModelError::UnknownRole(_))
        ));
        assert!(matches!(
            ModelFile::parse("name = 1"),
            Err(ModelError::Syntax(_))
        ));
    }

    #[test]
    fn custom_structure_and_domain_probe() {
        let text = r#"
name = "twisted"
role = "generating"
dim = 1
U = "q1^2 / 2"
[structure]
theta = ["(1 + q1^2) * p1", "0"]
"#;
        let m = ModelFile::parse(text).unwrap();
        let l = m.structure();
        assert!(l.verify(20, 1e-10).passed());
        assert_eq!(l.theta.coefficients(&[2.0, 3.0]), vec![15.0, 0.0]);
        assert!(m.probe_domains(20, 1).is_ok());

        let logs = text.replace("q1^2 / 2", "ln(q1)");
        let e = ModelFile::parse(&logs)
            .unwrap()
            .probe_domains(20, 1)
            .unwrap_err();
        assert!(
            matches!(&e, ModelError::Domain { key, error } if key == "U" && error.snippet == "ln(q1)"),
            "{e}"
        );
    }

    #[test]
    fn relation_and_constrained_models() {
        let rel = "name = \"r\"\nrole = \"relation\"\ndim = 1\nmatrix = [[1.0, 1.0], [0.0, 1.0]]\n";
        let m = ModelFile::parse(rel).unwrap();
        assert!(matches!(m.role, Role::Relation(RelationSpec::Matrix(ref a)) if a[(0, 1)] == 1.0));
        assert!(ModelFile::parse(&rel.replace("[0.0, 1.0]]", "[0.0]]")).is_err());
        assert!(matches!(
            ModelFile::parse("name = \"r\"\nrole = \"relation\"\ndim = 1\n"),
            Err(ModelError::MissingKey { key, .. }) if key == "F"
        ));

        let c = "name = \"c\"\nrole = \"constrained\"\ndim = 2\nU = \"q1\"\ng = [\"q1^2 + q2^2 - 1\"]\n";
        let m = ModelFile::parse(c).unwrap();
        assert_eq!(m.constraint_map().unwrap().eval(&[1.0, 1.0]), vec![1.0]);
        assert!(ModelFile::parse(&c.replace("dim = 2", "dim = 1")).is_err());
    }
}
