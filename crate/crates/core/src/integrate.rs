//! Fixed-step integrators for extracted dynamics and trajectory diagnostics.
//!
//! States of canonical systems are `(q, p)` with `q` first. Every integrator
//! takes `ceil(t_end / h)` steps, the last one shortened to land on `t_end`.
//! A non-finite state or a failing field stops the run early; the partial
//! trajectory is kept and [`Trajectory::status`] says why.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{gradient, hessian, ScalarField};
use crate::mechanics::HamiltonianField;

const NEWTON_MAX: usize = 50;
const NEWTON_TOL: f64 = 1e-14;
const SEPARABILITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Status {
    Complete,
    Truncated { time: f64, reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// The tracked invariant (usually `H`) at each state.
    pub invariant_track: Vec<f64>,
    pub status: Status,
}

/// Energy behaviour along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftSummary {
    pub initial: f64,
    pub final_value: f64,
    pub max_deviation: f64,
    /// `max_deviation / max(|initial|, tiny)`.
    pub relative: f64,
    /// Least-squares slope of `invariant − initial` against time.
    pub slope: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn drift(&self) -> DriftSummary {
        let initial = self.invariant_track.first().copied().unwrap_or(0.0);
        let final_value = self.invariant_track.last().copied().unwrap_or(0.0);
        let max_deviation = self
            .invariant_track
            .iter()
            .map(|e| (e - initial).abs())
            .fold(0.0, f64::max);
        let relative = max_deviation / initial.abs().max(f64::MIN_POSITIVE);
        let n = self.len() as f64;
        let slope = if self.len() < 2 {
            0.0
        } else {
            let tm = self.times.iter().sum::<f64>() / n;
            let em = self.invariant_track.iter().sum::<f64>() / n;
            let (num, den) = self
                .times
                .iter()
                .zip(&self.invariant_track)
                .fold((0.0, 0.0), |(a, b), (t, e)| {
                    (a + (t - tm) * (e - em), b + (t - tm) * (t - tm))
                });
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        };
        DriftSummary {
            initial,
            final_value,
            max_deviation,
            relative,
            slope,
        }
    }

    /// Writes `t, x1..xd, <invariant>` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W, invariant_name: &str) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("writing trajectory: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let d = self.states.first().map_or(0, Vec::len);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=d).map(|i| format!("x{i}")))
            .chain(std::iter::once(invariant_name.to_string()))
            .collect();
        w.write_record(&header).map_err(io)?;
        for ((t, x), e) in self
            .times
            .iter()
            .zip(&self.states)
            .zip(&self.invariant_track)
        {
            let row: Vec<String> = std::iter::once(t)
                .chain(x)
                .chain(std::iter::once(e))
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("writing trajectory: {e}")))?;
        Ok(())
    }
}

fn step_sizes(t_end: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {h}"
        )));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "final time must be nonnegative, got {t_end}"
        )));
    }
    let steps = (t_end / h * (1.0 - 1e-12)).ceil() as usize;
    Ok((0..steps)
        .map(|k| {
            if k + 1 == steps {
                t_end - k as f64 * h
            } else {
                h
            }
        })
        .collect())
}

/// Shared driver: `advance(x, dt)` produces the next state.
fn run<A, I>(x0: &[f64], t_end: f64, h: f64, mut advance: A, invariant: I) -> Result<Trajectory>
where
    A: FnMut(&[f64], f64) -> Result<Vec<f64>>,
    I: Fn(&[f64]) -> f64,
{
    let steps = step_sizes(t_end, h)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.to_vec()],
        invariant_track: vec![invariant(x0)],
        status: Status::Complete,
    };
    let mut t = 0.0;
    for (k, dt) in steps.iter().enumerate() {
        let x = traj.states.last().expect("nonempty");
        let next = match advance(x, *dt) {
            Ok(next) if next.iter().all(|v| v.is_finite()) => next,
            Ok(_) => {
                traj.status = Status::Truncated {
                    time: t,
                    reason: "non-finite state".into(),
                };
                break;
            }
            Err(e) => {
                traj.status = Status::Truncated {
                    time: t,
                    reason: e.to_string(),
                };
                break;
            }
        };
        t = if k + 1 == steps.len() {
            t_end
        } else {
            (k + 1) as f64 * h
        };
        traj.invariant_track.push(invariant(&next));
        traj.times.push(t);
        traj.states.push(next);
    }
    Ok(traj)
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| xi + a * yi).collect()
}

/// Classical Runge–Kutta 4 for `ẋ = field(x)`, tracking `invariant`.
pub fn rk4<F, I>(field: F, invariant: I, x0: &[f64], t_end: f64, h: f64) -> Result<Trajectory>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    I: Fn(&[f64]) -> f64,
{
    run(
        x0,
        t_end,
        h,
        |x, dt| {
            let k1 = field(x)?;
            let k2 = field(&axpy(x, dt / 2.0, &k1))?;
            let k3 = field(&axpy(x, dt / 2.0, &k2))?;
            let k4 = field(&axpy(x, dt, &k3))?;
            Ok((0..x.len())
                .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect())
        },
        invariant,
    )
}

/// [`rk4`] on a Hamiltonian field, tracking `H`.
pub fn rk4_hamiltonian(
    field: &HamiltonianField,
    x0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    check_state(field.dim(), x0)?;
    rk4(|x| field.field(x), |x| field.energy(x), x0, t_end, h)
}

fn check_state(dim: usize, x0: &[f64]) -> Result<()> {
    if !dim.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "canonical phase space needs even dimension, got {dim}"
        )));
    }
    crate::jets::check_dim("initial state", dim, x0.len())
}

/// Symplectic Euler for canonical `H(q, p)`:
/// `p' = p − h ∂H/∂q(q, p')`, `q' = q + h ∂H/∂p(q, p')`.
/// The momentum update is solved by Newton's method; for separable `H` the
/// first iterate is already exact.
pub fn symplectic_euler(
    hamiltonian: &ScalarField,
    x0: &[f64],
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    let dim = hamiltonian.dim();
    check_state(dim, x0)?;
    let n = dim / 2;
    let at = |q: &[f64], p: &[f64]| -> Vec<f64> { q.iter().chain(p).copied().collect() };
    run(
        x0,
        t_end,
        h,
        |x, dt| {
            let (q, p0) = (&x[..n], &x[n..]);
            let mut p = p0.to_vec();
            let mut converged = false;
            for _ in 0..NEWTON_MAX {
                let y = at(q, &p);
                let g = gradient(hamiltonian, &y)?;
                let r = DVector::from_fn(n, |i, _| p[i] - p0[i] + dt * g[i]);
                let scale = 1f64.max(p.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
                if r.amax() <= NEWTON_TOL * scale {
                    converged = true;
                    break;
                }
                let hess = hessian(hamiltonian, &y)?;
                let jac = DMatrix::identity(n, n) + hess.view((0, n), (n, n)) * dt;
                let delta = jac.lu().solve(&r).ok_or_else(|| Error::Singular {
                    what: "implicit momentum update".into(),
                    witness: y.clone(),
                    condition: f64::INFINITY,
                })?;
                for i in 0..n {
                    p[i] -= delta[i];
                }
            }
            if !converged {
                return Err(Error::InvalidArgument(
                    "implicit momentum update did not converge".into(),
                ));
            }
            let g = gradient(hamiltonian, &at(q, &p))?;
            let q_next: Vec<f64> = (0..n).map(|i| q[i] + dt * g[n + i]).collect();
            Ok(at(&q_next, &p))
        },
        |x| hamiltonian.eval(x),
    )
}

/// Whether `∂²H/∂q∂p` vanishes at `x`.
pub fn is_separable_at(hamiltonian: &ScalarField, x: &[f64]) -> Result<bool> {
    let n = hamiltonian.dim() / 2;
    let hess = hessian(hamiltonian, x)?;
    let scale = 1f64.max(hess.amax());
    Ok(hess.view((0, n), (n, n)).amax() <= SEPARABILITY_TOL * scale)
}

/// Störmer–Verlet (kick–drift–kick) for separable `H = T(p) + V(q)`.
/// Rejects a Hamiltonian with a mixed second derivative at `x0`.
pub fn leapfrog(hamiltonian: &ScalarField, x0: &[f64], t_end: f64, h: f64) -> Result<Trajectory> {
    let dim = hamiltonian.dim();
    check_state(dim, x0)?;
    if !is_separable_at(hamiltonian, x0)? {
        return Err(Error::InvalidArgument(
            "leapfrog needs a separable Hamiltonian T(p) + V(q)".into(),
        ));
    }
    let n = dim / 2;
    run(
        x0,
        t_end,
        h,
        |x, dt| {
            let mut y = x.to_vec();
            let g = gradient(hamiltonian, &y)?;
            for i in 0..n {
                y[n + i] -= dt / 2.0 * g[i];
            }
            let g = gradient(hamiltonian, &y)?;
            for i in 0..n {
                y[i] += dt * g[n + i];
            }
            let g = gradient(hamiltonian, &y)?;
            for i in 0..n {
                y[n + i] -= dt / 2.0 * g[i];
            }
            Ok(y)
        },
        |x| hamiltonian.eval(x),
    )
}

/// Largest `membership(x, ẋ)` over the trajectory, with `ẋ` from finite
/// differences of the stored states (three-point formulas, valid for the
/// shortened last step).
pub fn residual_along<M>(traj: &Trajectory, membership: M) -> Result<f64>
where
    M: Fn(&[f64], &[f64]) -> f64,
{
    let m = traj.len();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "residual needs at least two trajectory points".into(),
        ));
    }
    let x = &traj.states;
    let t = &traj.times;
    let derivative = |k: usize| -> Vec<f64> {
        if m == 2 {
            let dt = t[1] - t[0];
            return x[1].iter().zip(&x[0]).map(|(b, a)| (b - a) / dt).collect();
        }
        // Lagrange-interpolant derivative on three consecutive nodes.
        let j = k.clamp(1, m - 2);
        let (t0, t1, t2) = (t[j - 1], t[j], t[j + 1]);
        let s = t[k];
        let w0 = (2.0 * s - t1 - t2) / ((t0 - t1) * (t0 - t2));
        let w1 = (2.0 * s - t0 - t2) / ((t1 - t0) * (t1 - t2));
        let w2 = (2.0 * s - t0 - t1) / ((t2 - t0) * (t2 - t1));
        (0..x[k].len())
            .map(|i| w0 * x[j - 1][i] + w1 * x[j][i] + w2 * x[j + 1][i])
            .collect()
    };
    Ok((0..m)
        .map(|k| membership(&x[k], &derivative(k)))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::canonical_symplectic;
    use crate::jets::Scalar;
    use crate::mechanics::hamiltonian_dynamics;

    fn harmonic() -> ScalarField {
        ScalarField::new(2, |x| (x[0] * x[0] + x[1] * x[1]).scale(0.5))
    }

    fn harmonic_field() -> HamiltonianField {
        hamiltonian_dynamics(&harmonic(), &canonical_symplectic(1)).unwrap()
    }

    fn exact(t: f64) -> [f64; 2] {
        [t.cos(), -t.sin()]
    }

    fn error_at_period(h: f64) -> f64 {
        let t_end = 2.0 * std::f64::consts::PI;
        let traj = rk4_hamiltonian(&harmonic_field(), &[1.0, 0.0], t_end, h).unwrap();
        let e = exact(t_end);
        let x = traj.final_state();
        ((x[0] - e[0]).powi(2) + (x[1] - e[1]).powi(2)).sqrt()
    }

    #[test]
    fn rk4_returns_after_one_period() {
        assert!(error_at_period(0.01) < 1e-6);
        let traj = rk4_hamiltonian(
            &harmonic_field(),
            &[1.0, 0.0],
            2.0 * std::f64::consts::PI,
            0.01,
        )
        .unwrap();
        assert!(traj.is_complete());
        assert_eq!(*traj.times.last().unwrap(), 2.0 * std::f64::consts::PI);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(traj.states.len(), traj.invariant_track.len());
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let errors: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|h| error_at_period(*h))
            .collect();
        for w in errors.windows(2) {
            assert!(w[0] / w[1] >= 12.0, "{errors:?}");
        }
    }

    #[test]
    fn zero_field_is_constant() {
        let traj = rk4(|x| Ok(vec![0.0; x.len()]), |_| 0.0, &[0.3, -2.0], 1.0, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.states.iter().all(|x| x == &[0.3, -2.0]));
    }

    #[test]
    fn step_count_and_truncated_last_step() {
        assert_eq!(step_sizes(1.0, 0.1).unwrap().len(), 10);
        let steps = step_sizes(1.05, 0.1).unwrap();
        assert_eq!(steps.len(), 11);
        assert!((steps[10] - 0.05).abs() < 1e-12);
        assert!(step_sizes(0.0, 0.1).unwrap().is_empty());
        assert!(step_sizes(1.0, 0.0).is_err());
        assert!(step_sizes(1.0, -0.1).is_err());
    }

    #[test]
    fn non_finite_state_truncates() {
        let blowup = |x: &[f64]| Ok(vec![x[0] * x[0] * 1e10]);
        let traj = rk4(blowup, |x| x[0], &[1.0], 100.0, 0.1).unwrap();
        assert!(!traj.is_complete());
        assert!(traj.len() < 1001);
        assert!(traj.states.iter().all(|x| x[0].is_finite()));
    }

    #[test]
    fn symplectic_euler_bounded_energy() {
        let h = harmonic();
        let se = symplectic_euler(&h, &[1.0, 0.0], 100.0, 0.05).unwrap();
        let drift = se.drift();
        assert!(drift.relative < 0.05, "{drift:?}");
        assert!(drift.slope.abs() < 1e-4 * drift.initial, "{drift:?}");

        let rk = rk4_hamiltonian(&harmonic_field(), &[1.0, 0.0], 100.0, 0.05).unwrap();
        assert!(rk.drift().max_deviation < 1e-6);
    }

    #[test]
    fn symplectic_euler_implicit_case() {
        // H = p²(1 + q²)/2: the momentum update is genuinely implicit.
        let h = ScalarField::new(2, |x| (x[1] * x[1] * (x[0] * x[0] + 1.0.into())).scale(0.5));
        let traj = symplectic_euler(&h, &[0.5, 1.0], 1.0, 0.01).unwrap();
        assert!(traj.is_complete());
        let exact = rk4(
            |x| Ok(vec![x[1] * (1.0 + x[0] * x[0]), -x[0] * x[1] * x[1]]),
            |_| 0.0,
            &[0.5, 1.0],
            1.0,
            0.001,
        )
        .unwrap();
        let (a, b) = (traj.final_state(), exact.final_state());
        assert!((a[0] - b[0]).abs() < 0.05 && (a[1] - b[1]).abs() < 0.05);
        assert!(traj.drift().relative < 0.05);
        assert!(leapfrog(&h, &[0.5, 1.0], 1.0, 0.01).is_err());
    }

    #[test]
    fn leapfrog_is_reversible() {
        let pendulum = ScalarField::new(2, |x| (x[1] * x[1]).scale(0.5) - x[0].cos());
        let x0 = [1.2, 0.3];
        let forward = leapfrog(&pendulum, &x0, 10.0, 0.01).unwrap();
        let end = forward.final_state();
        let back = leapfrog(&pendulum, &[end[0], -end[1]], 10.0, 0.01).unwrap();
        let x = back.final_state();
        assert!(
            (x[0] - x0[0]).abs() < 1e-10 && (-x[1] - x0[1]).abs() < 1e-10,
            "{x:?}"
        );
        assert!(forward.drift().relative < 1e-3);
    }

    #[test]
    fn residual_along_trajectories() {
        let field = harmonic_field();
        let traj = rk4_hamiltonian(&field, &[1.0, 0.0], 2.0 * std::f64::consts::PI, 0.01).unwrap();
        let r = residual_along(&traj, |x, xdot| field.residual(x, xdot)).unwrap();
        assert!(r < 1e-4, "{r}");

        let rest = rk4_hamiltonian(&field, &[0.0, 0.0], 1.0, 0.1).unwrap();
        assert!(residual_along(&rest, |x, xdot| field.residual(x, xdot)).unwrap() < 1e-15);

        let mut bad = traj.clone();
        bad.states[300][0] += 0.01;
        assert!(residual_along(&bad, |x, xdot| field.residual(x, xdot)).unwrap() > 0.1);
    }

    #[test]
    fn csv_layout() {
        let traj = rk4(|x| Ok(vec![1.0; x.len()]), |x| x[0], &[0.0, 1.0], 0.2, 0.1).unwrap();
        let mut out = Vec::new();
        traj.write_csv(&mut out, "H").unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,H");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0.1,0.1,1.1,"));
    }
}
