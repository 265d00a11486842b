//! Index-1 DAE systems: representation, consistent initialization and
//! trajectory integration with constraint projection.
//!
//! Systems have the semi-explicit form `ẇ = f(t,w,z), 0 = g(t,w,z)` with
//! `∂g/∂z` invertible along solutions, so `z` is an implicit function of
//! `(t, w)` and the state equation integrates like an ODE whose algebraic
//! part is recovered by Newton iteration at every stage.

mod dsl_system;
mod interp;
mod trajectory;

pub use dsl_system::DslDae;
pub(crate) use interp::hermite_basis;
pub use interp::{TrajectoryInterpolant, GJAC_DT_DELTA};
pub use trajectory::Trajectory;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

/// Newton accepts a consistent point once ‖g‖∞ is at or below this level.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Newton keeps polishing down to this target so that downstream finite
/// differences of trajectories do not sit on top of projection noise.
const NEWTON_TARGET: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 50;

/// First partial derivatives of `f` and `g` at a point `(t, w, z)`.
#[derive(Debug, Clone)]
pub struct JacobianBundle {
    /// ∂f/∂w, n×n
    pub fw: Matrix,
    /// ∂f/∂z, n×m
    pub fz: Matrix,
    /// ∂g/∂w, m×n
    pub gw: Matrix,
    /// ∂g/∂z, m×m
    pub gz: Matrix,
    /// ∂g/∂t, length m
    pub gt: Vec<f64>,
}

/// A semi-explicit index-1 DAE system.
pub trait DaeSystem: Send + Sync {
    fn state_dim(&self) -> usize;
    fn alg_dim(&self) -> usize;
    fn name(&self) -> &str;

    /// Vector field: writes f(t,w,z) into `out` (length n).
    fn f(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()>;

    /// Constraint: writes g(t,w,z) into `out` (length m).
    fn g(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()>;

    /// First partials at a point. The default falls back to central finite
    /// differences; built-in systems and DSL models provide exact values.
    fn jacobians(&self, t: f64, w: &[f64], z: &[f64]) -> Result<JacobianBundle> {
        finite_difference_jacobians(self, t, w, z)
    }

    /// Just ∂g/∂z, used inside Newton loops where the full bundle would be
    /// wasted work.
    fn constraint_jacobian_z(&self, t: f64, w: &[f64], z: &[f64]) -> Result<Matrix> {
        finite_difference_gz(self, t, w, z)
    }

    /// Closed-form d/dt of (∂g/∂w, ∂g/∂z) along a trajectory, given the
    /// state derivatives, for systems where these are known analytically.
    /// Used as a cross-check against the finite-difference path.
    fn gjac_dt_closed_form(
        &self,
        t: f64,
        w: &[f64],
        z: &[f64],
        wdot: &[f64],
        zdot: &[f64],
    ) -> Option<(Matrix, Matrix)> {
        let _ = (t, w, z, wdot, zdot);
        None
    }

    /// True when ∂g/∂z is a constant matrix (e.g. observer constraints of
    /// the form g = h(t,w) − z), which makes d/dt(∂g/∂z) exactly zero.
    fn gz_is_constant(&self) -> bool {
        false
    }

    /// True when neither f nor g depends explicitly on t.
    fn time_invariant(&self) -> bool {
        false
    }
}

fn check_dims(sys: &(impl DaeSystem + ?Sized), w: &[f64], z: &[f64]) -> Result<()> {
    if w.len() != sys.state_dim() || z.len() != sys.alg_dim() {
        return Err(Error::DimensionMismatch(format!(
            "system '{}' has (n,m)=({},{}), got state ({},{})",
            sys.name(),
            sys.state_dim(),
            sys.alg_dim(),
            w.len(),
            z.len()
        )));
    }
    Ok(())
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Central-difference first partials with per-coordinate step
/// h = 1e-6·max(1, |x|).
pub fn finite_difference_jacobians<S: DaeSystem + ?Sized>(
    sys: &S,
    t: f64,
    w: &[f64],
    z: &[f64],
) -> Result<JacobianBundle> {
    let n = sys.state_dim();
    let m = sys.alg_dim();
    check_dims(sys, w, z)?;
    let mut fw = Matrix::zeros(n, n);
    let mut fz = Matrix::zeros(n, m);
    let mut gw = Matrix::zeros(m, n);
    let mut gz = Matrix::zeros(m, m);
    let mut gt = vec![0.0; m];

    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    let mut gp = vec![0.0; m];
    let mut gm = vec![0.0; m];

    let mut wbuf = w.to_vec();
    for k in 0..n {
        let h = 1e-6 * w[k].abs().max(1.0);
        wbuf[k] = w[k] + h;
        sys.f(t, &wbuf, z, &mut fp)?;
        sys.g(t, &wbuf, z, &mut gp)?;
        wbuf[k] = w[k] - h;
        sys.f(t, &wbuf, z, &mut fm)?;
        sys.g(t, &wbuf, z, &mut gm)?;
        wbuf[k] = w[k];
        for i in 0..n {
            fw[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        for j in 0..m {
            gw[(j, k)] = (gp[j] - gm[j]) / (2.0 * h);
        }
    }
    let mut zbuf = z.to_vec();
    for k in 0..m {
        let h = 1e-6 * z[k].abs().max(1.0);
        zbuf[k] = z[k] + h;
        sys.f(t, w, &zbuf, &mut fp)?;
        sys.g(t, w, &zbuf, &mut gp)?;
        zbuf[k] = z[k] - h;
        sys.f(t, w, &zbuf, &mut fm)?;
        sys.g(t, w, &zbuf, &mut gm)?;
        zbuf[k] = z[k];
        for i in 0..n {
            fz[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
        for j in 0..m {
            gz[(j, k)] = (gp[j] - gm[j]) / (2.0 * h);
        }
    }
    let ht = 1e-6 * t.abs().max(1.0);
    sys.g(t + ht, w, z, &mut gp)?;
    sys.g(t - ht, w, z, &mut gm)?;
    for j in 0..m {
        gt[j] = (gp[j] - gm[j]) / (2.0 * ht);
    }
    Ok(JacobianBundle { fw, fz, gw, gz, gt })
}

fn finite_difference_gz<S: DaeSystem + ?Sized>(
    sys: &S,
    t: f64,
    w: &[f64],
    z: &[f64],
) -> Result<Matrix> {
    let m = sys.alg_dim();
    let mut gz = Matrix::zeros(m, m);
    let mut gp = vec![0.0; m];
    let mut gm = vec![0.0; m];
    let mut zbuf = z.to_vec();
    for k in 0..m {
        let h = 1e-6 * z[k].abs().max(1.0);
        zbuf[k] = z[k] + h;
        sys.g(t, w, &zbuf, &mut gp)?;
        zbuf[k] = z[k] - h;
        sys.g(t, w, &zbuf, &mut gm)?;
        zbuf[k] = z[k];
        for j in 0..m {
            gz[(j, k)] = (gp[j] - gm[j]) / (2.0 * h);
        }
    }
    Ok(gz)
}

/// Evaluate and validate the Jacobian bundle of a system at a point.
pub fn evaluate_jacobians(
    sys: &dyn DaeSystem,
    t: f64,
    w: &[f64],
    z: &[f64],
) -> Result<JacobianBundle> {
    check_dims(sys, w, z)?;
    let (n, m) = (sys.state_dim(), sys.alg_dim());
    let jac = sys.jacobians(t, w, z)?;
    let shapes = [
        (jac.fw.rows(), jac.fw.cols(), n, n, "fw"),
        (jac.fz.rows(), jac.fz.cols(), n, m, "fz"),
        (jac.gw.rows(), jac.gw.cols(), m, n, "gw"),
        (jac.gz.rows(), jac.gz.cols(), m, m, "gz"),
    ];
    for (r, c, er, ec, name) in shapes {
        if (r, c) != (er, ec) {
            return Err(Error::DimensionMismatch(format!(
                "{name} has shape {r}x{c}, expected {er}x{ec}"
            )));
        }
    }
    if jac.gt.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "gt has length {}, expected {m}",
            jac.gt.len()
        )));
    }
    Ok(jac)
}

enum NewtonOutcome {
    Converged(Vec<f64>),
    NonFinite,
    Failed { residual: f64, iterations: usize },
}

fn newton_solve_z(
    sys: &dyn DaeSystem,
    t: f64,
    w: &[f64],
    z_start: &[f64],
) -> Result<NewtonOutcome> {
    let m = sys.alg_dim();
    if m == 0 {
        return Ok(NewtonOutcome::Converged(Vec::new()));
    }
    if !w.iter().all(|x| x.is_finite()) {
        return Ok(NewtonOutcome::NonFinite);
    }
    let mut z = z_start.to_vec();
    let mut r = vec![0.0; m];
    let mut prev = f64::INFINITY;
    for iter in 0..NEWTON_MAX_ITER {
        sys.g(t, w, &z, &mut r)?;
        let res = inf_norm(&r);
        if !res.is_finite() {
            return Ok(NewtonOutcome::NonFinite);
        }
        if res <= NEWTON_TARGET {
            return Ok(NewtonOutcome::Converged(z));
        }
        // Stalled at the rounding floor while already acceptable.
        if res <= CONSTRAINT_TOL && res >= 0.5 * prev {
            return Ok(NewtonOutcome::Converged(z));
        }
        let gz = sys.constraint_jacobian_z(t, w, &z)?;
        let lu = Lu::factor(&gz)?;
        let delta = lu.solve(&r);
        if !delta.iter().all(|x| x.is_finite()) {
            return Ok(NewtonOutcome::NonFinite);
        }
        for (zi, di) in z.iter_mut().zip(&delta) {
            *zi -= di;
        }
        prev = res;
        if iter == NEWTON_MAX_ITER - 1 {
            sys.g(t, w, &z, &mut r)?;
            let res = inf_norm(&r);
            if res <= CONSTRAINT_TOL {
                return Ok(NewtonOutcome::Converged(z));
            }
            return Ok(NewtonOutcome::Failed {
                residual: res,
                iterations: NEWTON_MAX_ITER,
            });
        }
    }
    unreachable!()
}

/// Solve `g(t0, w0, z) = 0` for z by Newton iteration from `z_guess`.
///
/// Succeeds with ‖g‖∞ ≤ 1e-10 (typically much tighter); a singular ∂g/∂z
/// surfaces as [`Error::SingularMatrix`], signalling loss of index-1.
pub fn consistent_init(
    sys: &dyn DaeSystem,
    t0: f64,
    w0: &[f64],
    z_guess: &[f64],
) -> Result<Vec<f64>> {
    check_dims(sys, w0, z_guess)?;
    match newton_solve_z(sys, t0, w0, z_guess)? {
        NewtonOutcome::Converged(z) => Ok(z),
        NewtonOutcome::NonFinite => Err(Error::ConsistencyFailure {
            t: t0,
            residual: f64::INFINITY,
            iterations: 0,
        }),
        NewtonOutcome::Failed {
            residual,
            iterations,
        } => Err(Error::ConsistencyFailure {
            t: t0,
            residual,
            iterations,
        }),
    }
}

/// Integrate the DAE with classical fixed-step RK4 on the reduced dynamics
/// `ẇ = f(t, w, z(t,w))`, re-solving the constraint at every stage and
/// re-projecting z after each step.
///
/// Divergence is first-class: when the state leaves floating-point range the
/// partial trajectory is returned with its `nonfinite` flag set instead of
/// an error, so that non-contracting systems can still be observed.
pub fn integrate(
    sys: &dyn DaeSystem,
    t0: f64,
    w0: &[f64],
    z0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    check_dims(sys, w0, z0)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    if t_end < t0 {
        return Err(Error::InvalidInput(format!(
            "t_end {t_end} precedes t0 {t0}"
        )));
    }
    let n = sys.state_dim();
    let m = sys.alg_dim();

    let mut g0 = vec![0.0; m];
    sys.g(t0, w0, z0, &mut g0)?;
    if inf_norm(&g0) > 1e-8 {
        return Err(Error::ConsistencyFailure {
            t: t0,
            residual: inf_norm(&g0),
            iterations: 0,
        });
    }
    // Tighten the starting point so the stored trajectory meets the same
    // residual bound everywhere.
    let z0 = match newton_solve_z(sys, t0, w0, z0)? {
        NewtonOutcome::Converged(z) => z,
        _ => {
            return Err(Error::ConsistencyFailure {
                t: t0,
                residual: inf_norm(&g0),
                iterations: NEWTON_MAX_ITER,
            })
        }
    };

    let mut traj = Trajectory::new(n, m, step);
    let mut residual_max = 0.0_f64;
    let mut gbuf = vec![0.0; m];

    sys.g(t0, w0, &z0, &mut gbuf)?;
    residual_max = residual_max.max(inf_norm(&gbuf));
    traj.push(t0, w0, &z0);

    let mut t = t0;
    let mut w = w0.to_vec();
    let mut z = z0;

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut wstage = vec![0.0; n];

    let time_eps = 1e-12 * (1.0 + t_end.abs());
    'outer: while t < t_end - time_eps {
        let h = step.min(t_end - t);

        // Stage 1 reuses the already-projected (w, z).
        sys.f(t, &w, &z, &mut k1)?;

        let mut zs = z.clone();
        for (ws, (wi, ki)) in wstage.iter_mut().zip(w.iter().zip(&k1)) {
            *ws = wi + 0.5 * h * ki;
        }
        zs = match newton_solve_z(sys, t + 0.5 * h, &wstage, &zs)? {
            NewtonOutcome::Converged(z) => z,
            NewtonOutcome::NonFinite => {
                traj.nonfinite = true;
                break 'outer;
            }
            NewtonOutcome::Failed {
                residual,
                iterations,
            } => {
                return Err(Error::ConsistencyFailure {
                    t: t + 0.5 * h,
                    residual,
                    iterations,
                })
            }
        };
        sys.f(t + 0.5 * h, &wstage, &zs, &mut k2)?;

        for (ws, (wi, ki)) in wstage.iter_mut().zip(w.iter().zip(&k2)) {
            *ws = wi + 0.5 * h * ki;
        }
        zs = match newton_solve_z(sys, t + 0.5 * h, &wstage, &zs)? {
            NewtonOutcome::Converged(z) => z,
            NewtonOutcome::NonFinite => {
                traj.nonfinite = true;
                break 'outer;
            }
            NewtonOutcome::Failed {
                residual,
                iterations,
            } => {
                return Err(Error::ConsistencyFailure {
                    t: t + 0.5 * h,
                    residual,
                    iterations,
                })
            }
        };
        sys.f(t + 0.5 * h, &wstage, &zs, &mut k3)?;

        for (ws, (wi, ki)) in wstage.iter_mut().zip(w.iter().zip(&k3)) {
            *ws = wi + h * ki;
        }
        zs = match newton_solve_z(sys, t + h, &wstage, &zs)? {
            NewtonOutcome::Converged(z) => z,
            NewtonOutcome::NonFinite => {
                traj.nonfinite = true;
                break 'outer;
            }
            NewtonOutcome::Failed {
                residual,
                iterations,
            } => {
                return Err(Error::ConsistencyFailure {
                    t: t + h,
                    residual,
                    iterations,
                })
            }
        };
        sys.f(t + h, &wstage, &zs, &mut k4)?;

        for i in 0..n {
            w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;

        if !w.iter().all(|x| x.is_finite()) {
            traj.nonfinite = true;
            break;
        }
        z = match newton_solve_z(sys, t, &w, &zs)? {
            NewtonOutcome::Converged(z) => z,
            NewtonOutcome::NonFinite => {
                traj.nonfinite = true;
                break;
            }
            NewtonOutcome::Failed {
                residual,
                iterations,
            } => {
                return Err(Error::ConsistencyFailure {
                    t,
                    residual,
                    iterations,
                })
            }
        };
        sys.g(t, &w, &z, &mut gbuf)?;
        residual_max = residual_max.max(inf_norm(&gbuf));
        traj.push(t, &w, &z);
    }

    traj.constraint_residual_max = residual_max;
    Ok(traj)
}
