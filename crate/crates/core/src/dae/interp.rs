//! Cubic Hermite interpolation of stored trajectories, and time derivatives
//! of constraint Jacobians along the solution.

use super::{evaluate_jacobians, DaeSystem, JacobianBundle, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

/// Offset used when differencing Jacobians along the trajectory.
pub const GJAC_DT_DELTA: f64 = 1e-5;

/// A trajectory together with per-sample state derivatives, supporting
/// evaluation of states, Jacobians and Jacobian time-derivatives at
/// arbitrary interior times.
pub struct TrajectoryInterpolant<'a> {
    sys: &'a dyn DaeSystem,
    traj: &'a Trajectory,
    /// ẇ = f at each sample, length n per sample.
    dws: Vec<f64>,
    /// ż = −gz⁻¹(gt + gw·f) at each sample, length m per sample.
    dzs: Vec<f64>,
}

impl<'a> TrajectoryInterpolant<'a> {
    pub fn new(sys: &'a dyn DaeSystem, traj: &'a Trajectory) -> Result<Self> {
        if traj.is_empty() {
            return Err(Error::InvalidInput("empty trajectory".into()));
        }
        if traj.state_dim() != sys.state_dim() || traj.alg_dim() != sys.alg_dim() {
            return Err(Error::DimensionMismatch(
                "trajectory dimensions do not match system".into(),
            ));
        }
        let n = sys.state_dim();
        let m = sys.alg_dim();
        let len = traj.len();
        let mut dws = vec![0.0; n * len];
        let mut dzs = vec![0.0; m * len];
        let mut fbuf = vec![0.0; n];
        for k in 0..len {
            let t = traj.t(k);
            let w = traj.w(k);
            let z = traj.z(k);
            sys.f(t, w, z, &mut fbuf)?;
            dws[k * n..(k + 1) * n].copy_from_slice(&fbuf);
            if m > 0 {
                let jac = sys.jacobians(t, w, z)?;
                let zdot = alg_derivative(&jac, &fbuf)?;
                dzs[k * m..(k + 1) * m].copy_from_slice(&zdot);
            }
        }
        Ok(TrajectoryInterpolant {
            sys,
            traj,
            dws,
            dzs,
        })
    }

    pub fn system(&self) -> &'a dyn DaeSystem {
        self.sys
    }

    pub fn trajectory(&self) -> &'a Trajectory {
        self.traj
    }

    pub fn t_start(&self) -> f64 {
        self.traj.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.traj.t_end()
    }

    /// Interpolated state (w, z) at time t.
    pub fn state_at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.traj.state_dim();
        let m = self.traj.alg_dim();
        if self.traj.len() == 1 {
            // Degenerate single-sample trajectory: only its own time is valid.
            let lo = self.traj.t_start();
            if (t - lo).abs() <= 1e-9 * (1.0 + lo.abs()) {
                return Ok((self.traj.w(0).to_vec(), self.traj.z(0).to_vec()));
            }
            return Err(Error::OutOfRange { t, lo, hi: lo });
        }
        let i = self.traj.segment_for(t)?;
        let t0 = self.traj.t(i);
        let t1 = self.traj.t(i + 1);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = hermite_basis(s);
        let mut w = vec![0.0; n];
        let w0 = self.traj.w(i);
        let w1 = self.traj.w(i + 1);
        let dw0 = &self.dws[i * n..(i + 1) * n];
        let dw1 = &self.dws[(i + 1) * n..(i + 2) * n];
        for k in 0..n {
            w[k] = h00 * w0[k] + h10 * h * dw0[k] + h01 * w1[k] + h11 * h * dw1[k];
        }
        let mut z = vec![0.0; m];
        let z0 = self.traj.z(i);
        let z1 = self.traj.z(i + 1);
        let dz0 = &self.dzs[i * m..(i + 1) * m];
        let dz1 = &self.dzs[(i + 1) * m..(i + 2) * m];
        for k in 0..m {
            z[k] = h00 * z0[k] + h10 * h * dz0[k] + h01 * z1[k] + h11 * h * dz1[k];
        }
        Ok((w, z))
    }

    /// State derivatives (ẇ, ż) at time t, evaluated from f and the
    /// differentiated constraint at the interpolated state.
    pub fn slopes_at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (w, z) = self.state_at(t)?;
        let mut wdot = vec![0.0; self.traj.state_dim()];
        self.sys.f(t, &w, &z, &mut wdot)?;
        if self.traj.alg_dim() == 0 {
            return Ok((wdot, Vec::new()));
        }
        let jac = self.sys.jacobians(t, &w, &z)?;
        let zdot = alg_derivative(&jac, &wdot)?;
        Ok((wdot, zdot))
    }

    /// Jacobian bundle at the interpolated state.
    pub fn jacobians_at(&self, t: f64) -> Result<JacobianBundle> {
        let (w, z) = self.state_at(t)?;
        evaluate_jacobians(self.sys, t, &w, &z)
    }

    /// d/dt of (∂g/∂w, ∂g/∂z) along the solution.
    ///
    /// Default path: second-order differencing of the Jacobians at states
    /// interpolated on the trajectory (central in the interior, one-sided
    /// within δ of the endpoints). When the system declares ∂g/∂z constant
    /// the second matrix is exactly zero.
    pub fn gjac_time_derivatives(&self, t: f64) -> Result<(Matrix, Matrix)> {
        let lo = self.t_start();
        let hi = self.t_end();
        let slack = 1e-9 * (1.0 + hi.abs());
        if t < lo - slack || t > hi + slack {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let d = GJAC_DT_DELTA;
        if hi - lo < 2.0 * d {
            return Err(Error::InvalidInput(format!(
                "trajectory span {} too short for Jacobian differencing (needs ≥ {})",
                hi - lo,
                2.0 * d
            )));
        }
        let gz_const = self.sys.gz_is_constant();
        let (dgw, dgz) = if t - d >= lo && t + d <= hi {
            let a = self.jacobians_at(t - d)?;
            let b = self.jacobians_at(t + d)?;
            (
                b.gw.sub(&a.gw).scale(1.0 / (2.0 * d)),
                b.gz.sub(&a.gz).scale(1.0 / (2.0 * d)),
            )
        } else if t - d < lo {
            let j0 = self.jacobians_at(t)?;
            let j1 = self.jacobians_at(t + d)?;
            let j2 = self.jacobians_at(t + 2.0 * d)?;
            (
                one_sided(&j0.gw, &j1.gw, &j2.gw, d),
                one_sided(&j0.gz, &j1.gz, &j2.gz, d),
            )
        } else {
            let j0 = self.jacobians_at(t)?;
            let j1 = self.jacobians_at(t - d)?;
            let j2 = self.jacobians_at(t - 2.0 * d)?;
            (
                one_sided(&j0.gw, &j1.gw, &j2.gw, -d),
                one_sided(&j0.gz, &j1.gz, &j2.gz, -d),
            )
        };
        let m = self.traj.alg_dim();
        let dgz = if gz_const { Matrix::zeros(m, m) } else { dgz };
        Ok((dgw, dgz))
    }

    /// Closed-form d/dt of the constraint Jacobians, when the system
    /// supplies one. Returns Ok(None) otherwise.
    pub fn gjac_time_derivatives_closed(&self, t: f64) -> Result<Option<(Matrix, Matrix)>> {
        let (w, z) = self.state_at(t)?;
        let (wdot, zdot) = self.slopes_at(t)?;
        Ok(self.sys.gjac_dt_closed_form(t, &w, &z, &wdot, &zdot))
    }
}

/// ż from the differentiated constraint: gz·ż = −(gt + gw·ẇ).
fn alg_derivative(jac: &JacobianBundle, wdot: &[f64]) -> Result<Vec<f64>> {
    let gw_f = jac.gw.mat_vec(wdot);
    let rhs: Vec<f64> = jac.gt.iter().zip(&gw_f).map(|(a, b)| -(a + b)).collect();
    let lu = Lu::factor(&jac.gz)?;
    Ok(lu.solve(&rhs))
}

pub(crate) fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

/// Second-order one-sided derivative (−3J₀ + 4J₁ − J₂) / (2δ), with δ's sign
/// giving the stencil direction.
fn one_sided(j0: &Matrix, j1: &Matrix, j2: &Matrix, d: f64) -> Matrix {
    j0.scale(-3.0)
        .add(&j1.scale(4.0))
        .sub(j2)
        .scale(1.0 / (2.0 * d))
}
