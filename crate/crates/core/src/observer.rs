//! Observer synthesis for time-varying ODE plants.
//!
//! A plant `ẇ = k(t,w)` with output `z = h(t,w)` becomes an index-1 DAE by
//! treating the output as an algebraic constraint: the observer
//! `ŵ̇ = k(t,ŵ) + l(t,ẑ,z(t)), ẑ = h(t,ŵ)` is the DAE system with
//! `f = k + l` and `g = h(t,ŵ) − ẑ`. Since l(t,z,z) = 0, the plant state is
//! itself a solution, so a contraction certificate for the observer DAE
//! forces the estimate onto the plant trajectory exponentially.

use std::sync::Arc;

use crate::dae::{
    consistent_init, hermite_basis, integrate, DaeSystem, JacobianBundle, Trajectory,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A time-varying ODE plant with an output map.
pub trait PlantOde: Send + Sync {
    fn state_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn name(&self) -> &str;

    /// ẇ = k(t, w); writes into `out` (length n).
    fn dynamics(&self, t: f64, w: &[f64], out: &mut [f64]) -> Result<()>;

    /// z = h(t, w); writes into `out` (length m).
    fn output(&self, t: f64, w: &[f64], out: &mut [f64]) -> Result<()>;

    /// ∂k/∂w; the default is a central difference.
    fn dynamics_jacobian(&self, t: f64, w: &[f64]) -> Result<Matrix> {
        let n = self.state_dim();
        fd_jacobian(n, n, w, |x, out| self.dynamics(t, x, out))
    }

    /// ∂h/∂w; the default is a central difference.
    fn output_jacobian(&self, t: f64, w: &[f64]) -> Result<Matrix> {
        fd_jacobian(self.output_dim(), self.state_dim(), w, |x, out| {
            self.output(t, x, out)
        })
    }

    /// d/dt of ∂h/∂w along a trajectory, when known in closed form.
    fn output_jacobian_dt(&self, t: f64, w: &[f64], wdot: &[f64]) -> Option<Matrix> {
        let _ = (t, w, wdot);
        None
    }
}

fn fd_jacobian(
    rows: usize,
    cols: usize,
    x: &[f64],
    eval: impl Fn(&[f64], &mut [f64]) -> Result<()>,
) -> Result<Matrix> {
    let mut jac = Matrix::zeros(rows, cols);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; rows];
    let mut fm = vec![0.0; rows];
    for k in 0..cols {
        let h = 1e-6 * x[k].abs().max(1.0);
        xp[k] = x[k] + h;
        eval(&xp, &mut fp)?;
        xp[k] = x[k] - h;
        eval(&xp, &mut fm)?;
        xp[k] = x[k];
        for i in 0..rows {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Output-error injection l(t, ẑ, z) with l(t, z, z) = 0.
pub trait Injection: Send + Sync {
    fn apply(&self, t: f64, z_hat: &[f64], z: &[f64], out: &mut [f64]) -> Result<()>;

    /// ∂l/∂ẑ, the B-block of the observer DAE.
    fn jacobian_zhat(&self, t: f64, z_hat: &[f64], z: &[f64]) -> Result<Matrix>;
}

struct LuenbergerInjection<F: Fn(f64) -> Matrix + Send + Sync> {
    kappa: F,
}

impl<F: Fn(f64) -> Matrix + Send + Sync> Injection for LuenbergerInjection<F> {
    fn apply(&self, t: f64, z_hat: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        let gain = (self.kappa)(t);
        let diff: Vec<f64> = z_hat.iter().zip(z).map(|(a, b)| a - b).collect();
        out.copy_from_slice(&gain.mat_vec(&diff));
        Ok(())
    }

    fn jacobian_zhat(&self, t: f64, _z_hat: &[f64], _z: &[f64]) -> Result<Matrix> {
        Ok((self.kappa)(t))
    }
}

/// Luenberger injection l(t, ẑ, z) = κ(t)·(ẑ − z) with ∂l/∂ẑ = κ(t).
pub fn luenberger_injection(
    kappa: impl Fn(f64) -> Matrix + Send + Sync + 'static,
) -> Arc<dyn Injection> {
    Arc::new(LuenbergerInjection { kappa })
}

/// A plant paired with an injection; construction verifies l(t,z,z) = 0 at
/// pseudo-random points.
#[derive(Clone)]
pub struct ObserverSpec {
    pub plant: Arc<dyn PlantOde>,
    pub injection: Arc<dyn Injection>,
}

impl ObserverSpec {
    pub fn new(plant: Arc<dyn PlantOde>, injection: Arc<dyn Injection>) -> Result<Self> {
        let n = plant.state_dim();
        let m = plant.output_dim();
        let gain = injection.jacobian_zhat(0.0, &vec![0.0; m], &vec![0.0; m])?;
        if gain.rows() != n || gain.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "injection Jacobian is {}x{}, expected {n}x{m}",
                gain.rows(),
                gain.cols()
            )));
        }
        // l(t, z, z) must vanish identically; spot-check deterministically.
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        let mut out = vec![0.0; n];
        for _ in 0..20 {
            let t = next().abs() * 5.0;
            let z: Vec<f64> = (0..m).map(|_| next()).collect();
            injection.apply(t, &z, &z, &mut out)?;
            if out.iter().any(|v| v.abs() > 1e-12) {
                return Err(Error::InvalidInput(
                    "injection does not vanish at z_hat = z".into(),
                ));
            }
        }
        Ok(ObserverSpec { plant, injection })
    }
}

/// Measured output signal driving an observer.
#[derive(Clone)]
pub enum MeasuredSignal {
    /// Interpolated from a simulated plant trajectory.
    Plant(Arc<PlantSignal>),
    /// Arbitrary callable z(t).
    Callable(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>),
}

impl MeasuredSignal {
    fn at(&self, t: f64) -> Result<Vec<f64>> {
        match self {
            MeasuredSignal::Plant(sig) => sig.output(t),
            MeasuredSignal::Callable(f) => Ok(f(t)),
        }
    }
}

/// Cubic-Hermite view of a simulated plant trajectory, exposing its output.
pub struct PlantSignal {
    plant: Arc<dyn PlantOde>,
    traj: Trajectory,
    slopes: Vec<f64>,
}

impl PlantSignal {
    pub fn new(plant: Arc<dyn PlantOde>, traj: Trajectory) -> Result<Self> {
        if traj.state_dim() != plant.state_dim() || traj.alg_dim() != 0 {
            return Err(Error::DimensionMismatch(
                "plant trajectory must have the plant's state dimension and no algebraic part"
                    .into(),
            ));
        }
        let n = plant.state_dim();
        let mut slopes = vec![0.0; n * traj.len()];
        let mut buf = vec![0.0; n];
        for k in 0..traj.len() {
            plant.dynamics(traj.t(k), traj.w(k), &mut buf)?;
            slopes[k * n..(k + 1) * n].copy_from_slice(&buf);
        }
        Ok(PlantSignal {
            plant,
            traj,
            slopes,
        })
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    /// Interpolated plant state at time t.
    pub fn state(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.traj.state_dim();
        let i = self.traj.segment_for(t)?;
        let t0 = self.traj.t(i);
        let t1 = self.traj.t(i + 1);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = hermite_basis(s);
        let w0 = self.traj.w(i);
        let w1 = self.traj.w(i + 1);
        let d0 = &self.slopes[i * n..(i + 1) * n];
        let d1 = &self.slopes[(i + 1) * n..(i + 2) * n];
        Ok((0..n)
            .map(|k| h00 * w0[k] + h10 * h * d0[k] + h01 * w1[k] + h11 * h * d1[k])
            .collect())
    }

    /// Measured output z(t) = h(t, w(t)).
    pub fn output(&self, t: f64) -> Result<Vec<f64>> {
        let w = self.state(t)?;
        let mut z = vec![0.0; self.plant.output_dim()];
        self.plant.output(t, &w, &mut z)?;
        Ok(z)
    }
}

/// The observer as an index-1 DAE driven by a measured signal.
pub struct ObserverDae {
    spec: ObserverSpec,
    signal: MeasuredSignal,
    name: String,
}

impl ObserverDae {
    pub fn spec(&self) -> &ObserverSpec {
        &self.spec
    }
}

/// Build the observer DAE `f = k(t,ŵ) + l(t,ẑ,z(t)), g = h(t,ŵ) − ẑ`.
///
/// Its coefficient matrices realize the observer identifications:
/// A = ∂k/∂ŵ, B = ∂l/∂ẑ, F = −I (exactly), D = −γI + ∂h/∂ŵ·∂l/∂ẑ.
pub fn build_observer_dae(spec: ObserverSpec, signal: MeasuredSignal) -> ObserverDae {
    let name = format!("observer({})", spec.plant.name());
    ObserverDae { spec, signal, name }
}

impl DaeSystem for ObserverDae {
    fn state_dim(&self) -> usize {
        self.spec.plant.state_dim()
    }

    fn alg_dim(&self) -> usize {
        self.spec.plant.output_dim()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn f(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        self.spec.plant.dynamics(t, w, out)?;
        let measured = self.signal.at(t)?;
        let mut inj = vec![0.0; self.state_dim()];
        self.spec.injection.apply(t, z, &measured, &mut inj)?;
        for (o, i) in out.iter_mut().zip(&inj) {
            *o += i;
        }
        Ok(())
    }

    fn g(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        self.spec.plant.output(t, w, out)?;
        for (o, zi) in out.iter_mut().zip(z) {
            *o -= zi;
        }
        Ok(())
    }

    fn jacobians(&self, t: f64, w: &[f64], z: &[f64]) -> Result<JacobianBundle> {
        let m = self.alg_dim();
        let measured = self.signal.at(t)?;
        let fw = self.spec.plant.dynamics_jacobian(t, w)?;
        let fz = self.spec.injection.jacobian_zhat(t, z, &measured)?;
        let gw = self.spec.plant.output_jacobian(t, w)?;
        let gz = Matrix::identity(m).scale(-1.0);
        // ∂g/∂t = ∂h/∂t at fixed ŵ; central difference (exact zero for
        // time-invariant output maps).
        let ht = 1e-6 * t.abs().max(1.0);
        let mut hp = vec![0.0; m];
        let mut hm = vec![0.0; m];
        self.spec.plant.output(t + ht, w, &mut hp)?;
        self.spec.plant.output(t - ht, w, &mut hm)?;
        let gt = hp
            .iter()
            .zip(&hm)
            .map(|(a, b)| (a - b) / (2.0 * ht))
            .collect();
        Ok(JacobianBundle { fw, fz, gw, gz, gt })
    }

    fn constraint_jacobian_z(&self, _t: f64, _w: &[f64], _z: &[f64]) -> Result<Matrix> {
        Ok(Matrix::identity(self.alg_dim()).scale(-1.0))
    }

    fn gjac_dt_closed_form(
        &self,
        t: f64,
        w: &[f64],
        _z: &[f64],
        wdot: &[f64],
        _zdot: &[f64],
    ) -> Option<(Matrix, Matrix)> {
        let m = self.alg_dim();
        self.spec
            .plant
            .output_jacobian_dt(t, w, wdot)
            .map(|dgw| (dgw, Matrix::zeros(m, m)))
    }

    fn gz_is_constant(&self) -> bool {
        true
    }
}

/// Wrap a plant as an ODE-only [`DaeSystem`] (m = 0) for integration.
pub struct PlantAsDae {
    plant: Arc<dyn PlantOde>,
}

impl PlantAsDae {
    pub fn new(plant: Arc<dyn PlantOde>) -> Self {
        PlantAsDae { plant }
    }
}

impl DaeSystem for PlantAsDae {
    fn state_dim(&self) -> usize {
        self.plant.state_dim()
    }
    fn alg_dim(&self) -> usize {
        0
    }
    fn name(&self) -> &str {
        self.plant.name()
    }
    fn f(&self, t: f64, w: &[f64], _z: &[f64], out: &mut [f64]) -> Result<()> {
        self.plant.dynamics(t, w, out)
    }
    fn g(&self, _t: f64, _w: &[f64], _z: &[f64], _out: &mut [f64]) -> Result<()> {
        Ok(())
    }
    fn jacobians(&self, t: f64, w: &[f64], _z: &[f64]) -> Result<JacobianBundle> {
        Ok(JacobianBundle {
            fw: self.plant.dynamics_jacobian(t, w)?,
            fz: Matrix::zeros(self.plant.state_dim(), 0),
            gw: Matrix::zeros(0, self.plant.state_dim()),
            gz: Matrix::zeros(0, 0),
            gt: Vec::new(),
        })
    }
}

/// Result of a plant/observer co-simulation.
pub struct ObserverRun {
    pub plant: Trajectory,
    pub observer: Trajectory,
    /// (t, ‖ŵ − w‖₂) at every shared sample.
    pub error_norms: Vec<(f64, f64)>,
    /// Per-coordinate errors ŵᵢ − wᵢ, one row per sample.
    pub error_components: Vec<Vec<f64>>,
}

impl ObserverRun {
    /// CSV export: `t,err_norm,e1..en`, 17 significant digits.
    pub fn write_error_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.plant.state_dim();
        write!(out, "t,err_norm")?;
        for i in 1..=n {
            write!(out, ",e{i}")?;
        }
        writeln!(out)?;
        for (k, &(t, norm)) in self.error_norms.iter().enumerate() {
            write!(out, "{t:.16e},{norm:.16e}")?;
            for v in &self.error_components[k] {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Simulate the plant, then the observer driven by the plant's output, and
/// return both trajectories with the estimation-error series.
pub fn simulate_observer(
    spec: &ObserverSpec,
    w0: &[f64],
    w_hat0: &[f64],
    t0: f64,
    t_end: f64,
    step: f64,
) -> Result<ObserverRun> {
    let n = spec.plant.state_dim();
    if w0.len() != n || w_hat0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "plant state dimension is {n}, got initial conditions of lengths {} and {}",
            w0.len(),
            w_hat0.len()
        )));
    }
    let plant_dae = PlantAsDae::new(spec.plant.clone());
    let plant_traj = integrate(&plant_dae, t0, w0, &[], t_end, step)?;
    if plant_traj.nonfinite {
        return Err(Error::InvalidInput(format!(
            "plant trajectory left floating-point range at t = {:.6}",
            plant_traj.t_end()
        )));
    }
    let signal = PlantSignal::new(spec.plant.clone(), plant_traj.clone())?;
    let observer_dae = build_observer_dae(spec.clone(), MeasuredSignal::Plant(Arc::new(signal)));

    let mut z_guess = vec![0.0; spec.plant.output_dim()];
    spec.plant.output(t0, w_hat0, &mut z_guess)?;
    let z0 = consistent_init(&observer_dae, t0, w_hat0, &z_guess)?;
    let observer_traj = integrate(&observer_dae, t0, w_hat0, &z0, t_end, step)?;

    let shared = plant_traj.len().min(observer_traj.len());
    let mut error_norms = Vec::with_capacity(shared);
    let mut error_components = Vec::with_capacity(shared);
    for k in 0..shared {
        let e: Vec<f64> = observer_traj
            .w(k)
            .iter()
            .zip(plant_traj.w(k))
            .map(|(a, b)| a - b)
            .collect();
        let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        error_norms.push((plant_traj.t(k), norm));
        error_components.push(e);
    }
    Ok(ObserverRun {
        plant: plant_traj,
        observer: observer_traj,
        error_norms,
        error_components,
    })
}
