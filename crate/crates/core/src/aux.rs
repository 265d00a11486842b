//! The variational DAE, its reduced system, and the auxiliary linear ODE
//! whose trajectories encapsulate the variational solutions.
//!
//! Along a base trajectory the variational displacement (ξ, ν) obeys
//! `ξ̇ = A ξ + B ν, 0 = gw ξ + gz ν`. The auxiliary ODE replaces the
//! constraint with `ν̇ = −F⁻¹(C ξ + D ν)` where
//!
//! ```text
//! A = ∂f/∂w          C = γ ∂g/∂w + d/dt(∂g/∂w) + ∂g/∂w ∂f/∂w
//! B = ∂f/∂z          D = γ ∂g/∂z + d/dt(∂g/∂z) + ∂g/∂w ∂f/∂z
//! F = ∂g/∂z
//! ```
//!
//! which forces q := gw ξ + gz ν to decay like e^{−γt}; the q ≡ 0 slice
//! reproduces the variational dynamics exactly.

use std::sync::Arc;

use crate::dae::{JacobianBundle, TrajectoryInterpolant};
use crate::error::{Error, Result};
use crate::linalg::{induced_norm, invert, Matrix, NormKind};

/// Coefficient matrices of the auxiliary ODE at one trajectory point.
#[derive(Debug, Clone)]
pub struct CoefficientBundle {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    /// F = ∂g/∂z (kept separately so consumers can re-check D and q).
    pub f: Matrix,
    pub gamma: f64,
    pub t: f64,
    /// The raw first partials the bundle was assembled from.
    pub jac: JacobianBundle,
}

/// Assemble the auxiliary-ODE coefficients at time t along the trajectory.
pub fn coefficient_matrices(
    interp: &TrajectoryInterpolant,
    t: f64,
    gamma: f64,
) -> Result<CoefficientBundle> {
    if gamma < 0.0 {
        return Err(Error::InvalidInput(format!(
            "gamma must be non-negative, got {gamma}"
        )));
    }
    let jac = interp.jacobians_at(t)?;
    let (dgw, dgz) = interp.gjac_time_derivatives(t)?;
    let c = jac.gw.scale(gamma).add(&dgw).add(&jac.gw.matmul(&jac.fw));
    let d = jac.gz.scale(gamma).add(&dgz).add(&jac.gw.matmul(&jac.fz));
    Ok(CoefficientBundle {
        a: jac.fw.clone(),
        b: jac.fz.clone(),
        c,
        d,
        f: jac.gz.clone(),
        gamma,
        t,
        jac,
    })
}

/// The (n+m)×(n+m) auxiliary system matrix [[A, B], [−F⁻¹C, −F⁻¹D]].
pub fn aux_matrix(bundle: &CoefficientBundle) -> Result<Matrix> {
    if bundle.f.rows() == 0 {
        return Ok(bundle.a.clone());
    }
    let finv = invert(&bundle.f)?;
    let lower_left = finv.matmul(&bundle.c).scale(-1.0);
    let lower_right = finv.matmul(&bundle.d).scale(-1.0);
    Ok(Matrix::from_blocks(
        &bundle.a,
        &bundle.b,
        &lower_left,
        &lower_right,
    ))
}

/// Reduced-system matrix A − B F⁻¹ gw governing ξ on the constraint.
pub fn reduced_jacobian(bundle: &CoefficientBundle) -> Result<Matrix> {
    if bundle.f.rows() == 0 {
        return Ok(bundle.a.clone());
    }
    let finv = invert(&bundle.f)?;
    Ok(bundle.a.sub(&bundle.b.matmul(&finv).matmul(&bundle.jac.gw)))
}

/// A state- and time-dependent metric matrix callable.
pub type MetricFn = Arc<dyn Fn(&[f64], &[f64], f64) -> Matrix + Send + Sync>;

/// The coordinate change M(w,z,t) of the generalized Jacobian.
#[derive(Clone)]
pub enum MetricTransform {
    Identity,
    /// M = e^{−σt}·I. Unbounded inverse, but ‖M‖‖M⁻¹‖ = 1 exactly.
    ExpScale(f64),
    /// Arbitrary user matrix of the stacked dimension n+m; Ṁ is obtained by
    /// differencing along the trajectory.
    UserMatrix(MetricFn),
}

impl std::fmt::Debug for MetricTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

impl MetricTransform {
    pub fn describe(&self) -> String {
        match self {
            MetricTransform::Identity => "identity".into(),
            MetricTransform::ExpScale(sigma) => format!("expscale(sigma={sigma})"),
            MetricTransform::UserMatrix(_) => "user-matrix".into(),
        }
    }

    /// ‖M‖_p ‖M⁻¹‖_p at a point. Scalar scalings give exactly 1.
    pub fn product_norm(&self, w: &[f64], z: &[f64], t: f64, p: NormKind) -> Result<f64> {
        match self {
            MetricTransform::Identity | MetricTransform::ExpScale(_) => Ok(1.0),
            MetricTransform::UserMatrix(m) => {
                let mat = m(w, z, t);
                let inv = invert(&mat)?;
                Ok(induced_norm(&mat, p) * induced_norm(&inv, p))
            }
        }
    }
}

/// Generalized Jacobian J_M = Ṁ M⁻¹ + M [[A,B],[−F⁻¹C,−F⁻¹D]] M⁻¹ at time t.
pub fn generalized_jacobian(
    interp: &TrajectoryInterpolant,
    t: f64,
    gamma: f64,
    metric: &MetricTransform,
) -> Result<Matrix> {
    let bundle = coefficient_matrices(interp, t, gamma)?;
    let g = aux_matrix(&bundle)?;
    match metric {
        MetricTransform::Identity => Ok(g),
        MetricTransform::ExpScale(sigma) => {
            // Ṁ M⁻¹ = −σ I and M commutes with everything.
            let mut shifted = g;
            for i in 0..shifted.rows() {
                shifted[(i, i)] -= sigma;
            }
            Ok(shifted)
        }
        MetricTransform::UserMatrix(mfun) => {
            let (w, z) = interp.state_at(t)?;
            let dim = g.rows();
            let m = mfun(&w, &z, t);
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "metric matrix is {}x{}, expected {dim}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
            let minv = invert(&m)?;
            let mdot = metric_derivative(interp, mfun, t)?;
            Ok(mdot.matmul(&minv).add(&m.matmul(&g).matmul(&minv)))
        }
    }
}

/// Ṁ along the trajectory by second-order differencing (δ = 1e-5).
fn metric_derivative(interp: &TrajectoryInterpolant, mfun: &MetricFn, t: f64) -> Result<Matrix> {
    let d = crate::dae::GJAC_DT_DELTA;
    let lo = interp.t_start();
    let hi = interp.t_end();
    if hi - lo < 2.0 * d {
        return Err(Error::InvalidInput(
            "trajectory span too short for metric differencing".into(),
        ));
    }
    let at = |tau: f64| -> Result<Matrix> {
        let (w, z) = interp.state_at(tau)?;
        Ok(mfun(&w, &z, tau))
    };
    if t - d >= lo && t + d <= hi {
        Ok(at(t + d)?.sub(&at(t - d)?).scale(1.0 / (2.0 * d)))
    } else if t - d < lo {
        let j0 = at(t)?;
        let j1 = at(t + d)?;
        let j2 = at(t + 2.0 * d)?;
        Ok(j0
            .scale(-3.0)
            .add(&j1.scale(4.0))
            .sub(&j2)
            .scale(1.0 / (2.0 * d)))
    } else {
        let j0 = at(t)?;
        let j1 = at(t - d)?;
        let j2 = at(t - 2.0 * d)?;
        Ok(j0
            .scale(-3.0)
            .add(&j1.scale(4.0))
            .sub(&j2)
            .scale(-1.0 / (2.0 * d)))
    }
}

/// Variational or auxiliary displacement at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearState {
    pub xi: Vec<f64>,
    pub nu: Vec<f64>,
}

/// A sampled path of linear displacements along a base trajectory.
#[derive(Debug, Clone)]
pub struct LinearPath {
    n: usize,
    m: usize,
    times: Vec<f64>,
    xis: Vec<f64>,
    nus: Vec<f64>,
}

impl LinearPath {
    pub(crate) fn with_capacity(n: usize, m: usize, len: usize) -> Self {
        LinearPath {
            n,
            m,
            times: Vec::with_capacity(len),
            xis: Vec::with_capacity(n * len),
            nus: Vec::with_capacity(m * len),
        }
    }

    pub(crate) fn push(&mut self, t: f64, xi: &[f64], nu: &[f64]) {
        self.times.push(t);
        self.xis.extend_from_slice(xi);
        self.nus.extend_from_slice(nu);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn xi(&self, k: usize) -> &[f64] {
        &self.xis[k * self.n..(k + 1) * self.n]
    }

    pub fn nu(&self, k: usize) -> &[f64] {
        &self.nus[k * self.m..(k + 1) * self.m]
    }

    pub fn state(&self, k: usize) -> LinearState {
        LinearState {
            xi: self.xi(k).to_vec(),
            nu: self.nu(k).to_vec(),
        }
    }

    /// Stacked (ξ; ν) vector at sample k.
    pub fn stacked(&self, k: usize) -> Vec<f64> {
        let mut v = self.xi(k).to_vec();
        v.extend_from_slice(self.nu(k));
        v
    }

    /// Largest ∞-distance between two paths sampled on the same grid.
    pub fn sup_distance(&self, other: &LinearPath) -> f64 {
        assert_eq!(self.len(), other.len());
        let mut sup = 0.0_f64;
        for k in 0..self.len() {
            for (a, b) in self.xi(k).iter().zip(other.xi(k)) {
                sup = sup.max((a - b).abs());
            }
            for (a, b) in self.nu(k).iter().zip(other.nu(k)) {
                sup = sup.max((a - b).abs());
            }
        }
        sup
    }

    /// CSV export: header `t,xi1..,nu1..`, 17 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t")?;
        for i in 1..=self.n {
            write!(out, ",xi{i}")?;
        }
        for j in 1..=self.m {
            write!(out, ",nu{j}")?;
        }
        writeln!(out)?;
        for k in 0..self.len() {
            write!(out, "{:.16e}", self.t(k))?;
            for v in self.xi(k) {
                write!(out, ",{v:.16e}")?;
            }
            for v in self.nu(k) {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// RK4 for ẋ = G(t)x over a fixed sample grid, with midpoint coefficients.
/// Returns the state at every grid time.
pub(crate) fn rk4_linear_path(
    times: &[f64],
    x0: Vec<f64>,
    mut matrix_at: impl FnMut(f64) -> Result<Matrix>,
) -> Result<Vec<Vec<f64>>> {
    let mut states = Vec::with_capacity(times.len());
    let mut x = x0;
    states.push(x.clone());
    if times.len() < 2 {
        return Ok(states);
    }
    let mut g_left = matrix_at(times[0])?;
    for k in 0..times.len() - 1 {
        let t0 = times[k];
        let t1 = times[k + 1];
        let h = t1 - t0;
        let g_mid = matrix_at(t0 + 0.5 * h)?;
        let g_right = matrix_at(t1)?;

        let k1 = g_left.mat_vec(&x);
        let x2: Vec<f64> = x
            .iter()
            .zip(&k1)
            .map(|(xi, ki)| xi + 0.5 * h * ki)
            .collect();
        let k2 = g_mid.mat_vec(&x2);
        let x3: Vec<f64> = x
            .iter()
            .zip(&k2)
            .map(|(xi, ki)| xi + 0.5 * h * ki)
            .collect();
        let k3 = g_mid.mat_vec(&x3);
        let x4: Vec<f64> = x.iter().zip(&k3).map(|(xi, ki)| xi + h * ki).collect();
        let k4 = g_right.mat_vec(&x4);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        states.push(x.clone());
        g_left = g_right;
    }
    Ok(states)
}

/// Integrate the variational system along the base trajectory: ξ under the
/// reduced Jacobian, ν recovered algebraically as −F⁻¹ gw ξ so the path
/// stays exactly on the constraint manifold.
///
/// `nu0` is accepted for symmetry with the auxiliary integrator but is
/// projected onto the constraint before use.
pub fn integrate_variational(
    interp: &TrajectoryInterpolant,
    xi0: &[f64],
    nu0: &[f64],
) -> Result<LinearPath> {
    let n = interp.trajectory().state_dim();
    let m = interp.trajectory().alg_dim();
    if xi0.len() != n || nu0.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "expected (xi, nu) of dims ({n}, {m}), got ({}, {})",
            xi0.len(),
            nu0.len()
        )));
    }
    let times = interp.trajectory().times();
    let xi_path = rk4_linear_path(times, xi0.to_vec(), |t| {
        let jac = interp.jacobians_at(t)?;
        if m == 0 {
            return Ok(jac.fw);
        }
        let finv = invert(&jac.gz)?;
        Ok(jac.fw.sub(&jac.fz.matmul(&finv).matmul(&jac.gw)))
    })?;

    let mut path = LinearPath::with_capacity(n, m, times.len());
    for (k, &t) in times.iter().enumerate() {
        let xi = &xi_path[k];
        if m == 0 {
            path.push(t, xi, &[]);
            continue;
        }
        let jac = interp.jacobians_at(t)?;
        let finv = invert(&jac.gz)?;
        let nu = finv.matmul(&jac.gw).mat_vec(xi);
        let nu: Vec<f64> = nu.into_iter().map(|v| -v).collect();
        path.push(t, xi, &nu);
    }
    Ok(path)
}

/// Integrate the auxiliary ODE from an arbitrary (ξ0, ν0) — no constraint is
/// imposed; the q-coordinate decays like e^{−γ(t−t0)} instead.
pub fn integrate_aux(
    interp: &TrajectoryInterpolant,
    gamma: f64,
    xi0: &[f64],
    nu0: &[f64],
) -> Result<LinearPath> {
    let n = interp.trajectory().state_dim();
    let m = interp.trajectory().alg_dim();
    if xi0.len() != n || nu0.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "expected (xi, nu) of dims ({n}, {m}), got ({}, {})",
            xi0.len(),
            nu0.len()
        )));
    }
    let mut x0 = xi0.to_vec();
    x0.extend_from_slice(nu0);
    let times = interp.trajectory().times();
    let states = rk4_linear_path(times, x0, |t| {
        let bundle = coefficient_matrices(interp, t, gamma)?;
        aux_matrix(&bundle)
    })?;
    let mut path = LinearPath::with_capacity(n, m, times.len());
    for (k, &t) in times.iter().enumerate() {
        path.push(t, &states[k][..n], &states[k][n..]);
    }
    Ok(path)
}

/// q = gw ξ + gz ν, the decaying coordinate of the auxiliary system.
pub fn q_value(bundle: &CoefficientBundle, state: &LinearState) -> Vec<f64> {
    let mut q = bundle.jac.gw.mat_vec(&state.xi);
    let fz_nu = bundle.f.mat_vec(&state.nu);
    for (qi, vi) in q.iter_mut().zip(&fz_nu) {
        *qi += vi;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dae::{integrate, DslDae};

    const EXAM1: &str = "n=1 m=1\nf1 = -w1 + exp(-3*t)*z1\ng1 = exp(3*t)*w1 + z1";
    const EXAM3: &str = "n=1 m=1\nf1 = -2*exp(t)*z1\ng1 = exp(-t)*w1 - z1";

    fn exam1_traj(t_end: f64) -> (DslDae, crate::dae::Trajectory) {
        let sys = DslDae::parse(EXAM1, "exam1").unwrap();
        let traj = integrate(&sys, 0.0, &[1.0], &[-1.0], t_end, 1e-3).unwrap();
        (sys, traj)
    }

    fn exam3_traj(t_end: f64) -> (DslDae, crate::dae::Trajectory) {
        let sys = DslDae::parse(EXAM3, "exam3").unwrap();
        let traj = integrate(&sys, 0.0, &[1.0], &[1.0], t_end, 1e-3).unwrap();
        (sys, traj)
    }

    #[test]
    fn coefficients_exam3_match_hand_values() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let b = coefficient_matrices(&interp, 0.0, 4.0).unwrap();
        assert!(b.a[(0, 0)].abs() < 1e-9);
        assert!((b.b[(0, 0)] + 2.0).abs() < 1e-9);
        assert!((b.f[(0, 0)] + 1.0).abs() < 1e-9);
        assert!((b.c[(0, 0)] - 3.0).abs() < 1e-6);
        assert!((b.d[(0, 0)] + 6.0).abs() < 1e-6);
    }

    #[test]
    fn aux_matrix_exam3_gamma_one_and_four() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        for &t in &[0.0, 0.4, 1.0] {
            // γ=1 closes to ẇ = −2e^t z, ż = −3z.
            let g1 = aux_matrix(&coefficient_matrices(&interp, t, 1.0).unwrap()).unwrap();
            assert!((g1[(0, 1)] + 2.0 * t.exp()).abs() < 1e-6);
            assert!(g1[(1, 0)].abs() < 1e-6);
            assert!((g1[(1, 1)] + 3.0).abs() < 1e-6);
            // γ=4 closes to ẇ = −2e^t z, ż = 3e^{−t}w − 6z.
            let g4 = aux_matrix(&coefficient_matrices(&interp, t, 4.0).unwrap()).unwrap();
            assert!((g4[(1, 0)] - 3.0 * (-t).exp()).abs() < 1e-6);
            assert!((g4[(1, 1)] + 6.0).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_bundle_gives_zero_aux_matrix() {
        let sys = DslDae::parse("n=1 m=1\nf1 = 0\ng1 = z1 - w1", "zero").unwrap();
        let traj = integrate(&sys, 0.0, &[0.0], &[0.0], 1.0, 1e-2).unwrap();
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let g = aux_matrix(&coefficient_matrices(&interp, 0.5, 0.0).unwrap()).unwrap();
        // f ≡ 0 and γ = 0 leave only the gw·fw and d/dt terms, all zero here.
        assert!(g.max_abs() < 1e-9);
    }

    #[test]
    fn time_invariant_coefficients_reduce_to_gamma_terms() {
        let sys = DslDae::parse("n=1 m=1\nf1 = 0\ng1 = z1 - 2*w1", "g-only").unwrap();
        let traj = integrate(&sys, 0.0, &[1.0], &[2.0], 1.0, 1e-2).unwrap();
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let b = coefficient_matrices(&interp, 0.5, 3.0).unwrap();
        assert!((b.c[(0, 0)] + 6.0).abs() < 1e-9); // γ·gw = 3·(−2)
        assert!((b.d[(0, 0)] - 3.0).abs() < 1e-9); // γ·gz = 3·1
    }

    #[test]
    fn reduced_jacobian_is_minus_two_for_both_examples() {
        for (sys, traj) in [exam1_traj(1.0), exam3_traj(1.0)] {
            let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
            for &t in &[0.0, 0.31, 0.9] {
                let b = coefficient_matrices(&interp, t, 0.0).unwrap();
                let rj = reduced_jacobian(&b).unwrap();
                assert!((rj[(0, 0)] + 2.0).abs() < 1e-9, "t={t}: {}", rj[(0, 0)]);
            }
        }
    }

    #[test]
    fn reduced_jacobian_equals_a_when_b_vanishes() {
        let sys = DslDae::parse("n=1 m=1\nf1 = -5*w1\ng1 = z1 - w1", "b0").unwrap();
        let traj = integrate(&sys, 0.0, &[1.0], &[1.0], 0.5, 1e-2).unwrap();
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let b = coefficient_matrices(&interp, 0.2, 0.0).unwrap();
        let rj = reduced_jacobian(&b).unwrap();
        assert!((rj[(0, 0)] - b.a[(0, 0)]).abs() < 1e-12);
    }

    #[test]
    fn identity_metric_matches_aux_matrix() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let g = aux_matrix(&coefficient_matrices(&interp, 0.5, 1.0).unwrap()).unwrap();
        let jm = generalized_jacobian(&interp, 0.5, 1.0, &MetricTransform::Identity).unwrap();
        assert!(g.sub(&jm).max_abs() == 0.0);
    }

    #[test]
    fn expscale_shifts_every_measure_by_sigma() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let sigma = 0.75;
        for &t in &[0.0, 0.3, 0.99] {
            let g = generalized_jacobian(&interp, t, 1.0, &MetricTransform::Identity).unwrap();
            let jm =
                generalized_jacobian(&interp, t, 1.0, &MetricTransform::ExpScale(sigma)).unwrap();
            for p in [NormKind::One, NormKind::Two, NormKind::Inf] {
                let mu_g = crate::linalg::matrix_measure(&g, p).unwrap();
                let mu_m = crate::linalg::matrix_measure(&jm, p).unwrap();
                assert!((mu_m - (mu_g - sigma)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn user_matrix_expscale_agrees_with_builtin() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let sigma = 1.0;
        let user = MetricTransform::UserMatrix(Arc::new(move |_w: &[f64], _z: &[f64], t: f64| {
            Matrix::identity(2).scale((-sigma * t).exp())
        }));
        for &t in &[0.0, 0.5, 1.0] {
            let a =
                generalized_jacobian(&interp, t, 1.0, &MetricTransform::ExpScale(sigma)).unwrap();
            let b = generalized_jacobian(&interp, t, 1.0, &user).unwrap();
            assert!(a.sub(&b).max_abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn metric_product_is_one_for_scalings() {
        let m = MetricTransform::ExpScale(2.0);
        assert_eq!(
            m.product_norm(&[0.0], &[0.0], 5.0, NormKind::Two).unwrap(),
            1.0
        );
    }

    #[test]
    fn variational_exam1_closed_form() {
        let (sys, traj) = exam1_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let path = integrate_variational(&interp, &[1.0], &[0.0]).unwrap();
        for k in (0..path.len()).step_by(100) {
            let t = path.t(k);
            assert!((path.xi(k)[0] - (-2.0 * t).exp()).abs() < 1e-6);
            assert!((path.nu(k)[0] + t.exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn variational_exam3_closed_form() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let path = integrate_variational(&interp, &[1.0], &[0.0]).unwrap();
        for k in (0..path.len()).step_by(100) {
            let t = path.t(k);
            assert!((path.xi(k)[0] - (-2.0 * t).exp()).abs() < 1e-6);
            assert!((path.nu(k)[0] - (-3.0 * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn variational_zero_start_stays_zero() {
        let (sys, traj) = exam1_traj(0.5);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let path = integrate_variational(&interp, &[0.0], &[0.0]).unwrap();
        for k in 0..path.len() {
            assert_eq!(path.xi(k)[0], 0.0);
            assert_eq!(path.nu(k)[0], 0.0);
        }
    }

    #[test]
    fn aux_exam30_limit_and_exam31_closed_form() {
        let (sys, traj) = exam3_traj(5.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let (w0, z0) = (2.0, 1.0);

        // γ=1: w(t) = z0 e^{−2t} + w0 − z0, z(t) = z0 e^{−3t}.
        let path = integrate_aux(&interp, 1.0, &[w0], &[z0]).unwrap();
        for k in (0..path.len()).step_by(500) {
            let t = path.t(k);
            let we = z0 * (-2.0 * t).exp() + w0 - z0;
            let ze = z0 * (-3.0 * t).exp();
            assert!((path.xi(k)[0] - we).abs() < 1e-5, "t={t}");
            assert!((path.nu(k)[0] - ze).abs() < 1e-5);
        }
        // Does not converge to zero for w0 ≠ z0.
        let last = path.len() - 1;
        assert!((path.xi(last)[0] - (w0 - z0)).abs() < 1e-4);

        // γ=4: the displayed closed form.
        let path = integrate_aux(&interp, 4.0, &[w0], &[z0]).unwrap();
        for k in (0..path.len()).step_by(500) {
            let t = path.t(k);
            let we = (3.0 * w0 - 2.0 * z0) * (-2.0 * t).exp() - 2.0 * (w0 - z0) * (-3.0 * t).exp();
            let ze = (3.0 * w0 - 2.0 * z0) * (-3.0 * t).exp() - 3.0 * (w0 - z0) * (-4.0 * t).exp();
            assert!((path.xi(k)[0] - we).abs() < 1e-5, "t={t}");
            assert!((path.nu(k)[0] - ze).abs() < 1e-5);
        }
    }

    #[test]
    fn aux_zero_start_stays_zero() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let path = integrate_aux(&interp, 2.0, &[0.0], &[0.0]).unwrap();
        for k in 0..path.len() {
            assert_eq!(path.stacked(k), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn q_value_cases() {
        let (sys, traj) = exam3_traj(1.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let b = coefficient_matrices(&interp, 0.0, 1.0).unwrap();
        // On the variational constraint q = 0.
        let xi = 0.7;
        let nu = -(b.jac.gw.data()[0] * xi) / b.f.data()[0];
        let q = q_value(
            &b,
            &LinearState {
                xi: vec![xi],
                nu: vec![nu],
            },
        );
        assert!(q[0].abs() < 1e-12);
        // (w0, z0) = (1, 0): q0 = gw·1 + F·0 = e^{0} = 1.
        let q = q_value(
            &b,
            &LinearState {
                xi: vec![1.0],
                nu: vec![0.0],
            },
        );
        assert!((q[0] - 1.0).abs() < 1e-9);
        // Zero state.
        let q = q_value(
            &b,
            &LinearState {
                xi: vec![0.0],
                nu: vec![0.0],
            },
        );
        assert_eq!(q[0], 0.0);
    }

    #[test]
    fn q_decays_at_rate_gamma() {
        let (sys, traj) = exam3_traj(2.0);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        for &gamma in &[0.0, 1.0, 4.0] {
            let (xi0, nu0) = (0.8, -0.6);
            let path = integrate_aux(&interp, gamma, &[xi0], &[nu0]).unwrap();
            let b0 = coefficient_matrices(&interp, 0.0, gamma).unwrap();
            let q0 = q_value(&b0, &path.state(0))[0];
            for k in (0..path.len()).step_by(200) {
                let t = path.t(k);
                let b = coefficient_matrices(&interp, t, gamma).unwrap();
                let q = q_value(&b, &path.state(k))[0];
                let expect = q0 * (-gamma * t).exp();
                assert!(
                    (q - expect).abs() <= 1e-6 * (1.0 + q0.abs()),
                    "gamma={gamma} t={t}: q={q} expect={expect}"
                );
            }
        }
    }

    #[test]
    fn variational_embeds_in_aux_when_q0_zero() {
        let (sys, traj) = exam3_traj(1.5);
        let interp = TrajectoryInterpolant::new(&sys, &traj).unwrap();
        let xi0 = 1.3;
        // Project onto the constraint: ν0 = −F⁻¹ gw ξ0.
        let b = coefficient_matrices(&interp, 0.0, 2.0).unwrap();
        let finv = invert(&b.f).unwrap();
        let nu0 = -finv.matmul(&b.jac.gw).mat_vec(&[xi0])[0];
        let vari = integrate_variational(&interp, &[xi0], &[nu0]).unwrap();
        let aux = integrate_aux(&interp, 2.0, &[xi0], &[nu0]).unwrap();
        assert!(vari.sup_distance(&aux) < 1e-6);
    }
}
