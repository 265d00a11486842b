//! Numerical contraction certification.
//!
//! A certificate samples μ_p of the generalized Jacobian along computed
//! trajectories (or over a box grid for time-invariant systems) and compares
//! the supremum against a requested margin. The result is explicitly grid
//! evidence — trajectories from user-chosen initial conditions, μ at the
//! integrator's sample times — not a proof over all solutions.

pub mod grid;

use std::io::{self, Write};

use crate::aux::{
    aux_matrix, coefficient_matrices, generalized_jacobian, reduced_jacobian, LinearPath,
    MetricTransform,
};
use crate::dae::{consistent_init, integrate, DaeSystem, Trajectory, TrajectoryInterpolant};
use crate::error::{Error, Result};
use crate::linalg::{
    induced_norm, invert, matrix_measure, symmetric_eigen_max, vector_norm, Matrix, NormKind,
};

/// Caveat attached to every certificate.
pub const GRID_EVIDENCE_NOTE: &str =
    "verdict is grid evidence (sampled initial conditions and times), not a proof";

/// Escalating γ values tried when the caller does not fix one.
pub const GAMMA_LADDER: [f64; 6] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0];

/// One μ evaluation: trajectory (or grid-node) id, time, value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSample {
    pub trajectory: usize,
    pub t: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Certified {
        beta: f64,
    },
    NotCertified {
        reason: String,
        worst: Option<MuSample>,
    },
}

/// Grid of μ samples with the derived verdict.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub system: String,
    pub gamma: f64,
    pub p: NormKind,
    pub metric: String,
    pub beta_min: f64,
    pub samples: Vec<MuSample>,
    /// Largest sampled μ (+∞ when nothing could be sampled).
    pub mu_max: f64,
    /// Certified margin β = −mu_max.
    pub beta: f64,
    /// sup ‖M‖‖M⁻¹‖ over the grid (exactly 1 for scalar metrics).
    pub metric_product_max: f64,
    /// sup ‖[∂g/∂z]⁻¹ ∂g/∂w‖ over the grid; reported by the box path where
    /// it is the boundedness hypothesis of the reduced-system argument.
    pub gz_inv_gw_sup: Option<f64>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self.verdict, Verdict::Certified { .. })
    }

    /// Human-readable report.
    pub fn write_report<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "contraction certificate: {}", self.system)?;
        writeln!(out, "  gamma:               {}", self.gamma)?;
        writeln!(out, "  norm:                p = {}", self.p)?;
        writeln!(out, "  metric:              {}", self.metric)?;
        writeln!(out, "  requested margin:    beta_min = {}", self.beta_min)?;
        writeln!(out, "  mu samples:          {}", self.samples.len())?;
        writeln!(out, "  mu_max:              {:.9e}", self.mu_max)?;
        writeln!(out, "  beta (= -mu_max):    {:.9e}", self.beta)?;
        writeln!(
            out,
            "  sup ||M||*||M^-1||:  {:.9e}",
            self.metric_product_max
        )?;
        if let Some(sup) = self.gz_inv_gw_sup {
            writeln!(out, "  sup ||gz^-1*gw||:    {sup:.9e}")?;
        }
        match &self.verdict {
            Verdict::Certified { beta } => {
                writeln!(
                    out,
                    "  verdict:             CERTIFIED with beta = {beta:.9e}"
                )?;
            }
            Verdict::NotCertified { reason, worst } => {
                writeln!(out, "  verdict:             NOT CERTIFIED ({reason})")?;
                if let Some(w) = worst {
                    writeln!(
                        out,
                        "  worst sample:        trajectory {} at t = {:.6} with mu = {:.9e}",
                        w.trajectory, w.t, w.mu
                    )?;
                }
            }
        }
        for note in &self.notes {
            writeln!(out, "  note:                {note}")?;
        }
        writeln!(out, "  caveat:              {GRID_EVIDENCE_NOTE}")?;
        Ok(())
    }

    /// Machine-readable sample grid: `trajectory_id,t,mu`.
    pub fn write_mu_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "trajectory_id,t,mu")?;
        for s in &self.samples {
            writeln!(out, "{},{:.16e},{:.16e}", s.trajectory, s.t, s.mu)?;
        }
        Ok(())
    }
}

/// Options for trajectory-based certification.
#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub gamma: f64,
    pub p: NormKind,
    pub metric: MetricTransform,
    pub beta_min: f64,
    pub t_span: (f64, f64),
    pub step: f64,
    /// Reject metrics whose ‖M‖‖M⁻¹‖ exceeds this anywhere on the grid.
    pub metric_product_cap: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            gamma: 0.0,
            p: NormKind::One,
            metric: MetricTransform::Identity,
            beta_min: 0.5,
            t_span: (0.0, 10.0),
            step: 1e-3,
            metric_product_cap: 1e6,
        }
    }
}

/// Certify contraction along trajectories from the given initial set.
///
/// Each initial condition is made consistent, integrated over the span, and
/// μ_p(J_M) is evaluated at every stored sample. Certified iff the sampled
/// supremum satisfies mu_max ≤ −beta_min and the metric product stays under
/// its cap. Integration failures and singular Jacobians do not abort the
/// run; they yield a NotCertified verdict with the reason recorded.
pub fn certify_contraction(
    sys: &dyn DaeSystem,
    initial_set: &[(Vec<f64>, Vec<f64>)],
    opts: &CertifyOptions,
) -> Result<Certificate> {
    if initial_set.is_empty() {
        return Err(Error::InvalidInput("initial set is empty".into()));
    }
    if !opts.beta_min.is_finite() || opts.beta_min <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "beta_min must be positive, got {}",
            opts.beta_min
        )));
    }

    let mut notes = Vec::new();
    let mut failure: Option<String> = None;
    let mut trajectories: Vec<Trajectory> = Vec::new();
    for (idx, (w0, z_guess)) in initial_set.iter().enumerate() {
        let result = consistent_init(sys, opts.t_span.0, w0, z_guess)
            .and_then(|z0| integrate(sys, opts.t_span.0, w0, &z0, opts.t_span.1, opts.step));
        match result {
            Ok(traj) => {
                if traj.nonfinite {
                    let msg = format!(
                        "trajectory {idx} left floating-point range at t = {:.6}",
                        traj.t_end()
                    );
                    notes.push(msg.clone());
                    failure.get_or_insert(msg);
                }
                trajectories.push(traj);
            }
            Err(e) => {
                let msg = format!("trajectory {idx} failed: {e}");
                notes.push(msg.clone());
                failure.get_or_insert(msg);
            }
        }
    }

    let mut samples = Vec::new();
    let mut metric_product_max: f64 = 0.0;
    for (idx, traj) in trajectories.iter().enumerate() {
        let interp = TrajectoryInterpolant::new(sys, traj)?;
        let times = traj.times();
        let evaluated = grid::map(times.len(), |k| {
            let t = times[k];
            let jm = generalized_jacobian(&interp, t, opts.gamma, &opts.metric)?;
            let mu = matrix_measure(&jm, opts.p)?;
            let product = opts.metric.product_norm(traj.w(k), traj.z(k), t, opts.p)?;
            Ok((mu, product))
        });
        for (k, r) in evaluated.into_iter().enumerate() {
            match r {
                Ok((mu, product)) => {
                    samples.push(MuSample {
                        trajectory: idx,
                        t: times[k],
                        mu,
                    });
                    metric_product_max = metric_product_max.max(product);
                }
                Err(Error::SingularMatrix { condition }) => {
                    let msg = format!(
                        "singular matrix at trajectory {idx}, t = {:.6} (condition {condition:.3e})",
                        times[k]
                    );
                    notes.push(msg.clone());
                    failure.get_or_insert(msg);
                }
                Err(e) => return Err(e),
            }
        }
    }

    Ok(assemble(
        sys.name().to_string(),
        opts.gamma,
        opts.p,
        opts.metric.describe(),
        opts.beta_min,
        opts.metric_product_cap,
        samples,
        metric_product_max,
        None,
        failure,
        notes,
    ))
}

/// Run [`certify_contraction`] over the γ ladder, stopping at the first
/// Certified verdict; otherwise the certificate with the smallest sampled
/// mu_max is returned, with a note listing the attempted values.
pub fn certify_with_gamma_ladder(
    sys: &dyn DaeSystem,
    initial_set: &[(Vec<f64>, Vec<f64>)],
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let mut best: Option<Certificate> = None;
    for &gamma in &GAMMA_LADDER {
        let mut o = opts.clone();
        o.gamma = gamma;
        let cert = certify_contraction(sys, initial_set, &o)?;
        if cert.is_certified() {
            return Ok(cert);
        }
        let better = match &best {
            None => true,
            Some(b) => cert.mu_max < b.mu_max,
        };
        if better {
            best = Some(cert);
        }
    }
    let mut cert = best.expect("ladder is non-empty");
    cert.notes.push(format!(
        "gamma ladder {GAMMA_LADDER:?} exhausted without certification; best gamma = {}",
        cert.gamma
    ));
    Ok(cert)
}

/// Which stacked coordinate a box interval sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateIndex {
    W(usize),
    Z(usize),
}

#[derive(Debug, Clone)]
pub struct BoxCoord {
    pub index: StateIndex,
    pub lo: f64,
    pub hi: f64,
}

/// Axis-aligned box over a subset of the (w, z) coordinates.
#[derive(Debug, Clone)]
pub struct BoxSpec {
    pub coords: Vec<BoxCoord>,
}

/// Certify a time-invariant system over a box by sampling μ_p of the reduced
/// generalized Jacobian M (∂f/∂w − ∂f/∂z [∂g/∂z]⁻¹ ∂g/∂w) M⁻¹ on a regular
/// grid. Coordinates not named in the box stay at `base`. Also reports the
/// sampled sup of ‖[∂g/∂z]⁻¹ ∂g/∂w‖ (the boundedness hypothesis).
///
/// Metrics here must not depend on time: Identity is exact; a UserMatrix
/// M(w,z) is applied with Ṁ = 0; ExpScale(σ) shifts μ by −σ.
pub fn certify_box_reduced(
    sys: &dyn DaeSystem,
    box_spec: &BoxSpec,
    base: (&[f64], &[f64]),
    grid_per_axis: usize,
    p: NormKind,
    metric: &MetricTransform,
    beta_min: f64,
) -> Result<Certificate> {
    if !sys.time_invariant() {
        return Err(Error::InvalidInput(format!(
            "system '{}' is not declared time-invariant; box certification needs one",
            sys.name()
        )));
    }
    if box_spec.coords.is_empty() {
        return Err(Error::InvalidInput("box has no coordinates".into()));
    }
    if grid_per_axis < 2 {
        return Err(Error::InvalidInput(
            "grid density must be at least 2".into(),
        ));
    }
    if !beta_min.is_finite() || beta_min <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "beta_min must be positive, got {beta_min}"
        )));
    }
    let (n, m) = (sys.state_dim(), sys.alg_dim());
    if base.0.len() != n || base.1.len() != m {
        return Err(Error::DimensionMismatch(
            "base point does not match system dimensions".into(),
        ));
    }
    for c in &box_spec.coords {
        let ok = match c.index {
            StateIndex::W(i) => i < n,
            StateIndex::Z(j) => j < m,
        };
        if !ok {
            return Err(Error::DimensionMismatch(format!(
                "box coordinate {:?} out of range for (n,m)=({n},{m})",
                c.index
            )));
        }
    }

    let axes = box_spec.coords.len();
    let total = grid_per_axis.pow(axes as u32);
    let point_at = |node: usize| -> (Vec<f64>, Vec<f64>) {
        let mut w = base.0.to_vec();
        let mut z = base.1.to_vec();
        let mut rem = node;
        // Last coordinate varies fastest (row-major).
        for c in box_spec.coords.iter().rev() {
            let i = rem % grid_per_axis;
            rem /= grid_per_axis;
            let value = c.lo + (c.hi - c.lo) * i as f64 / (grid_per_axis - 1) as f64;
            match c.index {
                StateIndex::W(k) => w[k] = value,
                StateIndex::Z(k) => z[k] = value,
            }
        }
        (w, z)
    };

    let evaluated = grid::map(total, |node| {
        let (w, z) = point_at(node);
        let jac = crate::dae::evaluate_jacobians(sys, 0.0, &w, &z)?;
        let finv = invert(&jac.gz)?;
        let finv_gw = finv.matmul(&jac.gw);
        let reduced = jac.fw.sub(&jac.fz.matmul(&finv_gw));
        let jm = match metric {
            MetricTransform::Identity => reduced,
            MetricTransform::ExpScale(sigma) => {
                let mut s = reduced;
                for i in 0..s.rows() {
                    s[(i, i)] -= sigma;
                }
                s
            }
            MetricTransform::UserMatrix(mfun) => {
                let mat = mfun(&w, &z, 0.0);
                let minv = invert(&mat)?;
                mat.matmul(&reduced).matmul(&minv)
            }
        };
        let mu = matrix_measure(&jm, p)?;
        let bound = induced_norm(&finv_gw, p);
        let product = metric.product_norm(&w, &z, 0.0, p)?;
        Ok((mu, bound, product))
    });

    let mut samples = Vec::with_capacity(total);
    let mut bound_sup: f64 = 0.0;
    let mut metric_product_max: f64 = 0.0;
    let mut notes = Vec::new();
    let mut failure: Option<String> = None;
    for (node, r) in evaluated.into_iter().enumerate() {
        match r {
            Ok((mu, bound, product)) => {
                samples.push(MuSample {
                    trajectory: node,
                    t: 0.0,
                    mu,
                });
                bound_sup = bound_sup.max(bound);
                metric_product_max = metric_product_max.max(product);
            }
            Err(Error::SingularMatrix { condition }) => {
                if failure.is_none() {
                    let (w, z) = point_at(node);
                    let msg = format!(
                        "singular ∂g/∂z at grid node {node} (w={w:?}, z={z:?}, condition {condition:.3e})"
                    );
                    notes.push(msg.clone());
                    failure = Some(msg);
                }
            }
            Err(e) => return Err(e),
        }
    }

    let mut cert = assemble(
        sys.name().to_string(),
        0.0,
        p,
        metric.describe(),
        beta_min,
        1e6,
        samples,
        metric_product_max,
        Some(bound_sup),
        failure,
        notes,
    );
    if let Verdict::NotCertified { worst: Some(w), .. } = &cert.verdict {
        let (pw, pz) = point_at(w.trajectory);
        cert.notes
            .push(format!("worst grid point: w={pw:?}, z={pz:?}"));
    }
    cert.notes.push(format!(
        "box grid: {grid_per_axis} points per axis, {axes} axes"
    ));
    Ok(cert)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    system: String,
    gamma: f64,
    p: NormKind,
    metric: String,
    beta_min: f64,
    metric_product_cap: f64,
    samples: Vec<MuSample>,
    metric_product_max: f64,
    gz_inv_gw_sup: Option<f64>,
    failure: Option<String>,
    notes: Vec<String>,
) -> Certificate {
    let worst = samples
        .iter()
        .copied()
        .fold(None::<MuSample>, |acc, s| match acc {
            Some(best) if best.mu >= s.mu => Some(best),
            _ => Some(s),
        });
    let mu_max = worst.map_or(f64::INFINITY, |s| s.mu);
    let verdict = if let Some(reason) = failure {
        Verdict::NotCertified { reason, worst }
    } else if samples.is_empty() {
        Verdict::NotCertified {
            reason: "no mu samples were collected".into(),
            worst: None,
        }
    } else if metric_product_max > metric_product_cap {
        Verdict::NotCertified {
            reason: format!(
                "metric product {metric_product_max:.3e} exceeds cap {metric_product_cap:.3e}"
            ),
            worst,
        }
    } else if mu_max <= -beta_min {
        Verdict::Certified { beta: -mu_max }
    } else {
        Verdict::NotCertified {
            reason: format!("mu_max {mu_max:.6e} is above -beta_min = {:.6e}", -beta_min),
            worst,
        }
    };
    Certificate {
        system,
        gamma,
        p,
        metric,
        beta_min,
        samples,
        mu_max,
        beta: -mu_max,
        metric_product_max,
        gz_inv_gw_sup,
        verdict,
        notes,
    }
}

/// Lower bound from a-priori growth data: γ must exceed
/// max{l_g, l_g + l_f} + ᾱ for the auxiliary system to inherit the
/// variational decay rate.
pub fn gamma_lower_bound(alpha_bar: f64, l_f: f64, l_g: f64) -> f64 {
    l_g.max(l_g + l_f) + alpha_bar
}

/// Transition matrix Φ(t1, t0) of ẋ = J(t) x by column-wise RK4.
pub fn transition_matrix(
    j: &mut dyn FnMut(f64) -> Result<Matrix>,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Matrix> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    let probe = j(t0)?;
    if !probe.is_square() {
        return Err(Error::Dimension("J(t) must be square".into()));
    }
    let n = probe.rows();
    let mut x = Matrix::identity(n);
    if (t1 - t0).abs() == 0.0 {
        return Ok(x);
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let eps = 1e-12 * (1.0 + t1.abs());
    while (t1 - t) * dir > eps {
        let h = dir * step.min((t1 - t).abs());
        let j1 = j(t)?;
        let jm = j(t + 0.5 * h)?;
        let j4 = j(t + h)?;
        let k1 = j1.matmul(&x);
        let k2 = jm.matmul(&x.add(&k1.scale(0.5 * h)));
        let k3 = jm.matmul(&x.add(&k2.scale(0.5 * h)));
        let k4 = j4.matmul(&x.add(&k3.scale(h)));
        x = x.add(
            &k1.add(&k2.scale(2.0))
                .add(&k3.scale(2.0))
                .add(&k4)
                .scale(h / 6.0),
        );
        t += h;
    }
    Ok(x)
}

/// Coppel envelope t ↦ ‖x0‖_p · exp(∫ μ_p(J(s)) ds) on the given grid,
/// with trapezoidal quadrature. Solutions of ẋ = J(t)x are bounded by it.
pub fn coppel_envelope(
    j: &mut dyn FnMut(f64) -> Result<Matrix>,
    p: NormKind,
    x0: &[f64],
    t_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidInput("need at least two grid times".into()));
    }
    let x0_norm = vector_norm(x0, p);
    let mus: Vec<f64> = t_grid
        .iter()
        .map(|&t| matrix_measure(&j(t)?, p))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut integral = 0.0;
    out.push((t_grid[0], x0_norm));
    for k in 1..t_grid.len() {
        let h = t_grid[k] - t_grid[k - 1];
        integral += 0.5 * h * (mus[k - 1] + mus[k]);
        out.push((t_grid[k], x0_norm * integral.exp()));
    }
    Ok(out)
}

/// Finite-difference variational oracle: integrates the nonlinear system
/// from `w0` and from `w0 + δ·ξ0` (each made consistent independently) and
/// returns the scaled trajectory difference, which converges to the
/// variational solution as δ → 0.
#[allow(clippy::too_many_arguments)]
pub fn fd_variational_oracle(
    sys: &dyn DaeSystem,
    t0: f64,
    w0: &[f64],
    z_guess: &[f64],
    xi0: &[f64],
    delta: Option<f64>,
    t_end: f64,
    step: f64,
) -> Result<LinearPath> {
    if xi0.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "xi0 has length {}, expected {}",
            xi0.len(),
            sys.state_dim()
        )));
    }
    let w0_norm = vector_norm(w0, NormKind::Two);
    let delta = delta.unwrap_or(if w0_norm > 0.0 { 1e-6 * w0_norm } else { 1e-6 });

    let z0 = consistent_init(sys, t0, w0, z_guess)?;
    let base = integrate(sys, t0, w0, &z0, t_end, step)?;

    let w0p: Vec<f64> = w0.iter().zip(xi0).map(|(w, x)| w + delta * x).collect();
    let z0p = consistent_init(sys, t0, &w0p, &z0)?;
    let pert = integrate(sys, t0, &w0p, &z0p, t_end, step)?;

    if base.len() != pert.len() {
        return Err(Error::InvalidInput(
            "base and perturbed trajectories ended at different times".into(),
        ));
    }
    let mut path = LinearPath::with_capacity(sys.state_dim(), sys.alg_dim(), base.len());
    for k in 0..base.len() {
        let xi: Vec<f64> = pert
            .w(k)
            .iter()
            .zip(base.w(k))
            .map(|(a, b)| (a - b) / delta)
            .collect();
        let nu: Vec<f64> = pert
            .z(k)
            .iter()
            .zip(base.z(k))
            .map(|(a, b)| (a - b) / delta)
            .collect();
        path.push(base.t(k), &xi, &nu);
    }
    Ok(path)
}

/// Max over the grid of λ_max(Gᵀ(t)P(t) + P(t)G(t) + Ṗ(t) + βP(t)), where G
/// is the auxiliary system matrix. A value ≤ 0 verifies the differential
/// Riccati inequality on the grid. P must be symmetric positive definite.
pub fn riccati_residual(
    g_at: &mut dyn FnMut(f64) -> Result<Matrix>,
    p_at: &mut dyn FnMut(f64) -> Result<(Matrix, Matrix)>,
    beta: f64,
    t_grid: &[f64],
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &t in t_grid {
        let g = g_at(t)?;
        let (p, pdot) = p_at(t)?;
        let scale = p.max_abs().max(1.0);
        if p.sub(&p.transpose()).max_abs() > 1e-10 * scale {
            return Err(Error::InvalidInput(format!(
                "P(t) is not symmetric at t = {t}"
            )));
        }
        let lambda_min = -symmetric_eigen_max(&p.scale(-1.0))?;
        if lambda_min <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "P(t) is not positive definite at t = {t} (lambda_min = {lambda_min:.3e})"
            )));
        }
        let r = g
            .transpose()
            .matmul(&p)
            .add(&p.matmul(&g))
            .add(&pdot)
            .add(&p.scale(beta));
        worst = worst.max(symmetric_eigen_max(&r.symmetric_part())?);
    }
    Ok(worst)
}

/// Exponential decay fit c·e^{−αt} to a positive series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub c: f64,
    pub alpha: f64,
    /// Largest |log r_i − (log c − α t_i)| over the fitted samples.
    pub residual: f64,
}

/// Least squares on log r = log c − α t. The first 10% of samples are
/// discarded to suppress transients.
pub fn fit_decay(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.iter().any(|&(_, r)| !r.is_finite() || r <= 0.0) {
        return Err(Error::InvalidInput(
            "decay fit requires strictly positive values".into(),
        ));
    }
    let skip = series.len() / 10;
    let used = &series[skip..];
    if used.len() < 2 {
        return Err(Error::InvalidInput(
            "decay fit needs at least two samples".into(),
        ));
    }
    let k = used.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, r) in used {
        let y = r.ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = k * stt - st * st;
    if denom.abs() < 1e-300 {
        return Err(Error::InvalidInput("decay fit needs distinct times".into()));
    }
    let slope = (k * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / k;
    let alpha = -slope;
    let c = intercept.exp();
    let residual = used
        .iter()
        .map(|&(t, r)| (r.ln() - (intercept + slope * t)).abs())
        .fold(0.0_f64, f64::max);
    Ok(DecayFit { c, alpha, residual })
}

/// Integrate ẋ = J(t)x over an explicit time grid with RK4, returning the
/// state at every grid time. The independent oracle behind the Coppel and
/// transition-matrix properties.
pub fn integrate_linear_path(
    times: &[f64],
    x0: Vec<f64>,
    matrix_at: impl FnMut(f64) -> Result<Matrix>,
) -> Result<Vec<Vec<f64>>> {
    crate::aux::rk4_linear_path(times, x0, matrix_at)
}

/// Auxiliary matrix path along a trajectory, packaged as a closure for
/// [`transition_matrix`] / [`riccati_residual`].
pub fn aux_matrix_path<'a>(
    interp: &'a TrajectoryInterpolant<'a>,
    gamma: f64,
) -> impl FnMut(f64) -> Result<Matrix> + 'a {
    move |t| aux_matrix(&coefficient_matrices(interp, t, gamma)?)
}

/// Reduced-Jacobian path along a trajectory.
pub fn reduced_jacobian_path<'a>(
    interp: &'a TrajectoryInterpolant<'a>,
) -> impl FnMut(f64) -> Result<Matrix> + 'a {
    move |t| reduced_jacobian(&coefficient_matrices(interp, t, 0.0)?)
}
