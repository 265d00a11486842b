//! Built-in example systems with analytic Jacobians, closed-form solutions
//! where available, and certification presets. These double as oracles for
//! the test suite; each also ships as a model file under `examples/` so the
//! parser path can be cross-checked against the hard-coded versions.

use std::sync::Arc;

use crate::aux::MetricTransform;
use crate::certify::{BoxCoord, BoxSpec, StateIndex};
use crate::dae::{DaeSystem, JacobianBundle};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, NormKind};
use crate::observer::{luenberger_injection, ObserverSpec, PlantOde};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleId {
    Exam1,
    Exam3,
    Smex1,
    Smex2,
    Oex1Observer,
}

impl ExampleId {
    pub fn all() -> [ExampleId; 5] {
        [
            ExampleId::Exam1,
            ExampleId::Exam3,
            ExampleId::Smex1,
            ExampleId::Smex2,
            ExampleId::Oex1Observer,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleId::Exam1 => "exam1",
            ExampleId::Exam3 => "exam3",
            ExampleId::Smex1 => "smex1",
            ExampleId::Smex2 => "smex2",
            ExampleId::Oex1Observer => "oex1_observer",
        }
    }
}

impl std::str::FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exam1" => Ok(ExampleId::Exam1),
            "exam3" => Ok(ExampleId::Exam3),
            "smex1" => Ok(ExampleId::Smex1),
            "smex2" => Ok(ExampleId::Smex2),
            "oex1_observer" => Ok(ExampleId::Oex1Observer),
            other => Err(Error::UnknownExample(other.to_string())),
        }
    }
}

/// Serializable metric choice for presets and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricSpec {
    Identity,
    ExpScale(f64),
}

impl MetricSpec {
    pub fn to_transform(self) -> MetricTransform {
        match self {
            MetricSpec::Identity => MetricTransform::Identity,
            MetricSpec::ExpScale(s) => MetricTransform::ExpScale(s),
        }
    }
}

impl std::str::FromStr for MetricSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "identity" {
            return Ok(MetricSpec::Identity);
        }
        if let Some(rest) = s.strip_prefix("expscale:") {
            let sigma: f64 = rest
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad expscale sigma '{rest}'")))?;
            return Ok(MetricSpec::ExpScale(sigma));
        }
        Err(Error::InvalidInput(format!(
            "unknown metric '{s}' (expected 'identity' or 'expscale:<sigma>')"
        )))
    }
}

/// Closed-form solution (t, w0) ↦ (w(t), z(t)), with t0 = 0.
pub type ClosedForm = fn(f64, &[f64]) -> (Vec<f64>, Vec<f64>);

pub enum ExampleSystem {
    Dae(Arc<dyn DaeSystem>),
    Observer(ObserverSpec),
}

pub struct BoxPreset {
    pub spec: BoxSpec,
    pub grid: usize,
    pub base: (Vec<f64>, Vec<f64>),
}

/// A registered example with everything needed to reproduce its experiment.
pub struct NamedExample {
    pub id: ExampleId,
    pub summary: &'static str,
    pub system: ExampleSystem,
    pub closed_form: Option<ClosedForm>,
    /// (w0, z_guess) pairs for simulation/certification.
    pub default_ics: Vec<(Vec<f64>, Vec<f64>)>,
    /// Plant and observer initial states, for the observer example.
    pub observer_ics: Option<(Vec<f64>, Vec<f64>)>,
    pub gamma: f64,
    pub p: NormKind,
    pub metric: MetricSpec,
    pub beta_min: f64,
    pub t_span: (f64, f64),
    pub step: f64,
    pub box_preset: Option<BoxPreset>,
}

impl NamedExample {
    /// The underlying DAE, for examples that are plain DAE systems.
    pub fn dae(&self) -> Option<Arc<dyn DaeSystem>> {
        match &self.system {
            ExampleSystem::Dae(sys) => Some(sys.clone()),
            ExampleSystem::Observer(_) => None,
        }
    }

    pub fn observer_spec(&self) -> Option<&ObserverSpec> {
        match &self.system {
            ExampleSystem::Observer(spec) => Some(spec),
            ExampleSystem::Dae(_) => None,
        }
    }
}

/// Look up a built-in example.
pub fn get_example(id: ExampleId) -> NamedExample {
    match id {
        ExampleId::Exam1 => NamedExample {
            id,
            summary: "scalar DAE with stable reduced system but diverging algebraic part",
            system: ExampleSystem::Dae(Arc::new(Exam1)),
            closed_form: Some(|t, w0| (vec![w0[0] * (-2.0 * t).exp()], vec![-w0[0] * t.exp()])),
            default_ics: vec![(vec![1.0], vec![0.0])],
            observer_ics: None,
            gamma: 0.0,
            p: NormKind::One,
            metric: MetricSpec::Identity,
            beta_min: 0.5,
            t_span: (0.0, 5.0),
            step: 1e-3,
            box_preset: None,
        },
        ExampleId::Exam3 => NamedExample {
            id,
            summary:
                "contracting scalar DAE illustrating the gamma sensitivity of the auxiliary system",
            system: ExampleSystem::Dae(Arc::new(Exam3)),
            closed_form: Some(|t, w0| {
                (
                    vec![w0[0] * (-2.0 * t).exp()],
                    vec![w0[0] * (-3.0 * t).exp()],
                )
            }),
            default_ics: vec![(vec![1.0], vec![1.0])],
            observer_ics: None,
            gamma: 4.0,
            p: NormKind::One,
            metric: MetricSpec::Identity,
            beta_min: 0.5,
            t_span: (0.0, 5.0),
            step: 1e-3,
            box_preset: None,
        },
        ExampleId::Smex1 => NamedExample {
            id,
            summary: "nonlinear time-varying DAE with a transcendental constraint",
            system: ExampleSystem::Dae(Arc::new(Smex1)),
            closed_form: None,
            default_ics: vec![(vec![3.0, -3.0], vec![1.0]), (vec![-3.0, 3.0], vec![-1.0])],
            observer_ics: None,
            gamma: 0.0,
            p: NormKind::One,
            metric: MetricSpec::Identity,
            beta_min: 0.5,
            t_span: (0.0, 20.0),
            step: 1e-3,
            box_preset: None,
        },
        ExampleId::Smex2 => NamedExample {
            id,
            summary:
                "inverter-interfaced power source on an infinite bus, closed-loop droop control",
            system: ExampleSystem::Dae(Arc::new(Smex2::with_gains(0.5, 0.5))),
            closed_form: None,
            // The algebraic guess selects the V > 0 branch of the power-flow
            // constraint; a guess at the nominal (0, 1) point makes Newton
            // jump to the mirror branch with negative voltage.
            default_ics: vec![(vec![0.5, 1.05], vec![1.9, 0.8])],
            observer_ics: None,
            gamma: 0.0,
            p: NormKind::One,
            metric: MetricSpec::Identity,
            beta_min: 1.1,
            t_span: (0.0, 15.0),
            step: 1e-3,
            box_preset: Some(BoxPreset {
                spec: BoxSpec {
                    coords: vec![
                        BoxCoord {
                            index: StateIndex::Z(1),
                            lo: 0.95,
                            hi: 1.05,
                        },
                        BoxCoord {
                            index: StateIndex::Z(0),
                            lo: -std::f64::consts::FRAC_PI_2,
                            hi: std::f64::consts::FRAC_PI_2,
                        },
                    ],
                },
                grid: 101,
                base: (vec![1.0, -1.0], vec![0.0, 1.0]),
            }),
        },
        ExampleId::Oex1Observer => {
            let plant: Arc<dyn PlantOde> = Arc::new(Oex1Plant);
            let injection = luenberger_injection(|t| {
                Matrix::new(
                    2,
                    1,
                    vec![-1.5 * t.cos() * t.cos(), -1.0 + 1.5 * t.sin() * t.cos()],
                )
                .expect("2x1 gain")
            });
            let spec = ObserverSpec::new(plant, injection).expect("paper gains are consistent");
            NamedExample {
                id,
                summary: "Luenberger observer for an unstable time-varying plant",
                system: ExampleSystem::Observer(spec),
                // The plant state solves the observer DAE, so this closed
                // form (plant flow, output as algebraic part) satisfies it.
                closed_form: Some(|t, w0| {
                    let (s, c) = t.sin_cos();
                    let ep = (0.5 * t).exp();
                    let em = (-t).exp();
                    let w1 = ep * c * w0[0] + em * s * w0[1];
                    let w2 = -ep * s * w0[0] + em * c * w0[1];
                    (vec![w1, w2], vec![w1])
                }),
                default_ics: vec![(vec![2.0, -2.0], vec![2.0])],
                observer_ics: Some((vec![-2.0, 2.0], vec![2.0, -2.0])),
                gamma: 1.0,
                p: NormKind::Two,
                metric: MetricSpec::ExpScale(1.0),
                beta_min: 0.5,
                t_span: (0.0, 20.0),
                step: 1e-3,
                box_preset: None,
            }
        }
    }
}

/// ẇ = −w + e^{−3t} z, 0 = e^{3t} w + z.
pub struct Exam1;

impl DaeSystem for Exam1 {
    fn state_dim(&self) -> usize {
        1
    }
    fn alg_dim(&self) -> usize {
        1
    }
    fn name(&self) -> &str {
        "exam1"
    }
    fn f(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = -w[0] + (-3.0 * t).exp() * z[0];
        Ok(())
    }
    fn g(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = (3.0 * t).exp() * w[0] + z[0];
        Ok(())
    }
    fn jacobians(&self, t: f64, w: &[f64], _z: &[f64]) -> Result<JacobianBundle> {
        Ok(JacobianBundle {
            fw: Matrix::new(1, 1, vec![-1.0])?,
            fz: Matrix::new(1, 1, vec![(-3.0 * t).exp()])?,
            gw: Matrix::new(1, 1, vec![(3.0 * t).exp()])?,
            gz: Matrix::new(1, 1, vec![1.0])?,
            gt: vec![3.0 * (3.0 * t).exp() * w[0]],
        })
    }
    fn constraint_jacobian_z(&self, _t: f64, _w: &[f64], _z: &[f64]) -> Result<Matrix> {
        Matrix::new(1, 1, vec![1.0])
    }
    fn gjac_dt_closed_form(
        &self,
        t: f64,
        _w: &[f64],
        _z: &[f64],
        _wdot: &[f64],
        _zdot: &[f64],
    ) -> Option<(Matrix, Matrix)> {
        Some((
            Matrix::new(1, 1, vec![3.0 * (3.0 * t).exp()]).ok()?,
            Matrix::zeros(1, 1),
        ))
    }
    fn gz_is_constant(&self) -> bool {
        true
    }
}

/// ẇ = −2 e^t z, 0 = e^{−t} w − z.
pub struct Exam3;

impl DaeSystem for Exam3 {
    fn state_dim(&self) -> usize {
        1
    }
    fn alg_dim(&self) -> usize {
        1
    }
    fn name(&self) -> &str {
        "exam3"
    }
    fn f(&self, t: f64, _w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = -2.0 * t.exp() * z[0];
        Ok(())
    }
    fn g(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = (-t).exp() * w[0] - z[0];
        Ok(())
    }
    fn jacobians(&self, t: f64, w: &[f64], _z: &[f64]) -> Result<JacobianBundle> {
        Ok(JacobianBundle {
            fw: Matrix::new(1, 1, vec![0.0])?,
            fz: Matrix::new(1, 1, vec![-2.0 * t.exp()])?,
            gw: Matrix::new(1, 1, vec![(-t).exp()])?,
            gz: Matrix::new(1, 1, vec![-1.0])?,
            gt: vec![-(-t).exp() * w[0]],
        })
    }
    fn constraint_jacobian_z(&self, _t: f64, _w: &[f64], _z: &[f64]) -> Result<Matrix> {
        Matrix::new(1, 1, vec![-1.0])
    }
    fn gjac_dt_closed_form(
        &self,
        t: f64,
        _w: &[f64],
        _z: &[f64],
        _wdot: &[f64],
        _zdot: &[f64],
    ) -> Option<(Matrix, Matrix)> {
        Some((
            Matrix::new(1, 1, vec![-(-t).exp()]).ok()?,
            Matrix::zeros(1, 1),
        ))
    }
    fn gz_is_constant(&self) -> bool {
        true
    }
}

/// ẇ1 = −4w1 − 0.5 cos z, ẇ2 = (4w1 − (3+cos t)w2 − 4)/(3+sin t),
/// 0 = 4z + 0.5 sin z + w1 + (3+sin t)w2.
pub struct Smex1;

impl DaeSystem for Smex1 {
    fn state_dim(&self) -> usize {
        2
    }
    fn alg_dim(&self) -> usize {
        1
    }
    fn name(&self) -> &str {
        "smex1"
    }
    fn f(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        let denom = 3.0 + t.sin();
        out[0] = -4.0 * w[0] - 0.5 * z[0].cos();
        out[1] = 4.0 / denom * w[0] - (3.0 + t.cos()) / denom * w[1] - 4.0 / denom;
        Ok(())
    }
    fn g(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = 4.0 * z[0] + 0.5 * z[0].sin() + w[0] + (3.0 + t.sin()) * w[1];
        Ok(())
    }
    fn jacobians(&self, t: f64, w: &[f64], z: &[f64]) -> Result<JacobianBundle> {
        let denom = 3.0 + t.sin();
        Ok(JacobianBundle {
            fw: Matrix::new(2, 2, vec![-4.0, 0.0, 4.0 / denom, -(3.0 + t.cos()) / denom])?,
            fz: Matrix::new(2, 1, vec![0.5 * z[0].sin(), 0.0])?,
            gw: Matrix::new(1, 2, vec![1.0, denom])?,
            gz: Matrix::new(1, 1, vec![4.0 + 0.5 * z[0].cos()])?,
            gt: vec![w[1] * t.cos()],
        })
    }
    fn constraint_jacobian_z(&self, _t: f64, _w: &[f64], z: &[f64]) -> Result<Matrix> {
        Matrix::new(1, 1, vec![4.0 + 0.5 * z[0].cos()])
    }
    fn gjac_dt_closed_form(
        &self,
        t: f64,
        _w: &[f64],
        z: &[f64],
        _wdot: &[f64],
        zdot: &[f64],
    ) -> Option<(Matrix, Matrix)> {
        let dgw = Matrix::new(1, 2, vec![0.0, t.cos()]).ok()?;
        let dgz = Matrix::new(1, 1, vec![-0.5 * z[0].sin() * zdot[0]]).ok()?;
        Some((dgw, dgz))
    }
}

/// Closed-loop inverter-interfaced power source with droop control and
/// state feedback u = k1·P + k2·Q. States w = (P, Q), algebraic z = (θ, V).
pub struct Smex2 {
    k1: f64,
    k2: f64,
}

impl Smex2 {
    pub fn with_gains(k1: f64, k2: f64) -> Self {
        Smex2 { k1, k2 }
    }
}

impl DaeSystem for Smex2 {
    fn state_dim(&self) -> usize {
        2
    }
    fn alg_dim(&self) -> usize {
        2
    }
    fn name(&self) -> &str {
        "smex2"
    }
    fn f(&self, _t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        let (p, q) = (w[0], w[1]);
        let (theta, v) = (z[0], z[1]);
        out[0] = -3.0 * p - theta + 3.0;
        out[1] = -3.0 * q - v - 2.0 + self.k1 * p + self.k2 * q;
        Ok(())
    }
    fn g(&self, _t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        let (theta, v) = (z[0], z[1]);
        let (s, c) = theta.sin_cos();
        out[0] = w[0] - v * c - v * s;
        out[1] = w[1] - v * s + v * c;
        Ok(())
    }
    fn jacobians(&self, _t: f64, _w: &[f64], z: &[f64]) -> Result<JacobianBundle> {
        let (theta, v) = (z[0], z[1]);
        let (s, c) = theta.sin_cos();
        Ok(JacobianBundle {
            fw: Matrix::new(2, 2, vec![-3.0, 0.0, self.k1, -3.0 + self.k2])?,
            fz: Matrix::new(2, 2, vec![-1.0, 0.0, 0.0, -1.0])?,
            gw: Matrix::identity(2),
            gz: Matrix::new(2, 2, vec![v * (s - c), -(c + s), -v * (c + s), -(s - c)])?,
            gt: vec![0.0, 0.0],
        })
    }
    fn constraint_jacobian_z(&self, _t: f64, _w: &[f64], z: &[f64]) -> Result<Matrix> {
        let (theta, v) = (z[0], z[1]);
        let (s, c) = theta.sin_cos();
        Matrix::new(2, 2, vec![v * (s - c), -(c + s), -v * (c + s), -(s - c)])
    }
    fn gjac_dt_closed_form(
        &self,
        _t: f64,
        _w: &[f64],
        z: &[f64],
        _wdot: &[f64],
        zdot: &[f64],
    ) -> Option<(Matrix, Matrix)> {
        let (theta, v) = (z[0], z[1]);
        let (s, c) = theta.sin_cos();
        let (td, vd) = (zdot[0], zdot[1]);
        let dgz = Matrix::new(
            2,
            2,
            vec![
                vd * (s - c) + v * (c + s) * td,
                (s - c) * td,
                -vd * (c + s) + v * (s - c) * td,
                -(c + s) * td,
            ],
        )
        .ok()?;
        Some((Matrix::zeros(2, 2), dgz))
    }
    fn time_invariant(&self) -> bool {
        true
    }
}

/// The unstable time-varying plant of the observer example; its transition
/// matrix is known in closed form, with an e^{t/2} mode despite frozen-time
/// eigenvalues in the left half plane.
pub struct Oex1Plant;

impl Oex1Plant {
    fn a(t: f64) -> Matrix {
        let (s, c) = t.sin_cos();
        Matrix::from_rows(&[
            &[-1.0 + 1.5 * c * c, 1.0 - 1.5 * s * c],
            &[-1.0 - 1.5 * s * c, -1.0 + 1.5 * s * s],
        ])
    }
}

impl PlantOde for Oex1Plant {
    fn state_dim(&self) -> usize {
        2
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn name(&self) -> &str {
        "oex1"
    }
    fn dynamics(&self, t: f64, w: &[f64], out: &mut [f64]) -> Result<()> {
        let a = Self::a(t);
        out.copy_from_slice(&a.mat_vec(w));
        Ok(())
    }
    fn output(&self, _t: f64, w: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = w[0];
        Ok(())
    }
    fn dynamics_jacobian(&self, t: f64, _w: &[f64]) -> Result<Matrix> {
        Ok(Self::a(t))
    }
    fn output_jacobian(&self, _t: f64, _w: &[f64]) -> Result<Matrix> {
        Matrix::new(1, 2, vec![1.0, 0.0])
    }
    fn output_jacobian_dt(&self, _t: f64, _w: &[f64], _wdot: &[f64]) -> Option<Matrix> {
        Some(Matrix::zeros(1, 2))
    }
}

#[cfg(test)]
mod tests;
