//! DAE system backed by a parsed model file, with dual-number Jacobians.

use super::{DaeSystem, JacobianBundle};
use crate::dsl::{eval, eval_dual, ModelFile, Seed};
use crate::error::Result;
use crate::linalg::Matrix;

/// A [`DaeSystem`] defined by model-file expressions. First partials come
/// from dual-number differentiation, so they are exact.
pub struct DslDae {
    model: ModelFile,
    name: String,
    time_varying: bool,
}

impl DslDae {
    pub fn new(model: ModelFile, name: impl Into<String>) -> Self {
        let time_varying = model.uses_time();
        DslDae {
            model,
            name: name.into(),
            time_varying,
        }
    }

    pub fn parse(text: &str, name: impl Into<String>) -> Result<Self> {
        Ok(Self::new(crate::dsl::parse_model(text)?, name))
    }

    pub fn model(&self) -> &ModelFile {
        &self.model
    }
}

impl DaeSystem for DslDae {
    fn state_dim(&self) -> usize {
        self.model.n
    }

    fn alg_dim(&self) -> usize {
        self.model.m
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn f(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, e) in out.iter_mut().zip(&self.model.f) {
            *o = eval(e, t, w, z)?;
        }
        Ok(())
    }

    fn g(&self, t: f64, w: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, e) in out.iter_mut().zip(&self.model.g) {
            *o = eval(e, t, w, z)?;
        }
        Ok(())
    }

    fn jacobians(&self, t: f64, w: &[f64], z: &[f64]) -> Result<JacobianBundle> {
        let n = self.model.n;
        let m = self.model.m;
        let mut fw = Matrix::zeros(n, n);
        let mut fz = Matrix::zeros(n, m);
        let mut gw = Matrix::zeros(m, n);
        let mut gz = Matrix::zeros(m, m);
        let mut gt = vec![0.0; m];
        for (i, e) in self.model.f.iter().enumerate() {
            for k in 0..n {
                fw[(i, k)] = eval_dual(e, t, w, z, Seed::W(k))?.1;
            }
            for k in 0..m {
                fz[(i, k)] = eval_dual(e, t, w, z, Seed::Z(k))?.1;
            }
        }
        for (j, e) in self.model.g.iter().enumerate() {
            for k in 0..n {
                gw[(j, k)] = eval_dual(e, t, w, z, Seed::W(k))?.1;
            }
            for k in 0..m {
                gz[(j, k)] = eval_dual(e, t, w, z, Seed::Z(k))?.1;
            }
            gt[j] = eval_dual(e, t, w, z, Seed::T)?.1;
        }
        Ok(JacobianBundle { fw, fz, gw, gz, gt })
    }

    fn constraint_jacobian_z(&self, t: f64, w: &[f64], z: &[f64]) -> Result<Matrix> {
        let m = self.model.m;
        let mut gz = Matrix::zeros(m, m);
        for (j, e) in self.model.g.iter().enumerate() {
            for k in 0..m {
                gz[(j, k)] = eval_dual(e, t, w, z, Seed::Z(k))?.1;
            }
        }
        Ok(gz)
    }

    fn time_invariant(&self) -> bool {
        !self.time_varying
    }
}
