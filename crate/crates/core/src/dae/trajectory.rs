//! Stored trajectories: time-stamped (w, z) samples.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// A computed solution sampled on the integrator grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    n: usize,
    m: usize,
    times: Vec<f64>,
    ws: Vec<f64>,
    zs: Vec<f64>,
    /// Nominal step size used to produce the samples.
    pub step: f64,
    /// Largest ‖g‖∞ observed over the stored samples.
    pub constraint_residual_max: f64,
    /// Set when integration stopped early because the state left
    /// floating-point range.
    pub nonfinite: bool,
}

impl Trajectory {
    pub(crate) fn new(n: usize, m: usize, step: f64) -> Self {
        Trajectory {
            n,
            m,
            times: Vec::new(),
            ws: Vec::new(),
            zs: Vec::new(),
            step,
            constraint_residual_max: 0.0,
            nonfinite: false,
        }
    }

    pub(crate) fn push(&mut self, t: f64, w: &[f64], z: &[f64]) {
        debug_assert_eq!(w.len(), self.n);
        debug_assert_eq!(z.len(), self.m);
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.ws.extend_from_slice(w);
        self.zs.extend_from_slice(z);
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn alg_dim(&self) -> usize {
        self.m
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

    pub fn t(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn w(&self, i: usize) -> &[f64] {
        &self.ws[i * self.n..(i + 1) * self.n]
    }

    pub fn z(&self, i: usize) -> &[f64] {
        &self.zs[i * self.m..(i + 1) * self.m]
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Last stored state.
    pub fn final_state(&self) -> (f64, &[f64], &[f64]) {
        let i = self.len() - 1;
        (self.t(i), self.w(i), self.z(i))
    }

    /// Index i such that times[i] ≤ t ≤ times[i+1], for interpolation.
    pub fn segment_for(&self, t: f64) -> Result<usize> {
        let lo = self.t_start();
        let hi = self.t_end();
        let slack = 1e-9 * (1.0 + hi.abs());
        if t < lo - slack || t > hi + slack || self.len() < 2 {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let idx = self.times.partition_point(|&ti| ti <= t);
        Ok(idx.clamp(1, self.len() - 1) - 1)
    }

    /// CSV export: header `t,w1..wn,z1..zm`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for i in 1..=self.n {
            write!(out, ",w{i}")?;
        }
        for j in 1..=self.m {
            write!(out, ",z{j}")?;
        }
        writeln!(out)?;
        for k in 0..self.len() {
            write!(out, "{:.16e}", self.t(k))?;
            for v in self.w(k) {
                write!(out, ",{v:.16e}")?;
            }
            for v in self.z(k) {
                write!(out, ",{v:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
