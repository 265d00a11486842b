//! Expression evaluation over f64 and over dual numbers.

use super::{BinaryOp, Constant, Expr, ExprKind, UnaryOp, VarRef};
use crate::error::{Error, EvalErrorKind, Result};

/// Which variable carries the unit derivative seed in [`eval_dual`].
/// Indices are 0-based (`Seed::W(0)` differentiates with respect to `w1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    T,
    W(usize),
    Z(usize),
}

/// Dual number `re + du·ε` with `ε² = 0`; carries a value together with one
/// directional derivative through every arithmetic operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub du: f64,
}

impl Dual {
    pub fn constant(v: f64) -> Self {
        Dual { re: v, du: 0.0 }
    }

    pub fn seeded(v: f64) -> Self {
        Dual { re: v, du: 1.0 }
    }
}

type EvalResult<T> = std::result::Result<T, EvalErrorKind>;

trait Arith: Copy {
    fn lit(v: f64) -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn div(self, o: Self) -> EvalResult<Self>;
    fn pow(self, o: Self) -> EvalResult<Self>;
    fn unary(self, op: UnaryOp) -> EvalResult<Self>;
}

fn pow_f64(a: f64, b: f64) -> EvalResult<f64> {
    if a > 0.0 {
        Ok(a.powf(b))
    } else if a == 0.0 {
        if b > 0.0 {
            Ok(0.0)
        } else if b == 0.0 {
            Ok(1.0)
        } else {
            Err(EvalErrorKind::DivideByZero)
        }
    } else if b.fract() == 0.0 && b.abs() < 4.5e15 {
        Ok(a.powf(b))
    } else {
        Err(EvalErrorKind::DomainError)
    }
}

impl Arith for f64 {
    fn lit(v: f64) -> f64 {
        v
    }
    fn add(self, o: f64) -> f64 {
        self + o
    }
    fn sub(self, o: f64) -> f64 {
        self - o
    }
    fn mul(self, o: f64) -> f64 {
        self * o
    }
    fn div(self, o: f64) -> EvalResult<f64> {
        if o == 0.0 {
            Err(EvalErrorKind::DivideByZero)
        } else {
            Ok(self / o)
        }
    }
    fn pow(self, o: f64) -> EvalResult<f64> {
        pow_f64(self, o)
    }
    fn unary(self, op: UnaryOp) -> EvalResult<f64> {
        Ok(match op {
            UnaryOp::Neg => -self,
            UnaryOp::Sin => self.sin(),
            UnaryOp::Cos => self.cos(),
            UnaryOp::Tan => self.tan(),
            UnaryOp::Exp => self.exp(),
            UnaryOp::Ln => {
                if self <= 0.0 {
                    return Err(EvalErrorKind::DomainError);
                }
                self.ln()
            }
            UnaryOp::Sqrt => {
                if self < 0.0 {
                    return Err(EvalErrorKind::DomainError);
                }
                self.sqrt()
            }
            UnaryOp::Tanh => self.tanh(),
            UnaryOp::Abs => self.abs(),
        })
    }
}

impl Arith for Dual {
    fn lit(v: f64) -> Dual {
        Dual::constant(v)
    }
    fn add(self, o: Dual) -> Dual {
        Dual {
            re: self.re + o.re,
            du: self.du + o.du,
        }
    }
    fn sub(self, o: Dual) -> Dual {
        Dual {
            re: self.re - o.re,
            du: self.du - o.du,
        }
    }
    fn mul(self, o: Dual) -> Dual {
        Dual {
            re: self.re * o.re,
            du: self.du * o.re + self.re * o.du,
        }
    }
    fn div(self, o: Dual) -> EvalResult<Dual> {
        if o.re == 0.0 {
            return Err(EvalErrorKind::DivideByZero);
        }
        let v = self.re / o.re;
        Ok(Dual {
            re: v,
            du: (self.du - v * o.du) / o.re,
        })
    }
    fn pow(self, o: Dual) -> EvalResult<Dual> {
        let v = pow_f64(self.re, o.re)?;
        let du = if o.du == 0.0 {
            // Constant exponent: d(a^c) = c·a^(c-1)·a'.
            if self.du == 0.0 || o.re == 0.0 {
                0.0
            } else if self.re == 0.0 {
                if o.re > 1.0 {
                    0.0
                } else if o.re == 1.0 {
                    self.du
                } else {
                    // 0 < c < 1: slope unbounded at 0.
                    return Err(EvalErrorKind::DomainError);
                }
            } else {
                o.re * pow_f64(self.re, o.re - 1.0)? * self.du
            }
        } else {
            // Variable exponent needs ln of the base.
            if self.re <= 0.0 {
                return Err(EvalErrorKind::DomainError);
            }
            v * (o.du * self.re.ln() + o.re * self.du / self.re)
        };
        Ok(Dual { re: v, du })
    }
    fn unary(self, op: UnaryOp) -> EvalResult<Dual> {
        Ok(match op {
            UnaryOp::Neg => Dual {
                re: -self.re,
                du: -self.du,
            },
            UnaryOp::Sin => Dual {
                re: self.re.sin(),
                du: self.du * self.re.cos(),
            },
            UnaryOp::Cos => Dual {
                re: self.re.cos(),
                du: -self.du * self.re.sin(),
            },
            UnaryOp::Tan => {
                let c = self.re.cos();
                Dual {
                    re: self.re.tan(),
                    du: self.du / (c * c),
                }
            }
            UnaryOp::Exp => {
                let v = self.re.exp();
                Dual {
                    re: v,
                    du: self.du * v,
                }
            }
            UnaryOp::Ln => {
                if self.re <= 0.0 {
                    return Err(EvalErrorKind::DomainError);
                }
                Dual {
                    re: self.re.ln(),
                    du: self.du / self.re,
                }
            }
            UnaryOp::Sqrt => {
                if self.re < 0.0 {
                    return Err(EvalErrorKind::DomainError);
                }
                if self.re == 0.0 {
                    if self.du != 0.0 {
                        return Err(EvalErrorKind::DomainError);
                    }
                    Dual::constant(0.0)
                } else {
                    let v = self.re.sqrt();
                    Dual {
                        re: v,
                        du: self.du / (2.0 * v),
                    }
                }
            }
            UnaryOp::Tanh => {
                let v = self.re.tanh();
                Dual {
                    re: v,
                    du: self.du * (1.0 - v * v),
                }
            }
            UnaryOp::Abs => {
                if self.re < 0.0 {
                    Dual {
                        re: -self.re,
                        du: -self.du,
                    }
                } else if self.re > 0.0 {
                    self
                } else {
                    Dual::constant(0.0)
                }
            }
        })
    }
}

fn eval_node<T: Arith>(e: &Expr, var: &impl Fn(VarRef) -> Result<T>) -> Result<T> {
    let at = |kind: EvalErrorKind| Error::Eval { kind, span: e.span };
    match &e.kind {
        ExprKind::Literal(v) => Ok(T::lit(*v)),
        ExprKind::Constant(Constant::Pi) => Ok(T::lit(std::f64::consts::PI)),
        ExprKind::Constant(Constant::E) => Ok(T::lit(std::f64::consts::E)),
        ExprKind::Var(v) => var(*v),
        ExprKind::Unary(op, a) => eval_node(a, var)?.unary(*op).map_err(at),
        ExprKind::Binary(op, a, b) => {
            let x = eval_node(a, var)?;
            let y = eval_node(b, var)?;
            match op {
                BinaryOp::Add => Ok(x.add(y)),
                BinaryOp::Sub => Ok(x.sub(y)),
                BinaryOp::Mul => Ok(x.mul(y)),
                BinaryOp::Div => x.div(y).map_err(at),
                BinaryOp::Pow => x.pow(y).map_err(at),
            }
        }
    }
}

fn var_value(v: VarRef, t: f64, w: &[f64], z: &[f64]) -> Result<f64> {
    match v {
        VarRef::T => Ok(t),
        VarRef::W(i) => w.get(i).copied().ok_or_else(|| {
            Error::DimensionMismatch(format!("w{} referenced but |w|={}", i + 1, w.len()))
        }),
        VarRef::Z(j) => z.get(j).copied().ok_or_else(|| {
            Error::DimensionMismatch(format!("z{} referenced but |z|={}", j + 1, z.len()))
        }),
    }
}

/// Evaluate an expression at `(t, w, z)`.
///
/// Domain violations (division by zero, ln of a non-positive value, …)
/// surface as [`Error::Eval`] rather than propagating NaN.
pub fn eval(e: &Expr, t: f64, w: &[f64], z: &[f64]) -> Result<f64> {
    eval_node(e, &|v| var_value(v, t, w, z))
}

/// Evaluate an expression and its exact partial derivative with respect to
/// the seeded variable, by dual-number propagation.
pub fn eval_dual(e: &Expr, t: f64, w: &[f64], z: &[f64], seed: Seed) -> Result<(f64, f64)> {
    let d = eval_node(e, &|v| {
        let value = var_value(v, t, w, z)?;
        let seeded = match (v, seed) {
            (VarRef::T, Seed::T) => true,
            (VarRef::W(i), Seed::W(si)) => i == si,
            (VarRef::Z(j), Seed::Z(sj)) => j == sj,
            _ => false,
        };
        Ok(if seeded {
            Dual::seeded(value)
        } else {
            Dual::constant(value)
        })
    })?;
    Ok((d.re, d.du))
}
