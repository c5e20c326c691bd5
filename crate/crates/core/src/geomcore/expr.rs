//! Scalar expressions over indexed coordinates.
//!
//! Expressions are built through folding constructors, so any subtree whose
//! leaves are all constants is collapsed at construction time. No other
//! rewriting is done. Evaluation is generic over [`Scalar`], which lets the
//! same tree produce values (`f64`) and forward-mode derivatives ([`Dual`]).

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
    Exp,
    /// `exp(-1/x)` for `x > 0`, zero otherwise.
    Bump,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Bump => "bump",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "bump" => Func::Bump,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("sqrt of negative value {0}")]
    NegativeSqrt(f64),
    #[error("non-finite value")]
    NonFinite,
}

/// Numeric type an [`Expr`] can be evaluated in.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn apply(self, f: Func) -> Result<Self, DomainError>;
    fn is_finite(self) -> bool;
}

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn apply(self, f: Func) -> Result<Self, DomainError> {
        Ok(match f {
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Exp => self.exp(),
            Func::Bump => bump(self),
            Func::Sqrt => {
                if self < 0.0 {
                    return Err(DomainError::NegativeSqrt(self));
                }
                self.sqrt()
            }
        })
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// Value plus one directional derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn new(v: f64, d: f64) -> Dual {
        Dual { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}
impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}
impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}
impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}
impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl Scalar for Dual {
    fn constant(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
    fn value(self) -> f64 {
        self.v
    }
    fn apply(self, f: Func) -> Result<Self, DomainError> {
        let x = self.v;
        Ok(match f {
            Func::Sin => Dual::new(x.sin(), x.cos() * self.d),
            Func::Cos => Dual::new(x.cos(), -x.sin() * self.d),
            Func::Exp => {
                let e = x.exp();
                Dual::new(e, e * self.d)
            }
            Func::Bump => {
                if x > 0.0 {
                    let b = bump(x);
                    Dual::new(b, b / (x * x) * self.d)
                } else {
                    Dual::new(0.0, 0.0)
                }
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(DomainError::NegativeSqrt(x));
                }
                let r = x.sqrt();
                if r == 0.0 {
                    if self.d != 0.0 {
                        return Err(DomainError::NonFinite);
                    }
                    Dual::new(0.0, 0.0)
                } else {
                    Dual::new(r, self.d / (2.0 * r))
                }
            }
        })
    }
    fn is_finite(self) -> bool {
        self.v.is_finite() && self.d.is_finite()
    }
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    fn fold2(a: Expr, b: Expr, op: fn(f64, f64) -> f64, mk: fn(Box<Expr>, Box<Expr>) -> Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            let r = op(x, y);
            if r.is_finite() {
                return Expr::Const(r);
            }
        }
        mk(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        match a.as_const() {
            Some(x) => Expr::Const(-x),
            None => Expr::Neg(Box::new(a)),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        if let Some(x) = a.as_const() {
            if let Ok(r) = x.apply(f) {
                if r.is_finite() {
                    return Expr::Const(r);
                }
            }
        }
        Expr::Call(f, Box::new(a))
    }

    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }
    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }
    pub fn bump(self) -> Expr {
        Expr::call(Func::Bump, self)
    }

    /// Sum of a list; `0` when empty.
    pub fn sum(items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut it = items.into_iter();
        match it.next() {
            None => Expr::Const(0.0),
            Some(first) => it.fold(first, |acc, e| acc + e),
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, DomainError> {
        let r = match self {
            Expr::Const(v) => S::constant(*v),
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let num = a.eval(x)?;
                let den = b.eval(x)?;
                if den.value() == 0.0 {
                    return Err(DomainError::DivisionByZero);
                }
                num / den
            }
            Expr::Call(f, a) => a.eval(x)?.apply(*f)?,
        };
        if !r.is_finite() {
            return Err(DomainError::NonFinite);
        }
        Ok(r)
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(i) => {
                out.insert(*i);
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        self.vars().into_iter().next_back()
    }

    /// Rebuild with every variable replaced by `f(index)`, refolding as we go.
    pub fn map_vars(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(i) => f(*i),
            Expr::Neg(a) => Expr::neg(a.map_vars(f)),
            Expr::Add(a, b) => a.map_vars(f) + b.map_vars(f),
            Expr::Sub(a, b) => a.map_vars(f) - b.map_vars(f),
            Expr::Mul(a, b) => a.map_vars(f) * b.map_vars(f),
            Expr::Div(a, b) => a.map_vars(f) / b.map_vars(f),
            Expr::Call(func, a) => Expr::call(*func, a.map_vars(f)),
        }
    }

    pub fn shift(&self, offset: usize) -> Expr {
        self.map_vars(&|i| Expr::Var(i + offset))
    }

    pub fn reindex(&self, table: &[usize]) -> Expr {
        self.map_vars(&|i| Expr::Var(table[i]))
    }

    pub fn substitute(&self, with: &[Expr]) -> Expr {
        self.map_vars(&|i| with[i].clone())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(v) if v.is_sign_negative() => 3,
            _ => 4,
        }
    }

    /// Render with the given coordinate names. The output parses back to an
    /// identical tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> Displayed<'a> {
        Displayed { e: self, names }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool| -> fmt::Result {
            if paren {
                write!(f, "(")?;
                e.write(f, names)?;
                write!(f, ")")
            } else {
                e.write(f, names)
            }
        };
        match self {
            Expr::Const(v) => write!(f, "{}", v),
            Expr::Var(i) => match names.get(*i) {
                Some(n) => write!(f, "{}", n),
                None => write!(f, "_{}", i),
            },
            Expr::Neg(a) => {
                write!(f, "-")?;
                child(f, a, a.precedence() < 3)
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(f, names)?;
                write!(f, ")")
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let p = self.precedence();
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => " * ",
                    _ => " / ",
                };
                child(f, a, a.precedence() < p)?;
                write!(f, "{}", op)?;
                child(f, b, b.precedence() <= p)
            }
        }
    }
}

pub struct Displayed<'a> {
    e: &'a Expr,
    names: &'a [String],
}

impl fmt::Display for Displayed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.e.write(f, self.names)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::fold2(self, o, |a, b| a + b, Expr::Add)
    }
}
impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::fold2(self, o, |a, b| a - b, Expr::Sub)
    }
}
impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::fold2(self, o, |a, b| a * b, Expr::Mul)
    }
}
impl Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        if o.as_const() == Some(0.0) {
            return Expr::Div(Box::new(self), Box::new(o));
        }
        Expr::fold2(self, o, |a, b| a / b, Expr::Div)
    }
}
impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::c(self) * o
    }
}

/// Evaluate a list of expressions.
pub fn eval_all(exprs: &[Expr], x: &[f64]) -> Result<Vec<f64>, DomainError> {
    exprs.iter().map(|e| e.eval(x)).collect()
}

/// Dense Jacobian (`exprs.len()` rows, `n` columns), one forward pass per
/// variable that appears in each row.
pub fn jacobian(exprs: &[Expr], x: &[f64]) -> Result<nalgebra::DMatrix<f64>, DomainError> {
    let n = x.len();
    let mut jac = nalgebra::DMatrix::zeros(exprs.len(), n);
    let mut seed: Vec<Dual> = x.iter().map(|&v| Dual::new(v, 0.0)).collect();
    for (r, e) in exprs.iter().enumerate() {
        for j in e.vars() {
            seed[j].d = 1.0;
            let out = e.eval(&seed);
            seed[j].d = 0.0;
            jac[(r, j)] = out?.d;
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(0)
    }

    #[test]
    fn constants_fold() {
        let e = Expr::c(2.0) * Expr::c(3.0) + Expr::c(1.0);
        assert_eq!(e, Expr::Const(7.0));
        assert_eq!(-Expr::c(4.0), Expr::Const(-4.0));
        assert_eq!(Expr::c(0.0).cos(), Expr::Const(1.0));
        assert!(matches!(x() + Expr::c(0.0), Expr::Add(..)));
    }

    #[test]
    fn division_by_zero_is_kept_and_reported() {
        let e = Expr::c(1.0) / x();
        assert_eq!(e.eval(&[0.0]), Err(DomainError::DivisionByZero));
        let k = Expr::c(1.0) / Expr::c(0.0);
        assert!(matches!(k, Expr::Div(..)));
    }

    #[test]
    fn bump_guards_its_reciprocal() {
        let e = x().bump();
        assert_eq!(e.eval(&[0.0]).unwrap(), 0.0);
        assert_eq!(e.eval(&[-3.0]).unwrap(), 0.0);
        assert!((e.eval(&[1.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let d = e.eval(&[Dual::new(0.5, 1.0)]).unwrap();
        assert!((d.d - (-2.0f64).exp() / 0.25).abs() < 1e-14);
    }

    #[test]
    fn sqrt_domain() {
        assert!(matches!(x().sqrt().eval(&[-1.0]), Err(DomainError::NegativeSqrt(_))));
    }

    #[test]
    fn jacobian_of_product() {
        let e = vec![Expr::var(0) * Expr::var(1).sin()];
        let j = jacobian(&e, &[2.0, 0.3]).unwrap();
        assert!((j[(0, 0)] - 0.3f64.sin()).abs() < 1e-15);
        assert!((j[(0, 1)] - 2.0 * 0.3f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn substitution_composes() {
        let g = Expr::var(0) * Expr::var(0);
        let inner = [Expr::var(0) + Expr::c(1.0)];
        let h = g.substitute(&inner);
        assert_eq!(h.eval(&[2.0]).unwrap(), 9.0);
    }
}
