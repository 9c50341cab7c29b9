//! Exact scalars and the exponential-polynomial ring.
//!
//! Every time-dependent coefficient produced by the solvers is an
//! [`ExpPoly`]: a finite sum `Σ c·t^m·e^{a·t}` with rational `c` and `a`.
//! The class is closed under `+`, `·`, `d/dt` and `∫₀ᵗ`, so the recursions
//! never leave exact arithmetic. Floating point only appears in
//! [`ExpPoly::eval`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Builds `num/den` in lowest terms. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Nearest `f64` to an exact rational. Huge or tiny values saturate to
/// `±inf` / `0`.
pub fn to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        return v;
    }
    // num-rational gives up only when both parts overflow; fall back to a
    // scaled division of the leading digits.
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Error raised by [`ExpPoly::eval`].
#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// `exp(a·t)` or `t^m` left the `f64` range.
    Overflow { power: u32, rate: f64, t: f64 },
    /// The sample point itself was not finite.
    NonFinite(f64),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Overflow { power, rate, t } => write!(
                f,
                "floating overflow evaluating t^{power}·e^({rate}·t) at t = {t}"
            ),
            EvalError::NonFinite(t) => write!(f, "sample point {t} is not finite"),
        }
    }
}

impl core::error::Error for EvalError {}

/// One term `coeff · t^power · e^{rate·t}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Rational,
    pub power: u32,
    pub rate: Rational,
}

impl Term {
    fn key_cmp(&self, other: &Term) -> Ordering {
        self.power
            .cmp(&other.power)
            .then_with(|| self.rate.cmp(&other.rate))
    }
}

/// Exponential polynomial `Σ c·t^m·e^{a·t}` in canonical form.
///
/// Terms are sorted by `(power, rate)`, no two share a key and no
/// coefficient is zero, so structural equality is mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, 0, Rational::zero())
    }

    /// `c·t^power·e^{rate·t}`.
    pub fn term(coeff: Rational, power: u32, rate: Rational) -> Self {
        if coeff.is_zero() {
            return Self::zero();
        }
        ExpPoly {
            terms: alloc::vec![Term { coeff, power, rate }],
        }
    }

    /// `e^{rate·t}`.
    pub fn exp(rate: Rational) -> Self {
        Self::term(Rational::one(), 0, rate)
    }

    /// `t^power`.
    pub fn t_pow(power: u32) -> Self {
        Self::term(Rational::one(), power, Rational::zero())
    }

    /// Canonicalizes an arbitrary list of terms: like terms merge and
    /// cancelled terms vanish.
    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Self {
        let mut acc: BTreeMap<(u32, Rational), Rational> = BTreeMap::new();
        for t in terms {
            if t.coeff.is_zero() {
                continue;
            }
            let slot = acc.entry((t.power, t.rate)).or_insert_with(Rational::zero);
            *slot += t.coeff;
        }
        ExpPoly {
            terms: acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|((power, rate), coeff)| Term { coeff, power, rate })
                .collect(),
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True iff this is the zero function. Exact, no tolerance.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * c,
                    power: t.power,
                    rate: t.rate.clone(),
                })
                .collect(),
        }
    }

    /// Multiplies by `e^{rate·t}`. A uniform shift keeps the term order.
    pub fn shift_rate(&self, rate: &Rational) -> Self {
        ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.clone(),
                    power: t.power,
                    rate: &t.rate + rate,
                })
                .collect(),
        }
    }

    /// Exact derivative.
    pub fn diff(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                out.push(Term {
                    coeff: &t.coeff * Rational::from_integer(BigInt::from(t.power)),
                    power: t.power - 1,
                    rate: t.rate.clone(),
                });
            }
            if !t.rate.is_zero() {
                out.push(Term {
                    coeff: &t.coeff * &t.rate,
                    power: t.power,
                    rate: t.rate.clone(),
                });
            }
        }
        Self::from_terms(out)
    }

    /// The antiderivative vanishing at `t = 0`.
    ///
    /// A zero rate integrates to a power of `t`, which is how resonant
    /// integrands are handled. Otherwise
    /// `∫₀ᵗ s^m e^{as} ds = Σ_{i=0}^{m} (−1)^i m!/(m−i)! · t^{m−i} e^{at} / a^{i+1} − (−1)^m m!/a^{m+1}`.
    pub fn int0(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            if t.rate.is_zero() {
                out.push(Term {
                    coeff: &t.coeff / Rational::from_integer(BigInt::from(t.power + 1)),
                    power: t.power + 1,
                    rate: Rational::zero(),
                });
                continue;
            }
            let inv_a = t.rate.recip();
            // falling = m!/(m−i)!, inv_pow = a^{-(i+1)}
            let mut falling = Rational::one();
            let mut inv_pow = inv_a.clone();
            for i in 0..=t.power {
                let sign = if i % 2 == 0 { Rational::one() } else { -Rational::one() };
                out.push(Term {
                    coeff: &t.coeff * &sign * &falling * &inv_pow,
                    power: t.power - i,
                    rate: t.rate.clone(),
                });
                if i == t.power {
                    // constant making F(0) = 0
                    out.push(Term {
                        coeff: -(&t.coeff * &sign * &falling * &inv_pow),
                        power: 0,
                        rate: Rational::zero(),
                    });
                } else {
                    falling *= Rational::from_integer(BigInt::from(t.power - i));
                    inv_pow *= &inv_a;
                }
            }
        }
        Self::from_terms(out)
    }

    /// Exact value at `t = 0`.
    pub fn value_at_zero(&self) -> Rational {
        self.terms
            .iter()
            .filter(|t| t.power == 0)
            .fold(Rational::zero(), |acc, t| acc + &t.coeff)
    }

    /// Double-precision value at `t`. Rationals are converted only here.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        if !t.is_finite() {
            return Err(EvalError::NonFinite(t));
        }
        let mut sum = 0.0;
        for term in &self.terms {
            let rate = to_f64(&term.rate);
            let e = libm::exp(rate * t);
            let p = libm::pow(t, term.power as f64);
            let v = to_f64(&term.coeff) * p * e;
            if !e.is_finite() || !p.is_finite() || !v.is_finite() {
                return Err(EvalError::Overflow {
                    power: term.power,
                    rate,
                    t,
                });
            }
            sum += v;
        }
        Ok(sum)
    }

    /// `Σ |c|·t^m·e^{a·t}`; a majorant used for round-off scales.
    pub fn eval_abs(&self, t: f64) -> Result<f64, EvalError> {
        let abs = ExpPoly {
            terms: self
                .terms
                .iter()
                .map(|x| Term {
                    coeff: x.coeff.abs(),
                    power: x.power,
                    rate: x.rate.clone(),
                })
                .collect(),
        };
        abs.eval(t.abs())
    }

    /// If `self = c·t` (no constant, no exponentials), returns the slope `c`.
    /// The zero function has slope zero.
    pub fn linear_slope(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [t] if t.power == 1 && t.rate.is_zero() => Some(t.coeff.clone()),
            _ => None,
        }
    }

    /// Highest power of `t` present, `None` for zero.
    pub fn max_power(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.power).max()
    }
}

/// Floating-point snapshot of an [`ExpPoly`] for repeated evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompiledExpPoly {
    terms: Vec<(f64, i32, f64)>,
}

impl CompiledExpPoly {
    /// Value at `t`; may be non-finite where [`ExpPoly::eval`] reports overflow.
    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, m, a)| c * libm::pow(t, m as f64) * libm::exp(a * t))
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl From<&ExpPoly> for CompiledExpPoly {
    fn from(f: &ExpPoly) -> Self {
        CompiledExpPoly {
            terms: f
                .terms
                .iter()
                .map(|t| (to_f64(&t.coeff), t.power as i32, to_f64(&t.rate)))
                .collect(),
        }
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}", t.coeff)?;
            match t.power {
                0 => {}
                1 => f.write_str("·t")?,
                m => write!(f, "·t^{m}")?,
            }
            if !t.rate.is_zero() {
                write!(f, "·e^({}t)", t.rate)?;
            }
        }
        Ok(())
    }
}

fn merge_add(a: &[Term], b: &[Term], negate_b: bool) -> ExpPoly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let take_b = |t: &Term| {
        if negate_b {
            Term {
                coeff: -t.coeff.clone(),
                power: t.power,
                rate: t.rate.clone(),
            }
        } else {
            t.clone()
        }
    };
    while i < a.len() && j < b.len() {
        match a[i].key_cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(take_b(&b[j]));
                j += 1;
            }
            Ordering::Equal => {
                let coeff = if negate_b {
                    &a[i].coeff - &b[j].coeff
                } else {
                    &a[i].coeff + &b[j].coeff
                };
                if !coeff.is_zero() {
                    out.push(Term {
                        coeff,
                        power: a[i].power,
                        rate: a[i].rate.clone(),
                    });
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().map(take_b));
    ExpPoly { terms: out }
}

impl<'a> Add<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &'a ExpPoly) -> ExpPoly {
        merge_add(&self.terms, &rhs.terms, false)
    }
}

impl<'a> Sub<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &'a ExpPoly) -> ExpPoly {
        merge_add(&self.terms, &rhs.terms, true)
    }
}

impl<'a> Mul<&'a ExpPoly> for &'a ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &'a ExpPoly) -> ExpPoly {
        if self.is_zero() || rhs.is_zero() {
            return ExpPoly::zero();
        }
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for x in &self.terms {
            for y in &rhs.terms {
                out.push(Term {
                    coeff: &x.coeff * &y.coeff,
                    power: x.power + y.power,
                    rate: &x.rate + &y.rate,
                });
            }
        }
        ExpPoly::from_terms(out)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<ExpPoly> for ExpPoly {
            type Output = ExpPoly;
            fn $m(self, rhs: ExpPoly) -> ExpPoly {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a ExpPoly> for ExpPoly {
            type Output = ExpPoly;
            fn $m(self, rhs: &'a ExpPoly) -> ExpPoly {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        (&self).neg()
    }
}

/// Pointwise sum.
pub fn ep_add(f: &ExpPoly, g: &ExpPoly) -> ExpPoly {
    f + g
}

/// Pointwise product.
pub fn ep_mul(f: &ExpPoly, g: &ExpPoly) -> ExpPoly {
    f * g
}

pub fn ep_diff(f: &ExpPoly) -> ExpPoly {
    f.diff()
}

pub fn ep_int0(f: &ExpPoly) -> ExpPoly {
    f.int0()
}

pub fn ep_eval(f: &ExpPoly, t: f64) -> Result<f64, EvalError> {
    f.eval(t)
}

pub fn ep_is_zero(f: &ExpPoly) -> bool {
    f.is_zero()
}
