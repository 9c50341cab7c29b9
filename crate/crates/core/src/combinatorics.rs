//! Abel-type binomial identities and the sums derived from them, evaluated
//! in exact rational arithmetic.
//!
//! Conventions: `0^0 = 1`, and `z^{-1}` exists only for `z ≠ 0`.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};

use crate::lattice::MultiIndex;
use crate::ring::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainError {
    /// A base raised to a negative power is zero.
    ZeroBase { exponent: i64 },
    /// Index out of the admissible range (`n ≥ 1`, `k ≥ 1`, `k_j ≥ 1`).
    Index,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::ZeroBase { exponent } => {
                write!(f, "zero base raised to negative power {exponent}")
            }
            DomainError::Index => f.write_str("index outside the identity's range"),
        }
    }
}

impl core::error::Error for DomainError {}

/// Exact binomial coefficients and factorials up to a fixed bound.
pub struct Binomials {
    fact: Vec<BigInt>,
}

impl Binomials {
    pub fn new(max: usize) -> Self {
        let mut fact = Vec::with_capacity(max + 1);
        fact.push(BigInt::one());
        for i in 1..=max {
            let next = &fact[i - 1] * BigInt::from(i);
            fact.push(next);
        }
        Binomials { fact }
    }

    fn ensure(&mut self, n: usize) {
        while self.fact.len() <= n {
            let i = self.fact.len();
            let next = &self.fact[i - 1] * BigInt::from(i);
            self.fact.push(next);
        }
    }

    pub fn factorial(&mut self, n: usize) -> BigInt {
        self.ensure(n);
        self.fact[n].clone()
    }

    pub fn choose(&mut self, n: usize, k: usize) -> BigInt {
        if k > n {
            return BigInt::zero();
        }
        self.ensure(n);
        &self.fact[n] / (&self.fact[k] * &self.fact[n - k])
    }
}

/// `base^exponent` with `0^0 = 1`; negative powers of zero are an error.
pub fn power(base: &Rational, exponent: i64) -> Result<Rational, DomainError> {
    if exponent < 0 && base.is_zero() {
        return Err(DomainError::ZeroBase { exponent });
    }
    if exponent == 0 {
        return Ok(Rational::one());
    }
    let e = exponent.unsigned_abs();
    let p = Pow::pow(base, e as u32);
    Ok(if exponent < 0 { p.recip() } else { p })
}

fn n_q(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn abel_sum(x: &Rational, y: &Rational, n: u64, second: bool) -> Result<Rational, DomainError> {
    if n == 0 {
        return Err(DomainError::Index);
    }
    let mut b = Binomials::new(n as usize);
    let mut acc = Rational::zero();
    for k in 0..=n {
        let c = Rational::from_integer(b.choose(n as usize, k as usize));
        let left = power(&(x + n_q(k)), k as i64 - 1)?;
        let e = (n - k) as i64 - if second { 1 } else { 0 };
        let right = power(&(y + n_q(n - k)), e)?;
        acc += c * left * right;
    }
    Ok(acc)
}

/// `Σ_{k=0}^n C(n,k)(x+k)^{k−1}(y+n−k)^{n−k}`.
pub fn abel_lhs_i(x: &Rational, y: &Rational, n: u64) -> Result<Rational, DomainError> {
    abel_sum(x, y, n, false)
}

/// `x^{−1}(x+y+n)^n`.
pub fn abel_rhs_i(x: &Rational, y: &Rational, n: u64) -> Result<Rational, DomainError> {
    if n == 0 {
        return Err(DomainError::Index);
    }
    Ok(power(x, -1)? * power(&(x + y + n_q(n)), n as i64)?)
}

/// `Σ_{k=0}^n C(n,k)(x+k)^{k−1}(y+n−k)^{n−k−1}`.
pub fn abel_lhs_ii(x: &Rational, y: &Rational, n: u64) -> Result<Rational, DomainError> {
    abel_sum(x, y, n, true)
}

/// `(x^{−1} + y^{−1})(x+y+n)^{n−1}`.
pub fn abel_rhs_ii(x: &Rational, y: &Rational, n: u64) -> Result<Rational, DomainError> {
    if n == 0 {
        return Err(DomainError::Index);
    }
    Ok((power(x, -1)? + power(y, -1)?) * power(&(x + y + n_q(n)), n as i64 - 1)?)
}

fn int_pow(base: u64, exponent: u64) -> BigInt {
    Pow::pow(BigInt::from(base), exponent as u32)
}

/// `Σ_{m=1}^k C(k+1,m) m^m (k+1−m)^{k−m}`, which equals `k(k+1)^k`.
pub fn cor_i_sum(k: u64) -> Result<Rational, DomainError> {
    if k == 0 {
        return Err(DomainError::Index);
    }
    let mut b = Binomials::new(k as usize + 1);
    let mut acc = BigInt::zero();
    for m in 1..=k {
        acc += b.choose(k as usize + 1, m as usize) * int_pow(m, m) * int_pow(k + 1 - m, k - m);
    }
    Ok(Rational::from_integer(acc))
}

/// `Σ_{m=1}^k C(k+1,m) m^{m−1} (k+1−m)^{k−m}`, which equals `2k(k+1)^{k−1}`.
pub fn cor_ii_sum(k: u64) -> Result<Rational, DomainError> {
    if k == 0 {
        return Err(DomainError::Index);
    }
    let mut b = Binomials::new(k as usize + 1);
    let mut acc = BigInt::zero();
    for m in 1..=k {
        acc += b.choose(k as usize + 1, m as usize) * int_pow(m, m - 1) * int_pow(k + 1 - m, k - m);
    }
    Ok(Rational::from_integer(acc))
}

/// Closed form `k(k+1)^k`.
pub fn cor_i_closed(k: u64) -> Rational {
    Rational::from_integer(BigInt::from(k) * int_pow(k + 1, k))
}

/// Closed form `2k(k+1)^{k−1}`.
pub fn cor_ii_closed(k: u64) -> Rational {
    Rational::from_integer(BigInt::from(2 * k) * int_pow(k + 1, k.saturating_sub(1)))
}

/// Both sides of the three-dimensional product inequality and its verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cor3Check {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

/// Evaluates
/// `Σ_{1≤m_i≤k_i} m_1 Π_j m_j^{m_j−1}(k_j+1−m_j)^{k_j−m_j}/(m_j!(k_j+1−m_j)!)`
/// by direct triple summation against `4 k_1 Π_{j=1}^{3} (k_j+1)^{k_j}/(k_j+1)!`.
pub fn cor3_check(k: &MultiIndex) -> Result<Cor3Check, DomainError> {
    if k.0.contains(&0) {
        return Err(DomainError::Index);
    }
    let max = k.0.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut b = Binomials::new(max);
    // factor[j][m-1] = m^{m−1}(k_j+1−m)^{k_j−m}/(m!(k_j+1−m)!)
    let mut factor: [Vec<Rational>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for j in 0..3 {
        let kj = k.get(j) as u64;
        for m in 1..=kj {
            let num = int_pow(m, m - 1) * int_pow(kj + 1 - m, kj - m);
            let den = b.factorial(m as usize) * b.factorial((kj + 1 - m) as usize);
            factor[j].push(Rational::new(num, den));
        }
    }
    let mut lhs = Rational::zero();
    for (i1, f1) in factor[0].iter().enumerate() {
        let m1 = n_q(i1 as u64 + 1);
        for f2 in &factor[1] {
            for f3 in &factor[2] {
                lhs += &m1 * f1 * f2 * f3;
            }
        }
    }
    let mut rhs = n_q(4 * k.get(0) as u64);
    for j in 0..3 {
        let kj = k.get(j) as u64;
        rhs *= Rational::new(int_pow(kj + 1, kj), b.factorial(kj as usize + 1));
    }
    let holds = lhs <= rhs;
    Ok(Cor3Check { lhs, rhs, holds })
}
