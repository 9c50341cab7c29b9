//! Smallness hypothesis on Euler data, the coefficient decay bound it
//! implies, and tail bounds for the discarded modes of a truncated series.
//!
//! Every bound value is a float rounded down by [`SAFETY`], so a reported
//! "holds" never depends on the last bits of `exp`.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Pow, Signed, Zero};

use crate::euler::{self, p_slope, EulerError, EulerSpec};
use crate::lattice::MultiIndex;
use crate::ring::{to_f64, EvalError, Rational};
use crate::table::CoefficientTable;

/// Relative amount by which every bound is lowered before comparison.
pub const SAFETY: f64 = 1e-14;

const DATA_CONST: f64 = 1e-3;
const VELOCITY_CONST: f64 = 1e-2;
const PRESSURE_CONST: f64 = 60e-4;
const FORCING_CONST: f64 = 90e-4;

#[derive(Clone, Debug, PartialEq)]
pub enum BoundError {
    ZeroMode,
    NonPositiveEpsilon,
    NotEulerTable,
    Euler(EulerError),
    Eval(EvalError),
}

impl fmt::Display for BoundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundError::ZeroMode => f.write_str("bound undefined for the zero mode"),
            BoundError::NonPositiveEpsilon => f.write_str("epsilon must be positive"),
            BoundError::NotEulerTable => f.write_str("decay bounds apply to Euler tables only"),
            BoundError::Euler(e) => write!(f, "{e}"),
            BoundError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BoundError {}

impl From<EulerError> for BoundError {
    fn from(e: EulerError) -> Self {
        BoundError::Euler(e)
    }
}

impl From<EvalError> for BoundError {
    fn from(e: EvalError) -> Self {
        BoundError::Eval(e)
    }
}

fn round_down(x: f64) -> f64 {
    x * (1.0 - SAFETY)
}

/// `Π_{k_j>0} k_j^{k_j−1}/k_j!`, exact.
pub fn mode_weight(k: &MultiIndex) -> Rational {
    let mut acc = Rational::from_integer(BigInt::from(1));
    for &kj in &k.0 {
        if kj == 0 {
            continue;
        }
        let num: BigInt = Pow::pow(BigInt::from(kj), kj - 1);
        let den: BigInt = (1..=kj).map(BigInt::from).product();
        acc *= Rational::new(num, den);
    }
    acc
}

fn check_epsilon(epsilon: &Rational) -> Result<f64, BoundError> {
    if !epsilon.is_positive() {
        return Err(BoundError::NonPositiveEpsilon);
    }
    Ok(to_f64(epsilon))
}

/// `c · Π k_j^{k_j−1}/k_j! · exp(−½P_k(t) − |k|(1+ε))`, rounded down.
fn scaled_bound(c: f64, k: &MultiIndex, eps: f64, slope: f64, t: f64) -> f64 {
    let exponent = -0.5 * slope * t - k.level() as f64 * (1.0 + eps);
    round_down(c * to_f64(&mode_weight(k)) * libm::exp(exponent))
}

/// `e^{−|k|(1+ε)}/10³ · Π k_j^{k_j−1}/k_j!`: the admissible size of `|B_jk|`.
pub fn data_bound(k: &MultiIndex, epsilon: &Rational) -> Result<f64, BoundError> {
    if k.is_zero() {
        return Err(BoundError::ZeroMode);
    }
    let eps = check_epsilon(epsilon)?;
    Ok(scaled_bound(DATA_CONST, k, eps, 0.0, 0.0))
}

/// `(1/100) Π k_j^{k_j−1}/k_j! · exp(−½P_k(t) − |k|(1+ε))`.
pub fn coeff_bound(
    k: &MultiIndex,
    epsilon: &Rational,
    zero_mode: &[Rational; 3],
    t: f64,
) -> Result<f64, BoundError> {
    if k.is_zero() {
        return Err(BoundError::ZeroMode);
    }
    let eps = check_epsilon(epsilon)?;
    let slope = to_f64(&p_slope(k, zero_mode));
    Ok(scaled_bound(VELOCITY_CONST, k, eps, slope, t))
}

/// Pressure counterpart of [`coeff_bound`] with constant `60/10⁴`.
pub fn pressure_bound(
    k: &MultiIndex,
    epsilon: &Rational,
    zero_mode: &[Rational; 3],
    t: f64,
) -> Result<f64, BoundError> {
    if k.is_zero() {
        return Err(BoundError::ZeroMode);
    }
    let eps = check_epsilon(epsilon)?;
    let slope = to_f64(&p_slope(k, zero_mode));
    Ok(scaled_bound(PRESSURE_CONST, k, eps, slope, t))
}

/// Bound on `|Q_ik|` with constant `90 k_max/10⁴`, `k_max` the largest
/// component of `k`.
pub fn forcing_bound(
    k: &MultiIndex,
    epsilon: &Rational,
    zero_mode: &[Rational; 3],
    t: f64,
) -> Result<f64, BoundError> {
    if k.is_zero() {
        return Err(BoundError::ZeroMode);
    }
    let eps = check_epsilon(epsilon)?;
    let slope = to_f64(&p_slope(k, zero_mode));
    let kmax = k.sorted_desc()[0] as f64;
    Ok(scaled_bound(FORCING_CONST * kmax, k, eps, slope, t))
}

/// Verdict on one listed mode of the initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeDiagnostic {
    pub k: MultiIndex,
    /// `max_j |B_jk|`
    pub magnitude: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    /// `B_{j,0} ≤ −2` for every `j`.
    pub zero_mode_ok: bool,
    pub modes: Vec<ModeDiagnostic>,
}

impl Admissibility {
    pub fn holds(&self) -> bool {
        self.zero_mode_ok && self.modes.iter().all(|m| m.ok)
    }

    pub fn first_failure(&self) -> Option<&ModeDiagnostic> {
        self.modes.iter().find(|m| !m.ok)
    }
}

fn admissibility_of<'a, I>(zero_mode: &[Rational; 3], epsilon: &Rational, modes: I) -> Result<Admissibility, BoundError>
where
    I: IntoIterator<Item = (MultiIndex, &'a [Rational; 3])>,
{
    let minus_two = Rational::from_integer(BigInt::from(-2));
    let zero_mode_ok = zero_mode.iter().all(|b| *b <= minus_two);
    let mut out = Vec::new();
    for (k, b) in modes {
        let bound = data_bound(&k, epsilon)?;
        let exact = Rational::from_f64(bound).unwrap_or_else(Rational::zero);
        let ok = b.iter().all(|x| x.abs() <= exact);
        let magnitude = b.iter().map(|x| to_f64(&x.abs())).fold(0.0, f64::max);
        out.push(ModeDiagnostic {
            k,
            magnitude,
            bound,
            ok,
        });
    }
    Ok(Admissibility {
        zero_mode_ok,
        modes: out,
    })
}

/// Checks the smallness hypothesis: `B_{j,0} ≤ −2` and
/// `|B_jk| ≤ e^{−|k|(1+ε)}/10³ · Π k_j^{k_j−1}/k_j!` for every listed mode.
/// The comparison is exact against the rounded-down float bound.
pub fn admissible(spec: &EulerSpec) -> Result<Admissibility, BoundError> {
    admissibility_of(
        &spec.zero_mode,
        &spec.epsilon,
        spec.data.iter().map(|(k, b)| (*k, b)),
    )
}

/// Projects `direction` onto `k^⊥` and rescales it so that its largest
/// component is at most `fraction` times the admissible size of mode `k`. The result
/// satisfies `k·B = 0` exactly; `None` if the projection vanishes.
pub fn fit_admissible(
    k: &MultiIndex,
    direction: &[Rational; 3],
    epsilon: &Rational,
    fraction: &Rational,
) -> Result<Option<[Rational; 3]>, BoundError> {
    let bound = Rational::from_f64(data_bound(k, epsilon)?).unwrap_or_else(Rational::zero);
    let kq = k.0.map(|c| Rational::from_integer(BigInt::from(c)));
    let kv = (0..3).fold(Rational::zero(), |acc, j| acc + &kq[j] * &direction[j]);
    let norm = Rational::from_integer(BigInt::from(k.norm_sq()));
    let proj = [0, 1, 2].map(|j| &direction[j] - &kv * &kq[j] / &norm);
    let Some(max) = proj.iter().map(Signed::abs).max() else {
        return Ok(None);
    };
    if max.is_zero() {
        return Ok(None);
    }
    // a short decimal just below the target keeps later denominators small
    let unit = Rational::from_integer(BigInt::from(1_000_000_000));
    let target = (bound * fraction * &unit).floor() / unit;
    let s = target / max;
    Ok(Some(proj.map(|c| c * &s)))
}

/// Which coefficient a [`DecayRecord`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    Velocity(usize),
    Pressure,
    /// `Q_ik`
    Forcing(usize),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Velocity(i) => write!(f, "T{}", i + 1),
            Quantity::Pressure => f.write_str("T4"),
            Quantity::Forcing(i) => write!(f, "Q{}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRecord {
    pub k: MultiIndex,
    pub quantity: Quantity,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
    /// `value / bound`
    pub margin: f64,
}

fn record(k: MultiIndex, quantity: Quantity, t: f64, value: f64, bound: f64) -> DecayRecord {
    let margin = if value == 0.0 { 0.0 } else { value / bound };
    DecayRecord {
        k,
        quantity,
        t,
        value,
        bound,
        margin,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub admissibility: Admissibility,
    pub records: Vec<DecayRecord>,
    pub max_level: u32,
    /// [`tail_bound`] at the table's truncation level.
    pub tail: f64,
    pub pressure_tail: f64,
}

impl BoundReport {
    fn worst_by(&self, pick: impl Fn(&Quantity) -> bool) -> Option<&DecayRecord> {
        self.records
            .iter()
            .filter(|r| pick(&r.quantity))
            .fold(None, |best: Option<&DecayRecord>, r| match best {
                Some(b) if b.margin >= r.margin => Some(b),
                _ => Some(r),
            })
    }

    pub fn worst_velocity(&self) -> Option<&DecayRecord> {
        self.worst_by(|q| matches!(q, Quantity::Velocity(_)))
    }

    pub fn worst_pressure(&self) -> Option<&DecayRecord> {
        self.worst_by(|q| matches!(q, Quantity::Pressure))
    }

    pub fn worst_forcing(&self) -> Option<&DecayRecord> {
        self.worst_by(|q| matches!(q, Quantity::Forcing(_)))
    }

    pub fn violations(&self) -> impl Iterator<Item = &DecayRecord> {
        self.records.iter().filter(|r| !(r.margin <= 1.0))
    }

    /// Every margin is at most one.
    pub fn holds(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Decay records of one mode at every sample time: the three velocity
/// components, `T_4k`, and the three components of `Q_k`.
pub fn mode_records(
    table: &CoefficientTable,
    k: &MultiIndex,
    epsilon: &Rational,
    t_samples: &[f64],
) -> Result<Vec<DecayRecord>, BoundError> {
    let zero_mode = table.zero_mode().ok_or(BoundError::NotEulerTable)?;
    let c = table.get(k).ok_or(EulerError::MissingMode(*k))?;
    let q = euler::forcing_q_all(k, table)?;
    let mut out = Vec::with_capacity(7 * t_samples.len());
    for &t in t_samples {
        let vb = coeff_bound(k, epsilon, zero_mode, t)?;
        for (i, f) in c.velocity.iter().enumerate() {
            out.push(record(*k, Quantity::Velocity(i), t, f.eval(t)?.abs(), vb));
        }
        let pb = pressure_bound(k, epsilon, zero_mode, t)?;
        out.push(record(*k, Quantity::Pressure, t, c.pressure.eval(t)?.abs(), pb));
        let qb = forcing_bound(k, epsilon, zero_mode, t)?;
        for (i, f) in q.iter().enumerate() {
            out.push(record(*k, Quantity::Forcing(i), t, f.eval(t)?.abs(), qb));
        }
    }
    Ok(out)
}

/// Assembles a report from per-mode records, in mode order.
pub fn report_from_records(
    table: &CoefficientTable,
    epsilon: &Rational,
    records: Vec<DecayRecord>,
) -> Result<BoundReport, BoundError> {
    let zero_mode = table.zero_mode().ok_or(BoundError::NotEulerTable)?;
    let initial: Vec<(MultiIndex, [Rational; 3])> = table
        .iter()
        .filter(|(k, _)| !k.is_zero())
        .map(|(k, c)| (*k, c.velocity.clone().map(|f| f.value_at_zero())))
        .collect();
    let admissibility = admissibility_of(zero_mode, epsilon, initial.iter().map(|(k, b)| (*k, b)))?;
    let eps = check_epsilon(epsilon)?;
    Ok(BoundReport {
        admissibility,
        records,
        max_level: table.max_level(),
        tail: tail_sum(VELOCITY_CONST * 3.0, table.max_level(), eps),
        pressure_tail: tail_sum(PRESSURE_CONST, table.max_level(), eps),
    })
}

/// Compares every coefficient of every nonzero mode against its bound at
/// each sample time. Admissibility is read off `T_jk(0)`.
pub fn check_decay(
    table: &CoefficientTable,
    epsilon: &Rational,
    t_samples: &[f64],
) -> Result<BoundReport, BoundError> {
    let mut records = Vec::new();
    for (k, _) in table.iter().filter(|(k, _)| !k.is_zero()) {
        records.extend(mode_records(table, k, epsilon, t_samples)?);
    }
    report_from_records(table, epsilon, records)
}

/// Number of modes on level `l`.
fn level_count(l: u32) -> f64 {
    let l = l as f64;
    (l + 1.0) * (l + 2.0) / 2.0
}

/// `Σ_{l>n} w(l) e^{−lε}` for a weight `w` of polynomial growth, summed
/// until the terms decrease geometrically and then closed with the
/// geometric remainder, so the result is an upper bound.
fn weighted_tail(n: u32, eps: f64, w: impl Fn(u32) -> f64) -> f64 {
    let q = libm::exp(-eps);
    let mut sum = 0.0;
    let mut l = n + 1;
    loop {
        let term = w(l) * libm::exp(-(l as f64) * eps);
        let next = w(l + 1) * libm::exp(-((l + 1) as f64) * eps);
        sum += term;
        // ratio of successive terms decreases towards q once w grows
        // polynomially; use it as a geometric majorant of the rest.
        let ratio = if term > 0.0 { next / term } else { 0.0 };
        if ratio < 1.0 && (next <= 1e-17 * sum || l > n + 100_000) {
            let r = ratio.max(q);
            return sum + next / (1.0 - r);
        }
        l += 1;
    }
}

fn tail_sum(c: f64, n: u32, eps: f64) -> f64 {
    c * weighted_tail(n, eps, level_count)
}

/// `Σ_{l>N} 3·(l+1)(l+2)/2 · (1/100) e^{−lε}`: sup-norm bound on the
/// discarded velocity terms over ℝ³₊ × [0,∞).
pub fn tail_bound(n: u32, epsilon: &Rational) -> Result<f64, BoundError> {
    Ok(tail_sum(VELOCITY_CONST * 3.0, n, check_epsilon(epsilon)?))
}

/// Pressure analogue of [`tail_bound`] with constant `60/10⁴`.
pub fn pressure_tail_bound(n: u32, epsilon: &Rational) -> Result<f64, BoundError> {
    Ok(tail_sum(PRESSURE_CONST, n, check_epsilon(epsilon)?))
}

/// Estimate of the PDE residual of a series truncated at level `N`, per
/// component: the residual lives on the modes above `N`, where each mode is
/// majorized by `|T'_ik| + |k·B_0||T_ik| + k_i|T_4k|`, with
/// `|T'_ik| ≤ |k·B_0||T_ik| + |Q_ik|`. On level `l` this gives
/// `(2 l max|B_0|/100 + 90 l/10⁴ + 60 l/10⁴) e^{−lε}` per mode.
pub fn residual_tail_estimate(n: u32, epsilon: &Rational, zero_mode: &[Rational; 3]) -> Result<f64, BoundError> {
    let eps = check_epsilon(epsilon)?;
    let b0 = zero_mode.iter().map(|b| to_f64(&b.abs())).fold(0.0, f64::max);
    let per_level = |l: u32| {
        let lf = l as f64;
        level_count(l) * lf * (2.0 * b0 * VELOCITY_CONST + FORCING_CONST + PRESSURE_CONST)
    };
    Ok(weighted_tail(n, eps, per_level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::solve_euler;
    use crate::ring::{int, rat};
    use alloc::collections::BTreeMap;

    fn minus_two() -> [Rational; 3] {
        [int(-2), int(-2), int(-2)]
    }

    fn spec(data: BTreeMap<MultiIndex, [Rational; 3]>, max_level: u32) -> EulerSpec {
        EulerSpec {
            zero_mode: minus_two(),
            data,
            epsilon: rat(1, 2),
            max_level,
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    #[test]
    fn zero_data_is_admissible() {
        let a = admissible(&spec(BTreeMap::new(), 3)).unwrap();
        assert!(a.holds());
        let mut s = spec(BTreeMap::new(), 3);
        s.zero_mode = [int(-1), int(-2), int(-2)];
        assert!(!admissible(&s).unwrap().holds());
    }

    #[test]
    fn data_bound_example() {
        let k = MultiIndex::new(1, 0, 0);
        let b = data_bound(&k, &rat(1, 2)).unwrap();
        assert!(close(b, libm::exp(-1.5) / 1000.0, 1e-13));
        let mut data = BTreeMap::new();
        data.insert(k, [int(0), rat(2, 10_000), int(0)]);
        assert!(admissible(&spec(data.clone(), 1)).unwrap().holds());
        data.insert(k, [int(0), rat(3, 10_000), int(0)]);
        let a = admissible(&spec(data, 1)).unwrap();
        assert_eq!(a.first_failure().map(|m| m.k), Some(k));
    }

    #[test]
    fn coeff_bound_examples() {
        let z = minus_two();
        let e = rat(1, 2);
        let b1 = coeff_bound(&MultiIndex::new(1, 0, 0), &e, &z, 0.0).unwrap();
        assert!(close(b1, libm::exp(-1.5) / 100.0, 1e-13));
        let b2 = coeff_bound(&MultiIndex::new(2, 0, 0), &e, &z, 0.0).unwrap();
        assert!(close(b2, libm::exp(-3.0) / 100.0, 1e-13));
        let b3 = coeff_bound(&MultiIndex::new(1, 0, 0), &e, &z, 1.0).unwrap();
        assert!(close(b3, b1 * libm::exp(-1.0), 1e-13));
        assert_eq!(coeff_bound(&MultiIndex::ZERO, &e, &z, 0.0), Err(BoundError::ZeroMode));
        assert!(b1 < libm::exp(-1.5) / 100.0);
    }

    #[test]
    fn coeff_bound_decreases_in_time() {
        let z = [int(-2), int(-3), rat(-5, 2)];
        let k = MultiIndex::new(2, 1, 3);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let b = coeff_bound(&k, &int(1), &z, i as f64 * 0.25).unwrap();
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn mode_weight_uses_nonzero_components() {
        assert_eq!(mode_weight(&MultiIndex::new(2, 0, 0)), int(1));
        assert_eq!(mode_weight(&MultiIndex::new(3, 1, 0)), rat(3, 2));
        assert_eq!(mode_weight(&MultiIndex::new(0, 0, 0)), int(1));
    }

    #[test]
    fn fitted_data_is_admissible() {
        let k = MultiIndex::new(2, 1, 0);
        let b = fit_admissible(&k, &[int(1), int(5), int(-3)], &rat(1, 2), &rat(9, 10))
            .unwrap()
            .unwrap();
        let dot = &b[0] * int(2) + &b[1];
        assert_eq!(dot, int(0));
        let mut data = BTreeMap::new();
        data.insert(k, b);
        assert!(admissible(&spec(data, 3)).unwrap().holds());
        let parallel = fit_admissible(&k, &[int(2), int(1), int(0)], &rat(1, 2), &int(1)).unwrap();
        assert_eq!(parallel, None);
    }

    #[test]
    fn zero_data_has_zero_margins() {
        let table = solve_euler(&spec(BTreeMap::new(), 3)).unwrap();
        let r = check_decay(&table, &rat(1, 2), &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(r.records.iter().all(|x| x.margin == 0.0));
        assert!(r.holds());
    }

    #[test]
    fn single_mode_within_bound() {
        let k = MultiIndex::new(1, 1, 0);
        let beta = rat(4, 100_000);
        let mut data = BTreeMap::new();
        data.insert(k, [beta.clone(), -beta, int(0)]);
        let s = spec(data, 2);
        assert!(admissible(&s).unwrap().holds());
        let table = solve_euler(&s).unwrap();
        let r = check_decay(&table, &s.epsilon, &[0.0, 0.5, 1.0, 2.0]).unwrap();
        assert!(r.admissibility.holds());
        assert!(r.holds(), "{:?}", r.worst_velocity());
        let w = r.worst_velocity().unwrap();
        assert_eq!(w.k, k);
        // |T| = β e^{−4t}, bound = e^{−2t − 3}/100
        let expected = 4e-5 * libm::exp(-4.0 * w.t) / (libm::exp(-2.0 * w.t - 3.0) / 100.0);
        assert!(close(w.margin, expected, 1e-12));
    }

    #[test]
    fn tail_matches_closed_form() {
        // Σ_{l≥0} (l+1)(l+2)/2 q^l = (1−q)^{−3}
        for &(n, e) in &[(0u32, 1i64), (3, 1), (6, 2)] {
            let q = libm::exp(-(e as f64) / 2.0);
            let head: f64 = (0..=n).map(|l| level_count(l) * q.powi(l as i32)).sum();
            let want = 0.03 * (1.0 / (1.0 - q).powi(3) - head);
            let got = tail_bound(n, &rat(e, 2)).unwrap();
            assert!(got >= want * (1.0 - 1e-12));
            assert!(close(got, want, 1e-9), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn tail_is_monotone() {
        let mut prev = f64::INFINITY;
        for n in 0..30 {
            let v = tail_bound(n, &rat(1, 2)).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(tail_bound(2, &int(4)).unwrap() < tail_bound(2, &int(1)).unwrap());
        assert!(pressure_tail_bound(2, &int(1)).unwrap() < tail_bound(2, &int(1)).unwrap());
        assert_eq!(tail_bound(2, &int(0)), Err(BoundError::NonPositiveEpsilon));
    }

    #[test]
    fn residual_estimate_decreases() {
        let z = minus_two();
        let a = residual_tail_estimate(6, &rat(1, 2), &z).unwrap();
        let b = residual_tail_estimate(8, &rat(1, 2), &z).unwrap();
        assert!(b < a && b > 0.0);
    }
}
