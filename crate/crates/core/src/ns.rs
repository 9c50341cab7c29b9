//! Finite series solution of the forced Navier-Stokes problem along one wave
//! direction `λ`, basis `ξ_k = e^{k(λ·x)}`, `k = 0..n`.
//!
//! For `k ≥ 1` the mode equations are
//!
//! ```text
//! T'_jk = M'_k(t) T_jk + B_jk − λ_j k T_4k,    Σ_j λ_j T_jk = 0,
//! M_k(t) = ν Σ_i (λ_i k)² t − Σ_i λ_i k ∫₀ᵗ T_i0(s) ds
//! ```
//!
//! The viscous term enters with a plus sign because `Δξ_k = k²|λ|² ξ_k` grows
//! with the basis; the second part of `M_k` is the advection of mode `k` by
//! the zero mode. Interactions between two modes `k, m ≥ 1` cancel because
//! `Σ_i λ_i T_ik = 0`, which keeps the series finite.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::lattice::MultiIndex;
use crate::quadrature::{self, QuadError, Tolerance};
use crate::ring::{CompiledExpPoly, EvalError, ExpPoly, Rational};
use crate::table::{CoefficientTable, Fingerprint, ModeCoeffs, ProblemMeta};

/// Cauchy data `ν, λ, n, A_jk, B_jk(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NsSpec {
    pub nu: Rational,
    pub lambda: [Rational; 3],
    pub n: u32,
    /// Initial coefficients `A_jk`; absent modes are zero.
    pub a: BTreeMap<u32, [Rational; 3]>,
    /// Forcing coefficients `B_jk(t)`; absent modes are zero.
    pub b: BTreeMap<u32, [ExpPoly; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NsError {
    /// `λ_j = 0` for the given component.
    ZeroLambda(usize),
    NegativeViscosity,
    NoModes,
    /// Data given for a mode above `n`.
    ModeOutOfRange(u32),
    /// `λ·A_k ≠ 0` for a mode `k ≥ 1`.
    CompatibilityViolation(u32),
    /// An operation that needs `k ≥ 1` received `k = 0`.
    ZeroMode,
    /// `M_k` is not linear in `t`, so `T_jk` has no exponential-polynomial
    /// closed form; use [`solve_ns_numeric`].
    NotSymbolic(u32),
    Quadrature(QuadError),
    Eval(EvalError),
}

impl fmt::Display for NsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NsError::ZeroLambda(j) => write!(f, "lambda component {} is zero", j + 1),
            NsError::NegativeViscosity => f.write_str("viscosity must be nonnegative"),
            NsError::NoModes => f.write_str("mode count n must be positive"),
            NsError::ModeOutOfRange(k) => write!(f, "mode {k} exceeds the mode count"),
            NsError::CompatibilityViolation(k) => {
                write!(f, "initial data violate lambda·A_k = 0 at mode {k}")
            }
            NsError::ZeroMode => f.write_str("operation requires a mode k >= 1"),
            NsError::NotSymbolic(k) => {
                write!(f, "integrating exponent of mode {k} is not linear in t")
            }
            NsError::Quadrature(e) => write!(f, "{e}"),
            NsError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for NsError {}

impl From<EvalError> for NsError {
    fn from(e: EvalError) -> Self {
        NsError::Eval(e)
    }
}

impl From<QuadError> for NsError {
    fn from(e: QuadError) -> Self {
        NsError::Quadrature(e)
    }
}

fn zeros() -> [Rational; 3] {
    [Rational::zero(), Rational::zero(), Rational::zero()]
}

fn zero_polys() -> [ExpPoly; 3] {
    [ExpPoly::zero(), ExpPoly::zero(), ExpPoly::zero()]
}

fn q(n: u32) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl NsSpec {
    pub fn initial(&self, k: u32) -> [Rational; 3] {
        self.a.get(&k).cloned().unwrap_or_else(zeros)
    }

    pub fn forcing(&self, k: u32) -> [ExpPoly; 3] {
        self.b.get(&k).cloned().unwrap_or_else(zero_polys)
    }

    /// `Σ_j λ_j²`.
    pub fn lambda_norm_sq(&self) -> Rational {
        self.lambda.iter().fold(Rational::zero(), |acc, l| acc + l * l)
    }

    pub fn validate(&self) -> Result<(), NsError> {
        if let Some(j) = self.lambda.iter().position(Zero::is_zero) {
            return Err(NsError::ZeroLambda(j));
        }
        if self.nu.is_negative() {
            return Err(NsError::NegativeViscosity);
        }
        if self.n == 0 {
            return Err(NsError::NoModes);
        }
        if let Some(&k) = self.a.keys().chain(self.b.keys()).find(|&&k| k > self.n) {
            return Err(NsError::ModeOutOfRange(k));
        }
        for (&k, a) in &self.a {
            if k >= 1 {
                let dot = (0..3).fold(Rational::zero(), |acc, j| acc + &self.lambda[j] * &a[j]);
                if !dot.is_zero() {
                    return Err(NsError::CompatibilityViolation(k));
                }
            }
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> u64 {
        let mut h = Fingerprint::new();
        let [l1, l2, l3] = &self.lambda;
        let _ = write!(h, "navier-stokes;{};{l1},{l2},{l3};{}", self.nu, self.n);
        // all-zero entries are the same as absent ones
        for (k, [x, y, z]) in &self.a {
            if !(x.is_zero() && y.is_zero() && z.is_zero()) {
                let _ = write!(h, ";A{k}:{x},{y},{z}");
            }
        }
        for (k, [x, y, z]) in &self.b {
            if !(x.is_zero() && y.is_zero() && z.is_zero()) {
                let _ = write!(h, ";B{k}:{x}|{y}|{z}");
            }
        }
        h.finish()
    }
}

/// `T_j0(t) = ∫₀ᵗ B_j0 ds + A_j0`.
pub fn zero_mode_ns(spec: &NsSpec) -> [ExpPoly; 3] {
    let a = spec.initial(0);
    let b = spec.forcing(0);
    [0, 1, 2].map(|j| &b[j].int0() + &ExpPoly::constant(a[j].clone()))
}

/// `T_4k = Σ_j λ_j B_jk / (k Σ_j λ_j²)` for `k ≥ 1`.
pub fn pressure_coeff_ns(k: u32, spec: &NsSpec) -> Result<ExpPoly, NsError> {
    if k == 0 {
        return Err(NsError::ZeroMode);
    }
    let b = spec.forcing(k);
    let mut num = ExpPoly::zero();
    for j in 0..3 {
        num = &num + &b[j].scale(&spec.lambda[j]);
    }
    let denom = spec.lambda_norm_sq() * q(k);
    Ok(num.scale(&denom.recip()))
}

/// `M_k(t) = ν k² Σ_i λ_i² t − k Σ_i λ_i ∫₀ᵗ T_i0(s) ds`.
pub fn integrating_factor_m(k: u32, spec: &NsSpec, zero_mode: &[ExpPoly; 3]) -> ExpPoly {
    let kq = q(k);
    let viscous = ExpPoly::term(&spec.nu * &kq * &kq * spec.lambda_norm_sq(), 1, Rational::zero());
    let mut drift = ExpPoly::zero();
    for i in 0..3 {
        drift = &drift + &zero_mode[i].scale(&(&spec.lambda[i] * &kq));
    }
    &viscous - &drift.int0()
}

/// Numerically evaluated `T_jk(t) = e^{M(t)}(∫₀ᵗ g(s) e^{−M(s)} ds + A)` for an
/// integrating exponent `M` that leaves the exponential-polynomial ring.
pub struct QuadratureClosure {
    integrand: CompiledExpPoly,
    exponent: CompiledExpPoly,
    initial: f64,
    tolerance: Tolerance,
}

impl QuadratureClosure {
    pub fn new(integrand: &ExpPoly, exponent: &ExpPoly, initial: &Rational) -> Self {
        QuadratureClosure {
            integrand: integrand.into(),
            exponent: exponent.into(),
            initial: crate::ring::to_f64(initial),
            tolerance: Tolerance::default(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn eval(&self, t: f64) -> Result<f64, QuadError> {
        let integral = quadrature::integrate_with(
            |s| self.integrand.eval(s) * libm::exp(-self.exponent.eval(s)),
            0.0,
            t,
            self.tolerance,
        )?;
        Ok(libm::exp(self.exponent.eval(t)) * (integral + self.initial))
    }
}

impl fmt::Debug for QuadratureClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuadratureClosure")
            .field("initial", &self.initial)
            .finish_non_exhaustive()
    }
}

/// A velocity coefficient: exact when `M_k` is linear in `t`, otherwise a
/// quadrature closure of the same formula.
#[derive(Debug)]
pub enum ModeCoefficient {
    Exact(ExpPoly),
    Quadrature(QuadratureClosure),
}

impl ModeCoefficient {
    pub fn eval(&self, t: f64) -> Result<f64, NsError> {
        match self {
            ModeCoefficient::Exact(f) => Ok(f.eval(t)?),
            ModeCoefficient::Quadrature(c) => Ok(c.eval(t)?),
        }
    }

    pub fn as_exact(&self) -> Option<&ExpPoly> {
        match self {
            ModeCoefficient::Exact(f) => Some(f),
            ModeCoefficient::Quadrature(_) => None,
        }
    }
}

/// `T_jk = e^{M_k}(∫₀ᵗ (B_jk − λ_j k T_4k) e^{−M_k} ds + A_jk)`, component
/// `axis ∈ {0,1,2}`.
pub fn velocity_coeff_ns(
    axis: usize,
    k: u32,
    spec: &NsSpec,
    m_k: &ExpPoly,
    t4k: &ExpPoly,
) -> ModeCoefficient {
    let integrand = &spec.forcing(k)[axis] - &t4k.scale(&(&spec.lambda[axis] * q(k)));
    let a = &spec.initial(k)[axis];
    match m_k.linear_slope() {
        Some(s) => {
            let inner = &integrand.shift_rate(&-&s).int0() + &ExpPoly::constant(a.clone());
            ModeCoefficient::Exact(inner.shift_rate(&s))
        }
        None => ModeCoefficient::Quadrature(QuadratureClosure::new(&integrand, m_k, a)),
    }
}

fn mode_index(k: u32) -> MultiIndex {
    MultiIndex::new(k, 0, 0)
}

/// Exact coefficient table over modes `0..=n`, stored at `(k, 0, 0)`.
///
/// Fails with [`NsError::NotSymbolic`] when some `M_k` is not linear in `t`
/// (zero-mode forcing with `Σ_i λ_i B_i0 ≢ 0`).
pub fn solve_ns(spec: &NsSpec) -> Result<CoefficientTable, NsError> {
    spec.validate()?;
    let zero = zero_mode_ns(spec);
    let meta = ProblemMeta::NavierStokes {
        nu: spec.nu.clone(),
        lambda: spec.lambda.clone(),
        forcing: spec
            .b
            .iter()
            .filter(|(_, b)| !b.iter().all(ExpPoly::is_zero))
            .map(|(k, b)| (*k, b.clone()))
            .collect(),
    };
    let mut table = CoefficientTable::new(meta, spec.fingerprint(), spec.n);
    table.insert(
        MultiIndex::ZERO,
        ModeCoeffs {
            velocity: zero.clone(),
            pressure: ExpPoly::one(),
        },
    );
    for k in 1..=spec.n {
        let t4 = pressure_coeff_ns(k, spec)?;
        let m = integrating_factor_m(k, spec, &zero);
        let mut velocity = zero_polys();
        for (j, slot) in velocity.iter_mut().enumerate() {
            match velocity_coeff_ns(j, k, spec, &m, &t4) {
                ModeCoefficient::Exact(f) => *slot = f,
                ModeCoefficient::Quadrature(_) => return Err(NsError::NotSymbolic(k)),
            }
        }
        table.insert(
            mode_index(k),
            ModeCoeffs {
                velocity,
                pressure: t4,
            },
        );
    }
    Ok(table)
}

/// Solution evaluated numerically wherever the closed form is unavailable.
#[derive(Debug)]
pub struct NsNumericSolution {
    pub zero_mode: [ExpPoly; 3],
    pub pressure: Vec<ExpPoly>,
    /// `velocity[k-1][j]`
    pub velocity: Vec<[ModeCoefficient; 3]>,
}

impl NsNumericSolution {
    /// `T_jk(t)` for `k = 0..=n`.
    pub fn velocity_at(&self, axis: usize, k: u32, t: f64) -> Result<f64, NsError> {
        if k == 0 {
            return Ok(self.zero_mode[axis].eval(t)?);
        }
        self.velocity[(k - 1) as usize][axis].eval(t)
    }
}

/// Builds every mode, falling back to quadrature closures per mode.
pub fn solve_ns_numeric(spec: &NsSpec) -> Result<NsNumericSolution, NsError> {
    spec.validate()?;
    let zero = zero_mode_ns(spec);
    let mut pressure = Vec::new();
    let mut velocity = Vec::new();
    for k in 1..=spec.n {
        let t4 = pressure_coeff_ns(k, spec)?;
        let m = integrating_factor_m(k, spec, &zero);
        velocity.push([0, 1, 2].map(|j| velocity_coeff_ns(j, k, spec, &m, &t4)));
        pressure.push(t4);
    }
    Ok(NsNumericSolution {
        zero_mode: zero,
        pressure,
        velocity,
    })
}

/// `T'_jk − M'_k T_jk + λ_j k T_4k − B_jk`, zero for every mode of a correct
/// symbolic table.
pub fn ode_residual_ns(axis: usize, k: u32, spec: &NsSpec, table: &CoefficientTable) -> Result<ExpPoly, NsError> {
    if k == 0 {
        return Err(NsError::ZeroMode);
    }
    let zero = &table.get(&MultiIndex::ZERO).ok_or(NsError::ZeroMode)?.velocity;
    let c = table.get(&mode_index(k)).ok_or(NsError::ModeOutOfRange(k))?;
    let rate = integrating_factor_m(k, spec, zero).diff();
    let t = &c.velocity[axis];
    let lhs = &(&t.diff() - &(&rate * t)) + &c.pressure.scale(&(&spec.lambda[axis] * q(k)));
    Ok(&lhs - &spec.forcing(k)[axis])
}

/// Coefficient of `ξ_{k+m}` in `Σ_i u_i ∂_i u_j` contributed by the pair
/// `(T_k, T_m)`: `m (Σ_i λ_i T_ik) T_jm`.
pub fn mode_interaction(table: &CoefficientTable, k: u32, m: u32, axis: usize) -> ExpPoly {
    let lambda = match table.meta() {
        ProblemMeta::NavierStokes { lambda, .. } => lambda,
        ProblemMeta::Euler { .. } => return ExpPoly::zero(),
    };
    let (Some(ck), Some(cm)) = (table.get(&mode_index(k)), table.get(&mode_index(m))) else {
        return ExpPoly::zero();
    };
    let mut flux = ExpPoly::zero();
    for i in 0..3 {
        flux = &flux + &ck.velocity[i].scale(&lambda[i]);
    }
    (&flux * &cm.velocity[axis]).scale(&q(m))
}

/// Exact initial conditions `T_jk(0) = A_jk` and the gauge `T_40 = 1`.
pub fn initial_condition_holds_ns(spec: &NsSpec, table: &CoefficientTable) -> bool {
    (0..=spec.n).all(|k| {
        let a = spec.initial(k);
        table
            .get(&mode_index(k))
            .is_some_and(|c| (0..3).all(|j| c.velocity[j].value_at_zero() == a[j]))
    }) && table
        .get(&MultiIndex::ZERO)
        .is_some_and(|c| c.pressure == ExpPoly::constant(Rational::one()))
}

/// The problem data a symbolic table was solved from: `A_jk = T_jk(0)` and
/// the stored forcing.
pub fn spec_of_table_ns(table: &CoefficientTable) -> Option<NsSpec> {
    let ProblemMeta::NavierStokes { nu, lambda, forcing } = table.meta() else {
        return None;
    };
    let a = table
        .iter()
        .map(|(k, c)| (k.get(0), c.velocity.clone().map(|f| f.value_at_zero())))
        .filter(|(_, a)| a.iter().any(|x| !x.is_zero()))
        .collect();
    Some(NsSpec {
        nu: nu.clone(),
        lambda: lambda.clone(),
        n: table.max_level(),
        a,
        b: forcing.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{int, rat};

    fn ones() -> [Rational; 3] {
        [int(1), int(1), int(1)]
    }

    fn base(nu: Rational, lambda: [Rational; 3], n: u32) -> NsSpec {
        NsSpec {
            nu,
            lambda,
            n,
            a: BTreeMap::new(),
            b: BTreeMap::new(),
        }
    }

    #[test]
    fn zero_mode_examples() {
        let mut s = base(int(0), ones(), 1);
        s.a.insert(0, [int(3), int(0), int(0)]);
        s.b.insert(
            0,
            [ExpPoly::zero(), ExpPoly::one(), ExpPoly::exp(int(1))],
        );
        let z = zero_mode_ns(&s);
        assert_eq!(z[0], ExpPoly::constant(int(3)));
        assert_eq!(z[1], ExpPoly::t_pow(1));
        assert_eq!(z[2], &ExpPoly::exp(int(1)) - &ExpPoly::one());
    }

    #[test]
    fn pressure_examples() {
        let s = base(int(0), ones(), 2);
        assert!(pressure_coeff_ns(1, &s).unwrap().is_zero());
        let mut s = base(int(0), ones(), 1);
        s.b.insert(1, [ExpPoly::constant(int(3)), ExpPoly::zero(), ExpPoly::zero()]);
        assert_eq!(pressure_coeff_ns(1, &s).unwrap(), ExpPoly::one());
        let mut s = base(int(0), [int(1), int(2), int(-1)], 2);
        s.b.insert(2, [ExpPoly::zero(), ExpPoly::exp(int(1)), ExpPoly::zero()]);
        assert_eq!(
            pressure_coeff_ns(2, &s).unwrap(),
            ExpPoly::term(rat(1, 6), 0, int(1))
        );
        assert_eq!(pressure_coeff_ns(0, &s), Err(NsError::ZeroMode));
    }

    #[test]
    fn integrating_exponent_examples() {
        let s = base(int(0), ones(), 2);
        assert!(integrating_factor_m(1, &s, &zero_polys()).is_zero());
        // viscosity enters with a plus sign on the growing basis
        let s = base(int(1), ones(), 1);
        assert_eq!(
            integrating_factor_m(1, &s, &zero_polys()),
            ExpPoly::term(int(3), 1, int(0))
        );
        // zero-mode drift: −k Σ λ_i T_i0 t
        let s = base(int(0), ones(), 2);
        let z = ones().map(ExpPoly::constant);
        assert_eq!(
            integrating_factor_m(2, &s, &z),
            ExpPoly::term(int(-6), 1, int(0))
        );
    }

    #[test]
    fn viscous_mode_closed_form() {
        let alpha = rat(2, 3);
        let mut s = base(int(1), ones(), 1);
        s.a.insert(1, [alpha.clone(), -alpha.clone(), int(0)]);
        let table = solve_ns(&s).unwrap();
        let c = table.get(&MultiIndex::new(1, 0, 0)).unwrap();
        assert_eq!(c.velocity[0], ExpPoly::term(alpha.clone(), 0, int(3)));
        assert_eq!(c.velocity[1], ExpPoly::term(-alpha, 0, int(3)));
        assert!(c.velocity[2].is_zero());
        assert!(c.pressure.is_zero());
    }

    #[test]
    fn homogeneous_case_uses_initial_data() {
        let mut s = base(rat(1, 2), ones(), 2);
        s.a.insert(0, [int(1), int(0), int(0)]);
        s.a.insert(2, [int(1), int(0), int(-1)]);
        let table = solve_ns(&s).unwrap();
        let zero = zero_mode_ns(&s);
        let m = integrating_factor_m(2, &s, &zero);
        let slope = m.linear_slope().unwrap();
        assert_eq!(slope, int(6) - int(2));
        let c = table.get(&MultiIndex::new(2, 0, 0)).unwrap();
        assert_eq!(c.velocity[0], ExpPoly::exp(slope.clone()));
        assert_eq!(c.velocity[2], ExpPoly::term(int(-1), 0, slope));
    }

    #[test]
    fn forced_table_satisfies_identities() {
        let mut s = base(rat(1, 2), ones(), 2);
        s.a.insert(0, [int(1), rat(1, 2), int(0)]);
        s.a.insert(1, [int(1), int(-1), int(0)]);
        s.b.insert(
            2,
            [
                ExpPoly::exp(int(-1)),
                ExpPoly::term(int(-1), 0, int(-1)),
                ExpPoly::zero(),
            ],
        );
        s.b.insert(
            1,
            [ExpPoly::t_pow(1), ExpPoly::zero(), ExpPoly::constant(int(2))],
        );
        let table = solve_ns(&s).unwrap();
        assert!(table.first_divergence_violation().is_none());
        assert!(initial_condition_holds_ns(&s, &table));
        assert_eq!(spec_of_table_ns(&table).unwrap().fingerprint(), table.spec_hash());
        for k in 1..=2 {
            for j in 0..3 {
                assert!(ode_residual_ns(j, k, &s, &table).unwrap().is_zero());
            }
        }
        for k in 1..=2 {
            for m in 1..=2 {
                for j in 0..3 {
                    assert!(mode_interaction(&table, k, m, j).is_zero());
                }
            }
        }
        // the zero mode does advect: Σ λ_i T_i0 = 3/2 ≠ 0
        assert!(!mode_interaction(&table, 0, 1, 0).is_zero());
    }

    #[test]
    fn validation_errors() {
        let s = base(int(0), [int(1), int(0), int(1)], 1);
        assert_eq!(solve_ns(&s), Err(NsError::ZeroLambda(1)));
        let s = base(int(-1), ones(), 1);
        assert_eq!(solve_ns(&s), Err(NsError::NegativeViscosity));
        let mut s = base(int(0), ones(), 1);
        s.a.insert(1, [int(1), int(0), int(0)]);
        assert_eq!(solve_ns(&s), Err(NsError::CompatibilityViolation(1)));
        let mut s = base(int(0), ones(), 1);
        s.a.insert(3, [int(1), int(-1), int(0)]);
        assert_eq!(solve_ns(&s), Err(NsError::ModeOutOfRange(3)));
    }

    #[test]
    fn nonlinear_exponent_falls_back_to_quadrature() {
        let mut s = base(int(1), ones(), 1);
        s.b.insert(0, [ExpPoly::one(), ExpPoly::zero(), ExpPoly::zero()]);
        s.a.insert(1, [int(1), int(-1), int(0)]);
        assert_eq!(solve_ns(&s), Err(NsError::NotSymbolic(1)));
        let sol = solve_ns_numeric(&s).unwrap();
        assert!(sol.velocity[0][0].as_exact().is_none());
        // homogeneous mode: T = A e^{M(t)} with M = 3t − t²/2
        for t in [0.5, 1.0] {
            let want = libm::exp(3.0 * t - 0.5 * t * t);
            let got = sol.velocity_at(0, 1, t).unwrap();
            assert!((got - want).abs() < 1e-12 * want);
        }
    }
}
