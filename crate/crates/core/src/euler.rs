//! Level-by-level construction of the series solution of the Euler Cauchy
//! problem on ℝ³₊ with basis `φ_k = e^{−k·x}`.
//!
//! Substituting `u_j = Σ T_jk(t) φ_k`, `p = Σ T_4k(t) φ_k` and matching the
//! coefficient of each `φ_k` gives, for `k > 0`,
//!
//! ```text
//! T'_ik = (Σ_j k_j B_j0) T_ik + Q_ik,       Q_ik = S_ik + k_i T_4k
//! S_ik  = Σ_{k′+k″=k} (k″·T_{k′}) T_{i,k″}
//! T_4k  = −Σ_{k′+k″=k} (k″·T_{k′}) (k′·T_{k″}) / |k|²
//! ```
//!
//! where the sums run over splits with both parts nonzero, so every right
//! hand side only involves strictly lower levels. The zero mode is constant
//! (`T_j0 = B_j0`, `T_40 = 1` as the pressure gauge) and its advection is
//! absorbed in the integrating factor `e^{P_k(t)}`, `P_k(t) = −Σ_j B_j0 k_j t`.
//! Because `P_k` is linear in `k`, every product `T_{k′} T_{k″}` carries the
//! exponent of `e^{−P_k}` and the integrals are resonant: each `T_k` is a
//! polynomial in `t` times `e^{−P_k(t)}`.

use alloc::collections::BTreeMap;
use core::fmt::{self, Write};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::lattice::{level_modes, splits, MultiIndex};
use crate::ring::{ExpPoly, Rational};
use crate::table::{CoefficientTable, Fingerprint, ModeCoeffs, ProblemMeta};

/// Cauchy data of the Euler problem, truncated at `max_level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerSpec {
    /// `B_{j,(0,0,0)}`.
    pub zero_mode: [Rational; 3],
    /// `B_jk` for listed `k > 0`; unlisted modes start at zero.
    pub data: BTreeMap<MultiIndex, [Rational; 3]>,
    pub epsilon: Rational,
    pub max_level: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EulerError {
    /// `k·B_k ≠ 0` for a listed mode.
    DivergenceViolation(MultiIndex),
    /// The zero mode was listed among `data`, or an operation that needs
    /// `k > 0` received `(0,0,0)`.
    ZeroMode,
    /// A listed mode lies above the truncation level.
    BeyondMaxLevel(MultiIndex),
    /// A lower-level mode needed by the recursion is not in the table.
    MissingMode(MultiIndex),
    NonPositiveEpsilon,
    NotEulerTable,
}

impl fmt::Display for EulerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EulerError::DivergenceViolation(k) => {
                write!(f, "initial data violate k·B_k = 0 at mode {k}")
            }
            EulerError::ZeroMode => f.write_str("operation requires a nonzero mode"),
            EulerError::BeyondMaxLevel(k) => {
                write!(f, "mode {k} lies above the truncation level")
            }
            EulerError::MissingMode(k) => write!(f, "mode {k} missing from the table"),
            EulerError::NonPositiveEpsilon => f.write_str("epsilon must be positive"),
            EulerError::NotEulerTable => f.write_str("table does not hold an Euler solution"),
        }
    }
}

impl core::error::Error for EulerError {}

impl EulerSpec {
    /// Initial coefficients of mode `k` (zero when unlisted).
    pub fn initial(&self, k: &MultiIndex) -> [Rational; 3] {
        if k.is_zero() {
            return self.zero_mode.clone();
        }
        self.data
            .get(k)
            .cloned()
            .unwrap_or_else(|| [Rational::zero(), Rational::zero(), Rational::zero()])
    }

    pub fn validate(&self) -> Result<(), EulerError> {
        if !self.epsilon.is_positive() {
            return Err(EulerError::NonPositiveEpsilon);
        }
        for (k, b) in &self.data {
            if k.is_zero() {
                return Err(EulerError::ZeroMode);
            }
            if k.level() > self.max_level {
                return Err(EulerError::BeyondMaxLevel(*k));
            }
            if !dot(k, b).is_zero() {
                return Err(EulerError::DivergenceViolation(*k));
            }
        }
        Ok(())
    }

    /// Stable 64-bit fingerprint of the canonical text form.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fingerprint::new();
        let [a, b, c] = &self.zero_mode;
        let _ = write!(h, "euler;{a},{b},{c};{};{}", self.epsilon, self.max_level);
        for (k, [x, y, z]) in &self.data {
            if !(x.is_zero() && y.is_zero() && z.is_zero()) {
                let _ = write!(h, ";{k}:{x},{y},{z}");
            }
        }
        h.finish()
    }
}

fn q(n: u32) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn dot(k: &MultiIndex, b: &[Rational; 3]) -> Rational {
    (0..3).fold(Rational::zero(), |acc, j| acc + q(k.get(j)) * &b[j])
}

/// `w·T = Σ_j w_j T_j` for integer weights.
fn weighted(w: &MultiIndex, t: &[ExpPoly; 3]) -> ExpPoly {
    let mut acc = ExpPoly::zero();
    for j in 0..3 {
        if w.get(j) != 0 && !t[j].is_zero() {
            acc = &acc + &t[j].scale(&q(w.get(j)));
        }
    }
    acc
}

/// Slope `−Σ_j B_j0 k_j` of the linear integrating exponent `P_k`.
pub fn p_slope(k: &MultiIndex, zero_mode: &[Rational; 3]) -> Rational {
    -dot(k, zero_mode)
}

/// `P_k(t) = −Σ_j B_{j,0} k_j t`.
pub fn integrating_factor_p(k: &MultiIndex, zero_mode: &[Rational; 3]) -> ExpPoly {
    ExpPoly::term(p_slope(k, zero_mode), 1, Rational::zero())
}

/// Split sums of one mode, assembled from a read-only view of lower levels.
struct SplitSums {
    /// `Σ (k″·T_{k′})(k′·T_{k″})`
    pressure: ExpPoly,
    /// `Σ (k″·T_{k′}) T_{i,k″}`
    advection: [ExpPoly; 3],
}

fn split_sums(k: &MultiIndex, table: &CoefficientTable) -> Result<SplitSums, EulerError> {
    if k.is_zero() {
        return Err(EulerError::ZeroMode);
    }
    let mut pressure = ExpPoly::zero();
    let mut advection = [ExpPoly::zero(), ExpPoly::zero(), ExpPoly::zero()];
    for (first, second) in splits(k) {
        let t1 = table.get(&first).ok_or(EulerError::MissingMode(first))?;
        let t2 = table.get(&second).ok_or(EulerError::MissingMode(second))?;
        let a = weighted(&second, &t1.velocity);
        if a.is_zero() {
            continue;
        }
        let b = weighted(&first, &t2.velocity);
        if !b.is_zero() {
            pressure = &pressure + &(&a * &b);
        }
        for (acc, ti) in advection.iter_mut().zip(t2.velocity.iter()) {
            if !ti.is_zero() {
                *acc = &*acc + &(&a * ti);
            }
        }
    }
    Ok(SplitSums {
        pressure,
        advection,
    })
}

fn pressure_from_sums(k: &MultiIndex, sums: &SplitSums) -> ExpPoly {
    let denom = Rational::from_integer(BigInt::from(k.norm_sq()));
    sums.pressure.scale(&-denom.recip())
}

fn forcing_from_sums(axis: usize, k: &MultiIndex, sums: &SplitSums, t4: &ExpPoly) -> ExpPoly {
    &sums.advection[axis] + &t4.scale(&q(k.get(axis)))
}

/// Solves `T' = −s·T + Q`, `T(0) = b`, with `s` the slope of `P_k`:
/// `T = e^{−st}(∫₀ᵗ Q e^{s·τ} dτ + b)`.
fn solve_mode(forcing: &ExpPoly, slope: &Rational, b: &Rational) -> ExpPoly {
    let inner = &forcing.shift_rate(slope).int0() + &ExpPoly::constant(b.clone());
    inner.shift_rate(&-slope)
}

/// `T_4k = −Σ_{i,j} Σ_{k′+k″=k} k′_i k″_j T_{j,k′} T_{i,k″} / |k|²`.
pub fn pressure_coeff(k: &MultiIndex, table: &CoefficientTable) -> Result<ExpPoly, EulerError> {
    let sums = split_sums(k, table)?;
    Ok(pressure_from_sums(k, &sums))
}

/// `Q_ik`, component `axis ∈ {0,1,2}`; reads `T_4k` from the table entry of `k`.
pub fn forcing_q(axis: usize, k: &MultiIndex, table: &CoefficientTable) -> Result<ExpPoly, EulerError> {
    let sums = split_sums(k, table)?;
    let t4 = &table.get(k).ok_or(EulerError::MissingMode(*k))?.pressure;
    Ok(forcing_from_sums(axis, k, &sums, t4))
}

/// All three components of `Q_k` from one pass over the splits.
pub fn forcing_q_all(k: &MultiIndex, table: &CoefficientTable) -> Result<[ExpPoly; 3], EulerError> {
    let sums = split_sums(k, table)?;
    let t4 = &table.get(k).ok_or(EulerError::MissingMode(*k))?.pressure;
    Ok([0, 1, 2].map(|i| forcing_from_sums(i, k, &sums, t4)))
}

/// `T_ik = e^{−P_k}(∫₀ᵗ Q_ik e^{P_k} ds + B_ik)`.
pub fn velocity_coeff(
    axis: usize,
    k: &MultiIndex,
    table: &CoefficientTable,
    b_ik: &Rational,
) -> Result<ExpPoly, EulerError> {
    let zero_mode = table.zero_mode().ok_or(EulerError::NotEulerTable)?;
    let forcing = forcing_q(axis, k, table)?;
    Ok(solve_mode(&forcing, &p_slope(k, zero_mode), b_ik))
}

/// Builds the table for all `|k| ≤ max_level`, level by level; within a
/// level each mode's `T_4k` is computed before its velocity coefficients.
pub fn solve_euler(spec: &EulerSpec) -> Result<CoefficientTable, EulerError> {
    spec.validate()?;
    let meta = ProblemMeta::Euler {
        zero_mode: spec.zero_mode.clone(),
        epsilon: spec.epsilon.clone(),
    };
    let mut table = CoefficientTable::new(meta, spec.fingerprint(), spec.max_level);
    table.insert(
        MultiIndex::ZERO,
        ModeCoeffs {
            velocity: spec.zero_mode.clone().map(ExpPoly::constant),
            pressure: ExpPoly::one(),
        },
    );
    for level in 1..=spec.max_level {
        let mut solved = alloc::vec::Vec::new();
        for k in level_modes(level) {
            let sums = split_sums(&k, &table)?;
            let t4 = pressure_from_sums(&k, &sums);
            let slope = p_slope(&k, &spec.zero_mode);
            let b = spec.initial(&k);
            let velocity = [0, 1, 2].map(|i| {
                let forcing = forcing_from_sums(i, &k, &sums, &t4);
                solve_mode(&forcing, &slope, &b[i])
            });
            solved.push((
                k,
                ModeCoeffs {
                    velocity,
                    pressure: t4,
                },
            ));
        }
        for (k, c) in solved {
            table.insert(k, c);
        }
    }
    Ok(table)
}

/// `T'_ik − (Σ_j k_j B_j0) T_ik − Q_ik`; the zero function for every mode of
/// a correct table.
pub fn ode_residual(axis: usize, k: &MultiIndex, table: &CoefficientTable) -> Result<ExpPoly, EulerError> {
    let zero_mode = table.zero_mode().ok_or(EulerError::NotEulerTable)?;
    let t = &table.get(k).ok_or(EulerError::MissingMode(*k))?.velocity[axis];
    let forcing = forcing_q(axis, k, table)?;
    let advect = t.scale(&dot(k, zero_mode));
    Ok(&(&t.diff() - &advect) - &forcing)
}

/// `Σ_i k_i Σ_j Σ_splits k″_j T_{j,k′} T_{i,k″} + |k|² T_4k`: the pressure
/// relation obtained by contracting the mode ODEs with `k` before the
/// lower-level divergence identities are used. Zero for a correct table.
pub fn pressure_relation_defect(k: &MultiIndex, table: &CoefficientTable) -> Result<ExpPoly, EulerError> {
    if k.is_zero() {
        return Err(EulerError::ZeroMode);
    }
    let mut acc = ExpPoly::zero();
    for (first, second) in splits(k) {
        let t1 = table.get(&first).ok_or(EulerError::MissingMode(first))?;
        let t2 = table.get(&second).ok_or(EulerError::MissingMode(second))?;
        acc = &acc + &(&weighted(&second, &t1.velocity) * &weighted(k, &t2.velocity));
    }
    let t4 = &table.get(k).ok_or(EulerError::MissingMode(*k))?.pressure;
    let norm = Rational::from_integer(BigInt::from(k.norm_sq()));
    Ok(&acc + &t4.scale(&norm))
}

/// True when every nonlinear interaction that would land above the
/// truncation level vanishes, i.e. the truncated series is an exact solution.
pub fn is_closed(table: &CoefficientTable) -> bool {
    let n = table.max_level();
    let nonzero: alloc::vec::Vec<_> = table
        .iter()
        .filter(|(k, c)| !k.is_zero() && !c.velocity.iter().all(ExpPoly::is_zero))
        .collect();
    let mut overflow: BTreeMap<MultiIndex, [ExpPoly; 3]> = BTreeMap::new();
    for (k1, c1) in &nonzero {
        for (k2, c2) in &nonzero {
            let k = **k1 + **k2;
            if k.level() <= n {
                continue;
            }
            let a = weighted(k2, &c1.velocity);
            if a.is_zero() {
                continue;
            }
            let slot = overflow
                .entry(k)
                .or_insert_with(|| [ExpPoly::zero(), ExpPoly::zero(), ExpPoly::zero()]);
            for i in 0..3 {
                slot[i] = &slot[i] + &(&a * &c2.velocity[i]);
            }
        }
    }
    overflow.values().all(|s| s.iter().all(ExpPoly::is_zero))
}

/// Checks `T_jk(0) = B_jk` exactly for every mode of the table.
pub fn initial_condition_holds(spec: &EulerSpec, table: &CoefficientTable) -> bool {
    table.iter().all(|(k, c)| {
        let b = spec.initial(k);
        (0..3).all(|j| c.velocity[j].value_at_zero() == b[j])
    }) && table
        .get(&MultiIndex::ZERO)
        .is_some_and(|c| c.pressure == ExpPoly::constant(Rational::one()))
}

/// The Cauchy data a table was solved from, read off `T_jk(0)`. Modes whose
/// initial values all vanish are left out, as in a minimal config.
pub fn spec_of_table(table: &CoefficientTable) -> Result<EulerSpec, EulerError> {
    let ProblemMeta::Euler { zero_mode, epsilon } = table.meta() else {
        return Err(EulerError::NotEulerTable);
    };
    let data = table
        .iter()
        .filter(|(k, _)| !k.is_zero())
        .map(|(k, c)| (*k, c.velocity.clone().map(|f| f.value_at_zero())))
        .filter(|(_, b)| b.iter().any(|x| !x.is_zero()))
        .collect();
    Ok(EulerSpec {
        zero_mode: zero_mode.clone(),
        data,
        epsilon: epsilon.clone(),
        max_level: table.max_level(),
    })
}
