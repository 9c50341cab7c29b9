//! Coefficient tables: the four coefficient functions of every mode.

use alloc::collections::BTreeMap;
use core::fmt;

use num_traits::Zero;

use crate::lattice::MultiIndex;
use crate::ring::{ExpPoly, Rational};

/// Which problem a table solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableKind {
    Euler,
    NavierStokes,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::Euler => "euler",
            TableKind::NavierStokes => "navier-stokes",
        })
    }
}

/// Problem data carried alongside the coefficients, enough to evaluate the
/// PDE residual and the decay bounds without the original config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemMeta {
    /// Basis `φ_k = e^{−k·x}` on ℝ³₊.
    Euler {
        zero_mode: [Rational; 3],
        epsilon: Rational,
    },
    /// Basis `ξ_k = e^{k(λ·x)}`; mode `k` is stored at `(k, 0, 0)`.
    NavierStokes {
        nu: Rational,
        lambda: [Rational; 3],
        /// Forcing coefficients `B_jk(t)`, absent modes are zero.
        forcing: BTreeMap<u32, [ExpPoly; 3]>,
    },
}

/// `(T_1k, T_2k, T_3k)` and `T_4k` of one mode.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModeCoeffs {
    pub velocity: [ExpPoly; 3],
    pub pressure: ExpPoly,
}

impl ModeCoeffs {
    pub fn is_zero(&self) -> bool {
        self.pressure.is_zero() && self.velocity.iter().all(ExpPoly::is_zero)
    }
}

/// Map from mode to its coefficient functions, plus provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientTable {
    entries: BTreeMap<MultiIndex, ModeCoeffs>,
    meta: ProblemMeta,
    spec_hash: u64,
    max_level: u32,
}

impl CoefficientTable {
    pub fn new(meta: ProblemMeta, spec_hash: u64, max_level: u32) -> Self {
        CoefficientTable {
            entries: BTreeMap::new(),
            meta,
            spec_hash,
            max_level,
        }
    }

    pub fn kind(&self) -> TableKind {
        match self.meta {
            ProblemMeta::Euler { .. } => TableKind::Euler,
            ProblemMeta::NavierStokes { .. } => TableKind::NavierStokes,
        }
    }

    pub fn meta(&self) -> &ProblemMeta {
        &self.meta
    }

    pub fn spec_hash(&self) -> u64 {
        self.spec_hash
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn insert(&mut self, k: MultiIndex, coeffs: ModeCoeffs) {
        self.entries.insert(k, coeffs);
    }

    pub fn get(&self, k: &MultiIndex) -> Option<&ModeCoeffs> {
        self.entries.get(k)
    }

    pub fn get_mut(&mut self, k: &MultiIndex) -> Option<&mut ModeCoeffs> {
        self.entries.get_mut(k)
    }

    /// Entries in level-then-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &ModeCoeffs)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.values().filter(|c| !c.is_zero()).count()
    }

    /// Zero-mode velocity constants of an Euler table.
    pub fn zero_mode(&self) -> Option<&[Rational; 3]> {
        match &self.meta {
            ProblemMeta::Euler { zero_mode, .. } => Some(zero_mode),
            ProblemMeta::NavierStokes { .. } => None,
        }
    }

    pub fn epsilon(&self) -> Option<&Rational> {
        match &self.meta {
            ProblemMeta::Euler { epsilon, .. } => Some(epsilon),
            ProblemMeta::NavierStokes { .. } => None,
        }
    }

    /// Per-mode constraint weights: `k` for Euler, `λ` for Navier-Stokes.
    pub fn constraint_weights(&self, k: &MultiIndex) -> [Rational; 3] {
        match &self.meta {
            ProblemMeta::Euler { .. } => k.0.map(|c| Rational::from_integer(c.into())),
            ProblemMeta::NavierStokes { lambda, .. } => lambda.clone(),
        }
    }

    /// `Σ_j w_j·T_jk` with the weights of [`Self::constraint_weights`]. Zero
    /// for every nonzero mode of a valid table.
    pub fn divergence_defect(&self, k: &MultiIndex) -> ExpPoly {
        let Some(c) = self.entries.get(k) else {
            return ExpPoly::zero();
        };
        let w = self.constraint_weights(k);
        let mut acc = ExpPoly::zero();
        for (wj, tj) in w.iter().zip(c.velocity.iter()) {
            if !wj.is_zero() {
                acc = &acc + &tj.scale(wj);
            }
        }
        acc
    }

    /// First nonzero mode whose divergence defect is not the zero function.
    pub fn first_divergence_violation(&self) -> Option<MultiIndex> {
        self.entries
            .keys()
            .filter(|k| !k.is_zero())
            .find(|k| !self.divergence_defect(k).is_zero())
            .copied()
    }
}

/// FNV-1a hasher fed through `fmt::Write`, used to fingerprint problem specs
/// from their canonical text form.
pub(crate) struct Fingerprint(u64);

impl Fingerprint {
    pub(crate) fn new() -> Self {
        Fingerprint(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

impl fmt::Write for Fingerprint {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        for b in s.bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
        Ok(())
    }
}
