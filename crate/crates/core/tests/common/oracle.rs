//! Straight-line transcription of the Euler mode recursion.
//!
//! Coefficient functions are maps `(power, rate) → coeff`, the pressure is
//! the full `Σ_{i,j}` double loop over every pair of lattice points in the
//! box, and integrals come from repeated integration by parts.

use std::collections::BTreeMap;

use expseries_core::euler::EulerSpec;
use expseries_core::lattice::MultiIndex;
use expseries_core::ring::{ExpPoly, Rational};
use num_traits::{One, Zero};

pub type Func = BTreeMap<(u32, Rational), Rational>;

fn add_into(acc: &mut Func, f: &Func, c: &Rational) {
    for ((m, a), v) in f {
        let e = acc.entry((*m, a.clone())).or_insert_with(Rational::zero);
        *e += v * c;
    }
    acc.retain(|_, v| !v.is_zero());
}

fn mul(f: &Func, g: &Func) -> Func {
    let mut out = Func::new();
    for ((m1, a1), c1) in f {
        for ((m2, a2), c2) in g {
            let e = out.entry((m1 + m2, a1 + a2)).or_insert_with(Rational::zero);
            *e += c1 * c2;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `∫₀ᵗ s^m e^{a s} ds` by parts: `t^m e^{at}/a − (m/a) ∫₀ᵗ s^{m−1} e^{as}`.
pub fn integral_of_term(m: u32, a: &Rational) -> Func {
    let mut out = Func::new();
    if a.is_zero() {
        out.insert((m + 1, Rational::zero()), Rational::new(1.into(), (m + 1).into()));
        return out;
    }
    if m == 0 {
        out.insert((0, a.clone()), a.recip());
        out.insert((0, Rational::zero()), -a.recip());
        return out;
    }
    out.insert((m, a.clone()), a.recip());
    let rest = integral_of_term(m - 1, a);
    add_into(&mut out, &rest, &(-Rational::from_integer(m.into()) / a));
    out
}

fn integrate(f: &Func) -> Func {
    let mut out = Func::new();
    for ((m, a), c) in f {
        add_into(&mut out, &integral_of_term(*m, a), c);
    }
    out
}

fn shift(f: &Func, d: &Rational) -> Func {
    f.iter().map(|((m, a), c)| ((*m, a + d), c.clone())).collect()
}

fn constant(c: &Rational) -> Func {
    let mut out = Func::new();
    if !c.is_zero() {
        out.insert((0, Rational::zero()), c.clone());
    }
    out
}

fn r(n: u32) -> Rational {
    Rational::from_integer(n.into())
}

/// Every coefficient function of every mode with `|k| ≤ n`, as
/// `[T1, T2, T3, T4]`.
pub fn brute_force(spec: &EulerSpec, n: u32) -> BTreeMap<[u32; 3], [Func; 4]> {
    let mut t: BTreeMap<[u32; 3], [Func; 4]> = BTreeMap::new();
    let b0 = &spec.zero_mode;
    t.insert(
        [0, 0, 0],
        [constant(&b0[0]), constant(&b0[1]), constant(&b0[2]), constant(&Rational::one())],
    );
    for level in 1..=n {
        let mut new_modes = Vec::new();
        for k1 in 0..=level {
            for k2 in 0..=level - k1 {
                let k = [k1, k2, level - k1 - k2];
                // pairs (k', k'') with k' + k'' = k and both nonzero
                let mut pairs = Vec::new();
                for a1 in 0..=k[0] {
                    for a2 in 0..=k[1] {
                        for a3 in 0..=k[2] {
                            let kp = [a1, a2, a3];
                            let kpp = [k[0] - a1, k[1] - a2, k[2] - a3];
                            if kp != [0, 0, 0] && kpp != [0, 0, 0] {
                                pairs.push((kp, kpp));
                            }
                        }
                    }
                }
                // pressure: Σ_i k_i Σ_j Σ k''_j T_{j,k'} T_{i,k''} + |k|² T_4k = 0
                let mut s = Func::new();
                for i in 0..3 {
                    for j in 0..3 {
                        for (kp, kpp) in &pairs {
                            let prod = mul(&t[kp][j], &t[kpp][i]);
                            add_into(&mut s, &prod, &(r(k[i]) * r(kpp[j])));
                        }
                    }
                }
                let norm = r(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
                let mut p = Func::new();
                add_into(&mut p, &s, &(-norm.recip()));
                // T'_ik = (Σ_j k_j B_j0) T_ik + Q_ik
                let a = (0..3).fold(Rational::zero(), |acc, j| acc + r(k[j]) * &b0[j]);
                let data = spec.initial(&MultiIndex(k));
                let mut vel: [Func; 3] = Default::default();
                for i in 0..3 {
                    let mut q = Func::new();
                    for j in 0..3 {
                        for (kp, kpp) in &pairs {
                            let prod = mul(&t[kp][j], &t[kpp][i]);
                            add_into(&mut q, &prod, &r(kpp[j]));
                        }
                    }
                    add_into(&mut q, &p, &r(k[i]));
                    // T = e^{at}(B + ∫₀ᵗ e^{−as} Q(s) ds)
                    let mut inner = integrate(&shift(&q, &-&a));
                    add_into(&mut inner, &constant(&data[i]), &Rational::one());
                    vel[i] = shift(&inner, &a);
                }
                let [v1, v2, v3] = vel;
                new_modes.push((k, [v1, v2, v3, p]));
            }
        }
        t.extend(new_modes);
    }
    t
}

pub fn as_func(f: &ExpPoly) -> Func {
    f.terms()
        .iter()
        .map(|term| ((term.power, term.rate.clone()), term.coeff.clone()))
        .collect()
}
