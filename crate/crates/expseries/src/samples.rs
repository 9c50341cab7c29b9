//! Seeded random problem data for randomized trials.

use std::collections::BTreeMap;

use expseries_core::bounds::fit_admissible;
use expseries_core::euler::EulerSpec;
use expseries_core::lattice::{modes_up_to, MultiIndex};
use expseries_core::ns::NsSpec;
use expseries_core::ring::{int, rat, ExpPoly, Rational, Term};
use num_traits::Zero;
use rand::Rng;

/// Admissible Euler data: zero mode in `[−4, −2]³` and two to four seeded
/// modes on levels `1..=min(3, max_level)`, each scaled to a random fraction
/// of its admissible size.
pub fn random_euler_spec<R: Rng>(rng: &mut R, max_level: u32, epsilon: &Rational) -> EulerSpec {
    let zero_mode = [0, 1, 2].map(|_| rat(-4 - rng.gen_range(0..=4), 2));
    let candidates: Vec<MultiIndex> = modes_up_to(max_level.min(3))
        .into_iter()
        .filter(|k| !k.is_zero())
        .collect();
    let mut data = BTreeMap::new();
    let seeds = rng.gen_range(2..=4).min(candidates.len());
    while data.len() < seeds {
        let k = candidates[rng.gen_range(0..candidates.len())];
        let dir = [0, 1, 2].map(|_| int(rng.gen_range(-5..=5)));
        let fraction = rat(rng.gen_range(1..=10), 10);
        if let Some(b) = fit_admissible(&k, &dir, epsilon, &fraction).expect("epsilon is positive") {
            data.insert(k, b);
        }
    }
    EulerSpec {
        zero_mode,
        data,
        epsilon: epsilon.clone(),
        max_level,
    }
}

fn nonzero<R: Rng>(rng: &mut R, m: i64) -> Rational {
    loop {
        let v = rng.gen_range(-m..=m);
        if v != 0 {
            return int(v);
        }
    }
}

/// Navier-Stokes data with a constant zero mode and exponential forcing on
/// modes `1..=n`; `A_k = λ × r` so that `λ·A_k = 0`.
pub fn random_ns_spec<R: Rng>(rng: &mut R, n: u32) -> NsSpec {
    let lambda = [0, 1, 2].map(|_| nonzero(rng, 3));
    let nu = rat(rng.gen_range(0..=4), 2);
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    a.insert(0, [0, 1, 2].map(|_| rat(rng.gen_range(-4..=4), 2)));
    for k in 1..=n {
        let r = [0, 1, 2].map(|_| int(rng.gen_range(-3..=3)));
        a.insert(
            k,
            [
                &lambda[1] * &r[2] - &lambda[2] * &r[1],
                &lambda[2] * &r[0] - &lambda[0] * &r[2],
                &lambda[0] * &r[1] - &lambda[1] * &r[0],
            ],
        );
        let rate = rat(rng.gen_range(-4..=2), 2);
        b.insert(k, [0, 1, 2].map(|_| ExpPoly::term(rat(rng.gen_range(-3..=3), 2), 0, rate.clone())));
    }
    NsSpec { nu, lambda, n, a, b }
}

/// `(x, y)` with `x, y ∉ {0, −1, …, −n}`, so every base of both Abel
/// identities that carries a negative power is nonzero for all `n' ≤ n`.
pub fn random_abel_pair<R: Rng>(rng: &mut R, n: u64) -> (Rational, Rational) {
    let draw = |rng: &mut R| loop {
        let v = rat(rng.gen_range(-60..=60), rng.gen_range(1..=9));
        let pole = v <= Rational::zero() && v.is_integer() && -v.clone() <= Rational::from_integer(n.into());
        if !pole {
            return v;
        }
    };
    (draw(rng), draw(rng))
}

/// Up to `max_terms` terms with powers `0..=3`, rates in `[−2, 1]` on a
/// quarter grid and coefficients `p/q` with `|p| ≤ 9`, `q ≤ 6`.
pub fn random_exppoly<R: Rng>(rng: &mut R, max_terms: usize) -> ExpPoly {
    let n = rng.gen_range(0..=max_terms);
    ExpPoly::from_terms((0..n).map(|_| Term {
        coeff: rat(rng.gen_range(-9..=9), rng.gen_range(1..=6)),
        power: rng.gen_range(0..=3),
        rate: rat(rng.gen_range(-8..=4), 4),
    }))
}
