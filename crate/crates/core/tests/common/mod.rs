#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;

use expseries_core::bounds::fit_admissible;
use expseries_core::euler::EulerSpec;
use expseries_core::lattice::{modes_up_to, MultiIndex};
use expseries_core::ns::NsSpec;
use expseries_core::ring::{int, rat, ExpPoly, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Admissible Euler data: a zero mode in `[−4, −2]` and a few seeded modes
/// on levels 1..=3, each scaled to a random fraction of its admissible size.
pub fn random_euler_spec(seed: u64, max_level: u32, epsilon: Rational) -> EulerSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero_mode = [0, 1, 2].map(|_| rat(-4 - rng.gen_range(0..=4), 2));
    let candidates: Vec<MultiIndex> = modes_up_to(max_level.min(3))
        .into_iter()
        .filter(|k| !k.is_zero())
        .collect();
    let mut data = BTreeMap::new();
    let seeds = rng.gen_range(2..=4);
    while data.len() < seeds {
        let k = candidates[rng.gen_range(0..candidates.len())];
        let dir = [0, 1, 2].map(|_| int(rng.gen_range(-5..=5)));
        let fraction = rat(rng.gen_range(1..=10), 10);
        if let Some(b) = fit_admissible(&k, &dir, &epsilon, &fraction).unwrap() {
            data.insert(k, b);
        }
    }
    EulerSpec {
        zero_mode,
        data,
        epsilon,
        max_level,
    }
}

/// Navier-Stokes data with constant zero mode and exponential forcing on
/// every mode, compatible with `λ·A_k = 0`.
pub fn random_ns_spec(seed: u64, n: u32) -> NsSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nonzero = |rng: &mut ChaCha8Rng| loop {
        let v = rng.gen_range(-3i64..=3);
        if v != 0 {
            break int(v);
        }
    };
    let lambda = [0, 1, 2].map(|_| nonzero(&mut rng));
    let nu = rat(rng.gen_range(0..=4), 2);
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    a.insert(0, [0, 1, 2].map(|_| rat(rng.gen_range(-4..=4), 2)));
    for k in 1..=n {
        // a vector orthogonal to λ: λ × random
        let r = [0, 1, 2].map(|_| int(rng.gen_range(-3..=3)));
        let ak = [
            &lambda[1] * &r[2] - &lambda[2] * &r[1],
            &lambda[2] * &r[0] - &lambda[0] * &r[2],
            &lambda[0] * &r[1] - &lambda[1] * &r[0],
        ];
        a.insert(k, ak);
        let rate = rat(rng.gen_range(-4..=2), 2);
        b.insert(
            k,
            [0, 1, 2].map(|_| ExpPoly::term(rat(rng.gen_range(-3..=3), 2), 0, rate.clone())),
        );
    }
    NsSpec { nu, lambda, n, a, b }
}
