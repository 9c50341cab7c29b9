//! Algebraic laws of the exponential-polynomial ring.

use expseries_core::ring::{rat, ExpPoly, Rational, Term};
use num_traits::Zero;
use proptest::prelude::*;

fn rational(max: i64, den: i64) -> impl Strategy<Value = Rational> {
    (-max..=max, 1..=den).prop_map(|(n, d)| rat(n, d))
}

fn term() -> impl Strategy<Value = Term> {
    (rational(20, 6), 0u32..3, rational(6, 3)).prop_map(|(coeff, power, rate)| Term { coeff, power, rate })
}

fn exppoly() -> impl Strategy<Value = ExpPoly> {
    prop::collection::vec(term(), 0..6).prop_map(ExpPoly::from_terms)
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-10 * scale.max(1e-300)
}

proptest! {
    #[test]
    fn addition_is_a_group(f in exppoly(), g in exppoly(), h in exppoly()) {
        prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert_eq!(&f + &ExpPoly::zero(), f.clone());
        prop_assert!((&f - &f).is_zero());
        prop_assert_eq!(-(-f.clone()), f);
    }

    #[test]
    fn multiplication_is_commutative_ring(f in exppoly(), g in exppoly(), h in exppoly()) {
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&f * &ExpPoly::one(), f.clone());
        prop_assert!((&f * &ExpPoly::zero()).is_zero());
    }

    #[test]
    fn calculus_identities(f in exppoly(), g in exppoly()) {
        prop_assert_eq!(f.int0().diff(), f.clone());
        let back = &f.diff().int0() + &ExpPoly::constant(f.value_at_zero());
        prop_assert_eq!(back, f.clone());
        prop_assert!(f.int0().value_at_zero().is_zero());
        // Leibniz rule
        prop_assert_eq!((&f * &g).diff(), &(&f.diff() * &g) + &(&f * &g.diff()));
    }

    #[test]
    fn evaluation_is_a_homomorphism(f in exppoly(), g in exppoly(), t in 0.0f64..2.0) {
        let (fv, gv) = (f.eval(t).unwrap(), g.eval(t).unwrap());
        let (fa, ga) = (f.eval_abs(t).unwrap(), g.eval_abs(t).unwrap());
        prop_assert!(close((&f + &g).eval(t).unwrap(), fv + gv, fa + ga));
        prop_assert!(close((&f * &g).eval(t).unwrap(), fv * gv, fa * ga));
    }

    #[test]
    fn canonical_form_is_unique(terms in prop::collection::vec(term(), 0..8), split in 0usize..8) {
        let f = ExpPoly::from_terms(terms.clone());
        // splitting a coefficient in two and reversing the order is invisible
        let mut shuffled: Vec<Term> = terms.iter().rev().cloned().collect();
        if let Some(t) = shuffled.get(split).cloned() {
            let half = &t.coeff / Rational::from_integer(2.into());
            shuffled[split].coeff = half.clone();
            shuffled.push(Term { coeff: half, ..t });
        }
        prop_assert_eq!(ExpPoly::from_terms(shuffled), f.clone());
        let sum = terms.iter().fold(ExpPoly::zero(), |acc, t| &acc + &ExpPoly::term(t.coeff.clone(), t.power, t.rate.clone()));
        prop_assert_eq!(sum, f);
    }
}
