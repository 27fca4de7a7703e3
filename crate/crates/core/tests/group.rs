use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stretch_core::fuchsian::inverse_letter;
use stretch_core::{FuchsianGroup, Su11, Word};

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..8, 1..7).prop_map(|v| Word::new(v).reduced())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_a_class_invariant(w in word(), c in word(), r in 0usize..7) {
        let g = FuchsianGroup::bolza();
        let base = g.canonicalize(&w);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let conj = c.concat(&w).concat(&c.inverse()).reduced();
        let rotated = w.cyclically_reduced().rotation(r % w.cyclically_reduced().len().max(1));
        for other in [conj, w.inverse(), rotated] {
            let o = g.canonicalize(&other).unwrap();
            prop_assert_eq!(&o.word, &base.word);
            prop_assert!((o.length - base.length).abs() < 1e-9 * base.length);
        }
        prop_assert!(g.canonicalize(&base.word).unwrap().word == base.word);
    }

    #[test]
    fn powers_multiply_length_and_exponent(w in word(), n in 2usize..4) {
        let g = FuchsianGroup::bolza();
        let base = g.canonicalize(&w);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let p = g.canonicalize(&w.power(n)).unwrap();
        prop_assert_eq!(p.power, base.power * n as u32);
        prop_assert_eq!(&p.primitive, &base.primitive);
        prop_assert!((p.length - n as f64 * base.length).abs() < 1e-9 * p.length);
        prop_assert!(!g.is_primitive(&w.power(n)).unwrap());
    }

    #[test]
    fn words_parse_back(w in word()) {
        prop_assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
    }
}

/// A bounded random walk on words: a million renormalized products keep unit
/// determinant and track the exact matrix of the current word.
#[test]
fn long_products_do_not_drift() {
    let g = FuchsianGroup::bolza();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut m = Su11::IDENTITY;
    let mut stack: Vec<u8> = Vec::new();
    for _ in 0..1_000_000 {
        let push = stack.is_empty() || (stack.len() < 6 && rng.gen_bool(0.5));
        let k = if push {
            let k = rng.gen_range(0..8u8);
            stack.push(k);
            k
        } else {
            inverse_letter(stack.pop().unwrap())
        };
        m = m.mul(&g.generator(k)).renormalized();
    }
    assert!((m.det() - 1.0).abs() < 1e-9, "det {}", m.det());
    let exact = g.word_matrix(&Word::new(stack));
    let sign = if (m.a - exact.a).norm() < (m.a + exact.a).norm() { 1.0 } else { -1.0 };
    assert!((m.a - sign * exact.a).norm() + (m.b - sign * exact.b).norm() < 1e-6);
}
