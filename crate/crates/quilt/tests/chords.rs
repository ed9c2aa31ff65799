use num_traits::Zero;
use proptest::prelude::*;
use quilt::chords::{all_words, is_normal, normal_form, relation_basis, ChordSeries, Word};
use quilt::rational::{q, qf, Q};
use std::collections::BTreeMap;

fn strands(n: usize) -> Vec<String> {
    ChordSeries::numbered(n)
}

#[test]
fn rewriting_agrees_with_row_reduction() {
    for (n, dmax) in [(3usize, 4usize), (4, 3)] {
        for d in 0..=dmax {
            let rb = relation_basis(n, d);
            for w in all_words(n, d) {
                let x: BTreeMap<Word, Q> = [(w.clone(), q(1))].into_iter().collect();
                assert_eq!(normal_form(&x), rb.reduce(&x), "word {w:?}");
            }
            let mut leading = rb.leading_words();
            leading.sort();
            let mut non_normal: Vec<Word> = all_words(n, d).into_iter().filter(|w| !is_normal(w)).collect();
            non_normal.sort();
            assert_eq!(leading, non_normal);
        }
    }
}

#[test]
fn three_strand_hilbert_series() {
    // Free Lie algebra on two letters times a central line: 1/((1-2x)(1-x)).
    let expect = [1usize, 3, 7, 15, 31, 63];
    for (d, e) in expect.iter().enumerate() {
        assert_eq!(relation_basis(3, d).quotient_dim(), *e, "degree {d}");
        let normal = all_words(3, d).into_iter().filter(|w| is_normal(w)).count();
        assert_eq!(normal, *e);
    }
}

#[test]
fn delete_and_cable_identities() {
    let one = ChordSeries::one(&strands(3), 3);
    assert_eq!(one.delete("2").unwrap(), ChordSeries::one(&strands(3).into_iter().filter(|s| s != "2").collect::<Vec<_>>(), 3));
    let x = ChordSeries::chord(&strands(3), 3, "1", "2").unwrap().add(&ChordSeries::chord(&strands(3), 3, "2", "3").unwrap()).exp().unwrap();
    let c = x.cable("2", ("2a", "2b")).unwrap();
    let both = c.delete("2a").unwrap().delete("2b").unwrap();
    assert_eq!(both, x.delete("2").unwrap());
    let untouched = ChordSeries::chord(&strands(3), 3, "1", "3").unwrap();
    let cu = untouched.cable("2", ("2a", "2b")).unwrap();
    assert_eq!(cu.terms().len(), 1);
}

#[test]
fn embed_shifts_strands() {
    let x = ChordSeries::chord(&strands(3), 3, "1", "2").unwrap().mul(&ChordSeries::chord(&strands(3), 3, "2", "3").unwrap());
    let y = x.embed_list(&["2", "3", "4"], &strands(4)).unwrap();
    let direct = ChordSeries::chord(&strands(4), 3, "2", "3").unwrap().mul(&ChordSeries::chord(&strands(4), 3, "3", "4").unwrap());
    assert_eq!(y, direct);
    assert_eq!(x.embed(&BTreeMap::new(), &strands(3)).unwrap(), x);
}

fn arb_series(n: usize, d: usize) -> impl Strategy<Value = ChordSeries> {
    let words: Vec<Word> = (0..=d).flat_map(|k| all_words(n, k)).collect();
    let len = words.len();
    proptest::collection::vec((0..len, -3i64..=3, 1i64..=3), 0..6).prop_map(move |picks| {
        let mut m = BTreeMap::new();
        for (i, a, b) in picks {
            *m.entry(words[i].clone()).or_insert_with(Q::zero) += qf(a, b);
        }
        ChordSeries::from_terms(&strands(n), d, m)
    })
}

fn lie_series(n: usize, d: usize) -> impl Strategy<Value = ChordSeries> {
    arb_series(n, d).prop_map(|x| x.sub(&ChordSeries::scalar(x.strands(), x.trunc(), x.constant_term())))
}

/// Free-algebra product followed by a single normalization.
fn free_mul(a: &ChordSeries, b: &ChordSeries) -> ChordSeries {
    let mut m: BTreeMap<Word, Q> = BTreeMap::new();
    for (w1, c1) in a.terms() {
        for (w2, c2) in b.terms() {
            let mut w = w1.clone();
            w.extend_from_slice(w2);
            *m.entry(w).or_insert_with(Q::zero) += c1 * c2;
        }
    }
    ChordSeries::from_terms(a.strands(), a.trunc().min(b.trunc()), m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normal_form_idempotent(x in arb_series(4, 3)) {
        prop_assert_eq!(normal_form(x.terms()), x.terms().clone());
    }

    #[test]
    fn product_matches_free_expansion(a in arb_series(3, 4), b in arb_series(3, 4)) {
        prop_assert_eq!(a.mul(&b), free_mul(&a, &b));
    }

    #[test]
    fn associative(a in arb_series(3, 4), b in arb_series(3, 4), c in arb_series(3, 4)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn log_exp_round_trip(x in lie_series(3, 4)) {
        prop_assert_eq!(x.exp().unwrap().log().unwrap(), x);
    }

    #[test]
    fn inverse_is_two_sided(x in lie_series(3, 4)) {
        let e = x.exp().unwrap();
        let one = ChordSeries::one(e.strands(), e.trunc());
        prop_assert_eq!(e.mul(&e.inverse().unwrap()), one.clone());
        prop_assert_eq!(e.inverse().unwrap(), x.neg().exp().unwrap());
    }

    #[test]
    fn cable_and_delete_are_homomorphisms(a in arb_series(3, 4), b in arb_series(3, 4)) {
        let c = |x: &ChordSeries| x.cable("2", ("2a", "2b")).unwrap();
        prop_assert_eq!(c(&a.mul(&b)), c(&a).mul(&c(&b)));
        let d = |x: &ChordSeries| x.delete("3").unwrap();
        prop_assert_eq!(d(&a.mul(&b)), d(&a).mul(&d(&b)));
    }

    #[test]
    fn cabling_commutes_on_distinct_strands(a in arb_series(3, 3)) {
        let x = a.cable("1", ("1a", "1b")).unwrap().cable("3", ("3a", "3b")).unwrap();
        let y = a.cable("3", ("3a", "3b")).unwrap().cable("1", ("1a", "1b")).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn cabling_coassociative(a in arb_series(3, 3)) {
        let x = a.cable("2", ("p", "q")).unwrap().cable("q", ("r", "s")).unwrap();
        let y = a.cable("2", ("m", "s")).unwrap().cable("m", ("p", "r")).unwrap();
        prop_assert_eq!(&x, &y);
        prop_assert_eq!(&x, &a.cable_many("2", &["p", "r", "s"]).unwrap());
    }

    #[test]
    fn group_like_closed_under_products(x in lie_series(3, 3), y in lie_series(3, 3)) {
        let (x1, y1) = (x.degree_part(1), y.degree_part(1));
        let a = x1.exp().unwrap().mul(&x1.commutator(&y1).exp().unwrap());
        let b = y1.exp().unwrap();
        prop_assert!(a.is_group_like());
        prop_assert!(a.mul(&b).is_group_like());
    }
}
