//! Randomized invariants: structure-preserving maps, idempotence, and
//! agreement between the exact and floating evaluation paths on inputs the
//! fixed test instances do not cover.

use std::path::Path;

use proptest::prelude::*;

use hadamard_spectra::exact::{self, ExactMatrix, RatVec};
use hadamard_spectra::measure::{MaskEvaluator, MeasureEvaluator};
use hadamard_spectra::report::TripleInput;
use hadamard_spectra::spectrum::SpectrumCandidate;
use hadamard_spectra::triple::{check_hadamard, reduce_triple, DigitSet, Triple};

fn load(name: &str) -> Triple {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    TripleInput::read_file(&path).unwrap().triple().unwrap()
}

/// Unimodular matrix built from a word of row shears, swaps and sign flips.
fn unimodular_from_word(d: usize, word: &[(u8, u8, i8)]) -> ExactMatrix {
    let mut rows: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect();
    for &(op, pick, sign) in word {
        let i = pick as usize % d;
        let j = (pick as usize / d) % d;
        match op % 3 {
            0 if i != j => {
                let s = if sign >= 0 { 1 } else { -1 };
                let src = rows[j].clone();
                if rows[i].iter().zip(&src).all(|(a, b)| (a + s * b).abs() <= 30) {
                    for (a, b) in rows[i].iter_mut().zip(&src) {
                        *a += s * b;
                    }
                }
            }
            1 if i != j => rows.swap(i, j),
            2 => rows[i].iter_mut().for_each(|a| *a = -*a),
            _ => {}
        }
    }
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    ExactMatrix::from_i64(&refs)
}

fn conjugate(t: &Triple, m: &ExactMatrix) -> Triple {
    let m_inv = m.inverse().unwrap();
    let r = m.mul(&t.r).mul(&m_inv);
    let ints = |vs: Vec<RatVec>, map: &ExactMatrix| -> Vec<Vec<num_bigint::BigInt>> {
        vs.into_iter().map(|v| map.mul_vec(&v).iter().map(|x| x.to_integer()).collect()).collect()
    };
    let b = ints(t.b.as_rat_vecs(), m);
    let mt_inv = m.transpose().inverse().unwrap();
    let l = ints(t.l.as_rat_vecs(), &mt_inv);
    Triple::new(r, DigitSet::new(t.dim(), b).unwrap(), DigitSet::new(t.dim(), l).unwrap()).unwrap()
}

fn word_strategy() -> impl Strategy<Value = Vec<(u8, u8, i8)>> {
    prop::collection::vec((0u8..3, 0u8..4, -1i8..=1), 0..8)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, .. ProptestConfig::default() })]

    // The orthogonality verdict only depends on the pairings
    // <R^{-1}(b - b'), l>, which unimodular conjugation preserves; so does
    // translating either digit set.
    #[test]
    fn verdict_survives_conjugation(word in word_strategy(), which in 0usize..3) {
        let hat = load("hat2d.json");
        let bad = Triple::new(
            hat.r.clone(),
            hat.b.clone(),
            DigitSet::from_i64(&[&[0, 0], &[2, 0], &[0, 1], &[2, 1]]).unwrap(),
        )
        .unwrap();
        let pool = [hat, load("product2d.json"), bad];
        let t = &pool[which];
        let m = unimodular_from_word(t.dim(), &word);
        let tc = conjugate(t, &m);
        prop_assert_eq!(check_hadamard(&tc).unwrap().pass, check_hadamard(t).unwrap().pass);
    }

    #[test]
    fn verdict_survives_translation(sb in -3i64..=3, sl in -3i64..=3, which in 0usize..2) {
        let pool = [load("jp4.json"), load("lebesgue_neg.json")];
        let t = &pool[which];
        let shifted = Triple::new(
            t.r.clone(),
            t.b.translate(&[sb.into()]),
            t.l.translate(&[sl.into()]),
        )
        .unwrap();
        prop_assert!(check_hadamard(&shifted).unwrap().pass);
    }

    // Reducing an already reduced triple is a no-op, whatever coordinates
    // the input arrived in.
    #[test]
    fn reduction_is_idempotent(word in word_strategy(), which in 0usize..3, shift in -2i64..=2) {
        let pool = [load("jp4.json"), load("hat2d.json"), load("product2d.json")];
        let t = &pool[which];
        let m = unimodular_from_word(t.dim(), &word);
        let mut tc = conjugate(t, &m);
        let sv = vec![shift.into(); tc.dim()];
        tc = Triple::new(tc.r.clone(), tc.b.translate(&sv), tc.l.clone()).unwrap();
        let red = reduce_triple(&tc).unwrap();
        prop_assert!(!reduce_triple(red.triple()).unwrap().changed());
    }

    // The exact-shift evaluation path agrees with evaluating the shifted
    // frequency as a plain float, inside the certified error bounds.
    #[test]
    fn exact_shift_matches_float_shift(
        xi_c in prop::collection::vec(-200i32..=200, 2),
        lam_c in prop::collection::vec(-5i64..=5, 2),
        which in 0usize..2,
    ) {
        let pool = [load("hat2d.json"), load("product2d.json")];
        let ev = MeasureEvaluator::from_triple(&pool[which]).unwrap();
        let xi: Vec<f64> = xi_c.iter().map(|&c| c as f64 / 100.0).collect();
        let lam: RatVec = lam_c.iter().map(|&c| exact::rat(c)).collect();
        let direct: Vec<f64> = xi.iter().zip(&lam_c).map(|(x, &c)| x + c as f64).collect();
        let a = ev.fourier_shifted(&xi, &lam, 1e-8).unwrap();
        let b = ev.fourier(&direct, 1e-8).unwrap();
        prop_assert!((a.value - b.value).norm() <= a.err + b.err + 1e-7);
    }

    // Leveled families grow by refinement: every point of level N persists
    // at level N + 1 as the tail word extended by the zero digit.
    #[test]
    fn leveled_enumeration_nests(r in 2i64..=4, a in 1i64..=5, lv in 1u32..=5) {
        let cand = SpectrumCandidate::Leveled {
            rt: ExactMatrix::from_i64(&[&[r]]),
            digits: vec![vec![exact::rat(0)], vec![exact::rat(a)]],
            seeds: vec![vec![exact::rat(0)]],
        };
        let small = cand.enumerate(lv, 1_000_000).unwrap();
        let big = cand.enumerate(lv + 1, 1_000_000).unwrap();
        prop_assert!(small.iter().all(|p| big.binary_search(p).is_ok()));
        let mut dedup = big.clone();
        dedup.dedup();
        prop_assert_eq!(dedup.len(), big.len());
    }

    // The digit mask is a function on the torus: integer shifts of the
    // frequency change nothing.
    #[test]
    fn mask_is_periodic(
        y_c in prop::collection::vec(-300i32..=300, 2),
        shift in prop::collection::vec(-4i64..=4, 2),
    ) {
        let mask = MaskEvaluator::new(&load("product2d.json").b);
        let y: Vec<f64> = y_c.iter().map(|&c| c as f64 / 100.0).collect();
        let ys: Vec<f64> = y.iter().zip(&shift).map(|(v, &s)| v + s as f64).collect();
        prop_assert!((mask.symbol(&y) - mask.symbol(&ys)).norm() <= 1e-9);
    }
}
