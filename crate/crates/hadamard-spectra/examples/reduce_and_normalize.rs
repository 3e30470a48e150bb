//! Reduction to standard form: rescaling onto the smallest invariant
//! lattice and dropping unused dimensions, with the full conjugation
//! history recorded for replay.

use hadamard_spectra::exact::invariant_lattice;
use hadamard_spectra::triple::{reduce_triple, ConjugationRecord, Triple};

fn show(label: &str, t: &Triple) {
    println!("== {label}");
    let outcome = reduce_triple(t).unwrap();
    let red = outcome.triple();
    println!("  changed: {}", outcome.changed());
    println!("  reduced R: {:?}", red.r.to_int_rows().unwrap());
    println!("  reduced B: {:?}", red.b.elems());
    println!("  reduced L: {:?}", red.l.elems());
    for rec in &red.history {
        match rec {
            ConjugationRecord::Translation { b_shift, l_shift } => {
                println!("  step: translate B by {b_shift:?}, L by {l_shift:?}")
            }
            ConjugationRecord::Unimodular { m } => println!("  step: unimodular conjugation {m:?}"),
            ConjugationRecord::LatticeRescale { m } => println!("  step: lattice rescale {m:?}"),
            ConjugationRecord::DimensionDrop { kept, dropped } => {
                println!("  step: drop {dropped} dimension(s), keep {kept}")
            }
        }
    }
    // The defining property of the reduced form.
    let lat = invariant_lattice(&red.r, red.b.elems()).unwrap();
    println!("  invariant lattice standard: {}", lat.is_standard());
}

fn main() {
    // Digits {0, 2} generate 2Z, so everything rescales by 2.
    show("modulus 4, digits {0, 2}", &Triple::from_i64(&[&[4]], &[&[0], &[2]], &[&[0], &[1]]).unwrap());

    // Digits live on the first axis only; the second dimension drops.
    show(
        "rank drop",
        &Triple::from_i64(&[&[2, 1], &[0, 3]], &[&[0, 0], &[1, 0]], &[&[0, 0], &[1, 0]]).unwrap(),
    );

    // Already standard: nothing to do.
    show("already reduced", &Triple::from_i64(&[&[2]], &[&[0], &[1]], &[&[0], &[1]]).unwrap());
}
