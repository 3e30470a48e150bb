//! Exact Hadamard verdicts for the bundled corpus, plus a companion search.
//!
//! The unitarity test is decided in exact arithmetic (vanishing sums of
//! roots of unity), so "pass" and "fail" are proofs, not approximations.
//! A float evaluation of H*H - I cross-checks each verdict.

use std::path::Path;

use hadamard_spectra::report::TripleInput;
use hadamard_spectra::triple::{check_hadamard, hadamard_float_defect, search_hadamard_companion};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn main() {
    for name in ["jp4.json", "lebesgue1d.json", "lebesgue_neg.json", "hat2d.json", "product2d.json", "rankdrop.json"] {
        let inp = TripleInput::read_file(&data(name)).unwrap();
        let t = inp.triple().unwrap();
        let verdict = check_hadamard(&t).unwrap();
        let defect = hadamard_float_defect(&t).unwrap();
        println!(
            "{name:18} exact {}  float defect {defect:.2e}",
            if verdict.pass { "PASS" } else { "FAIL" }
        );
    }

    // cantor3 ships without L: no 2-element companion exists in [-20, 20],
    // and the exhaustive search proves it.
    let inp = TripleInput::read_file(&data("cantor3.json")).unwrap();
    let r = inp.matrix().unwrap();
    let b = inp.digits().unwrap();
    match search_hadamard_companion(&r, &b, 20).unwrap() {
        Some(l) => println!("cantor3: unexpected companion {l:?}"),
        None => println!("cantor3: no Hadamard companion within [-20, 20] (exhaustive)"),
    }

    // A bad pair fails with a concrete witness.
    let bad = hadamard_spectra::triple::Triple::from_i64(&[&[3]], &[&[0], &[2]], &[&[0], &[1]]).unwrap();
    let v = check_hadamard(&bad).unwrap();
    println!("(3, {{0,2}}, {{0,1}}) exact {} witness {:?}", if v.pass { "PASS" } else { "FAIL" }, v.witness);
}
