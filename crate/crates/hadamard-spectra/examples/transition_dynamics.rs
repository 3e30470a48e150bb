//! Dynamics on the torus driven by the transposed expansion: periodic
//! points, extreme cycles (the seeds of every candidate spectrum), and the
//! numerical probe for invariant components of the transform's zero set.

use std::path::Path;

use hadamard_spectra::dynamics::{extreme_cycles, periodic_points, zero_set_probe};
use hadamard_spectra::exact::{self, ExactMatrix};
use hadamard_spectra::report::TripleInput;
use hadamard_spectra::triple::{reduce_triple, Triple};

fn load(name: &str) -> Triple {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    TripleInput::read_file(&path).unwrap().triple().unwrap()
}

fn cycle_str(points: &[Vec<exact::Rat>]) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|p| {
            let cs: Vec<String> = p.iter().map(|c| c.to_string()).collect();
            format!("({})", cs.join(","))
        })
        .collect();
    coords.join(" -> ")
}

fn main() {
    // Periodic points of x -> R^T x mod 1. Counting them only needs a
    // determinant; enumerating them walks the residue system.
    let r = ExactMatrix::from_i64(&[&[4]]);
    for m in 1..=3 {
        let pts = periodic_points(&r, m).unwrap();
        println!("period {m}: {} points", pts.len());
    }

    // Extreme cycles: periodic orbits along which the digit mask stays at
    // full modulus. For (4,{0,2},{0,1}) only the fixed point 0 survives.
    let jp4 = load("jp4.json");
    let red = reduce_triple(&jp4).unwrap();
    for c in extreme_cycles(red.triple()).unwrap() {
        println!("jp4 cycle: {} digits {:?}", cycle_str(&c.points), c.digits);
    }

    // Negative frequencies move the cycle structure: {0,-1} picks up the
    // fixed point -1 (i.e. the cycle through 1 on the torus shifted back).
    let neg = load("lebesgue_neg.json");
    for c in extreme_cycles(&neg).unwrap() {
        println!("neg cycle: {} digits {:?}", cycle_str(&c.points), c.digits);
    }

    // The zero-set probe looks for torus-invariant components on which the
    // transform of the second factor vanishes. For the product triple it
    // finds lines y = odd/3 carried by a period-2 orbit.
    let prod = load("product2d.json");
    let comps = zero_set_probe(&prod, 6, 8, 1e-6).unwrap();
    println!("product2d invariant components: {}", comps.len());
    for c in comps.iter().take(3) {
        let x0: Vec<String> = c.x0.iter().map(|v| v.to_string()).collect();
        let worst = c.evidence.iter().map(|e| e.abs_mu).fold(0.0f64, f64::max);
        println!(
            "  x0 = ({}) period {} vanish depth {} max |mu_hat| on probes {:.2e}",
            x0.join(","),
            c.period,
            c.vanish_depth,
            worst
        );
    }

    // A one-dimensional Hadamard triple has no such component to find.
    let leb = load("lebesgue1d.json");
    let none = zero_set_probe(&leb, 6, 8, 1e-6).unwrap();
    println!("lebesgue1d invariant components: {}", none.len());
}
