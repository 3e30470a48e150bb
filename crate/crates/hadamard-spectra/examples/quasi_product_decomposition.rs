//! Full decomposition walkthrough on the plane triple whose digits split
//! into a base factor and congruent fibers: probe the zero set, straighten
//! the invariant line into a coordinate block, read off the fiber lattice,
//! and screen candidate fiber frequency lattices.

use std::path::Path;

use hadamard_spectra::dynamics::{block_normalize, zero_set_probe};
use hadamard_spectra::exact::ExactMatrix;
use hadamard_spectra::quasi::{
    candidate_gamma2, detect_quasi_product, project_triples, screening_system,
};
use hadamard_spectra::report::TripleInput;
use hadamard_spectra::triple::{check_hadamard, hadamard_float_defect, Triple};

fn fmt_matrix(m: &ExactMatrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let cells: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
            format!("[{}]", cells.join(" "))
        })
        .collect();
    rows.join(" ")
}

fn load(name: &str) -> Triple {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    TripleInput::read_file(&path).unwrap().triple().unwrap()
}

fn main() {
    let t = load("product2d.json");
    println!("input R = {}", fmt_matrix(&t.r));

    // 1. Find an invariant component of the zero set to split along.
    let comps = zero_set_probe(&t, 6, 8, 1e-6).unwrap();
    let comp = &comps[0];
    let x0: Vec<String> = comp.x0.iter().map(|v| v.to_string()).collect();
    println!("witness component: x0 = ({}), period {}", x0.join(","), comp.period);

    // 2. Straighten: unimodular change of coordinates moving the invariant
    //    direction into the leading block. Digits stay integers.
    let bs = block_normalize(&t, &comp.x0, &comp.w_basis).unwrap();
    println!(
        "block form: split {} | R1 = {} C = {} R2 = {} | y0 = {}",
        bs.split,
        fmt_matrix(&bs.r1),
        fmt_matrix(&bs.c),
        fmt_matrix(&bs.r2),
        bs.y0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    );

    // 3. Detect the quasi-product structure over that split.
    let qp = detect_quasi_product(&bs.triple, bs.split, &bs.y0).unwrap();
    println!("fiber lattice basis Q = {} (index {})", fmt_matrix(&qp.q), qp.gamma.covolume().unwrap());
    println!("fiber expansion in lattice coordinates = {}", fmt_matrix(&qp.r2_tilde));
    for (i, (u, fiber)) in qp.base_digits.iter().zip(&qp.fibers).enumerate() {
        let offs: Vec<String> = fiber
            .iter()
            .map(|f| format!("({})", f.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        println!("base digit {i}: u = {:?} fibers {}", u, offs.join(" "));
    }

    // 4. Project onto the two blocks: one base system per frequency tail,
    //    one fiber system per base digit, all verified Hadamard.
    let proj = project_triples(&qp).unwrap();
    for (tri, tail) in proj.bases.iter().zip(&qp.l_targets) {
        println!(
            "base system at tail {:?}: B {:?} L {:?} Hadamard {} float defect {:.2e}",
            tail,
            tri.b,
            tri.l,
            check_hadamard(tri).unwrap().pass,
            hadamard_float_defect(tri).unwrap()
        );
    }
    for (tri, u) in proj.fibers.iter().zip(&qp.base_digits) {
        println!(
            "fiber system of base digit {:?}: R2 = {} B {:?} L {:?} float defect {:.2e}",
            u,
            fmt_matrix(&tri.r),
            tri.b,
            tri.l,
            hadamard_float_defect(tri).unwrap()
        );
    }

    // 5. The screening system couples base labels with fiber offsets; its
    //    transform decides which fiber frequency lattice works.
    let screen = screening_system(&qp).unwrap();
    println!("screening system: R = {} with {} digits", fmt_matrix(&screen.r), screen.n());

    // 6. Pick the fiber frequency lattice by lattice-sum screening.
    let choice = candidate_gamma2(&qp, 16, 4, 8, 0.05).unwrap();
    println!(
        "fiber frequency lattice: basis {} source {:?} screen defect {:.3e}",
        fmt_matrix(choice.lattice.basis()),
        choice.source,
        choice.screen_defect
    );
}
