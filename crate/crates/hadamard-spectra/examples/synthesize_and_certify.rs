//! End-to-end spectrum synthesis: feed a triple in, get back a certified
//! candidate frequency set with per-level lattice-sum statistics, the route
//! taken, and a trace of decisions made along the way.

use std::path::Path;

use hadamard_spectra::exact::RatVec;
use hadamard_spectra::measure::MeasureEvaluator;
use hadamard_spectra::report::TripleInput;
use hadamard_spectra::spectrum::{
    certify_orthogonality, synthesize_spectrum, SynthesisOptions, SynthesisOutcome,
};
use hadamard_spectra::triple::Triple;

fn load(name: &str) -> Triple {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    TripleInput::read_file(&path).unwrap().triple().unwrap()
}

fn point_str(p: &RatVec) -> String {
    let cs: Vec<String> = p.iter().map(|c| c.to_string()).collect();
    format!("({})", cs.join(","))
}

fn show(name: &str, t: &Triple, outcome: &SynthesisOutcome) {
    println!("== {name} ==");
    println!("route: {:?}", outcome.route);
    println!("candidate: {}", outcome.candidate.describe());
    for s in &outcome.report.levels {
        println!(
            "  level {:>2}: {:>6} points  sums in [{:.6}, {:.6}]  defect {:.3e}",
            s.level, s.n_points, s.min_sum, s.max_sum, s.max_defect
        );
    }
    println!(
        "pass: {} (tol {:.0e}, monotone {}, slack {:.1e})",
        outcome.report.pass, outcome.report.tol, outcome.report.monotone, outcome.report.slack
    );
    for line in &outcome.trace {
        println!("  trace: {line}");
    }

    // Show a slice of the certified set and cross-check pairwise
    // orthogonality of the exponentials directly under the measure.
    let level = outcome.report.levels.last().map(|s| s.level).unwrap_or(4);
    let pts = outcome.candidate.enumerate(level.min(4), 1_000_000).unwrap();
    let shown: Vec<String> = pts.iter().take(8).map(point_str).collect();
    println!("first points: {}", shown.join(" "));
    let ev = MeasureEvaluator::from_triple(t).unwrap();
    let ortho = certify_orthogonality(&ev, &pts, 40).unwrap();
    println!("pairwise orthogonality over {} pairs: worst {:.2e}", ortho.pairs, ortho.worst);
    println!();
}

fn main() {
    let opts = SynthesisOptions::default();

    // Scale-4 Cantor pair: leveled route seeded by the extreme cycle at 0.
    let jp4 = load("jp4.json");
    let out = synthesize_spectrum(&jp4, &opts).unwrap();
    show("jp4", &jp4, &out);

    // Plane triple with fibered digits: block route with a product
    // candidate, certified against the original two-dimensional measure.
    let prod = load("product2d.json");
    let out = synthesize_spectrum(&prod, &opts).unwrap();
    show("product2d", &prod, &out);
}
