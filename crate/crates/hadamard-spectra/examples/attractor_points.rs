//! The measure itself: attractor point clouds, exact overlap detection,
//! transform evaluation with certified truncation error, and the
//! partition-of-unity identity that Hadamard frequency sets satisfy.

use hadamard_spectra::measure::{attractor_points, no_overlap_probe, qmf_check, MeasureEvaluator};
use hadamard_spectra::triple::Triple;

fn main() {
    let jp4 = Triple::from_i64(&[&[4]], &[&[0], &[2]], &[&[0], &[1]]).unwrap();

    // Level-5 words of the scale-4 Cantor construction: 32 distinct points.
    let pts = attractor_points(&jp4.r, &jp4.b, 5, 1_000, 0).unwrap();
    println!("level-5 points: {} (first {:?}, last {:?})", pts.len(), pts[0], pts[pts.len() - 1]);
    let probe = no_overlap_probe(&jp4.r, &jp4.b, 5).unwrap();
    println!("overlap: {} ({} words, {} distinct)", probe.overlap, probe.words, probe.distinct);

    // A fat digit set does overlap, with an exact witness pair of words.
    let fat = Triple::from_i64(&[&[2]], &[&[0], &[1], &[2]], &[&[0], &[1], &[2]]).unwrap();
    let p2 = no_overlap_probe(&fat.r, &fat.b, 3).unwrap();
    println!("fat digits overlap: {} witness {:?}", p2.overlap, p2.witness);

    // Transform values carry a certified truncation error.
    let ev = MeasureEvaluator::from_triple(&jp4).unwrap();
    for xi in [0.5, 1.0, 4.0 / 3.0, 10.25] {
        let v = ev.fourier(&[xi], 1e-9).unwrap();
        println!("mu_hat({xi:7.4}) = {:+.6} {:+.6}i  (err <= {:.1e}, depth {})", v.value.re, v.value.im, v.err, v.depth);
    }

    // Partition of unity over the frequency set: the defining identity of a
    // Hadamard pair, flat to machine precision.
    let rep = qmf_check(&jp4, 512, 7).unwrap();
    println!("partition-of-unity defect over {} samples: {:.2e}", rep.samples, rep.max_defect);
    let bad = Triple::from_i64(&[&[3]], &[&[0], &[2]], &[&[0], &[1]]).unwrap();
    let rep_bad = qmf_check(&bad, 512, 7).unwrap();
    println!("same identity for a non-Hadamard pair: {:.2e}", rep_bad.max_defect);
}
