//! Command-line driver.
//!
//! Exit codes: 0 pass, 1 certified fail, 2 usage or input-format error,
//! 3 mathematically invalid input, 4 inconclusive within the given budget.
//! Identical inputs and flags produce byte-identical reports.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_traits::{Signed, ToPrimitive};

use crate::dynamics;
use crate::error::{Error, Result};
use crate::exact;
use crate::measure::{attractor_points, qmf_check, MeasureEvaluator};
use crate::quasi;
use crate::report::{self, TripleInput};
use crate::spectrum::{
    apply_history, jp_certify, synthesize_spectrum, SpectrumCandidate, SynthesisOptions,
    SynthesisRoute,
};
use crate::triple::{
    check_hadamard, complete_representatives_containing, hadamard_float_defect, reduce_triple,
    search_hadamard_companion, CompletionStrategy, Triple,
};

#[derive(Parser)]
#[command(
    name = "hs",
    version,
    about = "Exact Hadamard-triple verification and certified spectrum synthesis"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact unitarity verdict for (R, B, L), with a float cross-check
    Verify(VerifyArgs),
    /// Reduce to standard form (invariant lattice Z^d), recording every step
    Reduce(CommonArgs),
    /// Torus dynamics: periodic points, extreme cycles, zero-set components
    Analyze(AnalyzeArgs),
    /// Block straightening and fiber structure over a zero-set component
    Decompose(DecomposeArgs),
    /// Synthesize a candidate spectrum and certify it
    Spectrum(SpectrumArgs),
    /// Certify the default leveled candidate without the decomposition attempt
    JpCheck(JpCheckArgs),
    /// Attractor point cloud as CSV, optional PGM raster for planar inputs
    Render(RenderArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Triple JSON file: {"R": [[int]], "B": [[int]], "L": [[int]]?}
    input: PathBuf,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Search for a frequency set L when none is given (or none works)
    #[arg(long)]
    search_companion: bool,
    /// Box radius for the companion search
    #[arg(long, default_value_t = 20)]
    search_box: i64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Period bound for periodic points and the component probe
    #[arg(long, default_value_t = 6)]
    m_max: u32,
    /// Evidence samples per candidate component
    #[arg(long = "K", default_value_t = 8)]
    k: usize,
    /// Numeric tolerance for vanishing evidence
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for sampled checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 6)]
    m_max: u32,
    #[arg(long = "K", default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Sublattice index bound for the fiber lattice search
    #[arg(long, default_value_t = 16)]
    index_bound: u64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Certification levels, ascending, comma separated
    #[arg(long, default_value = "4,6,8")]
    levels: String,
    /// Grid resolution per axis for base frequencies
    #[arg(long, default_value_t = 3)]
    grid: usize,
    /// Numeric tolerance for probe evidence
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Accepted final-level certification defect
    #[arg(long, default_value_t = 1e-2)]
    defect_tol: f64,
    #[arg(long, default_value_t = 6)]
    m_max: u32,
    #[arg(long = "K", default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    index_bound: u64,
    /// Cap on enumerated spectrum points per level
    #[arg(long, default_value_t = 200_000)]
    budget: u64,
    /// Export the final-level spectrum as CSV (one point per row, p/q)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct JpCheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value = "4,6,8")]
    levels: String,
    #[arg(long, default_value_t = 3)]
    grid: usize,
    #[arg(long, default_value_t = 1e-2)]
    defect_tol: f64,
    #[arg(long, default_value_t = 200_000)]
    budget: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Approximation level (digit word length)
    #[arg(long, default_value_t = 8)]
    level: u32,
    /// Cap on emitted points; a seeded subsample is taken above it
    #[arg(long, default_value_t = 200_000)]
    max_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Point cloud CSV path
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Raster PGM path (planar inputs only)
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Raster side length; 0 disables the raster
    #[arg(long, default_value_t = 256)]
    png_size: usize,
}

/// Map errors onto the exit-code contract. Violated certificates are
/// certified failures; exhausted budgets and absent structure are
/// inconclusive; malformed input is a usage error; impossible math is 3.
fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Io(_) => 2,
        Error::Shape(_)
        | Error::NotIntegral(_)
        | Error::SingularModulus
        | Error::RankDeficient(_)
        | Error::NotExpansive
        | Error::BadDigitSet(_)
        | Error::CardinalityMismatch { .. }
        | Error::NotCompleteResidues(_)
        | Error::NonIntegralConjugation(_) => 3,
        Error::BesselViolated { .. }
        | Error::OrthogonalityViolated(_)
        | Error::IdentityViolated(_) => 1,
        Error::DepthCapExceeded { .. }
        | Error::NotInvariant(_)
        | Error::ReduceFirst
        | Error::NotQuasiProduct(_)
        | Error::FiberLatticeFull
        | Error::NoFiberLattice { .. }
        | Error::BudgetExhausted(_)
        | Error::TooLarge(_) => 4,
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("HS_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    init_threads();
    let outcome = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Reduce(a) => cmd_reduce(a),
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::Decompose(a) => cmd_decompose(a),
        Cmd::Spectrum(a) => cmd_spectrum(a),
        Cmd::JpCheck(a) => cmd_jp_check(a),
        Cmd::Render(a) => cmd_render(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn parse_levels(text: &str) -> Result<Vec<u32>> {
    let mut out: Vec<u32> = Vec::new();
    for part in text.split(',') {
        let lv: u32 = part
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad level '{part}' in --levels")))?;
        if lv == 0 {
            return Err(Error::Input("levels must be positive".into()));
        }
        if !out.contains(&lv) {
            out.push(lv);
        }
    }
    if out.is_empty() {
        return Err(Error::Input("--levels must name at least one level".into()));
    }
    out.sort_unstable();
    Ok(out)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32> {
    let inp = TripleInput::read_file(&a.common.input)?;
    let r = inp.matrix()?;
    let b = inp.digits()?;
    if a.search_companion {
        let companion = search_hadamard_companion(&r, &b, a.search_box)?;
        let found = companion.is_some();
        let rep = report::VerifyReport {
            command: "verify".into(),
            input: inp,
            hadamard: Some(found),
            witness: None,
            float_defect: None,
            companion: match &companion {
                Some(c) => Some(report::digit_set_doc(c)?),
                None => None,
            },
            search_box: Some(a.search_box),
            verdict: if found {
                "companion-found".into()
            } else {
                format!("no Hadamard companion within box {}", a.search_box)
            },
        };
        report::emit(&a.common.out, &report::to_json(&rep)?)?;
        return Ok(if found { 0 } else { 1 });
    }
    let t = inp.triple()?;
    let verdict = check_hadamard(&t)?;
    let defect = hadamard_float_defect(&t)?;
    let rep = report::VerifyReport {
        command: "verify".into(),
        input: inp,
        hadamard: Some(verdict.pass),
        witness: match &verdict.witness {
            Some((x, y)) => Some((report::int_vec_doc(x)?, report::int_vec_doc(y)?)),
            None => None,
        },
        float_defect: Some(defect),
        companion: None,
        search_box: None,
        verdict: if verdict.pass { "pass".into() } else { "fail".into() },
    };
    report::emit(&a.common.out, &report::to_json(&rep)?)?;
    Ok(if verdict.pass { 0 } else { 1 })
}

fn cmd_reduce(a: CommonArgs) -> Result<i32> {
    let inp = TripleInput::read_file(&a.input)?;
    let t = inp.triple()?;
    t.require_expanding()?;
    let outcome = reduce_triple(&t)?;
    let red = outcome.triple();
    let lat = exact::invariant_lattice(&red.r, red.b.elems())?;
    let rep = report::ReduceReport {
        command: "reduce".into(),
        changed: outcome.changed(),
        reduced: report::triple_doc(red)?,
        history: report::history_doc(&red.history)?,
        invariant_lattice_standard: lat.is_standard(),
    };
    report::emit(&a.out, &report::to_json(&rep)?)?;
    Ok(0)
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<i32> {
    let inp = TripleInput::read_file(&a.common.input)?;
    let t = inp.triple()?;
    t.require_expanding()?;
    let verdict = check_hadamard(&t)?;
    let mut notes = Vec::new();
    let rt = t.r.transpose();
    let mut periodic = Vec::new();
    for m in 1..=a.m_max {
        // |det((R^T)^m - I)| counts the period-m points exactly.
        let modulus = rt.pow(m).sub(&exact::ExactMatrix::identity(t.dim()));
        let count = modulus
            .det()?
            .abs()
            .to_integer()
            .to_usize()
            .ok_or_else(|| Error::TooLarge("periodic point count".into()))?;
        periodic.push(report::PeriodCountDoc { period: m, count });
    }
    let cycles = match dynamics::extreme_cycles(&t) {
        Ok(c) => c,
        Err(Error::ReduceFirst) => {
            notes.push("digit differences do not span; reduce before cycle analysis".into());
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    let cycle_docs = cycles
        .iter()
        .map(|c| {
            Ok(report::CycleDoc {
                points: c.points.iter().map(|p| report::rat_vec_doc(p)).collect(),
                digits: c.digits.iter().map(report::int_vec_doc).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let comps = dynamics::zero_set_probe(&t, a.m_max, a.k, a.tol)?;
    let comp_docs = comps
        .iter()
        .map(|c| report::ComponentDoc {
            x0: report::rat_vec_doc(&c.x0),
            period: c.period,
            w_basis: c.w_basis.iter().map(|w| report::rat_vec_doc(w)).collect(),
            vanish_depth: c.vanish_depth,
            max_abs_transform: c
                .evidence
                .iter()
                .map(|e| e.abs_mu)
                .fold(0.0, f64::max),
        })
        .collect();
    let qmf = qmf_check(&t, 256, a.seed)?;
    let det = t.r.det()?.abs().to_integer().to_usize().unwrap_or(usize::MAX);
    let completions = if t.n() < det {
        Some(report::CompletionsDoc {
            canonical: complete_representatives_containing(&t.r, &t.l, CompletionStrategy::Canonical)?
                .iter()
                .map(report::int_vec_doc)
                .collect::<Result<_>>()?,
            near_zero: complete_representatives_containing(&t.r, &t.l, CompletionStrategy::NearZero)?
                .iter()
                .map(report::int_vec_doc)
                .collect::<Result<_>>()?,
        })
    } else {
        None
    };
    let rep = report::AnalyzeReport {
        command: "analyze".into(),
        hadamard: verdict.pass,
        periodic_points: periodic,
        extreme_cycles: cycle_docs,
        components: comp_docs,
        qmf_defect: qmf.max_defect,
        completions,
        notes,
    };
    report::emit(&a.common.out, &report::to_json(&rep)?)?;
    Ok(0)
}

fn cmd_decompose(a: DecomposeArgs) -> Result<i32> {
    let inp = TripleInput::read_file(&a.common.input)?;
    let t = inp.triple()?;
    t.require_expanding()?;
    let comps = dynamics::zero_set_probe(&t, a.m_max, a.k, a.tol)?;
    if comps.is_empty() {
        return Err(Error::NotQuasiProduct(
            "no invariant component found in the zero set within the period bound".into(),
        ));
    }
    let mut last_err: Option<Error> = None;
    for comp in &comps {
        let bs = match dynamics::block_normalize(&t, &comp.x0, &comp.w_basis) {
            Ok(bs) => bs,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let qp = match quasi::detect_quasi_product(&bs.triple, bs.split, &bs.y0) {
            Ok(qp) => qp,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let proj = match quasi::project_triples(&qp) {
            Ok(p) => p,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let gamma2 = match quasi::candidate_gamma2(&qp, a.index_bound, 4, 8, 0.05) {
            Ok(g2) => Some(report::Gamma2Doc {
                source: format!("{:?}", g2.source),
                basis: report::rat_matrix_doc(g2.lattice.basis()),
                screen_defect: g2.screen_defect,
            }),
            Err(_) => None,
        };
        let rep = report::DecomposeReport {
            command: "decompose".into(),
            split: qp.split,
            straightening: report::rat_matrix_doc(&bs.n_mat),
            witness_x0: report::rat_vec_doc(&comp.x0),
            witness_y0: report::rat_vec_doc(&bs.y0),
            r1: report::int_matrix_doc(&qp.r1)?,
            r2: report::int_matrix_doc(&qp.r2)?,
            shear: report::int_matrix_doc(&qp.c)?,
            gamma_basis: report::int_matrix_doc(qp.gamma.basis())?,
            q: report::int_matrix_doc(&qp.q)?,
            r2_tilde: report::int_matrix_doc(&qp.r2_tilde)?,
            base: report::triple_doc(&qp.base)?,
            fibers: qp
                .fiber_offsets
                .iter()
                .zip(&qp.fibers)
                .map(|(off, elems)| {
                    Ok(report::FiberDoc {
                        offset: report::int_vec_doc(off)?,
                        elems: elems.iter().map(report::int_vec_doc).collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            projected: report::ProjectedDoc {
                bases: proj.bases.iter().map(report::triple_doc).collect::<Result<_>>()?,
                fibers: proj.fibers.iter().map(report::triple_doc).collect::<Result<_>>()?,
            },
            gamma2,
        };
        report::emit(&a.common.out, &report::to_json(&rep)?)?;
        return Ok(0);
    }
    Err(last_err.unwrap_or(Error::NotQuasiProduct("no component decomposes".into())))
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<i32> {
    let inp = TripleInput::read_file(&a.common.input)?;
    let t = inp.triple()?;
    let opts = SynthesisOptions {
        levels: parse_levels(&a.levels)?,
        grid: a.grid,
        tol: a.defect_tol,
        m_max: a.m_max,
        probe_samples: a.k,
        probe_tol: a.tol,
        index_bound: a.index_bound,
        budget: a.budget,
    };
    let out = synthesize_spectrum(&t, &opts)?;
    let reduced = reduce_triple(&t)?;
    let final_level = *opts.levels.last().unwrap();
    let mode = match &out.route {
        SynthesisRoute::Leveled { .. } => "leveled",
        SynthesisRoute::QuasiProduct { .. } => "product",
    };
    let shown_level = out.report.levels.last().map(|s| s.level).unwrap_or(final_level);
    if let Some(csv) = &a.csv {
        let pts = out.candidate.enumerate(shown_level, opts.budget)?;
        report::write_spectrum_csv(csv, &pts)?;
    }
    let rep = report::SpectrumReport {
        command: "spectrum".into(),
        route: format!("{:?}", out.route),
        candidate: out.candidate.describe(),
        certification: report::cert_doc(mode, &out.report),
        reduced: report::triple_doc(reduced.triple())?,
        history: report::history_doc(&reduced.triple().history)?,
        points_at_final_level: out.report.levels.last().map(|s| s.n_points).unwrap_or(0),
        points_preview: report::points_preview(&out.candidate, shown_level.min(3), opts.budget, 64)?,
        trace: out.trace.clone(),
        verdict: if out.report.pass { "pass".into() } else { "inconclusive".into() },
    };
    report::emit(&a.common.out, &report::to_json(&rep)?)?;
    Ok(if out.report.pass { 0 } else { 4 })
}

fn build_leveled_candidate(t: &Triple) -> Result<SpectrumCandidate> {
    let reduced = reduce_triple(t)?;
    let red = reduced.triple();
    let cycles = dynamics::extreme_cycles(red)?;
    let seeds = dynamics::extreme_cycle_points(&cycles);
    if seeds.is_empty() {
        return Err(Error::IdentityViolated("no extreme cycles for the reduced triple".into()));
    }
    let inner = SpectrumCandidate::Leveled {
        rt: red.r.transpose(),
        digits: red.l.as_rat_vecs(),
        seeds,
    };
    Ok(apply_history(inner, &red.history))
}

fn cmd_jp_check(a: JpCheckArgs) -> Result<i32> {
    let inp = TripleInput::read_file(&a.common.input)?;
    let t = inp.triple()?;
    let verdict = check_hadamard(&t)?;
    if !verdict.pass {
        return Err(Error::OrthogonalityViolated(format!(
            "input is not a Hadamard triple: witness {:?}",
            verdict.witness
        )));
    }
    let levels = parse_levels(&a.levels)?;
    let cand = build_leveled_candidate(&t)?;
    let ev = MeasureEvaluator::from_triple(&t)?;
    let rep = jp_certify(&ev, &cand, &levels, a.grid, a.defect_tol, a.budget)?;
    if let Some(csv) = &a.csv {
        let pts = cand.enumerate(*levels.last().unwrap(), a.budget)?;
        report::write_spectrum_csv(csv, &pts)?;
    }
    let doc = report::JpCheckReport {
        command: "jp-check".into(),
        candidate: cand.describe(),
        certification: report::cert_doc("leveled", &rep),
        verdict: if rep.pass { "pass".into() } else { "inconclusive".into() },
    };
    report::emit(&a.common.out, &report::to_json(&doc)?)?;
    Ok(if rep.pass { 0 } else { 4 })
}

fn cmd_render(a: RenderArgs) -> Result<i32> {
    let inp = TripleInput::read_file(&a.common.input)?;
    let r = inp.matrix()?;
    let b = inp.digits()?;
    if !exact::is_expansive(&r)? {
        return Err(Error::NotExpansive);
    }
    let pts = attractor_points(&r, &b, a.level, a.max_points, a.seed)?;
    let mut csv_path = None;
    if let Some(csv) = &a.csv {
        let mut text = String::new();
        for p in &pts {
            let row: Vec<String> = p.iter().map(|x| format!("{x:.12}")).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        std::fs::write(csv, text).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
        csv_path = Some(csv.display().to_string());
    }
    let mut pgm_path = None;
    if let Some(pgm) = &a.pgm {
        if b.dim() == 2 && a.png_size > 0 {
            let n = a.png_size;
            let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
            for p in &pts {
                x0 = x0.min(p[0]);
                x1 = x1.max(p[0]);
                y0 = y0.min(p[1]);
                y1 = y1.max(p[1]);
            }
            let (sx, sy) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
            let mut counts = vec![0u32; n * n];
            for p in &pts {
                let i = (((p[1] - y0) / sy) * (n - 1) as f64).round() as usize;
                let j = (((p[0] - x0) / sx) * (n - 1) as f64).round() as usize;
                counts[(n - 1 - i) * n + j] += 1;
            }
            let peak = counts.iter().copied().max().unwrap_or(1).max(1);
            let pixels: Vec<u8> = counts
                .iter()
                .map(|&c| {
                    if c == 0 {
                        255
                    } else {
                        // Log scale keeps sparse fractal densities visible.
                        let v = 1.0 - (c as f64).ln() / (peak as f64).ln().max(1.0);
                        (v * 200.0) as u8
                    }
                })
                .collect();
            report::write_pgm(pgm, n, n, &pixels)?;
            pgm_path = Some(pgm.display().to_string());
        }
    }
    let rep = report::RenderReport {
        command: "render".into(),
        level: a.level,
        points: pts.len(),
        csv: csv_path,
        pgm: pgm_path,
    };
    report::emit(&a.common.out, &report::to_json(&rep)?)?;
    Ok(0)
}
