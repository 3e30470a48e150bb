//! Candidate spectra and their certification.
//!
//! A candidate describes a growing frequency family Lambda_N. The leveled
//! form expands every extreme cycle point x0 into the family
//! -(R^T)^N x0 + { sum_{k<N} (R^T)^k l_k }; these nest as N grows because
//! each cycle point is the successor of another one. Product forms pair a
//! base candidate with a lattice for the fiber coordinates. Certification
//! first checks the exact level identity family by family, then sums
//! |mu_hat(xi + lambda)|^2 over a grid of base frequencies with certified
//! per-term truncation errors, a Bessel guard (partial sums of an orthogonal
//! system never exceed 1) and a monotonicity guard across levels.

use num_traits::Zero;
use rayon::prelude::*;

use crate::dynamics::{self, InvariantComponent};
use crate::error::{Error, Result};
use crate::exact::{self, rat_to_f64, ExactMatrix, Lattice, Rat, RatVec};
use crate::measure::MeasureEvaluator;
use crate::quasi::{self, Gamma2Source};
use crate::triple::{ConjugationRecord, Triple};

/// Per-term truncation tolerance inside certification sums.
const JP_EVAL_TOL: f64 = 1e-7;
/// Hard safety cap on enumerated points, independent of the user budget.
const ENUM_CAP: u128 = 4_000_000;

#[derive(Debug, Clone)]
pub enum SpectrumCandidate {
    /// Union over seeds x0 of { -(R^T)^N x0 + sum_{k<N} (R^T)^k l_k }.
    Leveled { rt: ExactMatrix, digits: Vec<RatVec>, seeds: Vec<RatVec> },
    /// Base spectrum on the leading coordinates times a fiber lattice on the
    /// trailing ones. The lattice is truncated to the coefficient box of
    /// radius ceil(growth^N) so both factors refine together.
    Product { base: Box<SpectrumCandidate>, fiber: Lattice, growth: f64 },
    /// Every point pushed through a change of frequency coordinates.
    Mapped { inner: Box<SpectrumCandidate>, map: ExactMatrix },
    /// Zero coordinates appended; valid when the measure does not see the
    /// extra directions.
    ExtendDims { inner: Box<SpectrumCandidate>, zeros: usize },
}

impl SpectrumCandidate {
    pub fn dim(&self) -> usize {
        match self {
            SpectrumCandidate::Leveled { rt, .. } => rt.rows(),
            SpectrumCandidate::Product { base, fiber, .. } => base.dim() + fiber.dim(),
            SpectrumCandidate::Mapped { map, .. } => map.rows(),
            SpectrumCandidate::ExtendDims { inner, zeros } => inner.dim() + zeros,
        }
    }

    /// Upper bound on the point count at `level`, before deduplication.
    pub fn count_bound(&self, level: u32) -> u128 {
        match self {
            SpectrumCandidate::Leveled { digits, seeds, .. } => {
                let per = (digits.len() as u128).checked_pow(level).unwrap_or(u128::MAX);
                per.saturating_mul(seeds.len() as u128)
            }
            SpectrumCandidate::Product { base, fiber, growth } => {
                let side = 2 * fiber_radius(*growth, level) as u128 + 1;
                let fib = side.checked_pow(fiber.dim() as u32).unwrap_or(u128::MAX);
                base.count_bound(level).saturating_mul(fib)
            }
            SpectrumCandidate::Mapped { inner, .. } => inner.count_bound(level),
            SpectrumCandidate::ExtendDims { inner, .. } => inner.count_bound(level),
        }
    }

    /// Basis of the sampling cell for base frequencies: unit cube for leveled
    /// families, base cell times fiber basis for products, image cell for
    /// mapped candidates.
    pub fn cell(&self) -> ExactMatrix {
        match self {
            SpectrumCandidate::Leveled { rt, .. } => ExactMatrix::identity(rt.rows()),
            SpectrumCandidate::Product { base, fiber, .. } => {
                block_diag(&base.cell(), fiber.basis())
            }
            SpectrumCandidate::Mapped { inner, map } => map.mul(&inner.cell()),
            SpectrumCandidate::ExtendDims { inner, zeros } => {
                block_diag(&inner.cell(), &ExactMatrix::identity(*zeros))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SpectrumCandidate::Leveled { digits, seeds, .. } => {
                format!("leveled({} digits, {} seeds)", digits.len(), seeds.len())
            }
            SpectrumCandidate::Product { base, fiber, .. } => {
                format!("product({} x rank-{} lattice)", base.describe(), fiber.dim())
            }
            SpectrumCandidate::Mapped { inner, .. } => format!("mapped({})", inner.describe()),
            SpectrumCandidate::ExtendDims { inner, zeros } => {
                format!("extend+{}({})", zeros, inner.describe())
            }
        }
    }

    /// All points at `level`, deduplicated and sorted.
    pub fn enumerate(&self, level: u32, budget: u64) -> Result<Vec<RatVec>> {
        let bound = self.count_bound(level);
        if bound > budget as u128 || bound > ENUM_CAP {
            return Err(Error::BudgetExhausted(format!(
                "level {level} needs up to {bound} points, budget {budget}"
            )));
        }
        let mut pts = self.enumerate_raw(level)?;
        pts.sort();
        pts.dedup();
        Ok(pts)
    }

    fn enumerate_raw(&self, level: u32) -> Result<Vec<RatVec>> {
        match self {
            SpectrumCandidate::Leveled { rt, digits, seeds } => {
                if digits.is_empty() || seeds.is_empty() {
                    return Err(Error::Input("leveled candidate needs digits and seeds".into()));
                }
                let tails = digit_tails(rt, digits, level);
                let pw = rt.pow(level);
                let mut out = Vec::with_capacity(seeds.len() * tails.len());
                for seed in seeds {
                    let base: RatVec = pw.mul_vec(seed).iter().map(|x| -x).collect();
                    for t in &tails {
                        out.push(exact::vec_add(&base, t));
                    }
                }
                Ok(out)
            }
            SpectrumCandidate::Product { base, fiber, growth } => {
                let bpts = base.enumerate_raw(level)?;
                let fpts = lattice_box(fiber, fiber_radius(*growth, level));
                let mut out = Vec::with_capacity(bpts.len() * fpts.len());
                for bp in &bpts {
                    for fp in &fpts {
                        let mut v = bp.clone();
                        v.extend_from_slice(fp);
                        out.push(v);
                    }
                }
                Ok(out)
            }
            SpectrumCandidate::Mapped { inner, map } => {
                Ok(inner.enumerate_raw(level)?.iter().map(|p| map.mul_vec(p)).collect())
            }
            SpectrumCandidate::ExtendDims { inner, zeros } => {
                let mut pts = inner.enumerate_raw(level)?;
                for p in pts.iter_mut() {
                    p.extend(std::iter::repeat_n(Rat::zero(), *zeros));
                }
                Ok(pts)
            }
        }
    }
}

fn fiber_radius(growth: f64, level: u32) -> i64 {
    (growth.powi(level as i32).ceil() as i64).max(1)
}

/// All sums sum_{k<level} (R^T)^k l_k via the recurrence
/// T_{j+1} = { l + R^T t : l in digits, t in T_j }.
fn digit_tails(rt: &ExactMatrix, digits: &[RatVec], level: u32) -> Vec<RatVec> {
    let mut tails: Vec<RatVec> = vec![vec![Rat::zero(); rt.rows()]];
    for _ in 0..level {
        let mut next = Vec::with_capacity(tails.len() * digits.len());
        for t in &tails {
            let img = rt.mul_vec(t);
            for l in digits {
                next.push(exact::vec_add(l, &img));
            }
        }
        tails = next;
    }
    tails
}

/// Integer-coefficient box of a lattice: basis * c for c in [-radius, radius]^rank.
fn lattice_box(lat: &Lattice, radius: i64) -> Vec<RatVec> {
    let rank = lat.rank();
    let basis = lat.basis();
    let mut out = Vec::new();
    let side = (2 * radius + 1) as usize;
    let total = side.pow(rank as u32);
    for mut idx in 0..total {
        let mut c = vec![Rat::zero(); rank];
        for ci in c.iter_mut() {
            *ci = Rat::from_integer(((idx % side) as i64 - radius).into());
            idx /= side;
        }
        out.push(basis.mul_vec(&c));
    }
    out.sort();
    out
}

fn block_diag(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut m = ExactMatrix::zero(ra + rb, ca + cb);
    for i in 0..ra {
        for j in 0..ca {
            m.set(i, j, a.get(i, j).clone());
        }
    }
    for i in 0..rb {
        for j in 0..cb {
            m.set(ra + i, ca + j, b.get(i, j).clone());
        }
    }
    m
}

fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Single-seed family { -(R^T)^level seed + sum (R^T)^k l_k }, unsorted.
pub fn leveled_family(
    rt: &ExactMatrix,
    digits: &[RatVec],
    seed: &RatVec,
    level: u32,
) -> Result<Vec<RatVec>> {
    let count = (digits.len() as u128).checked_pow(level).unwrap_or(u128::MAX);
    if count > ENUM_CAP {
        return Err(Error::TooLarge(format!("family of {count} points")));
    }
    let base: RatVec = rt.pow(level).mul_vec(seed).iter().map(|x| -x).collect();
    Ok(digit_tails(rt, digits, level)
        .iter()
        .map(|t| exact::vec_add(&base, t))
        .collect())
}

/// Exact level identity for one seed family:
/// sum_lambda |mu_hat_N(xi + lambda)|^2 = 1 at every xi, with mu_hat_N the
/// transform truncated to exactly N mask factors. Also checks the family has
/// no repeated points. Returns the worst defect over the probe frequencies.
pub fn finite_level_identity(
    ev: &MeasureEvaluator,
    rt: &ExactMatrix,
    digits: &[RatVec],
    seed: &RatVec,
    level: u32,
    xis: &[Vec<f64>],
) -> Result<f64> {
    let fam = leveled_family(rt, digits, seed, level)?;
    let mut sorted = fam.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != fam.len() {
        return Err(Error::IdentityViolated(format!(
            "level-{level} family repeats points: {} of {}",
            sorted.len(),
            fam.len()
        )));
    }
    let mut worst = 0.0f64;
    for xi in xis {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for lam in &fam {
            let v = ev.fourier_level(xi, lam, level)?;
            kahan_add(&mut sum, &mut comp, v.norm_sqr());
        }
        worst = worst.max((sum - 1.0).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct LevelStats {
    pub level: u32,
    pub n_points: usize,
    pub min_sum: f64,
    pub max_sum: f64,
    /// max over the grid of |sum - 1|.
    pub max_defect: f64,
    /// Grid frequency attaining the worst defect.
    pub worst_xi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CertificationReport {
    pub grid: usize,
    pub tol: f64,
    /// Final-level max defect within tolerance.
    pub pass: bool,
    /// Sums never decreased across levels beyond numeric slack.
    pub monotone: bool,
    /// Accumulated bound for truncation error inside the sums.
    pub slack: f64,
    pub levels: Vec<LevelStats>,
}

impl CertificationReport {
    pub fn final_defect(&self) -> f64 {
        self.levels.last().map(|s| s.max_defect).unwrap_or(1.0)
    }
}

/// Grid of base frequencies (u + 1/2)/grid per axis, pushed through the cell
/// basis. Centered offsets avoid lattice points of the candidate itself.
fn cell_grid(cell: &ExactMatrix, grid: usize) -> Vec<Vec<f64>> {
    let d = cell.rows();
    let cellf: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| rat_to_f64(cell.get(i, j))).collect())
        .collect();
    let total = grid.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut u = vec![0.0f64; d];
        for uj in u.iter_mut() {
            *uj = ((idx % grid) as f64 + 0.5) / grid as f64;
            idx /= grid;
        }
        out.push(cellf.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect());
    }
    out
}

/// Truncated completeness sums over a grid of base frequencies, one pass per
/// level. Fails hard when a partial sum exceeds 1 beyond certified slack.
pub fn jp_certify(
    ev: &MeasureEvaluator,
    cand: &SpectrumCandidate,
    levels: &[u32],
    grid: usize,
    tol: f64,
    budget: u64,
) -> Result<CertificationReport> {
    if cand.dim() != ev.dim() {
        return Err(Error::Shape("candidate dimension does not match the measure".into()));
    }
    if levels.is_empty() || grid == 0 {
        return Err(Error::Input("need at least one level and a positive grid".into()));
    }
    let xis = cell_grid(&cand.cell(), grid);
    let mut stats = Vec::new();
    let mut prev_sums: Option<Vec<f64>> = None;
    let mut monotone = true;
    let mut slack_max = 0.0f64;
    for &lv in levels {
        let pts = cand.enumerate(lv, budget)?;
        let evals: Vec<(f64, f64)> = xis
            .par_iter()
            .map(|xi| -> Result<(f64, f64)> {
                let mut sum = 0.0;
                let mut comp = 0.0;
                let mut slack = 0.0;
                for lam in &pts {
                    let v = ev.fourier_shifted(xi, lam, JP_EVAL_TOL)?;
                    let m = v.value.norm();
                    slack += 2.0 * m * v.err + v.err * v.err;
                    kahan_add(&mut sum, &mut comp, m * m);
                }
                Ok((sum, slack))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut min_sum = f64::INFINITY;
        let mut max_sum = f64::NEG_INFINITY;
        let mut max_defect = 0.0f64;
        let mut worst_xi = Vec::new();
        for (xi, &(s, sl)) in xis.iter().zip(&evals) {
            slack_max = slack_max.max(sl);
            if s > 1.0 + sl + 1e-9 {
                return Err(Error::BesselViolated { point: xi.clone(), sum: s });
            }
            min_sum = min_sum.min(s);
            max_sum = max_sum.max(s);
            if (s - 1.0).abs() > max_defect {
                max_defect = (s - 1.0).abs();
                worst_xi = xi.clone();
            }
        }
        if let Some(prev) = &prev_sums {
            for (p, &(s, sl)) in prev.iter().zip(&evals) {
                if s < p - 2.0 * sl - 1e-9 {
                    monotone = false;
                }
            }
        }
        prev_sums = Some(evals.iter().map(|&(s, _)| s).collect());
        stats.push(LevelStats { level: lv, n_points: pts.len(), min_sum, max_sum, max_defect, worst_xi });
    }
    let pass = stats.last().map(|s| s.max_defect <= tol).unwrap_or(false);
    Ok(CertificationReport { grid, tol, pass, monotone, slack: slack_max, levels: stats })
}

#[derive(Debug, Clone)]
pub struct OrthogonalityReport {
    pub pairs: usize,
    /// Certified upper bound for max |mu_hat(lambda - lambda')|.
    pub worst: f64,
}

/// Pairwise orthogonality of the frequency exponentials in L^2(mu):
/// |mu_hat(lambda - lambda')| for distinct points, capped at `max_pairs`
/// pairs in deterministic order.
pub fn certify_orthogonality(
    ev: &MeasureEvaluator,
    pts: &[RatVec],
    max_pairs: usize,
) -> Result<OrthogonalityReport> {
    let zero = vec![0.0f64; ev.dim()];
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    'outer: for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if pairs >= max_pairs {
                break 'outer;
            }
            let diff = exact::vec_sub(&pts[j], &pts[i]);
            let v = ev.fourier_shifted(&zero, &diff, 1e-9)?;
            worst = worst.max(v.value.norm() + v.err);
            pairs += 1;
        }
    }
    Ok(OrthogonalityReport { pairs, worst })
}

#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    /// Levels for certification sums, ascending; the last one decides.
    pub levels: Vec<u32>,
    /// Grid resolution per axis for base frequencies.
    pub grid: usize,
    /// Accepted final-level defect.
    pub tol: f64,
    /// Period bound for the invariant-component probe.
    pub m_max: u32,
    /// Evidence samples per candidate component.
    pub probe_samples: usize,
    /// Numeric tolerance for the probe evidence.
    pub probe_tol: f64,
    /// Sublattice index bound in the fiber lattice search.
    pub index_bound: u64,
    /// Cap on enumerated spectrum points per level.
    pub budget: u64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            levels: vec![4, 6, 8],
            grid: 3,
            tol: 1e-2,
            m_max: 6,
            probe_samples: 8,
            probe_tol: 1e-6,
            index_bound: 16,
            budget: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SynthesisRoute {
    /// Leveled families from extreme cycle points of the reduced triple.
    Leveled { seeds: usize },
    /// Block split with a base spectrum and a fiber lattice.
    QuasiProduct { split: usize, gamma2: Gamma2Source },
}

#[derive(Debug)]
pub struct SynthesisOutcome {
    /// Candidate in the coordinates of the input triple.
    pub candidate: SpectrumCandidate,
    /// Certification against the input measure.
    pub report: CertificationReport,
    pub route: SynthesisRoute,
    pub trace: Vec<String>,
}

/// Rewind a candidate through the conjugation history of a derived triple,
/// producing points in the coordinates of the original one. Frequencies map
/// by the transpose of each conjugation; translations do not move them;
/// dropped dimensions come back as zeros.
pub fn apply_history(cand: SpectrumCandidate, history: &[ConjugationRecord]) -> SpectrumCandidate {
    let mut out = cand;
    for rec in history.iter().rev() {
        out = match rec {
            ConjugationRecord::Translation { .. } => out,
            ConjugationRecord::Unimodular { m } | ConjugationRecord::LatticeRescale { m } => {
                SpectrumCandidate::Mapped { inner: Box::new(out), map: m.transpose() }
            }
            ConjugationRecord::DimensionDrop { dropped, .. } => {
                SpectrumCandidate::ExtendDims { inner: Box::new(out), zeros: *dropped }
            }
        };
    }
    out
}

fn clamp_levels(
    levels: &[u32],
    cand: &SpectrumCandidate,
    budget: u64,
    trace: &mut Vec<String>,
) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    for &lv in levels {
        let mut l = lv;
        while l > 1 && cand.count_bound(l) > budget as u128 {
            l -= 1;
        }
        if l != lv {
            trace.push(format!("level {lv} clamped to {l} to fit the point budget"));
        }
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out.sort_unstable();
    out
}

/// Full pipeline: validate, reduce, probe the zero set for an invariant
/// component; on success assemble a product candidate (base synthesis plus
/// screened fiber lattice), otherwise fall back to leveled families from
/// extreme cycles. The result is mapped back to input coordinates and
/// certified against the input measure.
pub fn synthesize_spectrum(t: &Triple, opts: &SynthesisOptions) -> Result<SynthesisOutcome> {
    synthesize_inner(t, opts, 0)
}

fn synthesize_inner(t: &Triple, opts: &SynthesisOptions, depth: usize) -> Result<SynthesisOutcome> {
    if depth > 3 {
        return Err(Error::BudgetExhausted("block recursion deeper than 3".into()));
    }
    t.require_expanding()?;
    let verdict = crate::triple::check_hadamard(t)?;
    if !verdict.pass {
        return Err(Error::Input(format!(
            "triple fails the orthogonality test: witness pair {:?}",
            verdict.witness
        )));
    }
    let mut trace = Vec::new();
    let ev = MeasureEvaluator::from_triple(t)?;

    // Block route first: an invariant component of the zero set signals a
    // splitting; certification still arbitrates.
    let mut attempt: Option<(SpectrumCandidate, SynthesisRoute)> = None;
    if t.dim() >= 2 {
        match dynamics::zero_set_probe(t, opts.m_max, opts.probe_samples, opts.probe_tol) {
            Ok(comps) if !comps.is_empty() => {
                trace.push(format!("zero set carries {} invariant component(s)", comps.len()));
                for comp in &comps {
                    match try_block_route(t, comp, opts, depth, &mut trace) {
                        Ok(Some(found)) => {
                            attempt = Some(found);
                            break;
                        }
                        Ok(None) => {}
                        Err(e) => trace.push(format!("block route error: {e}")),
                    }
                }
            }
            Ok(_) => trace.push("no invariant components in the zero set".into()),
            Err(e) => trace.push(format!("zero-set probe unavailable: {e}")),
        }
    }
    if let Some((cand, route)) = attempt {
        let levels = clamp_levels(&opts.levels, &cand, opts.budget, &mut trace);
        match jp_certify(&ev, &cand, &levels, opts.grid, opts.tol, opts.budget) {
            Ok(report) if report.pass => {
                trace.push(format!(
                    "product candidate certified, defect {:.3e}",
                    report.final_defect()
                ));
                return Ok(SynthesisOutcome { candidate: cand, report, route, trace });
            }
            Ok(report) => trace.push(format!(
                "product candidate defect {:.3e} above tolerance, falling back",
                report.final_defect()
            )),
            Err(e) => trace.push(format!("product certification failed: {e}")),
        }
    }

    // Leveled route from the reduced triple.
    let reduced = crate::triple::reduce_triple(t)?;
    let red = reduced.triple();
    if reduced.changed() {
        trace.push(format!("reduced to a {}-dimensional standard form", red.dim()));
    }
    let cycles = dynamics::extreme_cycles(red)?;
    let seeds = dynamics::extreme_cycle_points(&cycles);
    if seeds.is_empty() {
        return Err(Error::IdentityViolated("no extreme cycles for the reduced triple".into()));
    }
    trace.push(format!(
        "{} extreme cycle(s), {} seed point(s)",
        cycles.len(),
        seeds.len()
    ));
    let inner = SpectrumCandidate::Leveled {
        rt: red.r.transpose(),
        digits: red.l.as_rat_vecs(),
        seeds: seeds.clone(),
    };
    let cand = apply_history(inner, &red.history);
    let levels = clamp_levels(&opts.levels, &cand, opts.budget, &mut trace);
    let report = jp_certify(&ev, &cand, &levels, opts.grid, opts.tol, opts.budget)?;
    trace.push(format!(
        "leveled candidate {}: final defect {:.3e}",
        cand.describe(),
        report.final_defect()
    ));
    Ok(SynthesisOutcome {
        candidate: cand,
        report,
        route: SynthesisRoute::Leveled { seeds: seeds.len() },
        trace,
    })
}

/// One invariant component to a product candidate: straighten the block,
/// detect the fiber structure, synthesize a base spectrum recursively and
/// screen a fiber lattice. Any structural mismatch reports None so other
/// components can be tried.
fn try_block_route(
    t: &Triple,
    comp: &InvariantComponent,
    opts: &SynthesisOptions,
    depth: usize,
    trace: &mut Vec<String>,
) -> Result<Option<(SpectrumCandidate, SynthesisRoute)>> {
    let bs = match dynamics::block_normalize(t, &comp.x0, &comp.w_basis) {
        Ok(bs) => bs,
        Err(e) => {
            trace.push(format!("block straightening failed: {e}"));
            return Ok(None);
        }
    };
    let qp = match quasi::detect_quasi_product(&bs.triple, bs.split, &bs.y0) {
        Ok(qp) => qp,
        Err(e) => {
            trace.push(format!("no fiber structure over this component: {e}"));
            return Ok(None);
        }
    };
    trace.push(format!(
        "fiber structure found: split {}, {} base digits x {} fibers",
        qp.split,
        qp.n1(),
        qp.n2()
    ));
    let g2 = match quasi::candidate_gamma2(&qp, opts.index_bound, 4, 8, 0.05) {
        Ok(g2) => g2,
        Err(e) => {
            trace.push(format!("no fiber lattice passed screening: {e}"));
            return Ok(None);
        }
    };
    trace.push(format!(
        "fiber lattice {:?} accepted, screen defect {:.3e}",
        g2.source, g2.screen_defect
    ));
    let base_out = match synthesize_inner(&qp.base, opts, depth + 1) {
        Ok(o) => o,
        Err(e) => {
            trace.push(format!("base synthesis failed: {e}"));
            return Ok(None);
        }
    };
    if !base_out.report.pass {
        trace.push("base candidate did not certify".into());
        return Ok(None);
    }
    let d2 = qp.r2_tilde.rows();
    let growth = rat_to_f64(&qp.r2_tilde.det()?).abs().powf(1.0 / d2 as f64);
    let block_cand = SpectrumCandidate::Product {
        base: Box::new(base_out.candidate),
        fiber: g2.lattice.clone(),
        growth,
    };
    let cand = apply_history(block_cand, &qp.triple.history);
    Ok(Some((cand, SynthesisRoute::QuasiProduct { split: qp.split, gamma2: g2.source })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::vec_from_i64;
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;

    fn lebesgue_triple() -> Triple {
        Triple::from_i64(&[&[2]], &[&[0], &[1]], &[&[0], &[1]]).unwrap()
    }

    fn jp4_triple() -> Triple {
        Triple::from_i64(&[&[4]], &[&[0], &[2]], &[&[0], &[1]]).unwrap()
    }

    fn ints(pts: &[RatVec]) -> Vec<i64> {
        pts.iter()
            .map(|p| {
                assert!(p.iter().all(|x| x.is_integer()));
                p[0].to_integer().to_i64().unwrap()
            })
            .collect()
    }

    #[test]
    fn leveled_slices_cover_integers() {
        let out = synthesize_spectrum(&lebesgue_triple(), &SynthesisOptions::default()).unwrap();
        assert!(matches!(out.route, SynthesisRoute::Leveled { seeds: 2 }));
        assert!(out.report.pass, "defect {}", out.report.final_defect());
        assert!(out.report.monotone);
        let pts = out.candidate.enumerate(3, 10_000).unwrap();
        assert_eq!(ints(&pts), (-8..8).collect::<Vec<i64>>());
        // Nesting across levels.
        let small = out.candidate.enumerate(2, 10_000).unwrap();
        for p in &small {
            assert!(pts.contains(p));
        }
    }

    #[test]
    fn finite_level_identity_per_seed() {
        let t = lebesgue_triple();
        let ev = MeasureEvaluator::from_triple(&t).unwrap();
        let rt = t.r.transpose();
        let digits = t.l.as_rat_vecs();
        let xis = vec![vec![0.0], vec![0.3], vec![-1.7], vec![12.25]];
        for seed in [vec![Rat::zero()], vec_from_i64(&[1])] {
            let defect = finite_level_identity(&ev, &rt, &digits, &seed, 6, &xis).unwrap();
            assert!(defect < 1e-10, "defect {defect}");
        }
        // The union of both families doubles the level sum: families are
        // complete individually, not jointly, under the level transform.
        let mut sum = 0.0;
        for seed in [vec![Rat::zero()], vec_from_i64(&[1])] {
            for lam in leveled_family(&rt, &digits, &seed, 5).unwrap() {
                sum += ev.fourier_level(&[0.3], &lam, 5).unwrap().norm_sqr();
            }
        }
        assert!((sum - 2.0).abs() < 1e-10, "joint sum {sum}");
    }

    #[test]
    fn jp4_pipeline_maps_back() {
        let out = synthesize_spectrum(&jp4_triple(), &SynthesisOptions::default()).unwrap();
        assert!(out.report.pass, "defect {}", out.report.final_defect());
        assert!(matches!(out.route, SynthesisRoute::Leveled { seeds: 1 }));
        // Reduced digits {0,2} over modulus 4 rescale back by 1/2:
        // level 2 gives {0, 2, 8, 10} / 2 = {0, 1, 4, 5}.
        let pts = out.candidate.enumerate(2, 100).unwrap();
        assert_eq!(ints(&pts), vec![0, 1, 4, 5]);
        let orth = certify_orthogonality(
            &MeasureEvaluator::from_triple(&jp4_triple()).unwrap(),
            &out.candidate.enumerate(3, 1000).unwrap(),
            200,
        )
        .unwrap();
        assert!(orth.worst < 1e-6, "worst {}", orth.worst);
    }

    #[test]
    fn bessel_guard_rejects_fat_candidate() {
        // All of Z against the sparse modulus-4 measure oversubscribes: the
        // partial sums blow past 1 and the guard trips.
        let t = jp4_triple();
        let ev = MeasureEvaluator::from_triple(&t).unwrap();
        let cand = SpectrumCandidate::Leveled {
            rt: ExactMatrix::from_i64(&[&[2]]),
            digits: vec![vec![Rat::zero()], vec_from_i64(&[1])],
            seeds: vec![vec![Rat::zero()], vec_from_i64(&[1])],
        };
        let e = jp_certify(&ev, &cand, &[5], 3, 1e-2, 10_000).unwrap_err();
        assert!(matches!(e, Error::BesselViolated { .. }), "{e}");
    }

    #[test]
    fn rank_drop_extends_with_zeros() {
        let t = Triple::from_i64(&[&[2, 1], &[0, 3]], &[&[0, 0], &[1, 0]], &[&[0, 0], &[1, 0]])
            .unwrap();
        let out = synthesize_spectrum(&t, &SynthesisOptions::default()).unwrap();
        assert!(out.report.pass, "defect {}", out.report.final_defect());
        let pts = out.candidate.enumerate(2, 100).unwrap();
        assert_eq!(pts.len(), 8);
        for p in &pts {
            assert_eq!(p.len(), 2);
            assert!(p[1].is_zero(), "trailing coordinate must be zero: {p:?}");
        }
    }

    #[test]
    fn product_route_on_shear_free_block() {
        let t = Triple::from_i64(
            &[&[2, 0], &[0, 2]],
            &[&[0, 0], &[0, 3], &[1, 0], &[1, 3]],
            &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]],
        )
        .unwrap();
        let opts = SynthesisOptions {
            levels: vec![3, 4],
            grid: 2,
            tol: 0.2,
            ..SynthesisOptions::default()
        };
        let out = synthesize_spectrum(&t, &opts).unwrap();
        match &out.route {
            SynthesisRoute::QuasiProduct { split, gamma2 } => {
                assert_eq!(*split, 1);
                assert!(matches!(gamma2, Gamma2Source::DualOfFiberLattice), "{gamma2:?}");
            }
            other => panic!("expected the product route, got {other:?}\n{:#?}", out.trace),
        }
        assert!(out.report.pass, "defect {}", out.report.final_defect());
        // Points are (integer, k/3) pairs.
        let pts = out.candidate.enumerate(3, 50_000).unwrap();
        let three = Rat::from_integer(BigInt::from(3));
        for p in &pts {
            assert!(p[0].is_integer());
            assert!((&p[1] * &three).is_integer());
        }
    }

    #[test]
    fn history_rewind_composes() {
        // A rescale record multiplies points by m^T; a drop record appends
        // zeros; translations do nothing.
        let inner = SpectrumCandidate::Leveled {
            rt: ExactMatrix::from_i64(&[&[4]]),
            digits: vec![vec![Rat::zero()], vec_from_i64(&[2])],
            seeds: vec![vec![Rat::zero()]],
        };
        let history = vec![
            ConjugationRecord::Translation { b_shift: vec![], l_shift: vec![] },
            ConjugationRecord::LatticeRescale { m: ExactMatrix::from_rows(vec![vec![exact::ratio(1, 2)]]).unwrap() },
        ];
        let cand = apply_history(inner, &history);
        let pts = cand.enumerate(2, 100).unwrap();
        assert_eq!(ints(&pts), vec![0, 1, 4, 5]);
    }
}
