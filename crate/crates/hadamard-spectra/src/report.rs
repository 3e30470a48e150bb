//! Input schema and report emission.
//!
//! Triples arrive as {"R": [[int]], "B": [[int]], "L": [[int]]?}. Reports
//! serialize with fixed field order and fixed enumeration order so identical
//! inputs produce byte-identical output. Rational values render as "p/q"
//! strings ("p" when integral).

use std::io::Write;
use std::path::Path;

use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExactMatrix, IntVec, Rat};
use crate::spectrum::{CertificationReport, SpectrumCandidate};
use crate::triple::{ConjugationRecord, DigitSet, Triple};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleInput {
    #[serde(rename = "R")]
    pub r: Vec<Vec<i64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Vec<i64>>>,
}

impl TripleInput {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Input(format!("JSON parse error at line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn matrix(&self) -> Result<ExactMatrix> {
        let rows: Vec<&[i64]> = self.r.iter().map(|r| r.as_slice()).collect();
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
            return Err(Error::Shape(format!(
                "R must be square and nonempty, got {} rows",
                rows.len()
            )));
        }
        Ok(ExactMatrix::from_i64(&rows))
    }

    pub fn digits(&self) -> Result<DigitSet> {
        let rows: Vec<&[i64]> = self.b.iter().map(|r| r.as_slice()).collect();
        DigitSet::from_i64(&rows)
    }

    pub fn frequencies(&self) -> Result<Option<DigitSet>> {
        match &self.l {
            None => Ok(None),
            Some(l) => {
                let rows: Vec<&[i64]> = l.iter().map(|r| r.as_slice()).collect();
                Ok(Some(DigitSet::from_i64(&rows)?))
            }
        }
    }

    /// Full triple; errors when L is absent.
    pub fn triple(&self) -> Result<Triple> {
        let l = self
            .frequencies()?
            .ok_or_else(|| Error::Input("this command needs the frequency set L".into()))?;
        Triple::new(self.matrix()?, self.digits()?, l)
    }
}

pub fn rat_str(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rat_vec_doc(v: &[Rat]) -> Vec<String> {
    v.iter().map(rat_str).collect()
}

pub fn rat_matrix_doc(m: &ExactMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| rat_str(m.get(i, j))).collect())
        .collect()
}

pub fn int_matrix_doc(m: &ExactMatrix) -> Result<Vec<Vec<i64>>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let q = m.get(i, j);
                    if !q.is_integer() {
                        return Err(Error::NotIntegral(format!("entry ({i},{j}) = {q}")));
                    }
                    q.to_integer()
                        .to_i64()
                        .ok_or_else(|| Error::TooLarge("matrix entry beyond i64".into()))
                })
                .collect()
        })
        .collect()
}

pub fn int_vec_doc(v: &IntVec) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| x.to_i64().ok_or_else(|| Error::TooLarge("digit beyond i64".into())))
        .collect()
}

pub fn digit_set_doc(d: &DigitSet) -> Result<Vec<Vec<i64>>> {
    d.iter().map(int_vec_doc).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleDoc {
    #[serde(rename = "R")]
    pub r: Vec<Vec<i64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    #[serde(rename = "L")]
    pub l: Vec<Vec<i64>>,
}

pub fn triple_doc(t: &Triple) -> Result<TripleDoc> {
    Ok(TripleDoc {
        r: int_matrix_doc(&t.r)?,
        b: digit_set_doc(&t.b)?,
        l: digit_set_doc(&t.l)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HistoryDoc {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_shift: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_shift: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kept: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped: Option<usize>,
}

pub fn history_doc(history: &[ConjugationRecord]) -> Result<Vec<HistoryDoc>> {
    history
        .iter()
        .map(|rec| {
            Ok(match rec {
                ConjugationRecord::Translation { b_shift, l_shift } => HistoryDoc {
                    kind: "translation".into(),
                    matrix: None,
                    b_shift: Some(int_vec_doc(b_shift)?),
                    l_shift: Some(int_vec_doc(l_shift)?),
                    kept: None,
                    dropped: None,
                },
                ConjugationRecord::Unimodular { m } => HistoryDoc {
                    kind: "unimodular".into(),
                    matrix: Some(rat_matrix_doc(m)),
                    b_shift: None,
                    l_shift: None,
                    kept: None,
                    dropped: None,
                },
                ConjugationRecord::LatticeRescale { m } => HistoryDoc {
                    kind: "lattice-rescale".into(),
                    matrix: Some(rat_matrix_doc(m)),
                    b_shift: None,
                    l_shift: None,
                    kept: None,
                    dropped: None,
                },
                ConjugationRecord::DimensionDrop { kept, dropped } => HistoryDoc {
                    kind: "dimension-drop".into(),
                    matrix: None,
                    b_shift: None,
                    l_shift: None,
                    kept: Some(*kept),
                    dropped: Some(*dropped),
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub command: String,
    pub input: TripleInput,
    pub hadamard: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(Vec<i64>, Vec<i64>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub float_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub companion: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_box: Option<i64>,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReduceReport {
    pub command: String,
    pub changed: bool,
    pub reduced: TripleDoc,
    pub history: Vec<HistoryDoc>,
    pub invariant_lattice_standard: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodCountDoc {
    pub period: u32,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleDoc {
    pub points: Vec<Vec<String>>,
    pub digits: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentDoc {
    pub x0: Vec<String>,
    pub period: u32,
    pub w_basis: Vec<Vec<String>>,
    pub vanish_depth: u32,
    pub max_abs_transform: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletionsDoc {
    pub canonical: Vec<Vec<i64>>,
    pub near_zero: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub command: String,
    pub hadamard: bool,
    pub periodic_points: Vec<PeriodCountDoc>,
    pub extreme_cycles: Vec<CycleDoc>,
    pub components: Vec<ComponentDoc>,
    pub qmf_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completions: Option<CompletionsDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberDoc {
    pub offset: Vec<i64>,
    pub elems: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gamma2Doc {
    pub source: String,
    pub basis: Vec<Vec<String>>,
    pub screen_defect: f64,
}

/// Verified one-sided systems of the split: one base triple per frequency
/// tail, one fiber triple per base digit.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectedDoc {
    pub bases: Vec<TripleDoc>,
    pub fibers: Vec<TripleDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposeReport {
    pub command: String,
    pub split: usize,
    pub straightening: Vec<Vec<String>>,
    pub witness_x0: Vec<String>,
    pub witness_y0: Vec<String>,
    pub r1: Vec<Vec<i64>>,
    pub r2: Vec<Vec<i64>>,
    pub shear: Vec<Vec<i64>>,
    pub gamma_basis: Vec<Vec<i64>>,
    pub q: Vec<Vec<i64>>,
    pub r2_tilde: Vec<Vec<i64>>,
    pub base: TripleDoc,
    pub fibers: Vec<FiberDoc>,
    pub projected: ProjectedDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<Gamma2Doc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelDoc {
    pub level: u32,
    pub n_points: usize,
    pub min_sum: f64,
    pub max_sum: f64,
    pub max_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessDoc {
    pub level: u32,
    pub xi: Vec<f64>,
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertDoc {
    pub mode: String,
    pub grid: usize,
    #[serde(rename = "N_lambda")]
    pub n_lambda: usize,
    pub max_defect: f64,
    pub min_partial: f64,
    pub max_partial: f64,
    pub witnesses: Vec<WitnessDoc>,
    pub tol: f64,
    pub monotone: bool,
    pub bessel_ok: bool,
    pub numeric_slack: f64,
    pub levels: Vec<LevelDoc>,
}

pub fn cert_doc(mode: &str, rep: &CertificationReport) -> CertDoc {
    let last = rep.levels.last();
    CertDoc {
        mode: mode.into(),
        grid: rep.grid,
        n_lambda: last.map(|s| s.n_points).unwrap_or(0),
        max_defect: last.map(|s| s.max_defect).unwrap_or(1.0),
        min_partial: last.map(|s| s.min_sum).unwrap_or(0.0),
        max_partial: last.map(|s| s.max_sum).unwrap_or(0.0),
        witnesses: rep
            .levels
            .iter()
            .map(|s| WitnessDoc { level: s.level, xi: s.worst_xi.clone(), defect: s.max_defect })
            .collect(),
        tol: rep.tol,
        monotone: rep.monotone,
        bessel_ok: true,
        numeric_slack: rep.slack,
        levels: rep
            .levels
            .iter()
            .map(|s| LevelDoc {
                level: s.level,
                n_points: s.n_points,
                min_sum: s.min_sum,
                max_sum: s.max_sum,
                max_defect: s.max_defect,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub command: String,
    pub route: String,
    pub candidate: String,
    pub certification: CertDoc,
    pub reduced: TripleDoc,
    pub history: Vec<HistoryDoc>,
    pub points_at_final_level: usize,
    pub points_preview: Vec<Vec<String>>,
    pub trace: Vec<String>,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct JpCheckReport {
    pub command: String,
    pub candidate: String,
    pub certification: CertDoc,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RenderReport {
    pub command: String,
    pub level: u32,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pgm: Option<String>,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Report destination: file when a path is given, stdout otherwise.
pub fn emit(out: &Option<std::path::PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

/// Spectrum CSV: one frequency per row, coordinates as "p/q" strings.
pub fn write_spectrum_csv(path: &Path, pts: &[Vec<Rat>]) -> Result<()> {
    let mut text = String::new();
    for p in pts {
        text.push_str(&rat_vec_doc(p).join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Plain-text grayscale raster (P2), values 0..255 row by row.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::Shape("pixel buffer does not match raster size".into()));
    }
    let mut text = format!("P2\n{width} {height}\n255\n");
    for row in pixels.chunks(width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Preview of the lowest spectrum points for the report body.
pub fn points_preview(cand: &SpectrumCandidate, level: u32, budget: u64, cap: usize) -> Result<Vec<Vec<String>>> {
    let pts = cand.enumerate(level, budget)?;
    Ok(pts.iter().take(cap).map(|p| rat_vec_doc(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_build() {
        let text = r#"{"R": [[4]], "B": [[0], [2]], "L": [[0], [1]]}"#;
        let inp = TripleInput::parse(text).unwrap();
        let t = inp.triple().unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.n(), 2);
        let no_l = TripleInput::parse(r#"{"R": [[4]], "B": [[0], [2]]}"#).unwrap();
        assert!(no_l.frequencies().unwrap().is_none());
        assert!(no_l.triple().is_err());
        let bad = TripleInput::parse("{\"R\": [[4]],");
        let msg = format!("{}", bad.unwrap_err());
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(rat_str(&crate::exact::ratio(1, 3)), "1/3");
        assert_eq!(rat_str(&crate::exact::ratio(-4, 2)), "-2");
        assert_eq!(rat_str(&crate::exact::ratio(0, 5)), "0");
    }

    #[test]
    fn json_is_stable() {
        let inp = TripleInput::parse(r#"{"R": [[2]], "B": [[0], [1]], "L": [[0], [1]]}"#).unwrap();
        let rep = VerifyReport {
            command: "verify".into(),
            input: inp,
            hadamard: Some(true),
            witness: None,
            float_defect: Some(1.2e-16),
            companion: None,
            search_box: None,
            verdict: "pass".into(),
        };
        let a = to_json(&rep).unwrap();
        let b = to_json(&rep).unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"R\""));
    }
}
