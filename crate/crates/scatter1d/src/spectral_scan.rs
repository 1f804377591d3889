//! Wavenumber sweeps, real-zero refinement of transfer-matrix entries and
//! identity checks for real potentials.

use crate::numeric_engines::{transfer_matrix, Solver};
use crate::potentials::Potential;
use crate::transfer_core::{amplitudes_from_matrix, classify, Classification, ScatteringData, TransferMatrix};
use crate::{check_k, Result, ScatterError, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default zero threshold relative to the local matrix norm.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-8;

/// A transfer-matrix entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Entry {
    M11,
    M12,
    M21,
    M22,
}

impl Entry {
    pub const ALL: [Entry; 4] = [Entry::M11, Entry::M12, Entry::M21, Entry::M22];

    pub fn of(self, m: &TransferMatrix) -> C64 {
        match self {
            Entry::M11 => m.m11(),
            Entry::M12 => m.m12(),
            Entry::M21 => m.m21(),
            Entry::M22 => m.m22(),
        }
    }

    /// Phenomenon signalled by a real zero of this entry.
    pub fn phenomenon(self) -> &'static str {
        match self {
            Entry::M11 => "time_reversed_ss",
            Entry::M12 => "right_reflectionless",
            Entry::M21 => "left_reflectionless",
            Entry::M22 => "spectral_singularity",
        }
    }
}

impl std::str::FromStr for Entry {
    type Err = ScatterError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "M11" => Ok(Entry::M11),
            "M12" => Ok(Entry::M12),
            "M21" => Ok(Entry::M21),
            "M22" => Ok(Entry::M22),
            _ => Err(ScatterError::InvalidInput(format!("unknown matrix entry '{s}'"))),
        }
    }
}

/// Scan settings.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub solver: Solver,
    /// Tolerance for the dynamical engine.
    pub tol: f64,
    /// Zero threshold relative to the local max-norm of `M`.
    pub zero_threshold: f64,
    /// Entries whose real zeros are refined.
    pub refine: [bool; 4],
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { solver: Solver::Auto, tol: 1e-8, zero_threshold: DEFAULT_ZERO_THRESHOLD, refine: [true; 4] }
    }
}

/// One grid point. `error` is set when the solver failed there.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub k: f64,
    pub matrix: Option<TransferMatrix>,
    /// Absent at spectral singularities and solver failures.
    pub data: Option<ScatteringData>,
    pub classification: Option<Classification>,
    pub error: Option<String>,
}

/// A refined real zero of one entry.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroReport {
    pub entry: Entry,
    pub k: f64,
    /// `|entry(k)|`.
    pub residual: f64,
    /// `|entry(k)| / ‖M(k)‖_max`.
    pub relative_residual: f64,
    pub matrix: TransferMatrix,
    pub classification: Classification,
    /// `B₊/A₋ = M21(k)` for coherent perfect absorption at an `M11` zero.
    pub cpa_ratio: Option<C64>,
    /// `|M12 M21 + 1|`, the product identity at spectral singularities.
    pub product_identity_residual: f64,
    /// Residual of the same entry recomputed with the other engine, when it applies.
    pub cross_check_residual: Option<f64>,
    /// `(k, |entry|)` per refinement iteration.
    pub history: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub k_grid: Vec<f64>,
    pub points: Vec<ScanPoint>,
    pub singular_points: Vec<ZeroReport>,
    /// Max unitarity defect `||R|² + |T|² − 1|` over the grid (real potentials only).
    pub max_unitarity_violation: Option<f64>,
}

/// Evaluate `M(k)` on `points` equispaced wavenumbers and refine every dip of
/// the selected entries that reaches the zero threshold.
pub fn scan(p: &Potential, k_min: f64, k_max: f64, points: usize, opts: ScanOptions) -> Result<ScanResult> {
    check_k(k_min)?;
    check_k(k_max)?;
    if !(k_max > k_min) || points < 2 {
        return Err(ScatterError::InvalidInput("scan needs 0 < k_min < k_max and at least 2 points".into()));
    }
    let dk = (k_max - k_min) / (points - 1) as f64;
    let k_grid: Vec<f64> = (0..points).map(|i| if i + 1 == points { k_max } else { k_min + i as f64 * dk }).collect();
    let pts: Vec<ScanPoint> = k_grid
        .par_iter()
        .map(|&k| match transfer_matrix(p, k, opts.solver, opts.tol) {
            Ok(m) => ScanPoint {
                k,
                matrix: Some(m),
                data: amplitudes_from_matrix(&m).ok(),
                classification: Some(classify(&m, opts.zero_threshold)),
                error: None,
            },
            Err(e) => ScanPoint { k, matrix: None, data: None, classification: None, error: Some(e.to_string()) },
        })
        .collect();

    let mut singular = Vec::new();
    for (ei, entry) in Entry::ALL.iter().enumerate() {
        if !opts.refine[ei] || p.is_zero() {
            continue;
        }
        for bracket in dips(&pts, *entry) {
            if let Ok(z) = refine_zero(p, *entry, bracket, opts) {
                if !singular.iter().any(|s: &ZeroReport| s.entry == z.entry && (s.k - z.k).abs() < 0.5 * dk) {
                    singular.push(z);
                }
            }
        }
    }
    // Self-dual: coincident M11 and M22 zeros.
    let ss: Vec<f64> = singular.iter().filter(|s| s.entry == Entry::M22).map(|s| s.k).collect();
    let tss: Vec<f64> = singular.iter().filter(|s| s.entry == Entry::M11).map(|s| s.k).collect();
    for s in singular.iter_mut() {
        let others = if s.entry == Entry::M22 { &tss } else if s.entry == Entry::M11 { &ss } else { continue };
        if others.iter().any(|&k| (k - s.k).abs() <= dk) {
            s.classification.self_dual = true;
        }
    }
    singular.sort_by(|a, b| a.k.total_cmp(&b.k).then((a.entry as u8).cmp(&(b.entry as u8))));

    let max_unitarity_violation = p.is_real().then(|| {
        pts.iter()
            .filter_map(|pt| pt.data)
            .map(|d| (d.r_left.norm_sqr() + d.t.norm_sqr() - 1.0).abs().max((d.r_right.norm_sqr() + d.t.norm_sqr() - 1.0).abs()))
            .fold(0.0, f64::max)
    });
    Ok(ScanResult { k_grid, points: pts, singular_points: singular, max_unitarity_violation })
}

/// Brackets around grid-local minima of `|entry|/‖M‖` that dip below 1/4.
fn dips(pts: &[ScanPoint], entry: Entry) -> Vec<(f64, f64)> {
    let rel: Vec<Option<f64>> = pts
        .iter()
        .map(|pt| pt.matrix.map(|m| entry.of(&m).norm() / m.matrix().max_norm().max(f64::MIN_POSITIVE)))
        .collect();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        let Some(r) = rel[i] else { continue };
        let left = if i > 0 { rel[i - 1] } else { None };
        let right = rel.get(i + 1).copied().flatten();
        let is_min = left.is_none_or(|l| r <= l) && right.is_none_or(|q| r < q);
        if is_min && r < 0.25 && (left.is_some() || right.is_some()) {
            let lo = pts[i.saturating_sub(1)].k;
            let hi = pts[(i + 1).min(pts.len() - 1)].k;
            out.push((lo, hi));
        }
    }
    out
}

/// Locate a real zero of `entry` in `bracket` by golden-section minimization
/// of `|entry|²` followed by Gauss–Newton polishing of the complex entry.
/// Accepted iff `|entry| < zero_threshold·‖M‖_max`.
pub fn refine_zero(p: &Potential, entry: Entry, bracket: (f64, f64), opts: ScanOptions) -> Result<ZeroReport> {
    let (mut a, mut b) = bracket;
    check_k(a)?;
    if !(b > a) {
        return Err(ScatterError::InvalidInput("bracket must satisfy k_lo < k_hi".into()));
    }
    let eval = |k: f64| -> Result<C64> { Ok(entry.of(&transfer_matrix(p, k, opts.solver, opts.tol)?)) };
    let mut history = Vec::new();
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (eval(c)?.norm_sqr(), eval(d)?.norm_sqr());
    for _ in 0..200 {
        if (b - a) <= 1e-13 * b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c)?.norm_sqr();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d)?.norm_sqr();
        }
        let (km, fm) = if fc < fd { (c, fc) } else { (d, fd) };
        history.push((km, fm.sqrt()));
    }
    let (lo, hi) = bracket;
    let mut k = if fc < fd { c } else { d };
    let mut e = eval(k)?;
    for _ in 0..8 {
        let h = 1e-6 * k;
        let de = (eval(k + h)? - eval(k - h)?) / (2.0 * h);
        if de.norm() == 0.0 {
            break;
        }
        let step = -(de.conj() * e).re / de.norm_sqr();
        let kn = (k + step).clamp(lo, hi);
        let en = eval(kn)?;
        if en.norm() >= e.norm() {
            break;
        }
        k = kn;
        e = en;
        history.push((k, e.norm()));
        if step.abs() <= 1e-15 * k {
            break;
        }
    }
    let m = transfer_matrix(p, k, opts.solver, opts.tol)?;
    let residual = entry.of(&m).norm();
    let norm = m.matrix().max_norm();
    if !(residual < opts.zero_threshold * norm) {
        return Err(ScatterError::NoZeroFound { k, residual, threshold: opts.zero_threshold * norm });
    }
    let other = match opts.solver.resolve(p) {
        Solver::Exact => Some(Solver::Dynamical),
        _ if crate::exact_solvers::has_closed_form(p) => Some(Solver::Exact),
        _ => None,
    };
    let cross_check_residual = match other {
        Some(s) => Some(entry.of(&transfer_matrix(p, k, s, opts.tol.min(1e-10))?).norm()),
        None => None,
    };
    let classification = classify(&m, opts.zero_threshold);
    Ok(ZeroReport {
        entry,
        k,
        residual,
        relative_residual: residual / norm,
        matrix: m,
        classification,
        cpa_ratio: (entry == Entry::M11).then(|| m.m21()),
        product_identity_residual: (m.m12() * m.m21() + 1.0).norm(),
        cross_check_residual,
        history,
    })
}

/// Violations of the identities satisfied by real potentials.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RealIdentityReport {
    pub k: f64,
    /// `|M11 − M22*|`.
    pub diagonal_conjugacy: f64,
    /// `|M12 − M21*|`.
    pub off_diagonal_conjugacy: f64,
    /// `||R^l| − |R^r||`.
    pub reflection_reciprocity: f64,
    /// `max(||R^l|² + |T|² − 1|, ||R^r|² + |T|² − 1|)`.
    pub unitarity: f64,
    pub max_violation: f64,
    /// Whether the potential is structurally real.
    pub potential_is_real: bool,
}

/// Evaluate `M11 = M22*`, `M12 = M21*`, `|R^l| = |R^r|` and unitarity at `k`.
/// Violations are reported, not raised.
pub fn check_real_potential_identities(p: &Potential, k: f64, solver: Solver, tol: f64) -> Result<RealIdentityReport> {
    let m = transfer_matrix(p, k, solver, tol)?;
    let d = amplitudes_from_matrix(&m)?;
    let diagonal_conjugacy = (m.m11() - m.m22().conj()).norm();
    let off_diagonal_conjugacy = (m.m12() - m.m21().conj()).norm();
    let reflection_reciprocity = (d.r_left.norm() - d.r_right.norm()).abs();
    let tt = d.t.norm_sqr();
    let unitarity = (d.r_left.norm_sqr() + tt - 1.0).abs().max((d.r_right.norm_sqr() + tt - 1.0).abs());
    let max_violation = diagonal_conjugacy.max(off_diagonal_conjugacy).max(reflection_reciprocity).max(unitarity);
    Ok(RealIdentityReport {
        k,
        diagonal_conjugacy,
        off_diagonal_conjugacy,
        reflection_reciprocity,
        unitarity,
        max_violation,
        potential_is_real: p.is_real(),
    })
}

/// Fixed 17-significant-digit rendering used in every text artifact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl ScanResult {
    /// CSV with one row per grid point: `k`, real/imaginary parts of the four
    /// entries and three amplitudes, classification labels, error text.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["k".to_string()];
        for name in ["M11", "M12", "M21", "M22", "R_l", "R_r", "T"] {
            header.push(format!("re_{name}"));
            header.push(format!("im_{name}"));
        }
        header.push("flags".into());
        header.push("error".into());
        out.write_record(&header).map_err(csv_err)?;
        for pt in &self.points {
            let mut row = vec![fmt_f64(pt.k)];
            let mut push = |v: Option<C64>| match v {
                Some(c) => {
                    row.push(fmt_f64(c.re));
                    row.push(fmt_f64(c.im));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            };
            for e in Entry::ALL {
                push(pt.matrix.map(|m| e.of(&m)));
            }
            push(pt.data.map(|d| d.r_left));
            push(pt.data.map(|d| d.r_right));
            push(pt.data.map(|d| d.t));
            row.push(pt.classification.map(|c| c.labels().join(";")).unwrap_or_default());
            row.push(pt.error.clone().unwrap_or_default());
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| ScatterError::InvalidInput(e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> ScatterError {
    ScatterError::InvalidInput(format!("csv: {e}"))
}
