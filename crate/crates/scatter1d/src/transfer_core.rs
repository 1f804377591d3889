//! Transfer matrices, scattering amplitudes and the algebraic maps between them.
//!
//! With `ψ → A₋e^{ikx} + B₋e^{−ikx}` as `x → −∞` and `ψ → A₊e^{ikx} + B₊e^{−ikx}`
//! as `x → +∞`, the transfer matrix is defined by `(A₊, B₊)ᵀ = M (A₋, B₋)ᵀ`.

use crate::linalg::Mat2;
use crate::{check_k, Result, ScatterError, C64};
use serde::{Deserialize, Serialize};

/// Default relative threshold for treating a matrix entry as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// A 2×2 transfer matrix tagged with its wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRecord", try_from = "MatrixRecord")]
pub struct TransferMatrix {
    m: Mat2,
    k: f64,
}

#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    k: f64,
    #[serde(rename = "M11")]
    m11: C64,
    #[serde(rename = "M12")]
    m12: C64,
    #[serde(rename = "M21")]
    m21: C64,
    #[serde(rename = "M22")]
    m22: C64,
}

impl From<TransferMatrix> for MatrixRecord {
    fn from(t: TransferMatrix) -> Self {
        MatrixRecord { k: t.k, m11: t.m11(), m12: t.m12(), m21: t.m21(), m22: t.m22() }
    }
}

impl TryFrom<MatrixRecord> for TransferMatrix {
    type Error = ScatterError;
    fn try_from(r: MatrixRecord) -> Result<Self> {
        TransferMatrix::new(Mat2::new(r.m11, r.m12, r.m21, r.m22), r.k)
    }
}

impl TransferMatrix {
    pub fn new(m: Mat2, k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(TransferMatrix { m, k })
    }

    pub(crate) fn from_parts(m: Mat2, k: f64) -> Self {
        TransferMatrix { m, k }
    }

    pub fn identity(k: f64) -> Result<Self> {
        TransferMatrix::new(Mat2::identity(), k)
    }

    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }
    pub fn m11(&self) -> C64 {
        self.m.0[0][0]
    }
    pub fn m12(&self) -> C64 {
        self.m.0[0][1]
    }
    pub fn m21(&self) -> C64 {
        self.m.0[1][0]
    }
    pub fn m22(&self) -> C64 {
        self.m.0[1][1]
    }
    pub fn det(&self) -> C64 {
        self.m.det()
    }
    pub fn det_residual(&self) -> f64 {
        (self.det() - 1.0).norm()
    }

    /// Max-norm distance to another matrix at the same wavenumber.
    pub fn distance(&self, other: &TransferMatrix) -> f64 {
        (self.m - other.m).max_norm()
    }
}

/// Reflection and transmission amplitudes at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    #[serde(rename = "R_l")]
    pub r_left: C64,
    #[serde(rename = "R_r")]
    pub r_right: C64,
    #[serde(rename = "T")]
    pub t: C64,
    pub k: f64,
}

impl ScatteringData {
    pub fn new(r_left: C64, r_right: C64, t: C64, k: f64) -> Self {
        ScatteringData { r_left, r_right, t, k }
    }

    /// Largest componentwise modulus difference.
    pub fn distance(&self, o: &ScatteringData) -> f64 {
        [(self.r_left - o.r_left).norm(), (self.r_right - o.r_right).norm(), (self.t - o.t).norm()]
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Largest componentwise relative difference, with `floor` guarding tiny entries.
    pub fn relative_distance(&self, o: &ScatteringData, floor: f64) -> f64 {
        let rel = |a: C64, b: C64| (a - b).norm() / b.norm().max(floor);
        rel(self.r_left, o.r_left).max(rel(self.r_right, o.r_right)).max(rel(self.t, o.t))
    }
}

/// `R^l = −M21/M22`, `R^r = M12/M22`, `T = 1/M22`.
///
/// Errors with [`ScatterError::SpectralSingularity`] when `|M22|` is below
/// [`DEFAULT_ZERO_TOL`] times the matrix max-norm.
pub fn amplitudes_from_matrix(m: &TransferMatrix) -> Result<ScatteringData> {
    amplitudes_from_matrix_with(m, DEFAULT_ZERO_TOL)
}

pub fn amplitudes_from_matrix_with(m: &TransferMatrix, zero_tol: f64) -> Result<ScatteringData> {
    let m22 = m.m22();
    if m22.norm() < zero_tol * m.matrix().max_norm() || m22.norm() == 0.0 {
        return Err(ScatterError::SpectralSingularity { k: m.k, m22_abs: m22.norm() });
    }
    Ok(ScatteringData::new(-m.m21() / m22, m.m12() / m22, m22.inv(), m.k))
}

/// `M11 = T − R^l R^r/T`, `M12 = R^r/T`, `M21 = −R^l/T`, `M22 = 1/T`.
pub fn matrix_from_amplitudes(d: &ScatteringData) -> Result<TransferMatrix> {
    if d.t.norm() == 0.0 || !d.t.is_finite() {
        return Err(ScatterError::ZeroTransmission);
    }
    let ti = d.t.inv();
    let m = Mat2::new(d.t - d.r_left * d.r_right * ti, d.r_right * ti, -d.r_left * ti, ti);
    TransferMatrix::new(m, d.k)
}

fn same_k(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() <= 1e-14 * a.abs().max(b.abs()) {
        Ok(())
    } else {
        Err(ScatterError::WavenumberMismatch(a, b))
    }
}

/// Transfer matrix of two adjacent pieces: `right · left`.
pub fn compose(right: &TransferMatrix, left: &TransferMatrix) -> Result<TransferMatrix> {
    same_k(right.k, left.k)?;
    Ok(TransferMatrix::from_parts(right.m * left.m, left.k))
}

/// Compose pieces given in spatial order (left-most first).
pub fn compose_all<'a, I>(pieces: I, k: f64) -> Result<TransferMatrix>
where
    I: IntoIterator<Item = &'a TransferMatrix>,
{
    let mut acc = TransferMatrix::identity(k)?;
    for p in pieces {
        acc = compose(p, &acc)?;
    }
    Ok(acc)
}

/// Matrix of the potential shifted by `a`: `T(a)⁻¹ M T(a)`.
pub fn translate_matrix(m: &TransferMatrix, a: f64) -> TransferMatrix {
    let ph = C64::from_polar(1.0, 2.0 * m.k * a);
    let mut out = m.m;
    out.0[0][1] *= ph.conj();
    out.0[1][0] *= ph;
    TransferMatrix::from_parts(out, m.k)
}

/// Matrix of the time-reversed potential `v*`.
pub fn time_reverse_matrix(m: &TransferMatrix) -> TransferMatrix {
    let t = Mat2::new(m.m22().conj(), m.m21().conj(), m.m12().conj(), m.m11().conj());
    TransferMatrix::from_parts(t, m.k)
}

/// Amplitudes of the time-reversed potential, expressed through the original ones.
pub fn time_reverse_amplitudes(d: &ScatteringData) -> Result<ScatteringData> {
    let dd = (d.t * d.t - d.r_left * d.r_right).conj();
    if dd.norm() == 0.0 {
        return Err(ScatterError::SingularDenominator("time-reversed amplitudes"));
    }
    Ok(ScatteringData::new(-d.r_right.conj() / dd, -d.r_left.conj() / dd, d.t.conj() / dd, d.k))
}

/// Phenomena signalled by (near-)vanishing matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Classification {
    pub spectral_singularity: bool,
    pub time_reversed_ss: bool,
    pub self_dual: bool,
    pub left_reflectionless: bool,
    pub right_reflectionless: bool,
    pub left_invisible: bool,
    pub right_invisible: bool,
    /// `B₊/A₋ = M21` for coherent perfect absorption when `time_reversed_ss` holds.
    pub cpa_ratio: Option<C64>,
}

impl Classification {
    pub fn labels(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let flags = [
            (self.spectral_singularity, "spectral_singularity"),
            (self.time_reversed_ss, "time_reversed_ss"),
            (self.self_dual, "self_dual"),
            (self.left_reflectionless, "left_reflectionless"),
            (self.right_reflectionless, "right_reflectionless"),
            (self.left_invisible, "left_invisible"),
            (self.right_invisible, "right_invisible"),
        ];
        for (on, name) in flags {
            if on {
                v.push(name);
            }
        }
        v
    }
}

/// Flag zeros of the entries; `zero_tol` is relative to the max-norm of `M`.
pub fn classify(m: &TransferMatrix, zero_tol: f64) -> Classification {
    let thr = zero_tol * m.matrix().max_norm();
    let ss = m.m22().norm() < thr;
    let tss = m.m11().norm() < thr;
    let lr = m.m21().norm() < thr;
    let rr = m.m12().norm() < thr;
    let unit_t = !ss && (m.m22().inv() - 1.0).norm() < zero_tol;
    Classification {
        spectral_singularity: ss,
        time_reversed_ss: tss,
        self_dual: ss && tss,
        left_reflectionless: lr,
        right_reflectionless: rr,
        left_invisible: lr && unit_t,
        right_invisible: rr && unit_t,
        cpa_ratio: if tss { Some(m.m21()) } else { None },
    }
}
