//! Closed-form transfer matrices.

use crate::linalg::Mat2;
use crate::potentials::{DeltaComb, PiecewiseConstant, Potential};
use crate::transfer_core::{compose, time_reverse_matrix, translate_matrix, TransferMatrix};
use crate::{check_k, Result, ScatterError, C64, I};
use std::f64::consts::PI;

/// Delta term `𝔷 δ(x − a)`:
/// `M = (1/2k) [[2k − i𝔷, −i𝔷 e^{−2iak}], [i𝔷 e^{2iak}, 2k + i𝔷]]`.
pub fn delta_matrix(z: C64, a: f64, k: f64) -> Result<TransferMatrix> {
    check_k(k)?;
    let h = z / (2.0 * k);
    let ph = C64::from_polar(1.0, 2.0 * a * k);
    let m = Mat2::new(1.0 - I * h, -I * h * ph.conj(), I * h * ph, 1.0 + I * h);
    Ok(TransferMatrix::from_parts(m, k))
}

/// Deltas composed in spatial order.
pub fn multi_delta_matrix(comb: &DeltaComb, k: f64) -> Result<TransferMatrix> {
    let mut acc = TransferMatrix::identity(k)?;
    for &(z, a) in comb.terms() {
        acc = compose(&delta_matrix(z, a, k)?, &acc)?;
    }
    Ok(acc)
}

/// `(𝔠, 𝔰)` with `𝔫 = √(1 − 𝔷/k²)`, `𝔠 = cos(kL𝔫)`, `𝔰 = sin(kL𝔫)/𝔫`.
fn barrier_cs(z: C64, len: f64, k: f64, flip_branch: bool) -> (C64, C64) {
    let mut n = (1.0 - z / (k * k)).sqrt();
    if flip_branch {
        n = -n;
    }
    let t = k * len * n;
    let c = t.cos();
    let s = if t.norm() < 1e-6 {
        let t2 = t * t;
        k * len * (1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0)
    } else {
        t.sin() / n
    };
    (c, s)
}

fn barrier_with_branch(z: C64, a_minus: f64, a_plus: f64, k: f64, flip: bool) -> Result<TransferMatrix> {
    check_k(k)?;
    if !(a_plus > a_minus) {
        return Err(ScatterError::InvalidInput("barrier needs a_minus < a_plus".into()));
    }
    let len = a_plus - a_minus;
    let zh = z / (2.0 * k * k);
    let (c, s) = barrier_cs(z, len, k, flip);
    let e_len = C64::from_polar(1.0, k * len);
    let e_sum = C64::from_polar(1.0, k * (a_plus + a_minus));
    let m = Mat2::new(
        e_len.conj() * (c - I * (zh - 1.0) * s),
        -I * zh * s * e_sum.conj(),
        I * zh * s * e_sum,
        e_len * (c + I * (zh - 1.0) * s),
    );
    Ok(TransferMatrix::from_parts(m, k))
}

/// Rectangular barrier of height `𝔷` on `[a₋, a₊]`.
///
/// With `L = a₊ − a₋`, `ẑ = 𝔷/2k²`:
/// `M11 = e^{−ikL}[𝔠 − i(ẑ−1)𝔰]`, `M12 = −iẑ𝔰 e^{−ik(a₊+a₋)}`,
/// `M21 = iẑ𝔰 e^{ik(a₊+a₋)}`, `M22 = e^{ikL}[𝔠 + i(ẑ−1)𝔰]`.
/// `𝔫 → 0` is handled by a Taylor series of `𝔰`.
pub fn barrier_matrix(z: C64, a_minus: f64, a_plus: f64, k: f64) -> Result<TransferMatrix> {
    barrier_with_branch(z, a_minus, a_plus, k, false)
}

/// Barrier matrix computed with the other square-root branch of `𝔫`; equal to
/// [`barrier_matrix`] since `𝔠` and `𝔰` are even in `𝔫`.
pub fn barrier_matrix_other_branch(z: C64, a_minus: f64, a_plus: f64, k: f64) -> Result<TransferMatrix> {
    barrier_with_branch(z, a_minus, a_plus, k, true)
}

/// Cells composed left to right.
pub fn piecewise_matrix(p: &PiecewiseConstant, k: f64) -> Result<TransferMatrix> {
    let mut acc = TransferMatrix::identity(k)?;
    for (x0, w, v) in p.cells() {
        if v.norm() == 0.0 {
            continue;
        }
        acc = compose(&barrier_matrix(v, x0, x0 + w, k)?, &acc)?;
    }
    Ok(acc)
}

/// `U_n(γ) = sin((n−1)γ)/sin γ` as a function of `x = cos γ`.
///
/// This is the Chebyshev polynomial of the second kind of degree `n − 2`
/// (`U_1 = 0`, `U_2 = 1`). Near `x = ±1` the degenerate branch
/// `(±1)^n (n−1)` is used with its first-order correction; moderate `n`
/// otherwise uses the three-term recurrence, very large `n` the sine ratio.
pub fn chebyshev_u(n: u64, x: C64) -> C64 {
    if n == 0 {
        // sin(−γ)/sin γ
        return C64::new(-1.0, 0.0);
    }
    if n == 1 {
        return C64::new(0.0, 0.0);
    }
    let m = (n - 2) as f64;
    for sign in [1.0, -1.0] {
        let d = x - sign;
        if d.norm() < 1e-10 {
            let parity = if (n - 2) % 2 == 0 { 1.0 } else { sign };
            let base = parity * (m + 1.0);
            let slope = parity * sign * m * (m + 1.0) * (m + 2.0) / 3.0;
            return base + slope * d;
        }
    }
    if n <= 100_000 {
        let (mut prev, mut cur) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        for _ in 0..(n - 2) {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        let g = x.acos();
        let arg = (n as f64 - 1.0) * g;
        let arg = C64::new(arg.re.rem_euclid(2.0 * PI), arg.im);
        arg.sin() / g.sin()
    }
}

/// Positive integer power of a unit-determinant 2×2 matrix,
/// `Lⁿ = U_{n+1}(γ) L − U_n(γ) I` with `γ = arccos(tr L / 2)`.
#[derive(Debug, Clone, Copy)]
pub struct UnimodularPower {
    pub base: Mat2,
    pub n: u64,
    /// `γ = arccos(tr L/2)`, real part reduced to `[0, 2π)`.
    pub gamma: C64,
}

impl UnimodularPower {
    pub fn new(base: Mat2, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(ScatterError::InvalidInput("power exponent must be ≥ 1".into()));
        }
        if (base.det() - 1.0).norm() > 1e-8 * base.max_norm().powi(2).max(1.0) {
            return Err(ScatterError::InvalidInput("matrix must have unit determinant".into()));
        }
        let g = (base.trace() / 2.0).acos();
        let gamma = C64::new(g.re.rem_euclid(2.0 * PI), g.im);
        Ok(UnimodularPower { base, n, gamma })
    }

    pub fn evaluate(&self) -> Mat2 {
        let x = self.base.trace() / 2.0;
        let u_next = chebyshev_u(self.n + 1, x);
        let u_n = chebyshev_u(self.n, x);
        self.base.scale(u_next) - Mat2::identity().scale(u_n)
    }
}

pub fn unimodular_power(l: &Mat2, n: u64) -> Result<Mat2> {
    Ok(UnimodularPower::new(*l, n)?.evaluate())
}

/// Transfer matrix of `n` copies of a cell with period `ℓ`, the first copy
/// sitting where `M1` was computed:
/// `M = U_{n+1}(γ) T((1−n)ℓ) M1 − U_n(γ) T(−nℓ)`, `γ = arccos(tr(M1 T(ℓ))/2)`.
pub fn locally_periodic_matrix(m1: &TransferMatrix, ell: f64, n: u64) -> Result<TransferMatrix> {
    if n == 0 || !(ell > 0.0) {
        return Err(ScatterError::InvalidInput("need n ≥ 1 and ℓ > 0".into()));
    }
    let k = m1.k();
    let l = *m1.matrix() * Mat2::propagation(k, ell);
    let x = l.trace() / 2.0;
    let u_next = chebyshev_u(n + 1, x);
    let u_n = chebyshev_u(n, x);
    let nf = n as f64;
    let m = (Mat2::propagation(k, (1.0 - nf) * ell) * *m1.matrix()).scale(u_next)
        - Mat2::propagation(k, -nf * ell).scale(u_n);
    TransferMatrix::new(m, k)
}

/// Same matrix through `T(−nℓ+ℓ) Lⁿ T(−ℓ)` with `L = M1 T(ℓ)`.
pub fn locally_periodic_matrix_via_power(m1: &TransferMatrix, ell: f64, n: u64) -> Result<TransferMatrix> {
    let k = m1.k();
    let l = *m1.matrix() * Mat2::propagation(k, ell);
    let ln = unimodular_power(&l, n)?;
    let m = Mat2::propagation(k, (1.0 - n as f64) * ell) * ln * Mat2::propagation(k, -ell);
    TransferMatrix::new(m, k)
}

/// Closed-form transfer matrix when every building block admits one
/// (deltas, piecewise-constant, and combinators of those).
pub fn exact_transfer_matrix(p: &Potential, k: f64) -> Result<TransferMatrix> {
    check_k(k)?;
    match p {
        Potential::DeltaComb(d) => multi_delta_matrix(d, k),
        Potential::Piecewise(pc) => piecewise_matrix(pc, k),
        Potential::Translated { inner, shift } => Ok(translate_matrix(&exact_transfer_matrix(inner, k)?, *shift)),
        Potential::TimeReversed(inner) => Ok(time_reverse_matrix(&exact_transfer_matrix(inner, k)?)),
        Potential::LocallyPeriodic { cell, copies, period } => {
            locally_periodic_matrix(&exact_transfer_matrix(cell, k)?, *period, *copies as u64)
        }
        Potential::Sum(ps) => {
            if p.has_overlapping_components() {
                return Err(ScatterError::OverlappingSupports);
            }
            let mut parts: Vec<&Potential> = ps.iter().filter(|q| !q.is_zero()).collect();
            parts.sort_by(|a, b| a.support().0.total_cmp(&b.support().0));
            let mut acc = TransferMatrix::identity(k)?;
            for q in parts {
                acc = compose(&exact_transfer_matrix(q, k)?, &acc)?;
            }
            Ok(acc)
        }
        _ => Err(ScatterError::NotClosedForm),
    }
}

/// Whether [`exact_transfer_matrix`] applies.
pub fn has_closed_form(p: &Potential) -> bool {
    match p {
        Potential::DeltaComb(_) | Potential::Piecewise(_) => true,
        Potential::Translated { inner, .. } | Potential::TimeReversed(inner) => has_closed_form(inner),
        Potential::LocallyPeriodic { cell, .. } => has_closed_form(cell),
        Potential::Sum(ps) => !p.has_overlapping_components() && ps.iter().all(has_closed_form),
        _ => false,
    }
}
