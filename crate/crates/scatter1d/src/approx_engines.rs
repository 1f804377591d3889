//! Perturbative engines: first Born amplitudes, first- and second-order Dyson
//! truncations of the transfer matrix, Born-level inverse scattering, and the
//! closed-form predictions for the exponential grating.

use crate::linalg::Mat2;
use crate::potentials::{Potential, Sampled};
use crate::transfer_core::{amplitudes_from_matrix_with, ScatteringData, TransferMatrix};
use crate::{check_k, Result, ScatterError, C64, I};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxMethod {
    Born,
    Dyson,
}

/// Output of a truncated expansion.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApproxReport {
    pub order: u8,
    pub method: ApproxMethod,
    pub data: ScatteringData,
    pub matrix: TransferMatrix,
}

// Below this |M22| the truncated amplitudes are reported as singular.
const SINGULAR_TOL: f64 = 1e-14;

/// First Born approximation: `R^l ≈ ṽ(−2k)/2ik`, `R^r ≈ ṽ(2k)/2ik`, `T ≈ 1 + ṽ(0)/2ik`.
pub fn born_first(p: &Potential, k: f64) -> Result<ScatteringData> {
    check_k(k)?;
    let d = 2.0 * I * k;
    Ok(ScatteringData::new(
        p.fourier_transform(-2.0 * k)? / d,
        p.fourier_transform(2.0 * k)? / d,
        1.0 + p.fourier_transform(0.0)? / d,
        k,
    ))
}

fn first_order_matrix(p: &Potential, k: f64) -> Result<Mat2> {
    let (v0, vp, vm) = (p.fourier_transform(0.0)?, p.fourier_transform(2.0 * k)?, p.fourier_transform(-2.0 * k)?);
    Ok(Mat2::identity() - Mat2::new(v0, vp, -vm, -v0).scale(I / (2.0 * k)))
}

fn report(m: Mat2, k: f64, order: u8) -> Result<ApproxReport> {
    let matrix = TransferMatrix::new(m, k)?;
    let data = amplitudes_from_matrix_with(&matrix, SINGULAR_TOL).map_err(|e| match e {
        ScatterError::SpectralSingularity { .. } => ScatterError::SingularDenominator("truncated Dyson amplitudes"),
        other => other,
    })?;
    Ok(ApproxReport { order, method: ApproxMethod::Dyson, data, matrix })
}

/// `M⁽¹⁾ = I − (i/2k)[[ṽ(0), ṽ(2k)], [−ṽ(−2k), −ṽ(0)]]` and its amplitudes
/// `R^{l/r} = ṽ(∓2k)/(2ik − ṽ(0))`, `T = 2ik/(2ik − ṽ(0))`.
pub fn dyson_order1(p: &Potential, k: f64) -> Result<ApproxReport> {
    check_k(k)?;
    report(first_order_matrix(p, k)?, k, 1)
}

/// Second-order truncation: `M⁽¹⁾` plus the ordered double-transform terms
/// `(1/4k²)[[ṽ(−2k,2k) − ṽ(0,0), ṽ(0,2k) − ṽ(2k,0)], [ṽ(0,−2k) − ṽ(−2k,0), ṽ(2k,−2k) − ṽ(0,0)]]`.
pub fn dyson_order2(p: &Potential, k: f64) -> Result<ApproxReport> {
    check_k(k)?;
    let m1 = first_order_matrix(p, k)?;
    let w = |a: f64, b: f64| p.double_fourier(a * k, b * k);
    let v00 = w(0.0, 0.0)?;
    let second = Mat2::new(
        w(-2.0, 2.0)? - v00,
        w(0.0, 2.0)? - w(2.0, 0.0)?,
        w(0.0, -2.0)? - w(-2.0, 0.0)?,
        w(2.0, -2.0)? - v00,
    );
    report(m1 + second.scale(C64::from(1.0 / (4.0 * k * k))), k, 2)
}

/// Which reflection amplitude the inverse prescription consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionSide {
    Left,
    Right,
}

/// Sampling window for [`born_inverse`].
#[derive(Debug, Clone, Copy)]
pub struct InverseWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl InverseWindow {
    /// Default window `[−8/k_max, 8/k_max]` with 4096 points.
    pub fn default_for(k_max: f64) -> Self {
        InverseWindow { x_min: -8.0 / k_max, x_max: 8.0 / k_max, points: 4096 }
    }
}

/// Born-level inverse scattering.
///
/// With `F(y) = (1/2π) ∫ e^{iky} R(k) dk` (trapezoid rule over the supplied
/// signed-`k` samples), returns `v(x) = 2∂ₓF(2x)` for right data or
/// `v(x) = −2∂ₓF(−2x)` for left data, differentiated by centered differences.
pub fn born_inverse(samples: &[(f64, C64)], side: ReflectionSide, window: InverseWindow) -> Result<Potential> {
    if samples.len() < 2 || window.points < 3 || !(window.x_max > window.x_min) {
        return Err(ScatterError::InvalidInput("born_inverse needs ≥ 2 samples and a window with ≥ 3 points".into()));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(ScatterError::InvalidInput("k samples must be strictly increasing".into()));
    }
    let (k_lo, k_hi) = (samples[0].0, samples[samples.len() - 1].0);
    let k_max = k_lo.abs().max(k_hi.abs());
    if k_lo >= 0.0 || k_hi <= 0.0 || (k_lo + k_hi).abs() > 1e-9 * k_max {
        return Err(ScatterError::InvalidInput("k samples must cover a symmetric interval around 0".into()));
    }
    let dk = samples.windows(2).map(|w| w[1].0 - w[0].0).fold(0.0, f64::max);
    let x_abs = window.x_min.abs().max(window.x_max.abs());
    if 2.0 * x_abs * dk >= PI {
        return Err(ScatterError::GridTooCoarse(format!(
            "k spacing {dk} aliases at |2x| = {}; need 2·max|x|·dk < π",
            2.0 * x_abs
        )));
    }
    let dx = (window.x_max - window.x_min) / (window.points - 1) as f64;
    if dx * k_max > PI / 4.0 {
        return Err(ScatterError::GridTooCoarse(format!(
            "x spacing {dx} cannot resolve features of size 1/k_max = {}",
            1.0 / k_max
        )));
    }
    if samples.iter().all(|s| s.1.norm() == 0.0) {
        return Ok(Potential::zero());
    }
    let weights: Vec<f64> = (0..samples.len())
        .map(|j| {
            let left = if j > 0 { samples[j].0 - samples[j - 1].0 } else { 0.0 };
            let right = if j + 1 < samples.len() { samples[j + 1].0 - samples[j].0 } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    let sgn = match side {
        ReflectionSide::Right => 1.0,
        ReflectionSide::Left => -1.0,
    };
    let f = |y: f64| -> C64 {
        samples.iter().zip(&weights).map(|(&(k, r), &w)| w * r * C64::from_polar(1.0, k * y)).sum::<C64>() / (2.0 * PI)
    };
    // G(x) = F(±2x) on the grid extended by one point each side.
    let g: Vec<C64> = (0..window.points + 2).map(|i| f(sgn * 2.0 * (window.x_min + (i as f64 - 1.0) * dx))).collect();
    let values: Vec<C64> = (1..=window.points).map(|i| sgn * (g[i + 1] - g[i - 1]) / dx).collect();
    Ok(Potential::Sampled(Sampled::new(window.x_min, dx, values)?))
}

/// Second-order predictions at `k = mπ/L` for `v = 𝔷 e^{2πinx/L}` on `[0, L]`,
/// with `ẑ = 𝔷L²/2πn`:
/// `R^l = O(ẑ³)`, `R^r = −i(n/m)[δ_{mn} ẑ + (δ_{m,2n} − δ_{mn}) ẑ²/(πm)]`,
/// `T = 1 + i n² δ_{mn} ẑ²/(2πm²(m+n))`.
pub fn exp_grating_reference(z: C64, n: u32, length: f64, m: u32) -> Result<ScatteringData> {
    let (zh, nf, mf, d_mn, d_m2n) = grating_parts(z, n, length, m)?;
    let r_right = -I * (nf / mf) * (d_mn * zh + (d_m2n - d_mn) * zh * zh / (PI * mf));
    let t = 1.0 + I * nf * nf * d_mn * zh * zh / (2.0 * PI * mf * mf * (mf + nf));
    Ok(ScatteringData::new(C64::new(0.0, 0.0), r_right, t, mf * PI / length))
}

/// The grating predictions in their printed orientation:
/// `R^l = (in/m)[δ_{mn} ẑ + (n/πm)(δ_{m,2n} − δ_{mn}) ẑ²]`, `R^r = 0`, same `T`.
/// Kept for literal comparison; [`exp_grating_reference`] is the one consistent
/// with the transfer-matrix conventions of this crate.
pub fn exp_grating_reference_printed(z: C64, n: u32, length: f64, m: u32) -> Result<ScatteringData> {
    let (zh, nf, mf, d_mn, d_m2n) = grating_parts(z, n, length, m)?;
    let r_left = I * (nf / mf) * (d_mn * zh + nf / (PI * mf) * (d_m2n - d_mn) * zh * zh);
    let t = 1.0 + I * nf * nf * d_mn * zh * zh / (2.0 * PI * mf * mf * (mf + nf));
    Ok(ScatteringData::new(r_left, C64::new(0.0, 0.0), t, mf * PI / length))
}

/// `ẑ = 𝔷L²/2πn`.
pub fn grating_zhat(z: C64, n: u32, length: f64) -> C64 {
    z * length * length / (2.0 * PI * n as f64)
}

fn grating_parts(z: C64, n: u32, length: f64, m: u32) -> Result<(C64, f64, f64, f64, f64)> {
    if n == 0 || m == 0 || !(length > 0.0 && length.is_finite()) {
        return Err(ScatterError::InvalidInput("grating reference needs m, n ≥ 1 and L > 0".into()));
    }
    let kd = |a: u32, b: u32| if a == b { 1.0 } else { 0.0 };
    Ok((grating_zhat(z, n, length), n as f64, m as f64, kd(m, n), kd(m, 2 * n)))
}
