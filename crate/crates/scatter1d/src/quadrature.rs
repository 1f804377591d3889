//! Oscillatory integrals with exact exponential weights.
//!
//! Everything here integrates polynomials (or piecewise-linear interpolants)
//! against `e^{−iκx}` in closed form, so large `κ·L` products cost nothing extra.

use crate::{C64, I};

/// `J_j(ω) = ∫₀¹ t^j e^{−iωt} dt` for `j = 0..=jmax` (real ω).
///
/// Upward recurrence where it is stable (`j ≤ |ω|`), Miller-style downward
/// recurrence above that.
pub fn unit_moments(omega: f64, jmax: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); jmax + 1];
    let e = C64::from_polar(1.0, -omega);
    let sinc = if omega.abs() < 1e-8 { 1.0 - omega * omega / 6.0 } else { omega.sin() / omega };
    let half = 0.5 * omega;
    let s2 = if omega.abs() < 1e-8 { half * 0.5 * omega } else { 2.0 * half.sin().powi(2) / omega };
    out[0] = C64::new(sinc, -s2);
    let aw = omega.abs();
    let up_to = (aw.floor() as usize).min(jmax);
    for j in 1..=up_to {
        out[j] = (j as f64 * out[j - 1] - e) / (I * omega);
    }
    if up_to < jmax {
        // J_j = (e^{−iω} + iω J_{j+1}) / (j+1), stable downward for j+1 > |ω|.
        let start = jmax + 40 + (2.0 * aw) as usize;
        let mut next = C64::new(0.0, 0.0);
        for j in (up_to + 1..=start).rev() {
            let cur = (e + I * omega * next) / (j as f64 + 1.0);
            if j <= jmax {
                out[j] = cur;
            }
            next = cur;
        }
    }
    out
}

/// `𝓔(k) = ∫₀ᴸ (−i) e^{−ikx} dx = (e^{−ikL} − 1)/k`, with `𝓔(0) = −iL`.
pub fn cal_e(k: f64, len: f64) -> C64 {
    -I * len * unit_moments(k * len, 0)[0]
}

/// `∫₀ᴸ e^{−ikx} dx = i·𝓔(k)`.
pub fn exp_integral(k: f64, len: f64) -> C64 {
    len * unit_moments(k * len, 0)[0]
}

/// `𝓕(k₁,k₂) = ∫₀ᴸ dx₂ e^{−ik₂x₂} ∫₀^{x₂} dx₁ e^{−ik₁x₁} = (𝓔(k₂) − 𝓔(k₁+k₂))/k₁`,
/// with the `k₁ → 0` limit `−𝓔′(k₂)` handled by a Taylor series in `k₁`.
pub fn cal_f(k1: f64, k2: f64, len: f64) -> C64 {
    if (k1 * len).abs() > 0.5 {
        return (cal_e(k2, len) - cal_e(k1 + k2, len)) / k1;
    }
    const TERMS: usize = 24;
    let mom = unit_moments(k2 * len, TERMS + 1);
    let mut sum = C64::new(0.0, 0.0);
    let mut coef = C64::new(len * len, 0.0); // (−ik₁)^j L^{j+2}/(j+1)!
    for j in 0..=TERMS {
        sum += coef * mom[j + 1];
        coef *= -I * k1 * len / (j as f64 + 2.0);
    }
    sum
}

/// Exact `∫_{x0}^{x0+h} f(x) e^{−iκx} dx` for `f` linear from `f0` to `f1`.
pub fn filon_linear_cell(f0: C64, f1: C64, x0: f64, h: f64, kappa: f64) -> C64 {
    let m = unit_moments(kappa * h, 1);
    C64::from_polar(h, -kappa * x0) * (f0 * (m[0] - m[1]) + f1 * m[1])
}

/// Ordered double integral over one linear cell:
/// `∫∫_{x0<y<x<x0+h} f(y) f(x) e^{−i(k₁y + k₂x)} dy dx`.
/// Inner integral exact, outer by 6-point Gauss–Legendre.
pub fn filon_linear_cell_double(f0: C64, f1: C64, x0: f64, h: f64, k1: f64, k2: f64) -> C64 {
    let df = f1 - f0;
    let (w1, w2) = (k1 * h, k2 * h);
    let mut acc = C64::new(0.0, 0.0);
    for (t, w) in GL6 {
        let t = 0.5 * (t + 1.0);
        let m = unit_moments(w1 * t, 1);
        let inner = t * (f0 * m[0] + df * t * m[1]);
        acc += 0.5 * w * (f0 + df * t) * C64::from_polar(1.0, -w2 * t) * inner;
    }
    acc * C64::from_polar(h * h, -(k1 + k2) * x0)
}

const GL6: [(f64, f64); 6] = [
    (-0.932_469_514_203_152, 0.171_324_492_379_170),
    (-0.661_209_386_466_265, 0.360_761_573_048_139),
    (-0.238_619_186_083_197, 0.467_913_934_572_691),
    (0.238_619_186_083_197, 0.467_913_934_572_691),
    (0.661_209_386_466_265, 0.360_761_573_048_139),
    (0.932_469_514_203_152, 0.171_324_492_379_170),
];
