//! Finite-range complex potentials.
//!
//! A [`Potential`] has a smooth part, sampled by [`Potential::evaluate`], and
//! a list of delta terms, enumerated by [`Potential::delta_terms`]. Delta terms
//! are never sampled; every engine splices them in exactly.

use crate::quadrature::{cal_f, exp_integral, filon_linear_cell, filon_linear_cell_double};
use crate::{Result, ScatterError, C64};
use std::f64::consts::PI;

/// Default tolerance for numerical Fourier transforms.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_CELLS: usize = 1 << 22;

/// `Σ_j 𝔷_j δ(x − a_j)` with strictly increasing `a_j` and nonzero `𝔷_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaComb {
    terms: Vec<(C64, f64)>,
}

impl DeltaComb {
    /// Terms as `(strength, location)`.
    pub fn new(terms: Vec<(C64, f64)>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[1].1 <= w[0].1 {
                return Err(ScatterError::InvalidPotential(
                    "delta locations must be strictly increasing".into(),
                ));
            }
        }
        for &(z, a) in &terms {
            if z.norm() == 0.0 || !z.is_finite() || !a.is_finite() {
                return Err(ScatterError::InvalidPotential(
                    "delta strengths must be finite and nonzero".into(),
                ));
            }
        }
        Ok(DeltaComb { terms })
    }

    pub fn terms(&self) -> &[(C64, f64)] {
        &self.terms
    }
}

/// Constant value `values[c]` on `[breakpoints[c], breakpoints[c+1])`, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<C64>,
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(ScatterError::InvalidPotential(
                "piecewise potential needs m ≥ 1 cells and m+1 breakpoints".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints.iter().any(|x| !x.is_finite()) {
            return Err(ScatterError::InvalidPotential("breakpoints must be strictly increasing".into()));
        }
        Ok(PiecewiseConstant { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Cells as `(left edge, width, value)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, C64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1] - w[0], v))
    }
}

/// `𝔷 e^{2πin(x−offset)/L}` on `[offset, offset + L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpGrating {
    strength: C64,
    harmonic: u32,
    length: f64,
    offset: f64,
}

impl ExpGrating {
    pub fn new(strength: C64, harmonic: u32, length: f64, offset: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) || harmonic == 0 || !offset.is_finite() {
            return Err(ScatterError::InvalidPotential("grating needs L > 0 and n ≥ 1".into()));
        }
        Ok(ExpGrating { strength, harmonic, length, offset })
    }
    pub fn strength(&self) -> C64 {
        self.strength
    }
    pub fn harmonic(&self) -> u32 {
        self.harmonic
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
    /// `𝔎 = 2π/L`.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.length
    }
}

/// `Σ_n 𝔷_n e^{2πinx/L}` on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCell {
    length: f64,
    coefficients: Vec<(i32, C64)>,
}

impl FourierCell {
    pub fn new(length: f64, coefficients: Vec<(i32, C64)>) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(ScatterError::InvalidPotential("Fourier cell needs L > 0".into()));
        }
        if coefficients.iter().any(|(_, c)| c.norm() == 0.0 || !c.is_finite()) {
            return Err(ScatterError::InvalidPotential("Fourier coefficients must be nonzero".into()));
        }
        Ok(FourierCell { length, coefficients })
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn coefficients(&self) -> &[(i32, C64)] {
        &self.coefficients
    }
}

/// Unidirectionally invisible profile generated by `S(z) = z[α(z−1)² + 1]`
/// on `z = e^{−2ik₀(x−a)}`, `x ∈ [a, a + πn/k₀]`.
///
/// The profile is `v = −4k₀² z² S''(z)/S(z)`. At `k = k₀` the unconjugated
/// profile has `R^r = 0`, `T = 1`, `R^l = −8πinα e^{2ik₀a}/(α+1)³`.
/// `conjugated` selects the time-reversed (left-invisible) partner.
#[derive(Debug, Clone, PartialEq)]
pub struct SmisProfile {
    k0: f64,
    alpha: f64,
    winding: u32,
    shift: f64,
    conjugated: bool,
}

impl SmisProfile {
    pub fn new(k0: f64, alpha: f64, winding: u32, shift: f64, conjugated: bool) -> Result<Self> {
        if !(k0 > 0.0 && k0.is_finite()) || winding == 0 || !shift.is_finite() {
            return Err(ScatterError::InvalidPotential("SMIS profile needs k0 > 0 and n ≥ 1".into()));
        }
        if !(alpha > -0.25 && alpha.is_finite()) {
            return Err(ScatterError::InvalidPotential("SMIS profile needs α > −1/4".into()));
        }
        Ok(SmisProfile { k0, alpha, winding, shift, conjugated })
    }
    pub fn k0(&self) -> f64 {
        self.k0
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn winding(&self) -> u32 {
        self.winding
    }
    pub fn shift(&self) -> f64 {
        self.shift
    }
    pub fn conjugated(&self) -> bool {
        self.conjugated
    }
    pub fn length(&self) -> f64 {
        PI * self.winding as f64 / self.k0
    }
    pub fn with_conjugation(&self, conjugated: bool) -> Self {
        SmisProfile { conjugated, ..self.clone() }
    }

    /// `S(z)` and its first two derivatives.
    pub fn s_curve(&self, z: C64) -> (C64, C64, C64) {
        let a = self.alpha;
        let s = z * (a * (z - 1.0) * (z - 1.0) + 1.0);
        let ds = 3.0 * a * z * z - 4.0 * a * z + (a + 1.0);
        let dds = 6.0 * a * z - 4.0 * a;
        (s, ds, dds)
    }

    fn value(&self, x: f64) -> C64 {
        let u = x - self.shift;
        if !(0.0..=self.length()).contains(&u) {
            return C64::new(0.0, 0.0);
        }
        let z = C64::from_polar(1.0, -2.0 * self.k0 * u);
        let (s, _, dds) = self.s_curve(z);
        let v = -4.0 * self.k0 * self.k0 * z * z * dds / s;
        if self.conjugated {
            v.conj()
        } else {
            v
        }
    }
}

/// Uniform samples `values[i]` at `x0 + i·dx`, linearly interpolated, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    x0: f64,
    dx: f64,
    values: Vec<C64>,
}

impl Sampled {
    pub fn new(x0: f64, dx: f64, values: Vec<C64>) -> Result<Self> {
        if values.len() < 2 || !(dx > 0.0 && dx.is_finite()) || !x0.is_finite() {
            return Err(ScatterError::InvalidPotential("sampled potential needs ≥ 2 samples and dx > 0".into()));
        }
        Ok(Sampled { x0, dx, values })
    }

    /// Sample a callable on `n` uniform nodes over `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        if n < 2 || !(b > a) {
            return Err(ScatterError::InvalidPotential("sampling needs n ≥ 2 and b > a".into()));
        }
        let dx = (b - a) / (n - 1) as f64;
        Sampled::new(a, dx, (0..n).map(|i| f(a + i as f64 * dx)).collect())
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn x_end(&self) -> f64 {
        self.x0 + self.dx * (self.values.len() - 1) as f64
    }
    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.x0 + i as f64 * self.dx)
    }

    fn value(&self, x: f64) -> C64 {
        if x < self.x0 || x > self.x_end() {
            return C64::new(0.0, 0.0);
        }
        let s = (x - self.x0) / self.dx;
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let t = s - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Trapezoidal `∫ v dx` of the interpolant.
    pub fn integral(&self) -> C64 {
        let n = self.values.len();
        let inner: C64 = self.values[1..n - 1].iter().sum();
        self.dx * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }
}

/// A finite-range potential: a base variant or a combinator.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    DeltaComb(DeltaComb),
    Piecewise(PiecewiseConstant),
    ExpGrating(ExpGrating),
    FourierCell(FourierCell),
    Smis(SmisProfile),
    Sampled(Sampled),
    /// Pointwise sum; supports may overlap.
    Sum(Vec<Potential>),
    /// `v(x − shift)`.
    Translated { inner: Box<Potential>, shift: f64 },
    /// `v(x)*`.
    TimeReversed(Box<Potential>),
    /// `Σ_{j=1}^{copies} cell(x − (j−1)·period)`, period ≥ cell support length.
    LocallyPeriodic { cell: Box<Potential>, copies: u32, period: f64 },
}

impl Potential {
    pub fn zero() -> Self {
        Potential::Sum(Vec::new())
    }

    pub fn delta(strength: C64, location: f64) -> Result<Self> {
        Ok(Potential::DeltaComb(DeltaComb::new(vec![(strength, location)])?))
    }

    pub fn delta_comb(terms: Vec<(C64, f64)>) -> Result<Self> {
        Ok(Potential::DeltaComb(DeltaComb::new(terms)?))
    }

    pub fn barrier(height: C64, a_minus: f64, a_plus: f64) -> Result<Self> {
        Ok(Potential::Piecewise(PiecewiseConstant::new(vec![a_minus, a_plus], vec![height])?))
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        Ok(Potential::Piecewise(PiecewiseConstant::new(breakpoints, values)?))
    }

    pub fn exp_grating(strength: C64, harmonic: u32, length: f64, offset: f64) -> Result<Self> {
        Ok(Potential::ExpGrating(ExpGrating::new(strength, harmonic, length, offset)?))
    }

    pub fn fourier_cell(length: f64, coefficients: Vec<(i32, C64)>) -> Result<Self> {
        Ok(Potential::FourierCell(FourierCell::new(length, coefficients)?))
    }

    pub fn smis(k0: f64, alpha: f64, winding: u32, shift: f64, conjugated: bool) -> Result<Self> {
        Ok(Potential::Smis(SmisProfile::new(k0, alpha, winding, shift, conjugated)?))
    }

    pub fn translated(self, shift: f64) -> Self {
        Potential::Translated { inner: Box::new(self), shift }
    }

    pub fn time_reversed(self) -> Self {
        Potential::TimeReversed(Box::new(self))
    }

    pub fn locally_periodic(cell: Potential, copies: u32, period: f64) -> Result<Self> {
        let (lo, hi) = cell.support();
        if copies == 0 || !(period > 0.0) || period < hi - lo {
            return Err(ScatterError::InvalidPotential(
                "locally periodic potential needs copies ≥ 1 and period ≥ cell support length".into(),
            ));
        }
        Ok(Potential::LocallyPeriodic { cell: Box::new(cell), copies, period })
    }

    /// Smooth part of `v(x)`; delta terms are excluded.
    pub fn evaluate(&self, x: f64) -> C64 {
        match self {
            Potential::DeltaComb(_) => C64::new(0.0, 0.0),
            Potential::Piecewise(p) => {
                let b = &p.breakpoints;
                if x < b[0] || x > b[b.len() - 1] {
                    return C64::new(0.0, 0.0);
                }
                let idx = b.partition_point(|&t| t <= x);
                p.values[idx.saturating_sub(1).min(p.values.len() - 1)]
            }
            Potential::ExpGrating(g) => {
                let u = x - g.offset;
                if (0.0..=g.length).contains(&u) {
                    g.strength * C64::from_polar(1.0, g.base_wavenumber() * g.harmonic as f64 * u)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Potential::FourierCell(f) => {
                if (0.0..=f.length).contains(&x) {
                    let kk = 2.0 * PI / f.length;
                    f.coefficients
                        .iter()
                        .map(|&(n, c)| c * C64::from_polar(1.0, kk * n as f64 * x))
                        .sum()
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Potential::Smis(s) => s.value(x),
            Potential::Sampled(s) => s.value(x),
            Potential::Sum(ps) => ps.iter().map(|p| p.evaluate(x)).sum(),
            Potential::Translated { inner, shift } => inner.evaluate(x - shift),
            Potential::TimeReversed(inner) => inner.evaluate(x).conj(),
            Potential::LocallyPeriodic { cell, copies, period } => {
                let (lo, hi) = cell.support();
                copy_range(x, lo, hi, *copies, *period)
                    .map(|j| cell.evaluate(x - j as f64 * period))
                    .sum()
            }
        }
    }

    /// Smallest closed interval containing the support and all delta terms.
    /// The zero potential reports `[0, 0]`.
    pub fn support(&self) -> (f64, f64) {
        self.support_opt().unwrap_or((0.0, 0.0))
    }

    fn support_opt(&self) -> Option<(f64, f64)> {
        match self {
            Potential::DeltaComb(d) => {
                let t = &d.terms;
                if t.is_empty() {
                    None
                } else {
                    Some((t[0].1, t[t.len() - 1].1))
                }
            }
            Potential::Piecewise(p) => Some((p.breakpoints[0], *p.breakpoints.last().unwrap())),
            Potential::ExpGrating(g) => Some((g.offset, g.offset + g.length)),
            Potential::FourierCell(f) => {
                if f.coefficients.is_empty() {
                    None
                } else {
                    Some((0.0, f.length))
                }
            }
            Potential::Smis(s) => Some((s.shift, s.shift + s.length())),
            Potential::Sampled(s) => Some((s.x0, s.x_end())),
            Potential::Sum(ps) => ps.iter().filter_map(|p| p.support_opt()).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1))),
            Potential::Translated { inner, shift } => inner.support_opt().map(|(a, b)| (a + shift, b + shift)),
            Potential::TimeReversed(inner) => inner.support_opt(),
            Potential::LocallyPeriodic { cell, copies, period } => cell
                .support_opt()
                .map(|(a, b)| (a, b + (*copies as f64 - 1.0) * period)),
        }
    }

    /// True when the potential vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.support_opt().is_none()
    }

    /// All delta terms `(strength, location)`, sorted by location, coincident ones merged.
    pub fn delta_terms(&self) -> Vec<(C64, f64)> {
        let mut out = Vec::new();
        self.collect_deltas(&mut out, 0.0, false);
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(C64, f64)> = Vec::with_capacity(out.len());
        for (z, a) in out {
            match merged.last_mut() {
                Some(last) if last.1 == a => last.0 += z,
                _ => merged.push((z, a)),
            }
        }
        merged.retain(|t| t.0.norm() != 0.0);
        merged
    }

    fn collect_deltas(&self, out: &mut Vec<(C64, f64)>, shift: f64, conj: bool) {
        match self {
            Potential::DeltaComb(d) => {
                out.extend(d.terms.iter().map(|&(z, a)| (if conj { z.conj() } else { z }, a + shift)))
            }
            Potential::Sum(ps) => ps.iter().for_each(|p| p.collect_deltas(out, shift, conj)),
            Potential::Translated { inner, shift: s } => inner.collect_deltas(out, shift + s, conj),
            Potential::TimeReversed(inner) => inner.collect_deltas(out, shift, !conj),
            Potential::LocallyPeriodic { cell, copies, period } => {
                for j in 0..*copies {
                    cell.collect_deltas(out, shift + j as f64 * period, conj);
                }
            }
            _ => {}
        }
    }

    /// True when the smooth part is not identically zero.
    pub fn has_smooth_part(&self) -> bool {
        match self {
            Potential::DeltaComb(_) => false,
            Potential::Piecewise(p) => p.values.iter().any(|v| v.norm() != 0.0),
            Potential::ExpGrating(g) => g.strength.norm() != 0.0,
            Potential::FourierCell(f) => !f.coefficients.is_empty(),
            Potential::Smis(s) => s.alpha != 0.0,
            Potential::Sampled(s) => s.values.iter().any(|v| v.norm() != 0.0),
            Potential::Sum(ps) => ps.iter().any(|p| p.has_smooth_part()),
            Potential::Translated { inner, .. } | Potential::TimeReversed(inner) => inner.has_smooth_part(),
            Potential::LocallyPeriodic { cell, .. } => cell.has_smooth_part(),
        }
    }

    /// Points where the smooth part may fail to be smooth (support edges,
    /// piecewise breakpoints) plus delta locations, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breaks(&mut out, 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_breaks(&self, out: &mut Vec<f64>, shift: f64) {
        match self {
            Potential::DeltaComb(d) => out.extend(d.terms.iter().map(|t| t.1 + shift)),
            Potential::Piecewise(p) => out.extend(p.breakpoints.iter().map(|b| b + shift)),
            Potential::Sum(ps) => ps.iter().for_each(|p| p.collect_breaks(out, shift)),
            Potential::Translated { inner, shift: s } => inner.collect_breaks(out, shift + s),
            Potential::TimeReversed(inner) => inner.collect_breaks(out, shift),
            Potential::LocallyPeriodic { cell, copies, period } => {
                for j in 0..*copies {
                    cell.collect_breaks(out, shift + j as f64 * period);
                }
            }
            other => {
                if let Some((a, b)) = other.support_opt() {
                    out.push(a + shift);
                    out.push(b + shift);
                }
            }
        }
    }

    /// Whether the smooth part may be nonzero inside `(lo, hi)`, an interval
    /// between consecutive breakpoints.
    pub fn smooth_active(&self, lo: f64, hi: f64) -> bool {
        let mid = 0.5 * (lo + hi);
        match self {
            Potential::DeltaComb(_) => false,
            Potential::Piecewise(_) => self.evaluate(mid).norm() != 0.0,
            Potential::Sum(ps) => ps.iter().any(|p| p.smooth_active(lo, hi)),
            Potential::Translated { inner, shift } => inner.smooth_active(lo - shift, hi - shift),
            Potential::TimeReversed(inner) => inner.smooth_active(lo, hi),
            Potential::LocallyPeriodic { cell, copies, period } => {
                let (a, b) = cell.support();
                copy_range(mid, a, b, *copies, *period)
                    .any(|j| cell.smooth_active(lo - j as f64 * period, hi - j as f64 * period))
            }
            other => match other.support_opt() {
                Some((a, b)) => other.has_smooth_part() && mid > a && mid < b,
                None => false,
            },
        }
    }

    /// Intervals between consecutive breakpoints on which the smooth part is active.
    pub fn smooth_segments(&self) -> Vec<(f64, f64)> {
        let bp = self.breakpoints();
        bp.windows(2)
            .filter(|w| w[1] > w[0] && self.smooth_active(w[0], w[1]))
            .map(|w| (w[0], w[1]))
            .collect()
    }

    /// Structural check that `v` is real-valued.
    pub fn is_real(&self) -> bool {
        match self {
            Potential::DeltaComb(d) => d.terms.iter().all(|t| t.0.im == 0.0),
            Potential::Piecewise(p) => p.values.iter().all(|v| v.im == 0.0),
            Potential::ExpGrating(g) => g.strength.norm() == 0.0,
            Potential::FourierCell(f) => f.coefficients.iter().all(|&(n, c)| {
                let partner: C64 = f.coefficients.iter().filter(|m| m.0 == -n).map(|m| m.1).sum();
                (partner - c.conj()).norm() <= 1e-15 * c.norm()
            }),
            Potential::Smis(s) => s.alpha == 0.0,
            Potential::Sampled(s) => s.values.iter().all(|v| v.im == 0.0),
            Potential::Sum(ps) => ps.iter().all(|p| p.is_real()),
            Potential::Translated { inner, .. } | Potential::TimeReversed(inner) => inner.is_real(),
            Potential::LocallyPeriodic { cell, .. } => cell.is_real(),
        }
    }

    /// For a `Sum`, whether some pair of component supports overlaps
    /// (touching endpoints count as disjoint). Other variants return false.
    pub fn has_overlapping_components(&self) -> bool {
        match self {
            Potential::Sum(ps) => ordered_components(ps).is_none(),
            _ => false,
        }
    }

    /// Fourier transform `ṽ(κ) = ∫ e^{−iκx} v(x) dx`, delta terms included.
    pub fn fourier_transform(&self, kappa: f64) -> Result<C64> {
        self.fourier_transform_tol(kappa, DEFAULT_QUAD_TOL)
    }

    pub fn fourier_transform_tol(&self, kappa: f64, tol: f64) -> Result<C64> {
        Ok(match self {
            Potential::DeltaComb(d) => d.terms.iter().map(|&(z, a)| z * C64::from_polar(1.0, -kappa * a)).sum(),
            Potential::Piecewise(p) => p
                .cells()
                .map(|(x0, w, v)| v * C64::from_polar(1.0, -kappa * x0) * exp_integral(kappa, w))
                .sum(),
            Potential::ExpGrating(g) => {
                let q = kappa - g.harmonic as f64 * g.base_wavenumber();
                g.strength * C64::from_polar(1.0, -kappa * g.offset) * exp_integral(q, g.length)
            }
            Potential::FourierCell(f) => {
                let kk = 2.0 * PI / f.length;
                f.coefficients
                    .iter()
                    .map(|&(n, c)| c * exp_integral(kappa - n as f64 * kk, f.length))
                    .sum()
            }
            Potential::Sampled(s) => s
                .values
                .windows(2)
                .enumerate()
                .map(|(i, w)| filon_linear_cell(w[0], w[1], s.x0 + i as f64 * s.dx, s.dx, kappa))
                .sum(),
            Potential::Smis(_) => numeric_transform(self, tol, |atoms| atoms.single(kappa))?,
            Potential::Sum(ps) => {
                let mut acc = C64::new(0.0, 0.0);
                for p in ps {
                    acc += p.fourier_transform_tol(kappa, tol)?;
                }
                acc
            }
            Potential::Translated { inner, shift } => {
                C64::from_polar(1.0, -kappa * shift) * inner.fourier_transform_tol(kappa, tol)?
            }
            Potential::TimeReversed(inner) => inner.fourier_transform_tol(-kappa, tol)?.conj(),
            Potential::LocallyPeriodic { cell, copies, period } => {
                let base = cell.fourier_transform_tol(kappa, tol)?;
                let phase: C64 = (0..*copies).map(|j| C64::from_polar(1.0, -kappa * j as f64 * period)).sum();
                base * phase
            }
        })
    }

    /// Ordered double transform `∫∫_{x₁<x₂} e^{−i(k₁x₁+k₂x₂)} v(x₁) v(x₂) dx₁ dx₂`.
    ///
    /// Strict ordering: a delta term is never paired with itself.
    pub fn double_fourier(&self, k1: f64, k2: f64) -> Result<C64> {
        self.double_fourier_tol(k1, k2, DEFAULT_QUAD_TOL)
    }

    pub fn double_fourier_tol(&self, k1: f64, k2: f64, tol: f64) -> Result<C64> {
        let zero = C64::new(0.0, 0.0);
        Ok(match self {
            Potential::DeltaComb(d) => {
                let mut prefix = zero;
                let mut acc = zero;
                for &(z, a) in &d.terms {
                    acc += prefix * z * C64::from_polar(1.0, -k2 * a);
                    prefix += z * C64::from_polar(1.0, -k1 * a);
                }
                acc
            }
            Potential::Piecewise(p) => {
                let mut prefix = zero;
                let mut acc = zero;
                for (x0, w, v) in p.cells() {
                    let self_term = v * v * C64::from_polar(1.0, -(k1 + k2) * x0) * cal_f(k1, k2, w);
                    acc += self_term + prefix * v * C64::from_polar(1.0, -k2 * x0) * exp_integral(k2, w);
                    prefix += v * C64::from_polar(1.0, -k1 * x0) * exp_integral(k1, w);
                }
                acc
            }
            Potential::ExpGrating(g) => {
                let q = g.harmonic as f64 * g.base_wavenumber();
                g.strength * g.strength * C64::from_polar(1.0, -(k1 + k2) * g.offset) * cal_f(k1 - q, k2 - q, g.length)
            }
            Potential::FourierCell(f) => {
                let kk = 2.0 * PI / f.length;
                let mut acc = zero;
                for &(n, cn) in &f.coefficients {
                    for &(m, cm) in &f.coefficients {
                        acc += cn * cm * cal_f(k1 - n as f64 * kk, k2 - m as f64 * kk, f.length);
                    }
                }
                acc
            }
            Potential::Sampled(s) => {
                let mut atoms = Atoms::default();
                for (i, w) in s.values.windows(2).enumerate() {
                    atoms.items.push(Atom::Cell { x0: s.x0 + i as f64 * s.dx, h: s.dx, f0: w[0], f1: w[1] });
                }
                atoms.double(k1, k2)
            }
            Potential::Smis(_) => numeric_transform(self, tol, |atoms| atoms.double(k1, k2))?,
            Potential::Sum(ps) => match ordered_components(ps) {
                Some(order) => {
                    let mut prefix = zero;
                    let mut acc = zero;
                    for i in order {
                        let p = &ps[i];
                        acc += p.double_fourier_tol(k1, k2, tol)? + prefix * p.fourier_transform_tol(k2, tol)?;
                        prefix += p.fourier_transform_tol(k1, tol)?;
                    }
                    acc
                }
                None => numeric_transform(self, tol, |atoms| atoms.double(k1, k2))?,
            },
            Potential::Translated { inner, shift } => {
                C64::from_polar(1.0, -(k1 + k2) * shift) * inner.double_fourier_tol(k1, k2, tol)?
            }
            Potential::TimeReversed(inner) => inner.double_fourier_tol(-k1, -k2, tol)?.conj(),
            Potential::LocallyPeriodic { cell, copies, period } => {
                let d = cell.double_fourier_tol(k1, k2, tol)?;
                let f1 = cell.fourier_transform_tol(k1, tol)?;
                let f2 = cell.fourier_transform_tol(k2, tol)?;
                let mut prefix = zero;
                let mut acc = zero;
                for j in 0..*copies {
                    let x = j as f64 * period;
                    acc += C64::from_polar(1.0, -(k1 + k2) * x) * d + prefix * f2 * C64::from_polar(1.0, -k2 * x);
                    prefix += f1 * C64::from_polar(1.0, -k1 * x);
                }
                acc
            }
        })
    }
}

/// Indices of copies of a cell with support `[lo, hi]` that may contain `x`.
fn copy_range(x: f64, lo: f64, hi: f64, copies: u32, period: f64) -> impl Iterator<Item = u32> {
    let jmin = ((x - hi) / period).ceil().max(0.0);
    let jmax = ((x - lo) / period).floor().min(copies as f64 - 1.0);
    let (a, b) = if jmax >= jmin { (jmin as u32, jmax as u32 + 1) } else { (0, 0) };
    a..b
}

/// Component order by position when supports are pairwise disjoint.
fn ordered_components(ps: &[Potential]) -> Option<Vec<usize>> {
    let mut idx: Vec<(usize, (f64, f64))> =
        ps.iter().enumerate().filter_map(|(i, p)| p.support_opt().map(|s| (i, s))).collect();
    idx.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.total_cmp(&b.1 .1)));
    for w in idx.windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        // Touching is fine unless both are points at the same location.
        if b.0 < a.1 || (b.0 == a.1 && a.0 == a.1 && b.0 == b.1) {
            return None;
        }
    }
    Some(idx.into_iter().map(|(i, _)| i).collect())
}

/// Piecewise-linear interpolant of the smooth part plus exact delta terms.
#[derive(Default)]
struct Atoms {
    items: Vec<Atom>,
}

enum Atom {
    Cell { x0: f64, h: f64, f0: C64, f1: C64 },
    Delta { z: C64, a: f64 },
}

impl Atom {
    fn single(&self, k: f64) -> C64 {
        match *self {
            Atom::Cell { x0, h, f0, f1 } => filon_linear_cell(f0, f1, x0, h, k),
            Atom::Delta { z, a } => z * C64::from_polar(1.0, -k * a),
        }
    }
}

impl Atoms {
    fn build(p: &Potential, cells_per_unit: f64) -> Self {
        let mut items = Vec::new();
        for (lo, hi) in p.smooth_segments() {
            let n = ((hi - lo) * cells_per_unit).ceil().max(2.0) as usize;
            let h = (hi - lo) / n as f64;
            // Nudge end samples inside so one-sided limits are used at discontinuities.
            let eps = 1e-13 * (hi - lo).max(1.0);
            let f: Vec<C64> = (0..=n)
                .map(|i| {
                    let x = (lo + i as f64 * h).clamp(lo + eps, hi - eps);
                    p.evaluate(x)
                })
                .collect();
            for i in 0..n {
                items.push(Atom::Cell { x0: lo + i as f64 * h, h, f0: f[i], f1: f[i + 1] });
            }
        }
        for (z, a) in p.delta_terms() {
            items.push(Atom::Delta { z, a });
        }
        let key = |a: &Atom| match *a {
            Atom::Cell { x0, .. } => x0,
            Atom::Delta { a, .. } => a,
        };
        items.sort_by(|a, b| key(a).total_cmp(&key(b)));
        Atoms { items }
    }

    fn single(&self, k: f64) -> C64 {
        self.items.iter().map(|a| a.single(k)).sum()
    }

    fn double(&self, k1: f64, k2: f64) -> C64 {
        let mut prefix = C64::new(0.0, 0.0);
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.items {
            if let Atom::Cell { x0, h, f0, f1 } = *a {
                acc += filon_linear_cell_double(f0, f1, x0, h, k1, k2);
            }
            acc += prefix * a.single(k2);
            prefix += a.single(k1);
        }
        acc
    }
}

/// Refine the interpolant until Richardson-extrapolated values settle.
fn numeric_transform(p: &Potential, tol: f64, f: impl Fn(&Atoms) -> C64) -> Result<C64> {
    let (lo, hi) = p.support();
    let len = (hi - lo).max(1e-300);
    let mut cells = 256.0 / len;
    let mut prev = f(&Atoms::build(p, cells));
    let mut prev_extrap: Option<C64> = None;
    let mut change = f64::INFINITY;
    while cells * len <= QUAD_MAX_CELLS as f64 {
        cells *= 2.0;
        let cur = f(&Atoms::build(p, cells));
        let extrap = (4.0 * cur - prev) / 3.0;
        if let Some(pe) = prev_extrap {
            change = (extrap - pe).norm();
            if change <= tol * (1.0 + extrap.norm()) {
                return Ok(extrap);
            }
        }
        prev = cur;
        prev_extrap = Some(extrap);
    }
    Err(ScatterError::QuadratureNonconvergence { tol, change })
}

/// Potential `v = k²(1 − ε̂)` from relative-permittivity samples on a uniform grid.
/// The profile must equal 1 (within `end_tol`) at both ends.
pub fn from_permittivity(x0: f64, dx: f64, eps_hat: &[C64], k: f64, end_tol: f64) -> Result<Potential> {
    crate::check_k(k)?;
    if eps_hat.len() < 2 {
        return Err(ScatterError::InvalidPotential("permittivity profile needs ≥ 2 samples".into()));
    }
    let ends = [eps_hat[0], eps_hat[eps_hat.len() - 1]];
    if ends.iter().any(|e| (e - 1.0).norm() > end_tol) {
        return Err(ScatterError::InvalidPotential(
            "permittivity profile must reach 1 at both ends".into(),
        ));
    }
    let values: Vec<C64> = eps_hat.iter().map(|e| k * k * (1.0 - e)).collect();
    if values.iter().all(|v| v.norm() == 0.0) {
        return Ok(Potential::zero());
    }
    Ok(Potential::Sampled(Sampled::new(x0, dx, values)?))
}
