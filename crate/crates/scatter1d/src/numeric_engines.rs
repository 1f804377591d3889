//! Numerical engines: the evolution-operator transfer matrix, scattering
//! solutions of the stationary equation, and the S-curve method.

use crate::exact_solvers::{exact_transfer_matrix, has_closed_form};
use crate::linalg::Mat2;
use crate::potentials::Potential;
use crate::transfer_core::{ScatteringData, TransferMatrix};
use crate::{check_k, Result, ScatterError, C64, I};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Hard cap on the number of Magnus slices.
pub const MAX_SLICES: usize = 1 << 20;

const GAUSS_C: f64 = 0.288_675_134_594_812_9; // √3/6
const MAGNUS_COMM: f64 = 0.144_337_567_297_406_4; // √3/12

/// Interaction-picture generator `𝓗(x) = (v(x)/2k) e^{−ikxσ₃} K e^{ikxσ₃}`.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveHamiltonian<'a> {
    pub potential: &'a Potential,
    pub k: f64,
}

impl EffectiveHamiltonian<'_> {
    /// `(v/2k) [[1, e^{−2ikx}], [−e^{2ikx}, −1]]` (smooth part of `v`).
    pub fn at(&self, x: f64) -> Mat2 {
        let h = self.potential.evaluate(x) / (2.0 * self.k);
        let e = C64::from_polar(1.0, -2.0 * self.k * x);
        Mat2::new(h, h * e, -h * e.conj(), -h)
    }

    /// Schrödinger-picture generator `H(x) = (v/2k) K − k σ₃`.
    pub fn schrodinger(&self, x: f64) -> Mat2 {
        let h = self.potential.evaluate(x) / (2.0 * self.k);
        Mat2::k_matrix().scale(h) - Mat2::sigma3().scale(C64::from(self.k))
    }
}

/// Fourth-order Magnus step for `Y' = A(x) Y` over `[x, x+h]`.
fn magnus_step(a: impl Fn(f64) -> Mat2, x: f64, h: f64) -> Mat2 {
    let a1 = a(x + (0.5 - GAUSS_C) * h);
    let a2 = a(x + (0.5 + GAUSS_C) * h);
    let omega = (a1 + a2).scale(C64::from(0.5 * h)) + a2.commutator(&a1).scale(C64::from(MAGNUS_COMM * h * h));
    omega.expm_traceless()
}

/// Slice layout over `[x1, x2]`: breakpoint intervals with slice counts.
struct Plan {
    pieces: Vec<(f64, f64, usize)>,
    deltas: Vec<(C64, f64)>,
}

impl Plan {
    fn new(p: &Potential, x1: f64, x2: f64, total: usize, include_right: bool) -> Plan {
        let mut cuts: Vec<f64> = p.breakpoints().into_iter().filter(|&b| b > x1 && b < x2).collect();
        cuts.insert(0, x1);
        cuts.push(x2);
        cuts.dedup();
        let active: Vec<bool> = cuts.windows(2).map(|w| w[1] > w[0] && p.smooth_active(w[0], w[1])).collect();
        let active_len: f64 = cuts.windows(2).zip(&active).filter(|(_, &a)| a).map(|(w, _)| w[1] - w[0]).sum();
        let pieces = cuts
            .windows(2)
            .zip(&active)
            .filter(|(w, _)| w[1] > w[0])
            .map(|(w, &a)| {
                let n = if a { ((total as f64) * (w[1] - w[0]) / active_len).round().max(2.0) as usize } else { 0 };
                (w[0], w[1], n)
            })
            .collect();
        let deltas = p
            .delta_terms()
            .into_iter()
            .filter(|&(_, a)| a >= x1 && (a < x2 || (include_right && a == x2)))
            .collect();
        Plan { pieces, deltas }
    }

    fn slices(&self) -> usize {
        self.pieces.iter().map(|p| p.2).sum()
    }

    fn has_active(&self) -> bool {
        self.pieces.iter().any(|p| p.2 > 0)
    }
}

/// Schrödinger-picture propagator over a plan.
fn schrodinger_propagator(p: &Potential, k: f64, plan: &Plan) -> Mat2 {
    let ham = EffectiveHamiltonian { potential: p, k };
    let gen = |x: f64| ham.schrodinger(x).scale(-I);
    let kick = |z: C64| Mat2::identity() - Mat2::k_matrix().scale(I * z / (2.0 * k));
    let mut u = Mat2::identity();
    let mut di = 0;
    for &(lo, hi, n) in &plan.pieces {
        while di < plan.deltas.len() && plan.deltas[di].1 <= lo {
            u = kick(plan.deltas[di].0) * u;
            di += 1;
        }
        if n == 0 {
            u = Mat2::propagation(k, hi - lo) * u;
        } else {
            let h = (hi - lo) / n as f64;
            for j in 0..n {
                u = magnus_step(&gen, lo + j as f64 * h, h) * u;
            }
        }
    }
    for &(z, _) in &plan.deltas[di..] {
        u = kick(z) * u;
    }
    u
}

/// Outcome of the dynamical engine.
#[derive(Debug, Clone, Copy)]
pub struct DynamicalReport {
    pub matrix: TransferMatrix,
    /// Slices used in the accepted pass.
    pub slices: usize,
    /// Max-norm change between the last two passes (0 when exact).
    pub change: f64,
}

fn initial_slices(k: f64, len: f64) -> usize {
    (64.0f64).max((8.0 * k * len / PI).ceil()) as usize
}

/// Interaction-picture evolution operator `𝓤(x₂, x₁)`, delta terms in `[x₁, x₂)` included.
pub fn evolution_operator(p: &Potential, k: f64, x1: f64, x2: f64, tol: f64) -> Result<Mat2> {
    Ok(evolve(p, k, x1, x2, tol, false)?.0)
}

fn evolve(p: &Potential, k: f64, x1: f64, x2: f64, tol: f64, include_right: bool) -> Result<(Mat2, usize, f64)> {
    check_k(k)?;
    if !(tol > 0.0) {
        return Err(ScatterError::InvalidInput("tolerance must be positive".into()));
    }
    let frame = |u: Mat2| Mat2::propagation(k, -x2) * u * Mat2::propagation(k, x1);
    let mut total = initial_slices(k, x2 - x1);
    let plan = Plan::new(p, x1, x2, total, include_right);
    let mut prev = frame(schrodinger_propagator(p, k, &plan));
    if !plan.has_active() {
        return Ok((prev, 0, 0.0));
    }
    let mut change = f64::INFINITY;
    while total * 2 <= MAX_SLICES {
        total *= 2;
        let plan = Plan::new(p, x1, x2, total, include_right);
        let cur = frame(schrodinger_propagator(p, k, &plan));
        change = (cur - prev).max_norm();
        if !cur.is_finite() {
            break;
        }
        if change < tol {
            return Ok((cur, plan.slices(), change));
        }
        prev = cur;
    }
    Err(ScatterError::ToleranceNotReached { tol, change, slices: total })
}

/// Transfer matrix by integrating `i∂ₓ M = 𝓗(x) M`, `M(a₋) = I`, across the support.
///
/// Smooth parts advance by fourth-order Magnus slices (each an exact 2×2
/// exponential of a traceless generator, hence unimodular); delta terms are
/// spliced in exactly; slices double until successive results differ by less
/// than `tol` in max-norm.
pub fn transfer_matrix_dynamical(p: &Potential, k: f64, tol: f64) -> Result<TransferMatrix> {
    Ok(dynamical_report(p, k, tol)?.matrix)
}

pub fn dynamical_report(p: &Potential, k: f64, tol: f64) -> Result<DynamicalReport> {
    check_k(k)?;
    if p.is_zero() {
        return Ok(DynamicalReport { matrix: TransferMatrix::identity(k)?, slices: 0, change: 0.0 });
    }
    let (a, b) = p.support();
    let (m, slices, change) = evolve(p, k, a, b, tol, true)?;
    Ok(DynamicalReport { matrix: TransferMatrix::from_parts(m, k), slices, change })
}

/// Engine selection for transfer-matrix evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Exact,
    Dynamical,
    /// Closed form when available, dynamical otherwise.
    #[default]
    Auto,
}

impl std::str::FromStr for Solver {
    type Err = ScatterError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Solver::Exact),
            "dynamical" => Ok(Solver::Dynamical),
            "auto" => Ok(Solver::Auto),
            other => Err(ScatterError::InvalidInput(format!("unknown solver '{other}'"))),
        }
    }
}

impl Solver {
    /// The engine actually used for `p`.
    pub fn resolve(self, p: &Potential) -> Solver {
        match self {
            Solver::Auto if has_closed_form(p) => Solver::Exact,
            Solver::Auto => Solver::Dynamical,
            s => s,
        }
    }
}

/// Transfer matrix with the selected engine (`tol` applies to the dynamical one).
pub fn transfer_matrix(p: &Potential, k: f64, solver: Solver, tol: f64) -> Result<TransferMatrix> {
    match solver.resolve(p) {
        Solver::Exact => exact_transfer_matrix(p, k),
        _ => transfer_matrix_dynamical(p, k, tol),
    }
}

/// Incidence side of a scattering solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A scattering solution sampled over the support.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    pub side: Side,
    pub k: f64,
    /// Sample points (slice edges and midpoints), increasing.
    pub x: Vec<f64>,
    /// `ψ` normalized to unit incident amplitude.
    pub psi: Vec<C64>,
    pub dpsi: Vec<C64>,
    pub a_minus: C64,
    pub b_minus: C64,
    pub a_plus: C64,
    pub b_plus: C64,
    /// Reflection amplitude for this side of incidence.
    pub reflection: C64,
    pub transmission: C64,
    /// Delta terms `(strength, location, ψ̂ at location)`.
    pub delta_samples: Vec<(C64, f64, C64)>,
    /// Sample index ranges `[start, end]` (inclusive) of active smooth pieces.
    pub smooth_ranges: Vec<(usize, usize)>,
}

fn wave_generator(p: &Potential, k: f64) -> impl Fn(f64) -> Mat2 + '_ {
    move |x| Mat2::new(C64::from(0.0), C64::from(1.0), p.evaluate(x) - k * k, C64::from(0.0))
}

fn free_wave_step(k: f64, h: f64) -> Mat2 {
    let (s, c) = (k * h).sin_cos();
    Mat2::new(C64::from(c), C64::from(s / k), C64::from(-k * s), C64::from(c))
}

/// Integrate `ψ'' = (v − k²) ψ` once with a fixed slice plan.
fn wave_pass(p: &Potential, k: f64, side: Side, total: usize) -> WaveSolution {
    let (a, b) = p.support();
    let plan = Plan::new(p, a, b, total, true);
    let gen = wave_generator(p, k);
    // Forward list of nodes: each slice contributes its midpoint and right edge.
    // Steps hold (x_left, x_right, propagator over the full step, half-step propagator).
    struct Step {
        xl: f64,
        xr: f64,
        h: f64,
        full: Mat2,
        half: Option<Mat2>,
    }
    let mut steps: Vec<Step> = Vec::new();
    let mut ranges_steps: Vec<(usize, usize)> = Vec::new();
    for &(lo, hi, n) in &plan.pieces {
        if n == 0 {
            steps.push(Step { xl: lo, xr: hi, h: hi - lo, full: free_wave_step(k, hi - lo), half: None });
        } else {
            let h = (hi - lo) / n as f64;
            let first = steps.len();
            for j in 0..n {
                let xl = lo + j as f64 * h;
                let half = magnus_step(&gen, xl, 0.5 * h);
                let second = magnus_step(&gen, xl + 0.5 * h, 0.5 * h);
                let xr = if j + 1 == n { hi } else { xl + h };
                steps.push(Step { xl, xr, h, full: second * half, half: Some(half) });
            }
            ranges_steps.push((first, steps.len() - 1));
        }
    }
    let deltas = &plan.deltas;
    let ik = I * k;
    // Node positions: a, then for each step [mid,] right edge.
    let mut x = vec![a];
    let mut step_node: Vec<(usize, Option<usize>)> = Vec::with_capacity(steps.len());
    for s in &steps {
        let mid = s.half.map(|_| {
            x.push(s.xl + 0.5 * s.h);
            x.len() - 1
        });
        x.push(s.xr);
        step_node.push((x.len() - 1, mid));
    }
    let n_nodes = x.len();
    let mut y = vec![[C64::from(0.0); 2]; n_nodes];
    // Deltas sit at node positions that are step edges (breakpoints).
    let delta_at = |pos: f64| deltas.iter().filter(move |d| d.1 == pos).map(|d| d.0);
    match side {
        Side::Left => {
            // ψ = e^{ikx} to the right of the support, then cross any delta at b.
            let e = C64::from_polar(1.0, k * b);
            let mut cur = [e, ik * e];
            for z in delta_at(b) {
                cur[1] -= z * cur[0];
            }
            y[n_nodes - 1] = cur;
            for (si, s) in steps.iter().enumerate().rev() {
                let (right, mid) = step_node[si];
                let left = right - if mid.is_some() { 2 } else { 1 };
                let mut yl = s.full.adjugate().apply(y[right]);
                if let (Some(mi), Some(h)) = (mid, s.half) {
                    y[mi] = h.apply(yl);
                }
                for z in delta_at(x[left]) {
                    yl[1] -= z * yl[0];
                }
                y[left] = yl;
            }
        }
        Side::Right => {
            let e = C64::from_polar(1.0, -k * a);
            let mut cur = [e, -ik * e];
            for z in delta_at(a) {
                cur[1] += z * cur[0];
            }
            y[0] = cur;
            for (si, s) in steps.iter().enumerate() {
                let (right, mid) = step_node[si];
                let left_idx = right - if mid.is_some() { 2 } else { 1 };
                let yl = y[left_idx];
                if let (Some(mi), Some(h)) = (mid, s.half) {
                    y[mi] = h.apply(yl);
                }
                let mut yr = s.full.apply(yl);
                for z in delta_at(x[right]) {
                    yr[1] += z * yr[0];
                }
                y[right] = yr;
            }
        }
    }
    // Deltas at the ends are already crossed, so y[0] lives left of a and y[last] right of b.
    let coeffs = |yy: [C64; 2], pos: f64| {
        let e = C64::from_polar(1.0, k * pos);
        let aa = (yy[0] + yy[1] / ik) / (2.0 * e);
        let bb = (yy[0] - yy[1] / ik) * e / 2.0;
        (aa, bb)
    };
    let (a_minus, b_minus, a_plus, b_plus, refl, trans, norm) = match side {
        Side::Left => {
            let (am, bm) = coeffs(y[0], a);
            (am, bm, C64::from(1.0), C64::from(0.0), bm / am, 1.0 / am, am)
        }
        Side::Right => {
            let (ap, bp) = coeffs(y[n_nodes - 1], b);
            (C64::from(0.0), C64::from(1.0), ap, bp, ap / bp, 1.0 / bp, bp)
        }
    };
    let psi: Vec<C64> = y.iter().map(|v| v[0] / norm).collect();
    let dpsi: Vec<C64> = y.iter().map(|v| v[1] / norm).collect();
    let delta_samples = deltas
        .iter()
        .map(|&(z, pos)| {
            let idx = x.partition_point(|&t| t < pos).min(n_nodes - 1);
            (z, pos, psi[idx])
        })
        .collect();
    let smooth_ranges = ranges_steps
        .iter()
        .map(|&(s0, s1)| {
            let (r0, m0) = step_node[s0];
            let start = r0 - if m0.is_some() { 2 } else { 1 };
            (start, step_node[s1].0)
        })
        .collect();
    WaveSolution {
        side,
        k,
        x,
        psi,
        dpsi,
        a_minus,
        b_minus,
        a_plus,
        b_plus,
        reflection: refl,
        transmission: trans,
        delta_samples,
        smooth_ranges,
    }
}

/// Scattering solution for a wave incident from `side`, integrated from the
/// transmission side inward with unit outgoing amplitude, then normalized to
/// unit incident amplitude. Slices double until `(R, T)` change by less than `tol`.
pub fn scattering_solution(p: &Potential, k: f64, side: Side, tol: f64) -> Result<WaveSolution> {
    check_k(k)?;
    let (a, b) = p.support();
    let mut total = initial_slices(k, b - a);
    let mut prev = wave_pass(p, k, side, total);
    if !p.has_smooth_part() {
        return Ok(prev);
    }
    let mut change = f64::INFINITY;
    while total * 2 <= MAX_SLICES {
        total *= 2;
        let cur = wave_pass(p, k, side, total);
        change = (cur.reflection - prev.reflection).norm().max((cur.transmission - prev.transmission).norm());
        if !change.is_finite() {
            return Err(ScatterError::IntegrationFailure("non-finite wave amplitudes".into()));
        }
        if change < tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(ScatterError::ToleranceNotReached { tol, change, slices: total })
}

/// Both transmission evaluations alongside the amplitudes.
#[derive(Debug, Clone, Copy)]
pub struct LsReport {
    pub data: ScatteringData,
    pub t_from_left: C64,
    pub t_from_right: C64,
}

/// `∫ e^{s·iky} v(y) ψ̂(y) dy` over the sampled support (Simpson per slice) plus delta terms.
fn ls_integral(p: &Potential, w: &WaveSolution, sign: f64) -> C64 {
    let k = w.k;
    let mut acc = C64::new(0.0, 0.0);
    for &(i0, i1) in &w.smooth_ranges {
        let (lo, hi) = (w.x[i0], w.x[i1]);
        let eps = 1e-13 * (hi - lo).max(1.0);
        let f = |i: usize| {
            let xx = w.x[i].clamp(lo + eps, hi - eps);
            C64::from_polar(1.0, sign * k * w.x[i]) * p.evaluate(xx) * w.psi[i]
        };
        let mut i = i0;
        while i + 2 <= i1 {
            let h = w.x[i + 2] - w.x[i];
            acc += h / 6.0 * (f(i) + 4.0 * f(i + 1) + f(i + 2));
            i += 2;
        }
    }
    for &(z, pos, psi) in &w.delta_samples {
        acc += z * C64::from_polar(1.0, sign * k * pos) * psi;
    }
    acc
}

fn ls_from_solutions(p: &Potential, k: f64, wl: &WaveSolution, wr: &WaveSolution) -> LsReport {
    let f = 1.0 / (2.0 * I * k);
    let r_left = f * ls_integral(p, wl, 1.0);
    let t_left = 1.0 + f * ls_integral(p, wl, -1.0);
    let r_right = f * ls_integral(p, wr, -1.0);
    let t_right = 1.0 + f * ls_integral(p, wr, 1.0);
    LsReport { data: ScatteringData::new(r_left, r_right, t_left, k), t_from_left: t_left, t_from_right: t_right }
}

/// Amplitudes from the integral formulas
/// `R^{l/r} = (1/2ik) ∫ e^{±iky} v ψ̂^{l/r} dy`, `T = 1 + (1/2ik) ∫ e^{∓iky} v ψ̂^{l/r} dy`.
pub fn ls_amplitudes(p: &Potential, k: f64, tol: f64) -> Result<ScatteringData> {
    Ok(ls_amplitudes_report(p, k, tol)?.data)
}

pub fn ls_amplitudes_report(p: &Potential, k: f64, tol: f64) -> Result<LsReport> {
    check_k(k)?;
    if p.is_zero() {
        let one = C64::from(1.0);
        return Ok(LsReport { data: ScatteringData::new(0.0.into(), 0.0.into(), one, k), t_from_left: one, t_from_right: one });
    }
    let (a, b) = p.support();
    let mut total = initial_slices(k, b - a);
    let mut prev = ls_from_solutions(p, k, &wave_pass(p, k, Side::Left, total), &wave_pass(p, k, Side::Right, total));
    let mut change = if p.has_smooth_part() { f64::INFINITY } else { 0.0 };
    while change >= tol && total * 2 <= MAX_SLICES {
        total *= 2;
        let cur = ls_from_solutions(p, k, &wave_pass(p, k, Side::Left, total), &wave_pass(p, k, Side::Right, total));
        change = cur.data.distance(&prev.data).max((cur.t_from_right - prev.t_from_right).norm());
        prev = cur;
    }
    if change >= tol {
        return Err(ScatterError::ToleranceNotReached { tol, change, slices: total });
    }
    let gap = (prev.t_from_left - prev.t_from_right).norm();
    if gap > 10.0 * tol {
        return Err(ScatterError::InconsistentTransmission(gap));
    }
    Ok(prev)
}

/// One checkpoint on the curve `z = e^{−2ikx}`.
#[derive(Debug, Clone, Copy)]
pub struct SCurveState {
    pub x: f64,
    pub z: C64,
    pub s: C64,
    pub ds: C64,
    /// Accumulated `R^l` contribution up to `x`.
    pub r_left_partial: C64,
    /// Index of the loop of the curve (`⌊k(x − a₋)/π⌋`).
    pub winding: u32,
}

/// Trace of an S-curve solve: the initial state and one state per segment end.
#[derive(Debug, Clone)]
pub struct SCurveTrace {
    pub states: Vec<SCurveState>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

/// Amplitudes from `z²S'' + (𝓥_k(z)/4k²) S = 0` along `z = e^{−2ikx}`,
/// `S(z₋) = z₋`, `S'(z₋) = 1`, integrated in the `x` chart:
/// `T = 1/S'(z₊)`, `R^r = S(z₊)/S'(z₊) − z₊`, `R^l = −∫ S''/(S S'²) dz`.
///
/// The `R^l` integrand is accumulated with the same adaptive stepper as `S`;
/// in the `x` chart it reads `−(i/2k) v(x)/(z S'²)`. The curve is split into
/// loops of length `π/k`, each restarted from the end state of the previous one.
pub fn s_curve_solve(p: &Potential, k: f64, tol: f64) -> Result<(ScatteringData, SCurveTrace)> {
    check_k(k)?;
    if !p.delta_terms().is_empty() {
        return Err(ScatterError::DeltaTermsUnsupported("the S-curve method"));
    }
    let (a, b) = p.support();
    let za = C64::from_polar(1.0, -2.0 * k * a);
    let mut y = [za, C64::from(1.0), C64::from(0.0)];
    let mut trace = SCurveTrace {
        states: vec![SCurveState { x: a, z: za, s: y[0], ds: y[1], r_left_partial: y[2], winding: 0 }],
        steps_accepted: 0,
        steps_rejected: 0,
    };
    if p.is_zero() || !p.has_smooth_part() {
        return Ok((ScatteringData::new(0.0.into(), 0.0.into(), 1.0.into(), k), trace));
    }
    let loop_len = PI / k;
    let mut cuts: Vec<f64> = p.breakpoints().into_iter().filter(|&t| t > a && t < b).collect();
    let loops = ((b - a) / loop_len).floor() as usize;
    cuts.extend((1..=loops).map(|j| a + j as f64 * loop_len).filter(|&t| t < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let rtol = (tol * 1e-3).max(1e-13);
    let rhs = |x: f64, y: &[C64; 3]| -> [C64; 3] {
        let z = C64::from_polar(1.0, -2.0 * k * x);
        let v = p.evaluate(x);
        [-2.0 * I * k * z * y[1], I * v * y[0] / (2.0 * k * z), -I * v / (2.0 * k * z * y[1] * y[1])]
    };
    let mut x0 = a;
    for &x1 in &cuts {
        if x1 <= x0 {
            continue;
        }
        let eps = 1e-13 * (x1 - x0).max(1.0);
        let seg_rhs = |x: f64, y: &[C64; 3]| rhs(x.clamp(x0 + eps, x1 - eps), y);
        let pole_thr = 1e-8;
        dopri5(&seg_rhs, x0, x1, &mut y, rtol, &mut trace, |x, y| {
            if y[1].norm() < pole_thr {
                Err(ScatterError::SCurveDerivativeZero { x, value: y[1].norm() })
            } else {
                Ok(())
            }
        })?;
        let z = C64::from_polar(1.0, -2.0 * k * x1);
        let winding = ((x1 - a) / loop_len * (1.0 - 1e-12)).floor() as u32;
        trace.states.push(SCurveState { x: x1, z, s: y[0], ds: y[1], r_left_partial: y[2], winding });
        x0 = x1;
    }
    let zb = C64::from_polar(1.0, -2.0 * k * b);
    let t = 1.0 / y[1];
    let data = ScatteringData::new(y[2], y[0] / y[1] - zb, t, k);
    Ok((data, trace))
}

/// Dormand–Prince 5(4) with embedded error control on a complex state.
fn dopri5<const N: usize>(
    f: &impl Fn(f64, &[C64; N]) -> [C64; N],
    x0: f64,
    x1: f64,
    y: &mut [C64; N],
    tol: f64,
    trace: &mut SCurveTrace,
    check: impl Fn(f64, &[C64; N]) -> Result<()>,
) -> Result<()> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];
    let span = x1 - x0;
    let mut h = (span / 16.0).min(0.05 * span.max(1e-300) + 0.1);
    let mut x = x0;
    let hmin = span * 1e-14;
    while x < x1 {
        if x + h > x1 {
            h = x1 - x;
        }
        let mut ks = [[C64::new(0.0, 0.0); N]; 7];
        ks[0] = f(x, y);
        for s in 1..7 {
            let mut ys = *y;
            for (i, yi) in ys.iter_mut().enumerate() {
                for j in 0..s {
                    *yi += h * A[s][j] * ks[j][i];
                }
            }
            ks[s] = f(x + C[s] * h, &ys);
        }
        let mut y5 = *y;
        for (i, yi) in y5.iter_mut().enumerate() {
            for j in 0..6 {
                *yi += h * A[6][j] * ks[j][i];
            }
        }
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut e = C64::new(0.0, 0.0);
            for j in 0..7 {
                e += h * E[j] * ks[j][i];
            }
            let sc = tol * (1.0 + y[i].norm().max(y5[i].norm()));
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(ScatterError::IntegrationFailure("non-finite S-curve state".into()));
        }
        if err <= 1.0 {
            x += h;
            *y = y5;
            trace.steps_accepted += 1;
            check(x, y)?;
        } else {
            trace.steps_rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < hmin && x < x1 {
            return Err(ScatterError::IntegrationFailure(format!("step size underflow at x = {x}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_solvers::{barrier_matrix, delta_matrix};
    use crate::transfer_core::amplitudes_from_matrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn interaction_generator_is_traceless() {
        let p = Potential::barrier(c(1.0, 2.0), 0.0, 1.0).unwrap();
        let h = EffectiveHamiltonian { potential: &p, k: 1.3 };
        assert!(h.at(0.4).trace().norm() < 1e-15);
        assert_eq!(h.at(3.0), Mat2::zero());
    }

    #[test]
    fn zero_potential_identity() {
        let m = transfer_matrix_dynamical(&Potential::zero(), 1.0, 1e-8).unwrap();
        assert_eq!(*m.matrix(), Mat2::identity());
    }

    #[test]
    fn dynamical_delta_exact() {
        let (z, a, k) = (c(1.0, 1.0), 0.5, 2.0);
        let m = transfer_matrix_dynamical(&Potential::delta(z, a).unwrap(), k, 1e-8).unwrap();
        assert!(m.distance(&delta_matrix(z, a, k).unwrap()) < 1e-14);
    }

    #[test]
    fn dynamical_barrier_matches_closed_form() {
        let (z, k) = (c(1.0, 0.5), 1.3);
        let p = Potential::barrier(z, 0.0, 2.0).unwrap();
        let m = transfer_matrix_dynamical(&p, k, 1e-10).unwrap();
        assert!(m.distance(&barrier_matrix(z, 0.0, 2.0, k).unwrap()) < 1e-8);
    }

    #[test]
    fn scattering_solution_delta() {
        let p = Potential::delta(c(2.0, 0.0), 0.0).unwrap();
        for side in [Side::Left, Side::Right] {
            let w = scattering_solution(&p, 1.0, side, 1e-10).unwrap();
            assert!((w.reflection - c(-0.5, -0.5)).norm() < 1e-14, "{side:?} {}", w.reflection);
            assert!((w.transmission - c(0.5, -0.5)).norm() < 1e-14);
        }
    }

    #[test]
    fn scattering_solution_free() {
        let p = Potential::barrier(c(0.0, 0.0), 0.0, 1.0).unwrap();
        let w = scattering_solution(&p, 1.5, Side::Left, 1e-10).unwrap();
        assert!(w.reflection.norm() < 1e-14 && (w.transmission - 1.0).norm() < 1e-14);
        for (x, psi) in w.x.iter().zip(&w.psi) {
            assert!((psi - C64::from_polar(1.0, 1.5 * x)).norm() < 1e-13);
        }
    }

    #[test]
    fn ls_barrier_and_comb() {
        let (z, k) = (c(0.7, -0.4), 1.1);
        let p = Potential::barrier(z, -0.5, 1.0).unwrap();
        let exact = amplitudes_from_matrix(&barrier_matrix(z, -0.5, 1.0, k).unwrap()).unwrap();
        let ls = ls_amplitudes(&p, k, 1e-9).unwrap();
        assert!(ls.distance(&exact) < 1e-8, "{ls:?} vs {exact:?}");
        let comb = Potential::delta_comb(vec![(c(1.0, 0.3), -0.2), (c(-0.5, 0.8), 0.9)]).unwrap();
        let ex = amplitudes_from_matrix(&crate::exact_solvers::exact_transfer_matrix(&comb, k).unwrap()).unwrap();
        assert!(ls_amplitudes(&comb, k, 1e-10).unwrap().distance(&ex) < 1e-13);
        let zero = ls_amplitudes(&Potential::zero(), k, 1e-10).unwrap();
        assert_eq!((zero.r_left, zero.t), (c(0.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn s_curve_zero_and_barrier() {
        let (d, _) = s_curve_solve(&Potential::zero(), 1.0, 1e-8).unwrap();
        assert_eq!((d.r_left, d.r_right, d.t), (c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
        let (z, k) = (c(0.6, 0.3), 1.2);
        let p = Potential::barrier(z, 0.2, 1.9).unwrap();
        let exact = amplitudes_from_matrix(&barrier_matrix(z, 0.2, 1.9, k).unwrap()).unwrap();
        let (s, trace) = s_curve_solve(&p, k, 1e-9).unwrap();
        assert!(s.distance(&exact) < 1e-8, "{s:?} vs {exact:?}");
        assert!(trace.states.len() >= 2);
        assert!(s_curve_solve(&Potential::delta(c(1.0, 0.0), 0.0).unwrap(), k, 1e-8).is_err());
    }

    #[test]
    fn s_curve_smis_residue() {
        let (k0, alpha, n) = (1.0, 0.1, 1);
        let p = Potential::smis(k0, alpha, n, 0.0, false).unwrap();
        let (d, _) = s_curve_solve(&p, k0, 1e-9).unwrap();
        let want = -8.0 * PI * I * n as f64 * alpha / (alpha + 1.0).powi(3);
        assert!((d.r_left - want).norm() < 1e-7, "{}", d.r_left);
        assert!(d.r_right.norm() < 1e-8);
        assert!((d.t - 1.0).norm() < 1e-8);
    }

    #[test]
    fn evolution_composes() {
        let p = Potential::exp_grating(c(0.3, 0.1), 2, 2.0, 0.0).unwrap();
        let k = 1.7;
        let u1 = evolution_operator(&p, k, 0.0, 0.8, 1e-11).unwrap();
        let u2 = evolution_operator(&p, k, 0.8, 2.0, 1e-11).unwrap();
        let u = evolution_operator(&p, k, 0.0, 2.0, 1e-11).unwrap();
        assert!(((u2 * u1) - u).max_norm() < 1e-9);
    }
}
