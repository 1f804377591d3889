//! Tunable unidirectionally invisible blocks and the single-mode inverse
//! scattering composer built from them.
//!
//! A right-invisible block is a translated [`SmisProfile`]; at `k₀` its
//! transfer matrix is `[[1, 0], [−R^l, 1]]`. Its complex conjugate is
//! left-invisible with matrix `[[1, R^r], [0, 1]]`. Any unimodular target
//! `M(k₀)` factors into at most four such triangular matrices, and stacking
//! the corresponding blocks left to right realizes it.

use crate::linalg::Mat2;
use crate::numeric_engines::transfer_matrix_dynamical;
use crate::potentials::{Potential, SmisProfile};
use crate::spectral_scan::{csv_err, fmt_f64};
use crate::transfer_core::{
    amplitudes_from_matrix, matrix_from_amplitudes, time_reverse_matrix, ScatteringData, TransferMatrix,
};
use crate::{check_k, Result, ScatterError, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Default forward-verification tolerance.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-6;
/// Largest `α` accepted by the default winding policy.
pub const DEFAULT_ALPHA_CAP: f64 = 1e-2;

/// Target amplitudes at a single wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub k0: f64,
    #[serde(rename = "R_l")]
    pub r_left: C64,
    #[serde(rename = "R_r")]
    pub r_right: C64,
    #[serde(rename = "T")]
    pub t: C64,
}

impl DesignSpec {
    pub fn new(k0: f64, r_left: C64, r_right: C64, t: C64) -> Result<Self> {
        check_k(k0)?;
        if t.norm() == 0.0 || !t.is_finite() {
            return Err(ScatterError::ZeroTransmission);
        }
        if !r_left.is_finite() || !r_right.is_finite() {
            return Err(ScatterError::InvalidInput("target amplitudes must be finite".into()));
        }
        Ok(DesignSpec { k0, r_left, r_right, t })
    }

    pub fn amplitudes(&self) -> ScatteringData {
        ScatteringData::new(self.r_left, self.r_right, self.t, self.k0)
    }

    /// `M(k₀)` realizing the targets.
    pub fn target_matrix(&self) -> Result<TransferMatrix> {
        matrix_from_amplitudes(&self.amplitudes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `R^r = 0`, `T = 1`, `R^l ≠ 0`.
    RightInvisible,
    /// `R^l = 0`, `T = 1`, `R^r ≠ 0`.
    LeftInvisible,
}

/// Forward-solve residuals of one block at `k₀`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockResiduals {
    /// `|suppressed reflection|`.
    pub suppressed: f64,
    /// `|T − 1|`.
    pub transmission: f64,
    /// `|realized − target reflection|`.
    pub reflection: f64,
}

/// One unidirectionally invisible block.
#[derive(Debug, Clone, Serialize)]
pub struct InvisibleBlock {
    pub orientation: Orientation,
    /// The nonzero reflection amplitude the block realizes at `k₀`.
    pub reflection: C64,
    pub k0: f64,
    pub alpha: f64,
    pub winding: u32,
    /// Left end of the support.
    pub shift: f64,
    /// Translation index: `shift = (φ₀ + π/2 + 2πm)/(2k₀)`.
    pub m: i64,
    pub support: (f64, f64),
    pub residuals: BlockResiduals,
    #[serde(skip)]
    pub profile: SmisProfile,
}

impl InvisibleBlock {
    pub fn potential(&self) -> Potential {
        Potential::Smis(self.profile.clone())
    }

    /// Ideal transfer matrix at `k₀`.
    pub fn ideal_matrix(&self) -> Mat2 {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        match self.orientation {
            Orientation::RightInvisible => Mat2::new(one, zero, -self.reflection, one),
            Orientation::LeftInvisible => Mat2::new(one, self.reflection, zero, one),
        }
    }
}

/// `|R^l(k₀)| = 8πnα/(α+1)³` as a function of `α` for winding `n`.
pub fn smis_reflection_magnitude(alpha: f64, n: u32) -> f64 {
    8.0 * PI * n as f64 * alpha / (alpha + 1.0).powi(3)
}

/// Largest reachable `|R^l(k₀)|` for winding `n`, attained at `α = 1/2`.
pub fn smis_max_magnitude(n: u32) -> f64 {
    32.0 * PI * n as f64 / 27.0
}

/// Small root `α ∈ (0, 1/2]` of `8πnα/(α+1)³ = magnitude`.
pub fn solve_alpha(magnitude: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(ScatterError::InvalidInput("winding number must be ≥ 1".into()));
    }
    let max = smis_max_magnitude(n);
    if !(magnitude > 0.0) || magnitude > max {
        return Err(ScatterError::UnreachableReflection { magnitude, n, max });
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if smis_reflection_magnitude(mid, n) < magnitude {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest winding whose small root satisfies `α ≤ alpha_cap`.
pub fn default_winding(magnitude: f64, alpha_cap: f64) -> Result<u32> {
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(ScatterError::InvalidInput("reflection magnitude must be positive".into()));
    }
    // α ≤ cap ⇔ magnitude ≤ 8πn·cap/(cap+1)³, since the map is increasing on (0, 1/2].
    let per_n = smis_reflection_magnitude(alpha_cap.min(0.5), 1);
    let n = (magnitude / per_n).ceil().max(1.0);
    if n > u32::MAX as f64 {
        return Err(ScatterError::InvalidInput("reflection magnitude too large".into()));
    }
    let mut n = n as u32;
    while solve_alpha(magnitude, n)? > alpha_cap {
        n += 1;
    }
    Ok(n)
}

/// Translation placing the phase of `R^l(k₀)` at `phase`.
pub fn phase_shift(k0: f64, phase: f64, m: i64) -> f64 {
    (phase + 0.5 * PI + 2.0 * PI * m as f64) / (2.0 * k0)
}

/// Options shared by block builders.
#[derive(Debug, Clone, Copy)]
pub struct BlockOptions {
    /// Winding override; `None` applies the default policy.
    pub winding: Option<u32>,
    pub alpha_cap: f64,
    pub verify_tol: f64,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions { winding: None, alpha_cap: DEFAULT_ALPHA_CAP, verify_tol: DEFAULT_VERIFY_TOL }
    }
}

fn engine_tol(verify_tol: f64) -> f64 {
    (verify_tol * 1e-2).max(1e-11)
}

/// Exact right-invisible block with `R^l(k₀) = target`.
pub fn build_right_invisible(k0: f64, target: C64, m: i64, opts: BlockOptions) -> Result<InvisibleBlock> {
    build_block(k0, target, m, opts, Orientation::RightInvisible)
}

/// Exact left-invisible block with `R^r(k₀) = target`: the complex conjugate of
/// the right-invisible block for `R^l = −target*`.
pub fn build_left_invisible(k0: f64, target: C64, m: i64, opts: BlockOptions) -> Result<InvisibleBlock> {
    build_block(k0, target, m, opts, Orientation::LeftInvisible)
}

fn build_block(k0: f64, target: C64, m: i64, opts: BlockOptions, orientation: Orientation) -> Result<InvisibleBlock> {
    check_k(k0)?;
    if target.norm() == 0.0 || !target.is_finite() {
        return Err(ScatterError::InvalidInput("block reflection target must be nonzero and finite".into()));
    }
    let parent = match orientation {
        Orientation::RightInvisible => target,
        Orientation::LeftInvisible => -target.conj(),
    };
    let n = match opts.winding {
        Some(n) => n,
        None => default_winding(parent.norm(), opts.alpha_cap)?,
    };
    let alpha = solve_alpha(parent.norm(), n)?;
    let shift = phase_shift(k0, parent.arg(), m);
    let profile = SmisProfile::new(k0, alpha, n, shift, orientation == Orientation::LeftInvisible)?;
    let support = (shift, shift + profile.length());
    let mut block = InvisibleBlock {
        orientation,
        reflection: target,
        k0,
        alpha,
        winding: n,
        shift,
        m,
        support,
        residuals: BlockResiduals { suppressed: f64::NAN, transmission: f64::NAN, reflection: f64::NAN },
        profile,
    };
    let got = amplitudes_from_matrix(&transfer_matrix_dynamical(&block.potential(), k0, engine_tol(opts.verify_tol))?)?;
    let (suppressed, realized) = match orientation {
        Orientation::RightInvisible => (got.r_right, got.r_left),
        Orientation::LeftInvisible => (got.r_left, got.r_right),
    };
    block.residuals = BlockResiduals {
        suppressed: suppressed.norm(),
        transmission: (got.t - 1.0).norm(),
        reflection: (realized - target).norm(),
    };
    let r = block.residuals;
    if r.suppressed > opts.verify_tol || r.transmission > opts.verify_tol || r.reflection > opts.verify_tol.max(1e-4 * target.norm()) {
        return Err(ScatterError::VerificationFailure(format!(
            "{orientation:?} block: |suppressed R| = {:e}, |T − 1| = {:e}, |R − target| = {:e}",
            r.suppressed, r.transmission, r.reflection
        )));
    }
    Ok(block)
}

/// Lower-triangular unit factor `[[1, 0], [q, 1]]`.
fn lower(q: C64) -> Mat2 {
    Mat2::new(1.0.into(), 0.0.into(), q, 1.0.into())
}

/// Upper-triangular unit factor `[[1, p], [0, 1]]`.
fn upper(p: C64) -> Mat2 {
    Mat2::new(1.0.into(), p, 0.0.into(), 1.0.into())
}

/// Factorization of `M(k₀)` into unit triangular matrices, spatial order (left-most first).
#[derive(Debug, Clone, Serialize)]
pub struct Factorization {
    /// 1: `R^r ≠ 0`; 2: `R^r = 0 ≠ R^l` (designed through the time-reversed spec); 3: `R^l = R^r = 0`.
    pub case: u8,
    pub rho: Option<C64>,
    /// Factors `𝔐₁, 𝔐₂, …` whose product `… 𝔐₂ 𝔐₁` is the target (the time-reversed target in case 2).
    pub factors: Vec<Mat2>,
}

/// `𝔐₁ = [[1,0],[ρT₀−R^l₀,1]]`, `𝔐₂ = [[1,R^r₀/T₀],[0,1]]`, `𝔐₃ = [[1,0],[−ρ,1]]` at `ρ = (T₀−1)/R^r₀`.
pub fn three_factors(d: &ScatteringData) -> Result<(C64, [Mat2; 3])> {
    if d.r_right.norm() == 0.0 {
        return Err(ScatterError::SingularDenominator("ρ = (T₀ − 1)/R^r₀"));
    }
    let rho = (d.t - 1.0) / d.r_right;
    Ok((rho, [lower(rho * d.t - d.r_left), upper(d.r_right / d.t), lower(-rho)]))
}

/// The four factors with `ρ = 1/T₀` for `R^l₀ = R^r₀ = 0`; their product is `diag(T₀, 1/T₀)`.
pub fn four_factors(t0: C64) -> Result<(C64, [Mat2; 4])> {
    if t0.norm() == 0.0 {
        return Err(ScatterError::ZeroTransmission);
    }
    let rho = t0.inv();
    Ok((rho, [lower(rho * t0), upper((t0 - 1.0) / (rho * t0)), lower(-rho), upper((1.0 - t0) / rho)]))
}

/// Case analysis and factor matrices for a spec.
pub fn factorize(spec: &DesignSpec) -> Result<Factorization> {
    let d = spec.amplitudes();
    if d.r_right.norm() != 0.0 {
        let (rho, f) = three_factors(&d)?;
        Ok(Factorization { case: 1, rho: Some(rho), factors: f.to_vec() })
    } else if d.r_left.norm() != 0.0 {
        let rev = amplitudes_from_matrix(&time_reverse_matrix(&spec.target_matrix()?))?;
        let (rho, f) = three_factors(&rev)?;
        Ok(Factorization { case: 2, rho: Some(rho), factors: f.to_vec() })
    } else if d.t == C64::new(1.0, 0.0) {
        // M(k₀) = I: every factor is the identity.
        Ok(Factorization { case: 3, rho: None, factors: Vec::new() })
    } else {
        let (rho, f) = four_factors(d.t)?;
        Ok(Factorization { case: 3, rho: Some(rho), factors: f.to_vec() })
    }
}

/// Placement of blocks along the line.
#[derive(Debug, Clone, PartialEq)]
pub enum GapPolicy {
    /// Each block at the smallest admissible translation index leaving a gap
    /// strictly larger than `min_gap` after the previous block. The first
    /// block starts at the smallest admissible shift `≥ 0`.
    Compact { min_gap: f64 },
    /// Explicit translation indices, one per emitted block.
    Anchored(Vec<i64>),
}

impl Default for GapPolicy {
    fn default() -> Self {
        GapPolicy::Compact { min_gap: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DesignOptions {
    pub block: BlockOptions,
}

/// A verified single-mode design.
#[derive(Debug, Clone, Serialize)]
pub struct SingleModeDesign {
    pub spec: DesignSpec,
    pub factorization: Factorization,
    pub blocks: Vec<InvisibleBlock>,
    #[serde(skip)]
    pub potential: Potential,
    /// Transfer matrix of the composed potential at `k₀` (dynamical engine).
    pub achieved: TransferMatrix,
    pub achieved_amplitudes: Option<ScatteringData>,
    /// `‖M_achieved − M_target‖_max`.
    pub matrix_residual: f64,
    /// Max-norm distance of each block's matrix from its factor.
    pub block_residuals: Vec<f64>,
    pub verify_tol: f64,
}

/// Compose invisible blocks realizing `spec` at `k₀` and forward-verify the result.
pub fn solve_single_mode(spec: &DesignSpec, placement: &GapPolicy, opts: DesignOptions) -> Result<SingleModeDesign> {
    let spec = DesignSpec::new(spec.k0, spec.r_left, spec.r_right, spec.t)?;
    let target = spec.target_matrix()?;
    let fac = factorize(&spec)?;
    let k0 = spec.k0;
    let ell = PI / k0;
    // Non-identity factors in spatial order with their block kind and reflection.
    let wanted: Vec<(usize, Orientation, C64)> = fac
        .factors
        .iter()
        .enumerate()
        .filter_map(|(i, f)| {
            let (p, q) = (f.get(0, 1), f.get(1, 0));
            if q.norm() != 0.0 {
                Some((i, Orientation::RightInvisible, -q))
            } else if p.norm() != 0.0 {
                Some((i, Orientation::LeftInvisible, p))
            } else {
                None
            }
        })
        .collect();
    if let GapPolicy::Anchored(ms) = placement {
        if ms.len() != wanted.len() {
            return Err(ScatterError::PlacementConflict(format!(
                "{} anchors given for {} blocks",
                ms.len(),
                wanted.len()
            )));
        }
    }
    let mut blocks: Vec<InvisibleBlock> = Vec::with_capacity(wanted.len());
    let mut prev_end: Option<f64> = None;
    for (j, &(_, orient, refl)) in wanted.iter().enumerate() {
        // In case 2 the blocks are conjugated at the end, flipping orientation.
        let (orient, refl) = if fac.case == 2 { (flip(orient), flipped_target(orient, refl)) } else { (orient, refl) };
        let parent = match orient {
            Orientation::RightInvisible => refl,
            Orientation::LeftInvisible => -refl.conj(),
        };
        let base = phase_shift(k0, parent.arg(), 0);
        let m = match placement {
            GapPolicy::Anchored(ms) => ms[j],
            GapPolicy::Compact { min_gap } => {
                let start = prev_end.map_or(0.0, |e| e + min_gap.max(0.0));
                let mut m = ((start - base) / ell).ceil() as i64;
                let need_strict = prev_end.is_some();
                while base + m as f64 * ell < start || (need_strict && base + m as f64 * ell <= start) {
                    m += 1;
                }
                m
            }
        };
        let block = build_block(k0, refl, m, opts.block, orient)?;
        if let Some(e) = prev_end {
            if block.support.0 <= e {
                return Err(ScatterError::PlacementConflict(format!(
                    "block {j} starts at {} before the previous block ends at {e}",
                    block.support.0
                )));
            }
        }
        prev_end = Some(block.support.1);
        blocks.push(block);
    }
    let potential = if blocks.is_empty() {
        Potential::zero()
    } else {
        Potential::Sum(blocks.iter().map(|b| b.potential()).collect())
    };
    let tol = engine_tol(opts.block.verify_tol);
    let achieved = transfer_matrix_dynamical(&potential, k0, tol)?;
    let matrix_residual = (*achieved.matrix() - *target.matrix()).max_norm();
    let block_residuals: Vec<f64> = blocks
        .iter()
        .zip(&wanted)
        .map(|(b, &(i, _, _))| {
            let ideal = if fac.case == 2 { fac.factors[i].conj_swap() } else { fac.factors[i] };
            (b.ideal_matrix() - ideal).max_norm()
        })
        .collect();
    let design = SingleModeDesign {
        spec,
        factorization: fac,
        blocks,
        potential,
        achieved,
        achieved_amplitudes: amplitudes_from_matrix(&achieved).ok(),
        matrix_residual,
        block_residuals,
        verify_tol: opts.block.verify_tol,
    };
    if matrix_residual > 5.0 * opts.block.verify_tol {
        return Err(ScatterError::VerificationFailure(format!(
            "composed matrix misses target by {matrix_residual:e} (blocks: {:?})",
            design.blocks.iter().map(|b| b.residuals).collect::<Vec<_>>()
        )));
    }
    Ok(design)
}

fn flip(o: Orientation) -> Orientation {
    match o {
        Orientation::RightInvisible => Orientation::LeftInvisible,
        Orientation::LeftInvisible => Orientation::RightInvisible,
    }
}

/// Reflection of the conjugated block. Time reversal maps `[[1,0],[q,1]]` to
/// `[[1,q*],[0,1]]` and `[[1,p],[0,1]]` to `[[1,0],[p*,1]]`; in both cases the
/// new reflection is minus the conjugate of the old one.
fn flipped_target(_o: Orientation, refl: C64) -> C64 {
    -refl.conj()
}

trait ConjSwap {
    fn conj_swap(&self) -> Mat2;
}

impl ConjSwap for Mat2 {
    /// Time-reversal image `[[M22*, M21*], [M12*, M11*]]`.
    fn conj_swap(&self) -> Mat2 {
        Mat2::new(self.get(1, 1).conj(), self.get(1, 0).conj(), self.get(0, 1).conj(), self.get(0, 0).conj())
    }
}

/// Forward comparison of a potential against target amplitudes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmplitudeCheck {
    pub achieved: ScatteringData,
    pub target: ScatteringData,
    pub max_residual: f64,
    pub passed: bool,
}

pub fn verify_amplitudes(p: &Potential, spec: &DesignSpec, tol: f64, verify_tol: f64) -> Result<AmplitudeCheck> {
    let m = crate::numeric_engines::transfer_matrix(p, spec.k0, crate::numeric_engines::Solver::Auto, tol)?;
    let achieved = amplitudes_from_matrix(&m)?;
    let target = spec.amplitudes();
    let max_residual = achieved.distance(&target);
    Ok(AmplitudeCheck { achieved, target, max_residual, passed: max_residual <= verify_tol })
}

/// Sampled profile as CSV (`x,re_v,im_v`) on `points` equispaced samples of `[x_min, x_max]`.
pub fn write_profile_csv<W: Write>(p: &Potential, x_min: f64, x_max: f64, points: usize, w: W) -> Result<()> {
    if points < 2 || !(x_max >= x_min) {
        return Err(ScatterError::InvalidInput("profile export needs ≥ 2 points and x_max ≥ x_min".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "re_v", "im_v"]).map_err(csv_err)?;
    let dx = (x_max - x_min) / (points - 1) as f64;
    for i in 0..points {
        let x = x_min + i as f64 * dx;
        let v = p.evaluate(x);
        out.write_record([fmt_f64(x), fmt_f64(v.re), fmt_f64(v.im)]).map_err(csv_err)?;
    }
    out.flush().map_err(|e| ScatterError::InvalidInput(e.to_string()))?;
    Ok(())
}
