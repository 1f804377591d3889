//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so every line is printed on every run.
//! Tolerances are pinned as constants next to each check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scatter1d::approx_engines::{
    born_inverse, dyson_order1, dyson_order2, exp_grating_reference, exp_grating_reference_printed, grating_zhat,
    InverseWindow, ReflectionSide,
};
use scatter1d::exact_solvers::{
    barrier_matrix, delta_matrix, exact_transfer_matrix, locally_periodic_matrix, multi_delta_matrix,
    piecewise_matrix, unimodular_power,
};
use scatter1d::inverse_design::{
    build_right_invisible, default_winding, four_factors, solve_alpha, solve_single_mode, three_factors,
    BlockOptions, DesignOptions, DesignSpec, GapPolicy, DEFAULT_ALPHA_CAP,
};
use scatter1d::numeric_engines::{
    ls_amplitudes, s_curve_solve, scattering_solution, transfer_matrix_dynamical, Side,
};
use scatter1d::potentials::{DeltaComb, PiecewiseConstant, Sampled, SmisProfile};
use scatter1d::spectral_scan::{refine_zero, Entry, ScanOptions};
use scatter1d::numeric_engines::Solver;
use scatter1d::transfer_core::{
    amplitudes_from_matrix, compose_all, matrix_from_amplitudes, translate_matrix, ScatteringData,
};
use scatter1d::{Mat2, Potential, TransferMatrix, C64, I};
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_c(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    C64::new(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

fn polar(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(r.gen_range(lo..hi), r.gen_range(-PI..PI))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn amp_rel(a: &ScatteringData, b: &ScatteringData) -> f64 {
    // Amplitude-wise relative error; exact zeros compare absolutely.
    [(a.r_left, b.r_left), (a.r_right, b.r_right), (a.t, b.t)]
        .iter()
        .map(|&(x, y)| (x - y).norm() / y.norm().max(1e-12))
        .fold(0.0, f64::max)
}

fn mat_rel(a: &Mat2, b: &Mat2) -> f64 {
    (*a - *b).max_norm() / b.max_norm()
}

// 1. Delta amplitudes from every engine.
fn criterion_01() -> Outcome {
    const TOL: f64 = 1e-8;
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = [0.0f64; 3];
    let mut count = 0;
    while count < 20 {
        let k = r.gen_range(0.2..5.0);
        let z = C64::from_polar(r.gen_range(0.0..5.0 * k), r.gen_range(-PI..PI));
        let den = 2.0 * k + I * z;
        if den.norm() < 0.1 * k {
            continue;
        }
        count += 1;
        let want = ScatteringData::new(-I * z / den, -I * z / den, 2.0 * k / den, k);
        let p = Potential::delta(z, 0.0).unwrap();
        let got = [
            amplitudes_from_matrix(&exact_transfer_matrix(&p, k).unwrap()).unwrap(),
            amplitudes_from_matrix(&transfer_matrix_dynamical(&p, k, 1e-10).unwrap()).unwrap(),
            ls_amplitudes(&p, k, 1e-10).unwrap(),
        ];
        for (w, g) in worst.iter_mut().zip(&got) {
            *w = w.max(amp_rel(g, &want));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.iter().all(|&w| w < TOL) && secs < 1.0;
    outcome(
        ok,
        format!(
            "max rel err exact {:.1e}, dynamical {:.1e}, ls {:.1e} (tol {TOL:.0e}); {secs:.3} s (limit 1 s)",
            worst[0], worst[1], worst[2]
        ),
    )
}

// 2. Unit determinant.
fn criterion_02() -> Outcome {
    const EXACT_TOL: f64 = 1e-10;
    const DYN_TOL: f64 = 1e-7;
    let mut r = rng(2);
    let mut exact_worst = 0.0f64;
    let mut dyn_worst = 0.0f64;
    let mut corpus: Vec<Potential> = Vec::new();
    for _ in 0..5 {
        let k = r.gen_range(0.3..4.0);
        let z = rand_c(&mut r, 3.0);
        let a = r.gen_range(-2.0..2.0);
        exact_worst = exact_worst.max(delta_matrix(z, a, k).unwrap().det_residual());
        let (lo, w) = (r.gen_range(-1.0..1.0), r.gen_range(0.1..3.0));
        let h = rand_c(&mut r, 4.0);
        exact_worst = exact_worst.max(barrier_matrix(h, lo, lo + w, k).unwrap().det_residual());
        let bi = PiecewiseConstant::new(vec![lo, lo + w, lo + 2.0 * w], vec![h, rand_c(&mut r, 4.0)]).unwrap();
        exact_worst = exact_worst.max(piecewise_matrix(&bi, k).unwrap().det_residual());
        let comb = DeltaComb::new((0..4).map(|j| (rand_c(&mut r, 1.0), j as f64 * 0.7)).collect()).unwrap();
        exact_worst = exact_worst.max(multi_delta_matrix(&comb, k).unwrap().det_residual());
        let cell = barrier_matrix(h, 0.0, 0.4, k).unwrap();
        exact_worst = exact_worst.max(locally_periodic_matrix(&cell, 0.5, 17).unwrap().det_residual());
        corpus.push(Potential::barrier(h, lo, lo + w).unwrap());
        corpus.push(Potential::Piecewise(bi));
        corpus.push(Potential::delta_comb(comb.terms().to_vec()).unwrap());
    }
    corpus.push(Potential::exp_grating(C64::new(0.3, 0.1), 2, 3.0, 0.0).unwrap());
    corpus.push(Potential::exp_grating(C64::new(0.05, 0.0), 1, 2.0 * PI, -1.0).unwrap());
    corpus.push(Potential::smis(1.0, 0.1, 1, 0.0, false).unwrap());
    corpus.push(Potential::smis(2.0, 0.01, 5, 0.3, true).unwrap());
    for (i, p) in corpus.iter().enumerate() {
        let k = 0.5 + 0.15 * i as f64;
        dyn_worst = dyn_worst.max(transfer_matrix_dynamical(p, k, 1e-8).unwrap().det_residual());
    }
    outcome(
        exact_worst < EXACT_TOL && dyn_worst < DYN_TOL,
        format!(
            "max |det M − 1| exact {exact_worst:.1e} (tol {EXACT_TOL:.0e}), dynamical {dyn_worst:.1e} (tol {DYN_TOL:.0e}) over {} potentials",
            corpus.len()
        ),
    )
}

// 3. Composition of random slicings.
fn criterion_03() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = r.gen_range(0.3..4.0);
        let h = rand_c(&mut r, 5.0);
        let (a, b) = (r.gen_range(-2.0..0.0), r.gen_range(0.1..3.0));
        let whole = barrier_matrix(h, a, b, k).unwrap();
        let slices = r.gen_range(2..=64);
        let mut cuts: Vec<f64> = (0..slices - 1).map(|_| r.gen_range(a..b)).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        let pieces: Vec<TransferMatrix> = cuts.windows(2).map(|w| barrier_matrix(h, w[0], w[1], k).unwrap()).collect();
        let composed = compose_all(&pieces, k).unwrap();
        worst = worst.max(composed.distance(&whole));
    }
    outcome(worst < TOL, format!("max-norm split vs whole {worst:.1e} over 20 barriers, 2–64 slices (tol {TOL:.0e})"))
}

// 4. Locally periodic closed form.
fn criterion_04() -> Outcome {
    const TOL: f64 = 1e-8;
    const TIME_LIMIT: f64 = 0.010;
    let k = 1.3;
    let ell = 0.9;
    let cells = [
        ("delta", delta_matrix(C64::new(0.7, 0.4), 0.2, k).unwrap()),
        ("barrier", barrier_matrix(C64::new(1.1, -0.3), 0.0, 0.6, k).unwrap()),
    ];
    let mut worst = 0.0f64;
    let mut t1000 = 0.0f64;
    for (_, cell) in &cells {
        for n in [1u64, 2, 10, 1000] {
            let start = Instant::now();
            let closed = locally_periodic_matrix(cell, ell, n).unwrap();
            let dt = start.elapsed().as_secs_f64();
            if n == 1000 {
                t1000 = t1000.max(dt);
            }
            let copies: Vec<TransferMatrix> = (0..n).map(|j| translate_matrix(cell, j as f64 * ell)).collect();
            let brute = compose_all(&copies, k).unwrap();
            worst = worst.max(mat_rel(closed.matrix(), brute.matrix()));
        }
    }
    outcome(
        worst < TOL && t1000 < TIME_LIMIT,
        format!("max rel diff vs n-fold product {worst:.1e} (tol {TOL:.0e}); n=1000 closed form {:.3} ms (limit 10 ms)", t1000 * 1e3),
    )
}

// 5. Powers of unimodular matrices, including the Jordan branch.
fn criterion_05() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut worst_jordan = 0.0f64;
    for case in 0..100 {
        let l = if case < 10 {
            let s = if case % 2 == 0 { 1.0 } else { -1.0 };
            let j = Mat2::new(C64::from(s), rand_c(&mut r, 2.0), C64::from(0.0), C64::from(s));
            let (pa, pb, pc) = (polar(&mut r, 0.5, 2.0), rand_c(&mut r, 1.0), rand_c(&mut r, 1.0));
            let p = Mat2::new(pa, pb, pc, (1.0 + pb * pc) / pa);
            p * j * p.inverse()
        } else {
            let (a, b, c) = (polar(&mut r, 0.3, 1.5), rand_c(&mut r, 1.0), rand_c(&mut r, 1.0));
            Mat2::new(a, b, c, (1.0 + b * c) / a)
        };
        let n = r.gen_range(1..=50u64);
        let closed = unimodular_power(&l, n).unwrap();
        let mut brute = Mat2::identity();
        for _ in 0..n {
            brute = l * brute;
        }
        let e = mat_rel(&closed, &brute);
        if case < 10 {
            worst_jordan = worst_jordan.max(e);
        }
        worst = worst.max(e);
    }
    outcome(
        worst < TOL,
        format!("max rel diff {worst:.1e} over 100 matrices, Jordan cases {worst_jordan:.1e} (tol {TOL:.0e})"),
    )
}

// 6. Real-potential identities and transmission reciprocity.
fn criterion_06() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut r = rng(6);
    let (mut refl, mut unit, mut recip) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let k = r.gen_range(0.3..3.0);
        let p = if i % 2 == 0 {
            let a = r.gen_range(-1.0..1.0);
            Potential::barrier(C64::from(r.gen_range(-3.0..3.0)), a, a + r.gen_range(0.2..2.0)).unwrap()
        } else {
            Potential::delta_comb((0..3).map(|j| (C64::from(r.gen_range(-2.0..2.0)), j as f64 * 0.8)).collect()).unwrap()
        };
        let d = amplitudes_from_matrix(&exact_transfer_matrix(&p, k).unwrap()).unwrap();
        refl = refl.max((d.r_left.norm() - d.r_right.norm()).abs());
        let tt = d.t.norm_sqr();
        unit = unit.max((d.r_left.norm_sqr() + tt - 1.0).abs()).max((d.r_right.norm_sqr() + tt - 1.0).abs());
        let tl = scattering_solution(&p, k, Side::Left, 1e-11).unwrap().transmission;
        let tr = scattering_solution(&p, k, Side::Right, 1e-11).unwrap().transmission;
        recip = recip.max((tl - tr).norm());
    }
    outcome(
        refl < TOL && unit < TOL && recip < TOL,
        format!("||R^l|−|R^r|| {refl:.1e}, unitarity {unit:.1e}, |T^l−T^r| {recip:.1e} (tol {TOL:.0e})"),
    )
}

// 7. Dyson truncations exact for one and two deltas.
fn criterion_07() -> Outcome {
    const TOL1: f64 = 1e-12;
    const TOL2: f64 = 1e-10;
    let mut r = rng(7);
    let mut w1 = 0.0f64;
    for _ in 0..10 {
        let (z, a, k) = (rand_c(&mut r, 2.0), r.gen_range(-1.0..1.0), r.gen_range(0.3..3.0));
        let m1 = dyson_order1(&Potential::delta(z, a).unwrap(), k).unwrap().matrix;
        w1 = w1.max(m1.distance(&delta_matrix(z, a, k).unwrap()));
    }
    let mut w2 = 0.0f64;
    let mut done = 0;
    while done < 10 {
        let k = r.gen_range(0.3..3.0);
        let a1 = r.gen_range(-1.0..0.5);
        let p = Potential::delta_comb(vec![(rand_c(&mut r, 1.5), a1), (rand_c(&mut r, 1.5), a1 + r.gen_range(0.1..1.5))]).unwrap();
        let Ok(exact) = amplitudes_from_matrix(&exact_transfer_matrix(&p, k).unwrap()) else { continue };
        if exact.t.norm() > 1e3 {
            continue;
        }
        done += 1;
        let approx = dyson_order2(&p, k).unwrap().data;
        w2 = w2.max(approx.distance(&exact) / exact.t.norm().max(1.0));
    }
    outcome(
        w1 < TOL1 && w2 < TOL2,
        format!("M^(1) vs exact delta {w1:.1e} (tol {TOL1:.0e}); order-2 vs exact double delta {w2:.1e} (tol {TOL2:.0e})"),
    )
}

// 8. Spectral singularities of a complex delta.
fn criterion_08() -> Outcome {
    const K_TOL: f64 = 1e-9;
    const PROD_TOL: f64 = 1e-8;
    let opts = ScanOptions { solver: Solver::Exact, ..Default::default() };
    let (mut dk, mut prod, mut dk_rev) = (0.0f64, 0.0f64, 0.0f64);
    let mut all_found = true;
    for s in [0.5, 1.0, 2.0] {
        let bracket = (0.25 * s, 0.9 * s);
        match refine_zero(&Potential::delta(I * s, 0.0).unwrap(), Entry::M22, bracket, opts) {
            Ok(z) => {
                dk = dk.max((z.k - s / 2.0).abs());
                prod = prod.max(z.product_identity_residual);
            }
            Err(_) => all_found = false,
        }
        match refine_zero(&Potential::delta(-I * s, 0.0).unwrap(), Entry::M11, bracket, opts) {
            Ok(z) => dk_rev = dk_rev.max((z.k - s / 2.0).abs()),
            Err(_) => all_found = false,
        }
    }
    outcome(
        all_found && dk < K_TOL && dk_rev < K_TOL && prod < PROD_TOL,
        format!(
            "|k⋆ − s/2| {dk:.1e}, time-reversed via M11 {dk_rev:.1e} (tol {K_TOL:.0e}); |M12M21+1| {prod:.1e} (tol {PROD_TOL:.0e})"
        ),
    )
}

// 9. Perturbative invisibility of the exponential grating.
fn criterion_09() -> Outcome {
    const RR_TOL: f64 = 5e-6;
    const T_TOL: f64 = 1e-5;
    const RL_TOL: f64 = 1e-5;
    let zh = 1e-2;
    let length = 2.0 * PI;
    let (mut rr, mut t_err, mut rl_err) = (0.0f64, 0.0f64, 0.0f64);
    let (mut c_rl, mut c_rr, mut c_t) = (0.0f64, 0.0f64, 0.0f64);
    for n in [1u32, 2] {
        let z = C64::from(zh * 2.0 * PI * n as f64 / (length * length));
        let zhat = grating_zhat(z, n, length);
        let k = PI * n as f64 / length;
        let p = Potential::exp_grating(z, n, length, 0.0).unwrap();
        let got = amplitudes_from_matrix(&transfer_matrix_dynamical(&p, k, 1e-12).unwrap()).unwrap();
        // Literal checks.
        let nf = n as f64;
        rr = rr.max(got.r_right.norm());
        t_err = t_err.max((got.t - 1.0 - I * zhat * zhat * nf * nf / (4.0 * PI * nf)).norm());
        let printed = exp_grating_reference_printed(z, n, length, n).unwrap();
        rl_err = rl_err.max((got.r_left - printed.r_left).norm());
        // Orientation-consistent predictions.
        let corrected = exp_grating_reference(z, n, length, n).unwrap();
        c_rl = c_rl.max(got.r_left.norm());
        c_rr = c_rr.max((got.r_right - corrected.r_right).norm());
        c_t = c_t.max((got.t - corrected.t).norm());
    }
    let ok = rr < RR_TOL && t_err < T_TOL && rl_err < RL_TOL;
    outcome(
        ok,
        format!(
            "literal: |R^r| {rr:.1e} (tol {RR_TOL:.0e}), T vs 1+iẑ²n²/(4πn) {t_err:.1e} (tol {T_TOL:.0e}), R^l vs printed {rl_err:.1e} (tol {RL_TOL:.0e}) \
             | orientation-consistent diagnostic: |R^l| {c_rl:.1e}, R^r err {c_rr:.1e}, T err {c_t:.1e}"
        ),
    )
}

/// `−∮ f(z) dz` over the curve `z = e^{−iθ}`, `θ ∈ [0, 2πn]`, by the periodic trapezoid rule.
fn contour(n: u32, f: impl Fn(C64) -> C64) -> C64 {
    let m = 4096 * n as usize;
    let h = 2.0 * PI * n as f64 / m as f64;
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..m {
        let z = C64::from_polar(1.0, -(j as f64) * h);
        acc += f(z) * (-I * z) * h;
    }
    -acc
}

// 10. SMIS blocks.
fn criterion_10() -> Outcome {
    const SUPP_TOL: f64 = 1e-6;
    const T_TOL: f64 = 1e-6;
    const R_REL_TOL: f64 = 1e-4;
    const RES_TOL: f64 = 1e-6;
    let k0 = 1.0;
    let targets = [-2.0 * PI * I, C64::from(2.0 * PI), C64::new(1.0, 1.0) / 2f64.sqrt() * PI];
    let (mut supp, mut t1, mut rrel) = (0.0f64, 0.0f64, 0.0f64);
    let (mut printed_pair, mut corrected_pair) = (0.0f64, 0.0f64);
    let mut windings = Vec::new();
    for target in targets {
        let n = default_winding(target.norm(), DEFAULT_ALPHA_CAP).unwrap();
        windings.push(n);
        let b = build_right_invisible(k0, target, 0, BlockOptions::default()).unwrap();
        let got = amplitudes_from_matrix(&transfer_matrix_dynamical(&b.potential(), k0, 1e-10).unwrap()).unwrap();
        supp = supp.max(got.r_right.norm());
        t1 = t1.max((got.t - 1.0).norm());
        rrel = rrel.max(rel(got.r_left, target));
        // Residue formulas against the contour integrals, unshifted profile.
        let alpha = solve_alpha(target.norm(), n).unwrap();
        let s = SmisProfile::new(k0, alpha, n, 0.0, false).unwrap();
        let nf = n as f64;
        let printed_res = -8.0 * PI * I * nf * alpha / (alpha + 1.0).powi(2);
        let printed_int = contour(n, |z| {
            let (sv, ds, dds) = s.s_curve(z);
            dds / (sv * ds)
        });
        let corrected_res = -8.0 * PI * I * nf * alpha / (alpha + 1.0).powi(3);
        let corrected_int = contour(n, |z| {
            let (sv, ds, dds) = s.s_curve(z);
            dds / (sv * ds * ds)
        });
        printed_pair = printed_pair.max(rel(printed_int, printed_res));
        corrected_pair = corrected_pair.max(rel(corrected_int, corrected_res));
        // The physical reflection realizes the corrected residue (shift phase removed).
        let _ = corrected_res;
    }
    let ok = supp < SUPP_TOL && t1 < T_TOL && rrel < R_REL_TOL && printed_pair < RES_TOL && corrected_pair < RES_TOL;
    outcome(
        ok,
        format!(
            "windings {windings:?}; |R^r| {supp:.1e} (tol {SUPP_TOL:.0e}), |T−1| {t1:.1e} (tol {T_TOL:.0e}), |R^l−R0|/|R0| {rrel:.1e} (tol {R_REL_TOL:.0e}); \
             residue vs contour: (α+1)² with S''/(SS') {printed_pair:.1e}, (α+1)³ with S''/(SS'²) {corrected_pair:.1e} (tol {RES_TOL:.0e}); forward R^l follows (α+1)³"
        ),
    )
}

// 11. Single-mode inverse scattering.
fn criterion_11() -> Outcome {
    const MATRIX_TOL: f64 = 5e-6;
    const FACTOR_TOL: f64 = 1e-12;
    let mut r = rng(11);
    let mut factor_worst = 0.0f64;
    for _ in 0..200 {
        let d = ScatteringData::new(polar(&mut r, 0.1, 3.0), polar(&mut r, 0.1, 3.0), polar(&mut r, 0.2, 3.0), 1.0);
        let m = matrix_from_amplitudes(&d).unwrap();
        let (_, f) = three_factors(&d).unwrap();
        factor_worst = factor_worst.max(mat_rel(&(f[2] * f[1] * f[0]), m.matrix()));
        let t0 = polar(&mut r, 0.2, 3.0);
        let (_, g) = four_factors(t0).unwrap();
        let prod = g[3] * g[2] * g[1] * g[0];
        factor_worst = factor_worst.max(mat_rel(&prod, &Mat2::diag(t0, t0.inv())));
    }
    let mut worst = 0.0f64;
    let mut cases = [0usize; 3];
    let mut failures = Vec::new();
    for i in 0..10 {
        let k0 = r.gen_range(0.5..2.0);
        let t = polar(&mut r, 0.5, 1.5);
        let (rl, rr) = match i % 3 {
            0 => (polar(&mut r, 0.2, 1.5), polar(&mut r, 0.2, 1.5)),
            1 => (polar(&mut r, 0.2, 1.5), C64::new(0.0, 0.0)),
            _ => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
        };
        let spec = DesignSpec::new(k0, rl, rr, t).unwrap();
        match solve_single_mode(&spec, &GapPolicy::default(), DesignOptions::default()) {
            Ok(design) => {
                cases[design.factorization.case as usize - 1] += 1;
                let m = transfer_matrix_dynamical(&design.potential, k0, 1e-9).unwrap();
                worst = worst.max((*m.matrix() - *spec.target_matrix().unwrap().matrix()).max_norm());
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    outcome(
        failures.is_empty() && worst < MATRIX_TOL && factor_worst < FACTOR_TOL,
        format!(
            "cases {cases:?}; composed vs target max-norm {worst:.1e} (tol {MATRIX_TOL:.0e}); factor identities {factor_worst:.1e} (tol {FACTOR_TOL:.0e}){}",
            if failures.is_empty() { String::new() } else { format!("; failures {failures:?}") }
        ),
    )
}

// 12. S-curve method against the dynamical engine.
fn criterion_12() -> Outcome {
    const TOL: f64 = 1e-6;
    let k = 1.0;
    let gauss = |c: f64, w: f64, h: C64| {
        Potential::Sampled(Sampled::from_fn(c - 4.0 * w, c + 4.0 * w, 801, |x| h * (-(x - c).powi(2) / (2.0 * w * w)).exp()).unwrap())
    };
    let corpus = vec![
        Potential::barrier(C64::new(0.4, 0.2), 0.0, 1.0).unwrap(),
        Potential::barrier(C64::new(-0.3, 0.1), 0.5, 0.5 + 2.5 * PI).unwrap(),
        Potential::exp_grating(C64::new(0.05, 0.02), 1, PI, 0.0).unwrap(),
        Potential::exp_grating(C64::new(0.1, 0.0), 2, 3.0 * PI, 0.2).unwrap(),
        Potential::fourier_cell(2.0, vec![(1, C64::new(0.2, 0.0)), (-1, C64::new(0.1, 0.1))]).unwrap(),
        Potential::smis(1.0, 0.05, 1, 0.0, false).unwrap(),
        Potential::smis(1.0, 0.02, 3, 0.7, false).unwrap(),
        Potential::smis(1.0, 0.03, 2, 0.0, true).unwrap(),
        gauss(0.0, 0.5, C64::new(0.5, -0.2)),
        Potential::Sum(vec![
            Potential::barrier(C64::new(0.2, 0.0), 0.0, 1.0).unwrap(),
            Potential::exp_grating(C64::new(0.1, 0.1), 1, 2.0, 0.5).unwrap(),
        ]),
    ];
    let mut worst = 0.0f64;
    let mut windings = Vec::new();
    let mut errors = Vec::new();
    for p in &corpus {
        let (a, b) = p.support();
        windings.push(((b - a) * k / PI).floor() as u32);
        let reference = amplitudes_from_matrix(&transfer_matrix_dynamical(p, k, 1e-11).unwrap()).unwrap();
        match s_curve_solve(p, k, 1e-9) {
            Ok((got, _)) => worst = worst.max(got.distance(&reference)),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let (zero, _) = s_curve_solve(&Potential::zero(), k, 1e-9).unwrap();
    let zero_exact = zero.r_left == C64::new(0.0, 0.0) && zero.r_right == C64::new(0.0, 0.0) && zero.t == C64::new(1.0, 0.0);
    outcome(
        errors.is_empty() && worst < TOL && zero_exact,
        format!("windings {windings:?}; max |S-curve − dynamical| {worst:.1e} (tol {TOL:.0e}); v=0 exact: {zero_exact}{}", if errors.is_empty() { String::new() } else { format!("; errors {errors:?}") }),
    )
}

// 13. Born inverse of a narrow Gaussian.
fn criterion_13() -> Outcome {
    const REL_TOL: f64 = 0.02;
    let k_max = 1.0;
    let area = C64::new(0.3, 0.0);
    let width = 0.01 / k_max;
    let g = Sampled::from_fn(-8.0 * width, 8.0 * width, 2001, |x| {
        area * (-(x * x) / (2.0 * width * width)).exp() / (width * (2.0 * PI).sqrt())
    })
    .unwrap();
    let p = Potential::Sampled(g);
    let m = 256;
    let dk = k_max / m as f64;
    let samples: Vec<(f64, C64)> = (-(m as i64)..m as i64)
        .map(|j| {
            let k = (j as f64 + 0.5) * dk;
            (k, p.fourier_transform(2.0 * k).unwrap() / (2.0 * I * k))
        })
        .collect();
    let window = InverseWindow { x_min: -64.0 / k_max, x_max: 64.0 / k_max, points: 4096 };
    let rec = born_inverse(&samples, ReflectionSide::Right, window).unwrap();
    let integral = match &rec {
        Potential::Sampled(s) => s.integral(),
        _ => C64::new(0.0, 0.0),
    };
    let err = rel(integral, area);
    outcome(
        err < REL_TOL,
        format!("∫v {:.6}{:+.1e}i vs 𝔷 = {} : rel err {err:.2e} (tol 2%); window ±64/k_max, {} k samples", integral.re, integral.im, area.re, samples.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("delta amplitudes, all engines", criterion_01),
        ("unimodularity", criterion_02),
        ("composition of slices", criterion_03),
        ("locally periodic closed form", criterion_04),
        ("unimodular powers incl. Jordan branch", criterion_05),
        ("real-potential identities", criterion_06),
        ("Dyson exactness for deltas", criterion_07),
        ("spectral singularity location", criterion_08),
        ("perturbative invisibility of the grating", criterion_09),
        ("SMIS design", criterion_10),
        ("single-mode inverse scattering", criterion_11),
        ("S-curve method", criterion_12),
        ("Born inverse", criterion_13),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {:02} {} {name}: {} [{:.2} s]",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
