"""Smoke test for the scatter1d extension module.

Build and install first:
    pip install --no-build-isolation -e crates/scatter1d-py
then run:
    python crates/scatter1d-py/python/smoke_test.py
"""

import cmath
import math

import scatter1d as s


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    # Delta potential, strength 2 at k = 1.
    p = s.Potential.delta(2 + 0j)
    for solver in ("exact", "dynamical"):
        d = s.transfer_matrix(p, 1.0, solver=solver).amplitudes()
        close(d.r_left, -0.5 - 0.5j, 1e-12)
        close(d.t, 0.5 - 0.5j, 1e-12)
    close(s.ls_amplitudes(p, 1.0).t, 0.5 - 0.5j, 1e-10)

    # Spectral singularity: M22 vanishes for strength 2i at k = 1.
    m = s.transfer_matrix(s.Potential.delta(2j), 1.0)
    assert "spectral_singularity" in m.classify()
    try:
        m.amplitudes()
    except s.SpectralSingularityError:
        pass
    else:
        raise AssertionError("expected SpectralSingularityError")

    # Three engines agree on a complex barrier.
    b = s.Potential.barrier(0.6 + 0.2j, 0.0, 2.0)
    exact = s.transfer_matrix(b, 1.0, solver="exact").amplitudes()
    assert exact.distance(s.s_curve_solve(b, 1.0)) < 1e-8
    assert exact.distance(s.ls_amplitudes(b, 1.0)) < 1e-8
    close(s.transfer_matrix(b, 1.0).det(), 1.0, 1e-12)

    # JSON round trip.
    q = s.Potential.sum([b, s.Potential.exp_grating(0.1, 1, 3.0, 2.5)])
    assert s.Potential.from_json(q.to_json()).to_json() == q.to_json()

    # Dyson order 2 is exact for two deltas.
    two = s.Potential.delta_comb([(0.5 + 0.1j, 0.0), (-0.3 + 0.4j, 0.8)])
    _, approx = s.dyson(two, 1.3, order=2)
    assert approx.distance(s.transfer_matrix(two, 1.3).amplitudes()) < 1e-12

    # Jordan branch of the power formula.
    close(s.unimodular_power([[1, 1], [0, 1]], 5)[0][1], 5, 1e-12)

    # Scan locates the singularity.
    _, zeros = s.scan(s.Potential.delta(1.4j), 0.3, 1.2, 64)
    assert any(e == "M22" and abs(k - 0.7) < 1e-9 for e, k, _, _ in zeros)

    # Single-mode design, forward-checked by the dynamical engine.
    rl, t = cmath.rect(math.sqrt(3), -math.pi / 4), 1j * math.sqrt(2)
    pot, case, residual = s.design(1.0, rl, 0j, t)
    assert case == 2 and residual < 1e-5
    got = s.transfer_matrix(pot, 1.0, solver="dynamical").amplitudes()
    close(got.r_left, rl, 1e-5)
    close(got.r_right, 0, 1e-5)
    close(got.t, t, 1e-5)

    print("scatter1d smoke test passed")


if __name__ == "__main__":
    main()
