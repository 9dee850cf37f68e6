"""Acceptance criteria 1-12, each asserted at its stated tolerance.

Every test records a one-line PASS/FAIL verdict (see the "acceptance
criteria" section of the pytest summary). Two criteria are not met by the
implemented formulas; they are kept at full strictness and marked as
expected failures, with the analysis in the decisions ledger.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from sgi_sim import oracle, scenario
from sgi_sim.cli import main
from sgi_sim.config import load_scenario
from sgi_sim.constants import HBAR, KB
from sgi_sim.density import (
    coherence,
    decoherence_time,
    h_factor,
    log_coherence_closed,
    packet_width,
    rho_diagonal,
)
from sgi_sim.kernels import SpectralFunction
from sgi_sim.propagator import balanced_profile, coeff_ABC_highT, coeff_ABC_quadrature, coefficients, packet_center
from sgi_sim.quadrature import QuadratureSpec, integrate_1d


def _estimate_rows():
    return {name: value for name, value, _ in scenario.estimate(load_scenario("paper-squid"))}


def test_01_eta(acceptance):
    t0 = time.perf_counter()
    rows = _estimate_rows()
    dt = time.perf_counter() - t0
    eta = rows["eta"]
    ok = 0.5e-40 <= eta <= 2e-40 and dt < 1.0
    acceptance(1, "parameter reproduction, eta within 2x of 1e-40 kg/s", ok, f"eta = {eta:.4e} kg/s", dt)
    assert ok


@pytest.mark.xfail(strict=True, reason="1/gamma = 4.19e15 s with gamma = eta/2m; see decisions ledger")
def test_01_relaxation_time(acceptance):
    t0 = time.perf_counter()
    rows = _estimate_rows()
    dt = time.perf_counter() - t0
    inv = rows["inv_gamma"]
    ok = 1e15 / 4 <= inv <= 4e15 and dt < 1.0
    acceptance(1, "parameter reproduction, 1/gamma within 4x of 1e15 s", ok, f"1/gamma = {inv:.4e} s", dt)
    assert ok


def test_02_cutoffs(acceptance):
    t0 = time.perf_counter()
    rows = _estimate_rows()
    dt = time.perf_counter() - t0
    w2, w1 = rows["Omega_prime"], rows["Omega"]
    ok = abs(w2 / 1e11 - 1) <= 1e-3 and abs(w1 / 1.010e10 - 1) <= 1e-3 and dt < 1.0
    acceptance(2, "cutoff values", ok, f"Omega' = {w2:.5e}, Omega = {w1:.5e} rad/s", dt)
    assert ok


def test_03_noiseless_revival(acceptance):
    t0 = time.perf_counter()
    sc = load_scenario("noiseless")
    tr = scenario.run(sc, with_tau=False)
    dt = time.perf_counter() - t0
    T = sc.duration
    t, C = tr.times, tr.coherence
    sep = np.max(2 * np.abs(tr.z_plus) / tr.sigma_tilde)
    half = np.argmin(np.abs(t - T / 2))
    # local maximum of C at the sample nearest T/2 (samples straddle T/2)
    window = slice(half - 3, half + 4)
    peak = half - 3 + int(np.argmax(C[window]))
    is_local_max = C[peak] > C[peak - 1] and C[peak] > C[peak + 1]
    near_half = abs(t[peak] - T / 2) <= (t[1] - t[0])
    inner = (t > 0) & (t < T / 2)
    dip = float(np.min(C[inner]))
    ok = (
        C[0] == 1.0
        and C[-1] >= 0.999
        and is_local_max
        and near_half
        and dip < 0.05
        and sep >= 10
        and dt < 5.0
    )
    acceptance(
        3,
        "noiseless revival",
        ok,
        f"C(0) = {C[0]:.6f}, C(T) = {C[-1]:.9f}, mid-run local max at t/T = {t[peak] / T:.4f}, "
        f"min C on (0, T/2) = {dip:.2e}, max separation = {sep:.1f} sigma~",
        dt,
    )
    assert ok


def test_04_small_gamma_limit(acceptance):
    t0 = time.perf_counter()
    base = load_scenario("noisy-desk")
    r0 = scenario.resolve(base)
    factor = 1e-8 / (r0.gamma * r0.duration)
    sc = replace(base, eta_scale=base.eta_scale * factor)
    r = scenario.resolve(sc)
    tr = scenario.run(sc, with_tau=False)
    t = tr.times
    fp, m, s = r.profile, r.mass, r.sigma
    h_dev = float(np.max(np.abs(tr.h - 1)))
    z_ref = np.array([oracle._branch_state(fp, m, +1.0, ti)[0] for ti in t])
    w_ref = s * np.sqrt(1 + (HBAR * t / (2 * m * s * s)) ** 2)
    c_ref = np.array([abs(oracle.noiseless_evolution(fp, m, s, ti)) for ti in t])

    def rel(a, b):
        return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))

    zscale = np.max(np.abs(z_ref))
    errs = {
        "z_plus": float(np.max(np.abs(tr.z_plus - z_ref))) / zscale,
        "z_minus": float(np.max(np.abs(tr.z_minus + z_ref))) / zscale,
        "sigma_tilde": rel(tr.sigma_tilde, w_ref),
        "h": rel(tr.h, np.ones_like(t)),
        "coherence": rel(tr.coherence, c_ref),
        "sx": rel(tr.sx, c_ref),
    }
    dt = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    ok = r.gamma * r.duration == pytest.approx(1e-8, rel=1e-12) and h_dev < 1e-5 and errs[worst] < 1e-4 and dt < 10
    acceptance(
        4,
        "gamma T_exp = 1e-8 limit",
        ok,
        f"max |h-1| = {h_dev:.2e}, worst observable {worst} rel err {errs[worst]:.2e}",
        dt,
    )
    assert ok


def test_05_trajectory_oracle(acceptance):
    t0 = time.perf_counter()
    sc = load_scenario("noisy-desk")
    r = scenario.resolve(sc)
    T = r.duration
    worst = {}
    for gt in (0.01, 0.5, 2.0):
        g = gt / T
        t, z, _ = oracle.classical_trajectory_rk4(r.profile, r.mass, g, T / 4000)
        mine = packet_center(r.profile, t[1:], r.mass, g)
        worst[gt] = float(np.max(np.abs(mine - z[1:]) / np.maximum(np.abs(z[1:]), 1e-3 * np.max(np.abs(z)))))
    dt = time.perf_counter() - t0
    err = max(worst.values())
    ok = err < 1e-6 and dt < 5
    acceptance(5, "trajectory vs RK4", ok, "max rel err " + ", ".join(f"{k:g}: {v:.1e}" for k, v in worst.items()), dt)
    assert ok


def test_06_kernel_oracle(acceptance):
    t0 = time.perf_counter()
    cases = []
    # reference bath at 0.1 K over Omega t = 1e3
    ref = scenario.resolve(load_scenario("paper-squid"))
    sf = ref.spectral
    cases.append(("reference", 1e3 / sf.omega_max, ref.gamma, 0.1, sf))
    # strong damping in scaled units: gamma t = 0.5, kT = 100 hbar Omega
    sf2 = SpectralFunction.sharp(1e-30, 1e3)
    cases.append(("gamma t = 0.5", 1.0, 0.5, 100 * HBAR * 1e3 / KB, sf2))
    worst_qb, worst_h = 0.0, 0.0
    for _, t, g, T, s in cases:
        assert KB * T >= 100 * HBAR * max(g, 1 / t)
        quad = np.array(coeff_ABC_quadrature(t, g, T, s))
        brute = np.array(oracle.brute_force_abc(t, g, T, s))
        high = np.array([v[0] for v in coeff_ABC_highT(np.array([t]), g, 2 * s.eta * KB * T / HBAR)])
        worst_qb = max(worst_qb, float(np.max(np.abs(quad - brute) / brute)))
        worst_h = max(worst_h, float(np.max(np.abs(quad - high) / high)), float(np.max(np.abs(brute - high) / high)))
    dt = time.perf_counter() - t0
    ok = worst_qb < 5e-3 and worst_h < 1e-2 and dt < 60
    acceptance(6, "kernel coefficients", ok, f"quadrature vs brute {worst_qb:.2e}, vs high-T limit {worst_h:.2e}", dt)
    assert ok


# desk-scale high-temperature scenario for criteria 7 and 8
M, SIG, TEXP, GAMMA, TBATH, F0 = 1.8e-25, 3e-10, 1e-9, 5e7, 1.0, 5e-15
WEIGHT = 4 * M * GAMMA * KB * TBATH / HBAR


def test_07_closed_form_coherence(acceptance):
    t0 = time.perf_counter()
    assert KB * TBATH >= 100 * HBAR * GAMMA
    times = np.linspace(0.01, 1.0, 100) * TEXP
    c = coefficients(times, M, GAMMA, WEIGHT, balanced_profile(F0, TEXP))
    closed = np.exp(log_coherence_closed(c, SIG))
    num = np.array([abs(oracle.trace_offdiag_numeric(c.at(i), SIG)) for i in range(times.size)])
    err = float(np.max(np.abs(closed - num) / closed))
    dt = time.perf_counter() - t0
    ok = err < 1e-4 and dt < 30
    acceptance(7, "closed-form coherence vs numerical trace", ok, f"max rel err {err:.2e} over 100 times, C >= {closed.min():.2e}", dt)
    assert ok


def test_08_normalization_hermiticity(acceptance):
    t0 = time.perf_counter()
    times = np.linspace(0.01, 1.0, 50) * TEXP
    fp = balanced_profile(F0, TEXP)
    c = coefficients(times, M, GAMMA, WEIGHT, fp)
    q = QuadratureSpec(relative_tolerance=1e-12)
    zc = packet_center(fp, times, M, GAMMA)
    widths = packet_width(c, SIG)
    rng = np.random.default_rng(7)
    worst_tr, worst_herm = 0.0, 0.0
    for i in range(times.size):
        ci = c.at(i)
        for s in (1, -1):
            lo, hi = s * zc[i] - 12 * widths[i], s * zc[i] + 12 * widths[i]
            tr = integrate_1d(lambda x: rho_diagonal(x, 0.0, ci, SIG, s), lo, hi, q).value
            worst_tr = max(worst_tr, abs(tr - 1))
            qs = s * zc[i] + widths[i] * rng.uniform(-3, 3, 16)
            xs = widths[i] * rng.uniform(-3, 3, 16)
            a = rho_diagonal(qs, xs, ci, SIG, s)
            b = np.conj(rho_diagonal(qs, -xs, ci, SIG, s))
            worst_herm = max(worst_herm, float(np.max(np.abs(a - b) / np.abs(a))))
    dt = time.perf_counter() - t0
    ok = worst_tr < 1e-6 and worst_herm < 1e-10 and dt < 10
    acceptance(8, "normalization and hermiticity", ok, f"max |trace-1| = {worst_tr:.2e}, hermiticity rel err {worst_herm:.2e}", dt)
    assert ok


@pytest.mark.xfail(strict=True, reason="h(t) reaches 1/e after ~14 s, not ~1e5 s; see decisions ledger")
def test_09_decoherence_time(acceptance):
    t0 = time.perf_counter()
    r = scenario.resolve(load_scenario("paper-squid"))
    tau = decoherence_time(r.mass, r.gamma, r.weight, r.sigma)
    dt = time.perf_counter() - t0
    ok = tau is not None and 1e4 <= tau <= 1e6 and dt < 60
    acceptance(9, "decoherence time within 10x of 1e5 s", ok, f"tau = {tau:.4e} s at T = {r.temperature} K, sigma = {r.sigma} m", dt)
    assert ok


def test_10_unobservable(acceptance):
    t0 = time.perf_counter()
    sc = load_scenario("paper-squid")
    r = scenario.resolve(sc)
    t = np.linspace(0, 1e-6, 1001)[1:]
    h = h_factor(coefficients(t, r.mass, r.gamma, r.weight, r.profile), r.sigma)
    dev = float(np.max(1 - h))
    dt = time.perf_counter() - t0
    ok = sc.duration == pytest.approx(1e-6) and sc.apparatus.beam_velocity == 1000 and dev < 1e-6 and dt < 5
    acceptance(10, "dissipation unobservable over 1e-6 s", ok, f"max (1 - h) = {dev:.2e}", dt)
    assert ok


def test_11_noisy_desk(acceptance):
    t0 = time.perf_counter()
    sc = load_scenario("noisy-desk")
    tr = scenario.run(sc, with_tau=False)
    quiet = scenario.run(replace(sc, eta_scale=0.0), with_tau=False)
    T, t = sc.duration, tr.times
    final = tr.coherence[-1]
    monotone = bool(np.all(np.diff(tr.h) <= 0))
    # revival: recombination in the last quarter of the passage
    last = t >= 0.75 * T
    peak, peak0 = float(np.max(tr.coherence[last])), float(np.max(quiet.coherence[last]))
    mid = np.abs(t - T / 2) <= 0.05 * T
    dt = time.perf_counter() - t0
    ok = 0.1 <= final <= 0.3 and monotone and peak < 0.5 * peak0 and dt < 10
    acceptance(
        11,
        "noisy-desk endpoint",
        ok,
        f"C(T) = {final:.3f}, h monotone = {monotone}, revival peak {peak:.3f} vs noiseless {peak0:.3f} "
        f"(mid-run {np.max(tr.coherence[mid]):.3f} vs {np.max(quiet.coherence[mid]):.3f})",
        dt,
    )
    assert ok


def test_12_determinism(acceptance, tmp_path):
    t0 = time.perf_counter()
    a, b = tmp_path / "a", tmp_path / "b"
    codes = [main(["run", "--preset", "noisy-desk", "--out", str(d)]) for d in (a, b)]
    same = (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
    dt = time.perf_counter() - t0
    ok = codes == [0, 0] and same and dt < 5
    acceptance(12, "determinism", ok, f"byte-identical trace.csv = {same}", dt)
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
