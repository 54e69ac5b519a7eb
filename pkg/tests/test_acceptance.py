"""Acceptance criteria, one test and one summary line each."""

import time

import numpy as np
import pytest

from pudtai.estimate import bootstrap, crb
from pudtai.fisher import (
    aperture_flux_efficiencies,
    f_pudtai,
    fi_aperture_improvement,
    fisher_di,
    resolved_fi_efficiency,
    s_factor,
    s_pudtai_closed_form,
    s_sliver,
)
from pudtai.model import DeviceCalibration, port_probabilities
from pudtai.phasespace import PhaseProfile, apply_phase, wigner
from pudtai.processor import ProcessorParams, pipeline_port_powers
from pudtai.signals import (
    Domain,
    SampledField,
    TwoSourceSpec,
    centered_axis,
    default_time_grid,
    synthesize_two_source,
    to_conjugate,
)

MEASURED = DeviceCalibration.measured()
# fixed before any run
SEED = 20240601


def test_1_super_resolution_factor(accept):
    t0 = time.perf_counter()
    s = s_pudtai_closed_form(MEASURED)
    dt = time.perf_counter() - t0
    accept(1, 19.5 <= s <= 20.5 and dt < 1.0, f"s = {s:.4f} in [19.5, 20.5], {dt:.3f} s")


def test_2_aperture_flux_efficiencies(accept):
    t0 = time.perf_counter()
    em, ep = aperture_flux_efficiencies(0.564)
    dt = time.perf_counter() - t0
    ok = abs(em - 0.74) <= 0.01 and abs(ep - 0.26) <= 0.01 and dt < 1.0
    accept(2, ok, f"(eta_p-, eta_p+) = ({em:.4f}, {ep:.4f}) vs (0.74, 0.26) +/- 0.01, {dt:.3f} s")


def test_3_qfi_saturation(accept):
    t0 = time.perf_counter()
    f_ideal = f_pudtai(1e-3, DeviceCalibration.ideal())
    eps = np.linspace(0.0, 3.0, 301)
    cals = [MEASURED, DeviceCalibration.ideal(), DeviceCalibration.ideal(0.564)]
    cals += [DeviceCalibration(vm, vp, eta, x) for vm in (0.5, 0.9, 1.0) for vp in (0.5, 1.0) for eta in (0.3, 1.0)
             for x in (0.0, 0.564, 1.2)]
    worst = max(float(np.max(f_pudtai(eps, c))) for c in cals)
    dt = time.perf_counter() - t0
    ok = abs(f_ideal - 0.25) <= 0.01 * 0.25 and worst <= 0.25 + 1e-12 and dt < 1.0
    accept(3, ok, f"F(1e-3) = {f_ideal:.6f}, max F over {len(cals)} calibrations = {worst:.6f}, {dt:.3f} s")


def test_4_sliver_reduction(accept):
    t0 = time.perf_counter()
    errs = []
    for v in (0.9, 0.95, 0.9751):
        cal = DeviceCalibration(v_minus=v, v_plus=v, eta_plus=1.0, t_a_sigma=0.0)
        errs.append(abs(s_factor(lambda e: f_pudtai(e, cal)) / s_sliver(v) - 1))
    dt = time.perf_counter() - t0
    accept(4, max(errs) < 5e-3 and dt < 1.0, f"max relative error {max(errs):.2e} < 5e-3, {dt:.3f} s")


def test_5_fi_aperture_improvement(accept):
    t0 = time.perf_counter()
    im, ip = fi_aperture_improvement(MEASURED)
    rm, rp = resolved_fi_efficiency("minus", MEASURED), resolved_fi_efficiency("plus", MEASURED)
    dt = time.perf_counter() - t0
    ok = abs(im - 2.1) <= 0.1 and abs(ip - 2.1) <= 0.1 and abs(rm - 0.94) <= 0.01 and abs(rp - 0.94) <= 0.01
    ok = ok and dt < 10.0
    accept(5, ok, f"improvement ({im:.4f}, {ip:.4f}), resolved efficiency ({rm:.4f}, {rp:.4f}), {dt:.2f} s")


def test_6_analytic_numeric_agreement(accept):
    t0 = time.perf_counter()
    grid = default_time_grid()
    params = ProcessorParams()
    model = DeviceCalibration.ideal(params.aperture.t_a)
    worst = 0.0
    for eps in (0.0, 0.25, 0.5, 1.0, 2.0):
        pm, pp = pipeline_port_powers(TwoSourceSpec(eps), grid, params, n_phases=64)
        pr = port_probabilities(eps, model)
        worst = max(worst, abs(pm - pr.p_minus), abs(pp - pr.p_plus))
    dt = time.perf_counter() - t0
    accept(6, worst < 1e-2 and dt < 60.0, f"max |sim - model| = {worst:.2e} < 1e-2, {dt:.1f} s")


def test_7_estimator_statistics(accept):
    t0 = time.perf_counter()
    n, n_boot = 20_000, 200
    parts, ok = [], True
    for i, eps in enumerate((0.1, 0.3, 0.5)):
        rep = bootstrap(eps, MEASURED, n, n_boot, SEED + i)
        z = rep.bias / rep.sem
        ratio = rep.variance / crb(eps, MEASURED, n)
        ok = ok and abs(z) < 3 and abs(ratio - 1) <= 0.15
        parts.append(f"eps={eps}: bias/SEM={z:+.2f}, var/CRB={ratio:.3f}")
    dt = time.perf_counter() - t0
    ok = ok and dt < 300
    accept(7, ok, "; ".join(parts) + f", {dt:.1f} s")


def test_8_variance_improvement(accept):
    r = f_pudtai(0.08, MEASURED) / fisher_di(0.08)
    accept(8, abs(r / 20 - 1) <= 0.15, f"F_PuDTAI/F_DI at eps=0.08 = {r:.3f}, target 20 +/- 15%")


def _order_budget():
    n, z0 = 2**17, 200.0
    u = centered_axis(n, 15.0)
    fld = SampledField.on_axis(Domain.POSITION, z0 + u, np.exp(-(u**2) / 2).astype(complex))
    out = apply_phase(fld, PhaseProfile("spectral", "bidirectional_propagation", 1.0, 0.3))
    power = np.abs(np.fft.fftshift(np.fft.fft(out.samples))) ** 2
    power /= power.sum()
    k = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, u[1] - u[0]))
    return sum(power[np.abs(k - m * z0) < z0 / 2].sum() for m in (-1, 1))


def test_9_wigner_unitarity_suite(accept):
    t0 = time.perf_counter()
    t = default_time_grid()
    s = synthesize_two_source(TwoSourceSpec(1.3, 0.7), t)
    s = s.with_samples(s.samples / np.sqrt(s.norm()))
    norm_err = 0.0
    for prof in (
        PhaseProfile("temporal", "lens", 5.0),
        PhaseProfile("temporal", "dual_lens", 3.0),
        PhaseProfile("temporal", "bidirectional_propagation", 2.0, 1.0),
    ):
        norm_err = max(norm_err, abs(apply_phase(s, prof).norm() - s.norm()))
    spec = to_conjugate(s)
    norm_err = max(norm_err, abs(apply_phase(spec, PhaseProfile("spectral", "propagation", 0.4)).norm() - 1))
    small = synthesize_two_source(TwoSourceSpec(1.3, 0.7), centered_axis(512, 8.0))
    w = wigner(small)
    marg_q = np.max(np.abs(w.marginal_q() - small.intensity()))
    sp = to_conjugate(small)
    idx = np.searchsorted(w.p_axis, sp.axis)
    ok_idx = (idx < w.p_axis.size) & np.isclose(w.p_axis[np.minimum(idx, w.p_axis.size - 1)], sp.axis)
    marg_p = np.max(np.abs(w.marginal_p()[idx[ok_idx]] - sp.intensity()[ok_idx]))
    budget = _order_budget()
    dt = time.perf_counter() - t0
    ok = norm_err < 1e-12 and max(marg_q, marg_p) < 1e-6 and abs(budget - 8 / np.pi**2) <= 1e-3 and dt < 30
    accept(
        9,
        ok,
        f"norm err {norm_err:.1e}, marginal err {max(marg_q, marg_p):.1e}, "
        f"+/-1 order power {budget:.5f} vs {8 / np.pi**2:.5f}, {dt:.1f} s",
    )
