"""The ten acceptance criteria at their stated tolerances.

Each test prints one ``criterion k: PASS/FAIL`` line (visible with ``-s`` or
in the ``-v`` log) before asserting.
"""
import math
import time

import numpy as np
import pytest

from kpotential import (
    DEFAULT_CFG,
    GOLDEN_CFG,
    PotentialKind,
    SemigroupKind,
    design_measure,
    eval_gamma,
    hankel_apply,
    inversion_sweep,
    kernel_profile,
    make_params,
    riesz_kernel_check,
)
from kpotential import verify
from kpotential.verify import EPSILONS, FIXED_POINT_CFG

from conftest import exp_profile

SETS = [(2, 0.5), (3, 1.0)]


def report(capsys, k, label, deviation, gate, ok=None):
    ok = deviation <= gate if ok is None else ok
    with capsys.disabled():
        print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'}  {label}  deviation={deviation:.3e}  gate={gate:.0e}")
    return ok


def run_check(name, n, g):
    dev, gate = verify.CHECKS[name](make_params(n, g), 1.0)
    return dev, gate


@pytest.mark.parametrize("n,g", [(1, 0.5), (2, 0.5), (3, 1.0)])
def test_criterion_1_fixed_point(capsys, n, g):
    s = np.linspace(0.0, 20.0, 201)
    t0 = time.perf_counter()
    v = hankel_apply(exp_profile(), make_params(n, g), FIXED_POINT_CFG)(s)
    seconds = time.perf_counter() - t0
    dev = float(np.max(np.abs(v / np.exp(-s) - 1.0)))
    assert report(capsys, 1, f"(n,g)=({n},{g}) {seconds:.2f}s", dev, 1e-8, dev <= 1e-8 and seconds < 10)


@pytest.mark.parametrize("n,g", SETS)
def test_criterion_2_involution(capsys, n, g):
    dev, gate = run_check("involution", n, g)
    assert gate == 1e-6
    assert report(capsys, 2, f"(n,g)=({n},{g})", dev, gate)


@pytest.mark.parametrize("n,g", SETS)
def test_criterion_3_poisson_identity(capsys, n, g):
    p = make_params(n, g)
    const = 4 ** (p.nu + 1) * eval_gamma(p.nu + 1.5) / math.sqrt(math.pi)
    at_origin = float(kernel_profile(SemigroupKind.poisson(), 1.0, p)(np.array([0.0]))[0])
    dev, gate = run_check("poisson_identity", n, g)
    dev = max(dev, abs(at_origin / const - 1.0))
    assert report(capsys, 3, f"(n,g)=({n},{g})", dev, 1e-7)


def test_criterion_4_beta_integral(capsys):
    dev, gate = run_check("beta_integral", 2, 0.5)
    assert gate == 1e-8
    assert report(capsys, 4, "three (n,g,a) triples", dev, gate)


@pytest.mark.parametrize("n,g", SETS)
def test_criterion_5_normalization_and_scaling(capsys, n, g):
    d1, _ = run_check("normalization", n, g)
    d2, _ = run_check("beta_scaling", n, g)
    assert report(capsys, 5, f"(n,g)=({n},{g}) mass={d1:.1e} scaling={d2:.1e}", max(d1, d2), 1e-6)


@pytest.mark.parametrize("n,g", SETS)
def test_criterion_6_semigroup_laws(capsys, n, g):
    dev, gate = run_check("semigroup_laws", n, g)
    assert gate == 1e-6
    assert report(capsys, 6, f"(n,g)=({n},{g})", dev, gate)


@pytest.mark.parametrize("n,g", SETS)
def test_criterion_7_two_path_potentials(capsys, n, g):
    dev, gate = run_check("two_path_potentials", n, g)
    assert gate == 1e-5
    assert report(capsys, 7, f"(n,g)=({n},{g})", dev, gate)


def test_criterion_8_c_constant(capsys):
    d1, _ = run_check("c_routes", 2, 0.5)
    d2, _ = run_check("c_golden", 2, 0.5)
    ok = d1 <= 1e-6 and d2 <= 1e-9
    assert report(capsys, 8, f"routes={d1:.1e} golden={d2:.1e}", max(d1, d2), 1e-6, ok)


@pytest.mark.parametrize(
    "kind", [PotentialKind.flett(0.7), PotentialKind.riesz(0.5), PotentialKind.biparam(0.8, 1.5)], ids=str
)
def test_criterion_9_inversion(capsys, kind):
    p = make_params(2, 0.5)
    t0 = time.perf_counter()
    rep = inversion_sweep(kind, exp_profile(), design_measure(2), EPSILONS, p, DEFAULT_CFG, route_tol=1e-4)
    seconds = time.perf_counter() - t0
    errs = rep.sup_errors
    monotone = all(b <= a for a, b in zip(errs, errs[1:]))
    ok = monotone and errs[-1] <= 0.01 and rep.route_gap <= 1e-4 and seconds < 180
    label = f"{kind} errors={[f'{e:.1e}' for e in errs]} gap={rep.route_gap:.1e} {seconds:.1f}s"
    assert report(capsys, 9, label, errs[-1], 0.01, ok)


@pytest.mark.parametrize("alpha,n,g", [(0.5, 2, 0.5), (1.0, 3, 0.5)])
def test_criterion_10_riesz_kernel(capsys, alpha, n, g):
    dev = riesz_kernel_check(alpha, make_params(n, g), GOLDEN_CFG)
    assert report(capsys, 10, f"(a,n,g)=({alpha},{n},{g})", dev, 1e-4)
