"""Acceptance suite: one group of tests per criterion, summarized at the end of the run."""

import json
import math
import time

import numpy as np
import pytest

from pathcalc.approx import approx_pipeline, dilation_approx, radial_check, rational_antiderivative, rational_fit_with_residue_correction
from pathcalc.cli import main
from pathcalc.corpus import get_entry, square_annulus, zigzag_generator, zigzag_points
from pathcalc.fderiv import separation_witness, verify_fderivative
from pathcalc.functions import Callable, Const, Exp, Polynomial, RePart, inv_shift
from pathcalc.geometry import Disk, Path, PathFamily, Segment, Union, discretize
from pathcalc.integrate import ftc_defect
from pathcalc.regularity import geodesic_distance, pointwise_constant, uniform_constant
from pathcalc.spaces import DerivativeStack, cauchy_trace, dn_norm, dxm_norm, fnorm, is_algebra_sequence, is_nonanalytic

SEED = 20240611


def _rand_poly(rng, max_degree):
    d = int(rng.integers(0, max_degree + 1))
    return Polynomial(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1))


# ---------------------------------------------------------------- 1. zigzag


@pytest.mark.criterion(1)
def test_c1_zigzag_incompleteness():
    t0 = time.perf_counter()
    e = get_entry("zigzag", N=10, resolution=1e-5)
    f, g = e.function("f"), e.function("g")
    for n in range(1, 11):
        z = zigzag_points(n)[0]
        assert abs((f(z) - f(0)) / z - 1.0) < 1e-9
        p = zigzag_generator(n)
        assert np.max(np.abs(g(p.at(np.linspace(0, p.length, 4001))))) <= 9 / 8 * 2.0**-n
    seq = [(e.function(f"f_{n}"), e.function(f"g_{n}")) for n in range(1, 11)]
    out = cauchy_trace(seq, e.X, e.family("arc"), limit=(f, g))
    for n, gap in enumerate(out["gaps"], start=1):
        assert gap < 2.0 ** (-n + 2)
    for n, u in enumerate(out["uniform_to_limit"], start=1):
        assert u < 2.0 ** (-n + 2)
    assert time.perf_counter() - t0 < 10


# ---------------------------------------------------------------- 2. unit square


@pytest.mark.criterion(2)
def test_c2_unit_square_counterexample():
    t0 = time.perf_counter()
    e = get_entry("square_vertical", resolution=0.01)
    vert = verify_fderivative(RePart(), Const(0), e.family("vertical"))
    assert vert.normalized < 1e-10 and vert.verdict
    grid = verify_fderivative(RePart(), Const(0), e.family("grid"))
    assert grid.max_defect >= 0.9 and not grid.verdict
    w = grid.worst_path
    assert abs(w.chord.imag) < 1e-12  # horizontal
    assert time.perf_counter() - t0 < 5


# ---------------------------------------------------------------- 3. FTC


@pytest.mark.criterion(3)
def test_c3_ftc_property_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    paths = []
    for name, fam in [("zigzag", "all"), ("square", "grid"), ("disk", None), ("square_vertical", "vertical"), ("many_components", None), ("star", None), ("square_annulus", None)]:
        paths += get_entry(name).family(fam).generators
    for _ in range(500):
        f = _rand_poly(rng, 8)
        p = paths[int(rng.integers(len(paths)))]
        df = f.derivative()
        sup = float(np.max(np.abs(df(p.at(np.linspace(0, p.length, 257))))))
        assert ftc_defect(f, df, p) < 1e-8 * (1 + sup * p.length)
    assert time.perf_counter() - t0 < 30


# ---------------------------------------------------------------- 4. separation


@pytest.mark.criterion(4)
def test_c4_separation_witness():
    rng = np.random.default_rng(SEED)
    fams = [get_entry("square").family("grid"), get_entry("disk").family(), get_entry("square_vertical", resolution=0.02).family("vertical")]
    for k in range(100):
        F = fams[k % 3]
        pts = F.carrier_points(F.resolution)[0]
        g = _rand_poly(rng, 4)
        z0 = pts[rng.integers(len(pts))]
        c = 10 ** rng.uniform(-3, 0) * np.exp(2j * np.pi * rng.uniform())
        s = 10 ** rng.uniform(-1.3, -0.5)
        bump = Callable(lambda z, z0=z0, s=s: np.exp(-np.abs(np.asarray(z) - z0) ** 2 / s**2))
        h = g + bump * c
        assert np.max(np.abs(h(pts) - g(pts))) >= 1e-3
        w = separation_witness(g, h, F, 1e-3)
        assert w is not None and w.defect > 0
        assert separation_witness(g, g, F, 1e-3) is None


# ---------------------------------------------------------------- 5. regularity


@pytest.mark.criterion(5)
@pytest.mark.parametrize("shape", ["square", "disk"])
def test_c5_uniform_fine(shape):
    X = get_entry(shape, resolution=0.005).X
    assert uniform_constant(X) <= 1.02


@pytest.mark.criterion(5)
def test_c5_annulus_geodesic():
    X = discretize(square_annulus(), 0.05)
    assert geodesic_distance(X, 1.5 + 0.5j, 1.5 + 2.5j) == pytest.approx(2.4142, abs=0.02)


@pytest.mark.criterion(5)
def test_c5_zigzag_pointwise():
    ks = []
    for N in (4, 6, 8):
        k = pointwise_constant(get_entry("zigzag", N=N, resolution=1e-2).X, 0)
        assert k > 2.0**N
        ks.append(k)
    assert ks[0] < ks[1] < ks[2]


# ---------------------------------------------------------------- 6. norms


@pytest.mark.criterion(6)
def test_c6_norm_values():
    D = discretize(Disk(0, 1), 0.05)
    assert dxm_norm(DerivativeStack.from_fn(Exp(), 30), "factorial", D).partial == pytest.approx(7.389056, abs=1e-4)
    assert dn_norm(DerivativeStack.from_fn(Polynomial([0, 0, 1]), 2), D) == pytest.approx(4.0, abs=1e-9)


@pytest.mark.criterion(6)
def test_c6_isometry():
    e = get_entry("square")
    X, F = e.X, e.family("grid")
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        p = _rand_poly(rng, 8)
        a = dn_norm(DerivativeStack.from_fn(p, 1), X)
        assert abs(a - fnorm(p, p.derivative(), X, F)) <= 1e-6 * a


# ---------------------------------------------------------------- 7. M-sequences


@pytest.mark.criterion(7)
def test_c7_msequences():
    r = is_algebra_sequence("factorial", 40)
    assert r.ok and r.all_equal
    assert is_algebra_sequence("ones", 40).first_violation == (1, 1)
    assert is_nonanalytic("factorial^2").verdict == "yes"
    v = is_nonanalytic("factorial*2^n")
    assert v.verdict == "no"
    assert all(abs(t - 0.5) < 1e-12 for t in v.tail)


# ---------------------------------------------------------------- 8. pipeline


@pytest.mark.criterion(8)
def test_c8_zigzag_pipeline():
    e = get_entry("zigzag", N=6)
    f, g, F = e.function("f"), e.function("g"), e.family("arc")
    r = approx_pipeline(f, g, e.X, F, 0.1)
    check = fnorm(r.h - f, r.h.derivative() - g, e.X, F)
    assert r.success, f"achieved {r.achieved:.4g} at degree {r.degree}"
    assert check < 0.1


@pytest.mark.criterion(8)
def test_c8_two_components_locally_constant():
    # S_1 and S_2 of the many-components set, f = z_1 on S_1, z_2 on S_2
    e = get_entry("many_components", N=5)
    segs = [Segment(0.5, 0.5 + 0.5j), Segment(0.25, 0.25 + 0.25j)]
    X = discretize(Union(segs), 0.01)
    F = PathFamily([Path([s.a, s.b]) for s in segs], resolution=0.01)
    f = e.function("f")
    r = approx_pipeline(f, Const(0), X, F, 1e-8)
    assert r.success and r.degree == 0 and r.achieved < 1e-10
    assert fnorm(r.h - f, r.h.derivative(), X, F) < 1e-10
    full = approx_pipeline(f, Const(0), e.X, e.family(), 1e-8)
    assert full.success and full.degree == 0 and full.achieved < 1e-10


# ---------------------------------------------------------------- 9. residues


@pytest.mark.criterion(9)
def test_c9_residue_correction():
    a = 1.5 + 1.5j
    X = get_entry("square_annulus").X
    loop = Path([0.5 + 0.5j, 2.5 + 0.5j, 2.5 + 2.5j, 0.5 + 2.5j, 0.5 + 0.5j])
    f = inv_shift(a)
    res = rational_fit_with_residue_correction(f.derivative(), X, [a], [loop], 4)
    assert all(abs(c) < 1e-6 for c in res.residues.values())
    assert abs(res.loop_integrals[0]) < 1e-9
    z = X.samples
    R = rational_antiderivative(res.rational, z[0], 0.0)
    shift = f(z[0])
    assert np.max(np.abs(R(z) + shift - f(z))) < 1e-6


# ---------------------------------------------------------------- 10. dilation

NS = (1, 2, 4, 8, 16)


@pytest.fixture(scope="module")
def dilation_errors():
    D = discretize(Disk(0, 1), 0.05)
    return [dxm_norm(DerivativeStack.from_fn(dilation_approx(Exp(), D, n) - Exp(), 30), "factorial", D).partial for n in NS]


@pytest.mark.criterion(10)
def test_c10_dilation_monotone_and_oracle(dilation_errors):
    w = np.exp(2j * np.pi * np.arange(4096) / 4096)
    for n, got in zip(NS, dilation_errors):
        c = n / (n + 1)
        want = sum(np.max(np.abs(c**k * np.exp(c * w) - np.exp(w))) / math.factorial(k) for k in range(31))
        assert got == pytest.approx(want, rel=2e-3)
    assert all(b < a for a, b in zip(dilation_errors, dilation_errors[1:]))


@pytest.mark.criterion(10)
def test_c10_dilation_below_1e_3(dilation_errors):
    assert dilation_errors[-1] < 1e-3, f"dxm at n=16 is {dilation_errors[-1]:.4g}"


@pytest.mark.criterion(10)
def test_c10_annulus_not_radial():
    ok, bad = radial_check(discretize(square_annulus(), 0.05), 17 / 16)
    assert not ok and bad is not None


# ---------------------------------------------------------------- 11. determinism

RUNS = [
    ["demo", "zigzag", "--N", "10", "--h", "1e-5"],
    ["fderiv", "verify", "--set", "square_vertical", "--family", "vertical", "--f", "re_part", "--g", "0", "--h", "0.01"],
    ["fderiv", "verify", "--set", "square_vertical", "--family", "grid", "--f", "re_part", "--g", "0", "--h", "0.01"],
    ["ftc-check", "--f", json.dumps({"fn": "poly", "coeffs": [1, 2, 3, 4]}), "--path", json.dumps({"vertices": [[0, 0], [1, 0], [1, 1]]})],
    ["regularity", "scan", "--set", "square_annulus", "--h", "0.1"],
    ["norm", "--space", "dxm", "--fn", "exp", "--set", "disk", "--M", "factorial", "--depth", "30"],
    ["norm", "--space", "dn", "--fn", "z2", "--set", "disk", "--n", "2"],
    ["norm", "--space", "df", "--fn", "z2", "--set", "square", "--family", "grid"],
    ["mseq", "check", "--M", "factorial", "--upto", "40"],
    ["mseq", "check", "--M", "factorial*2^n"],
    ["approx", "pipeline", "--set", "many_components", "--family", "segments", "--f", "f", "--g", "0", "--eps", "1e-8"],
    ["approx", "rational", "--set", "square_annulus", "--f", json.dumps({"fn": "inv_shift", "a": [1.5, 1.5]}), "--poles", "[[1.5, 1.5]]", "--loops", json.dumps([{"vertices": [[0.5, 0.5], [2.5, 0.5], [2.5, 2.5], [0.5, 2.5], [0.5, 0.5]]}]), "--degree", "4"],
    ["approx", "dilate", "--set", "disk", "--fn", "exp"],
    ["approx", "dilate", "--set", "square_annulus", "--fn", "exp"],
]


@pytest.mark.criterion(11)
@pytest.mark.parametrize("argv", RUNS, ids=[" ".join(r[:2]) for r in RUNS])
def test_c11_reports_repeat(argv, capsys, tmp_path):
    reports = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        code = main(argv + ["--seed", "7", "--out", str(out)])
        assert code in (0, 2)
        rep = json.loads(out.read_text())
        rep.pop("generated_at")
        reports.append(json.dumps(rep, sort_keys=True))
    capsys.readouterr()
    assert reports[0] == reports[1]
