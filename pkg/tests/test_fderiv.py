import numpy as np
import pytest

from pathcalc.corpus import build_square_vertical, build_zigzag, grid_family
from pathcalc.errors import IllConditionedChordError, NoPathsError, ResolutionError, ZeroChordError
from pathcalc.fderiv import (
    CarrierFunction,
    bisect_subpaths,
    classical_limit_check,
    estimate_fderivative,
    separation_witness,
    verify_fderivative,
)
from pathcalc.functions import Const, Exp, Polynomial, RePart
from pathcalc.geometry import Disk, Path, PathFamily, Rect, Segment, discretize


@pytest.fixture(scope="module")
def square():
    return build_square_vertical(0.05)


@pytest.fixture(scope="module")
def disk_family():
    return grid_family(discretize(Disk(0, 1), 0.05))


# ---------------------------------------------------------------- verify


def test_re_part_on_vertical_family(square):
    r = verify_fderivative(RePart(), 0.0, square.family("vertical"))
    assert r.max_defect < 1e-10
    assert r.verdict


def test_re_part_on_grid_family(square):
    r = verify_fderivative(RePart(), 0.0, square.family("grid"))
    assert not r.verdict
    assert r.max_defect == pytest.approx(1.0, abs=1e-12)
    # the worst path is one of the horizontal runs
    assert np.ptp(r.worst_path.vertices.imag) == 0


def test_ftc_pair_on_corpus_families(square, disk_family):
    f, g = Polynomial([0, 0, 1]), Polynomial([0, 2])
    for F in (square.family("grid"), disk_family, build_zigzag(4, 1e-3).family("all")):
        assert verify_fderivative(f, g, F).verdict


def test_report_is_seeded(square):
    F = square.family("grid")
    a = verify_fderivative(Exp(), Exp(), F, seed=7)
    b = verify_fderivative(Exp(), Exp(), F, seed=7)
    assert a.to_dict() == b.to_dict()
    assert a.seed == 7
    assert a.paths_checked == 5 * len(F)


def test_ties_keep_lowest_index():
    F = PathFamily([Path([0, 1]), Path([2, 3])])
    r = verify_fderivative(RePart(), 0.0, F, probes_per_path=1)
    # both generators have defect exactly 1 relative to their own length
    assert r.worst_index == (0, -1)


def test_empty_family_raises():
    with pytest.raises(NoPathsError):
        verify_fderivative(RePart(), 0.0, PathFamily([]))


def test_linearity(disk_family):
    f1, g1 = Exp(), Exp()
    f2, g2 = Polynomial([1, 0, 0, 1j]), Polynomial([0, 0, 3j])
    lam = 2 - 1j
    tol = 1e-8
    assert verify_fderivative(f1, g1, disk_family, tol=tol).verdict
    assert verify_fderivative(f2, g2, disk_family, tol=tol).verdict
    assert verify_fderivative(f1 + lam * f2, g1 + lam * g2, disk_family, tol=tol * (1 + abs(lam))).verdict


def test_leibniz(disk_family):
    f1, g1 = Exp(), Exp()
    f2, g2 = Polynomial([0, 1, 2]), Polynomial([1, 4])
    r = verify_fderivative(f1 * f2, g1 * f2 + f1 * g2, disk_family, tol=1e-8)
    assert r.verdict


def test_uniform_limit_stability(disk_family):
    # partial sums of exp certify with shrinking defect, and the limit certifies
    defects = []
    for n in (4, 8, 16):
        c = [1 / np.prod(np.arange(1, k + 1)) for k in range(n + 1)]
        fn = Polynomial(c)
        gn = fn.derivative()
        defects.append(verify_fderivative(fn, gn, disk_family).normalized)
    assert all(d < 1e-12 for d in defects)
    assert verify_fderivative(Exp(), Exp(), disk_family).normalized < 1e-12


def test_piecewise_closure_agrees():
    gens = [Path([0, 1]), Path([1, 1 + 1j]), Path([1 + 1j, 2j])]
    F = PathFamily(gens)
    Fpw = PathFamily(gens, piecewise=True)
    for f, g in ((Polynomial([0, 0, 1]), Polynomial([0, 2])), (RePart(), Const(0.0))):
        assert verify_fderivative(f, g, F).verdict == verify_fderivative(f, g, Fpw).verdict


# ---------------------------------------------------------------- estimate


def test_estimate_identity(square):
    c = estimate_fderivative(Polynomial([0, 1]), square.family("grid"), 0.05)
    assert isinstance(c, CarrierFunction)
    assert np.max(np.abs(c.values - 1)) < 1e-9
    assert c.canonical is False


def test_estimate_re_part_vertical(square):
    c = estimate_fderivative(RePart(), square.family("vertical"), 0.05)
    assert np.max(np.abs(c.values)) < 1e-12


def test_estimate_zigzag_second_order():
    E = build_zigzag(4, 1e-4)
    F = PathFamily(E.data["generators"][:3])
    g = E.function("g")
    corners = np.concatenate([q.vertices for q in F.generators])
    for h in (1e-3, 1e-4):
        c = estimate_fderivative(E.function("f"), F, h)
        err = np.abs(c.values - g(c.points))
        far = np.min(np.abs(c.points[:, None] - corners[None, :]), axis=1) > 1.5 * h
        # central difference of a cubic: h^2/6 * |f'''|, |f'''| = 9 * 2^n on gamma_n
        assert err[far].max() <= h**2 / 6 * 9 * 2**3 * (1 + 1e-6)
        # corners: one-sided bending costs O(h)
        assert err.max() <= 30 * h


def test_estimate_then_verify_is_first_order(disk_family):
    errs = []
    for h in (0.05, 0.025):
        c = estimate_fderivative(Exp(), disk_family, h)
        errs.append(verify_fderivative(Exp(), c, disk_family, probes_per_path=2).normalized)
    assert errs[1] < errs[0] * 0.75
    assert errs[1] < 0.05


def test_estimate_ill_conditioned_chord():
    # a hairpin: the chord across the tip is far shorter than h
    tip = Path([0, 1, 1 + 1e-6j, 1e-6j])
    F = PathFamily([tip], check_tol=1e-9)
    with pytest.raises(IllConditionedChordError):
        estimate_fderivative(Polynomial([0, 1]), F, 0.6)
    c = estimate_fderivative(Polynomial([0, 1]), F, 0.6, on_ill_conditioned="skip")
    assert np.allclose(c.values, 1)


# ---------------------------------------------------------------- bisection


def test_bisect_straight_segment():
    b = bisect_subpaths(Path([0, 1]), 5)
    assert len(b.paths) == 5
    assert all(q.length / abs(q.chord) == pytest.approx(1.0) for q in b.paths)
    assert all(q.length < b.k * abs(q.chord) for q in b.paths)


def test_bisect_l_path_first_choice():
    p = Path([0, 1, 1 + 1j])
    b = bisect_subpaths(p, 6)
    assert b.k == pytest.approx(2 / np.sqrt(2), rel=1e-8)
    # both halves are straight; the first qualifying one is chosen
    assert np.allclose(b.paths[1].vertices, [0, 1])


def test_bisect_zigzag_generator_nested():
    gen = build_zigzag(3, 1e-3).data["generators"][0]
    b = bisect_subpaths(gen, 25)
    for q, r in zip(b.paths, b.paths[1:]):
        assert r.length == pytest.approx(q.length / 2, rel=1e-12)
        assert r.length < b.k * abs(r.chord)
        # r sits inside q
        d = np.min(np.abs(q.at(np.linspace(0, q.length, 20001))[:, None] - r.vertices[[0, -1]][None, :]), axis=0)
        assert d.max() < q.length * 1e-4
    assert b.paths[-1].length < 1e-5
    assert abs(b.limit - b.paths[-1].at(0)) <= b.paths[-1].length


def test_bisect_closed_path_has_no_k():
    with pytest.raises(ZeroChordError):
        bisect_subpaths(Path([0, 1, 1j, 0]), 3)


# ---------------------------------------------------------------- separation


def test_no_witness_for_equal(square):
    assert separation_witness(Exp(), Exp(), square.family("grid"), 1e-3) is None


def test_witness_zero_vs_one(square):
    w = separation_witness(Const(0), Const(1), square.family("grid"), 0.5)
    assert w is not None
    assert w.defect == pytest.approx(w.chord, rel=1e-12)
    assert w.defect > 0.5 / 4 * w.chord


def test_witness_small_offset_on_disk(disk_family):
    w = separation_witness(Polynomial([0, 2]), Polynomial([0.01, 2]), disk_family, 0.005)
    assert w is not None
    assert w.defect == pytest.approx(0.01 * w.chord, rel=1e-9)


# ---------------------------------------------------------------- classical limits


def test_classical_limit_square_pair():
    X = discretize(Rect(0, 1 + 1j), 0.01)
    v = classical_limit_check(Polynomial([0, 0, 1]), Polynomial([0, 2]), X, 0.5 + 0.5j, [0.4, 0.2, 0.1, 0.05])
    assert all(b < a for a, b in zip(v, v[1:]))
    assert v[-1] == pytest.approx(0.05, rel=1e-6)


def test_classical_limit_re_part_is_one():
    X = discretize(Rect(0, 1 + 1j), 0.05)
    v = classical_limit_check(RePart(), Const(0.0), X, 0.5 + 0.5j, [0.4, 0.2, 0.1])
    assert np.allclose(v, 1.0)


def test_classical_limit_zigzag_at_zero():
    E = build_zigzag(8, 1e-4)
    radii = [2.0 ** (-2 * n) * 1.001 for n in range(2, 8)]
    v = classical_limit_check(E.function("f"), E.function("g"), E.X, 0, radii)
    assert min(v) >= 1 - 1e-9


def test_classical_limit_needs_samples():
    X = discretize(Segment(0, 1), 0.1)
    with pytest.raises(ResolutionError):
        classical_limit_check(Exp(), Exp(), X, 0.05, [0.01])
