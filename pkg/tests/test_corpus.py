import numpy as np
import pytest

from pathcalc.corpus import corpus_names, get_entry, zigzag_generator, zigzag_points
from pathcalc.errors import UnknownCorpusError
from pathcalc.fderiv import classical_limit_check, verify_fderivative
from pathcalc.functions import Const
from pathcalc.geometry import components, discretize
from pathcalc.approx import radial_check
from pathcalc.regularity import uniform_constant


@pytest.fixture(scope="module")
def zigzag():
    return get_entry("zigzag", N=8, resolution=1e-3)


# ---------------------------------------------------------------- zigzag


def test_zigzag_points():
    z1, w1, xs1 = zigzag_points(1)
    assert z1 == 0.25 and w1 == 0.25 + 0.5j
    # x*_n = sqrt(2^-2(n+1) 2^-2n)
    for n in range(1, 8):
        assert zigzag_points(n)[2] == pytest.approx(np.sqrt(2.0 ** (-2 * (n + 1)) * 2.0 ** (-2 * n)), rel=1e-15)


def test_zigzag_generator_shape():
    g = zigzag_generator(2)
    z, w, xs = zigzag_points(2)
    assert list(g.vertices) == [z, w, xs + 0.25j, xs, 2.0**-6]


def test_zigzag_function_values(zigzag):
    f = zigzag.function("f")
    for n in range(1, 9):
        z, w, _ = zigzag_points(n)
        assert f(z) == pytest.approx(z, abs=1e-15)
        assert f(w) == pytest.approx(2.0 ** (-2 * n - 2), abs=1e-15)
    assert f(0) == 0
    assert f(0.25 + 0.5j) == pytest.approx(1 / 16)


def test_zigzag_derivative_flat_at_ends(zigzag):
    g = zigzag.function("g")
    for n in range(1, 9):
        z, w, _ = zigzag_points(n)
        # just inside the vertical segment at both ends
        eps = 1e-9 * 2.0**-n
        assert abs(g(z + 1j * eps)) < 1e-6 * 2.0**-n
        assert abs(g(w - 1j * eps)) < 1e-6 * 2.0**-n


def test_zigzag_sup_derivative(zigzag):
    g = zigzag.function("g")
    t = np.linspace(0, 1, 2001)
    for n in range(1, 9):
        z, w, _ = zigzag_points(n)
        on_vertical = float(np.max(np.abs(g(z + t * (w - z)))))
        assert on_vertical == pytest.approx(9 / 8 * 2.0**-n, rel=1e-12)
        pts = zigzag_generator(n).at(np.linspace(0, zigzag_generator(n).length, 4001))
        assert float(np.max(np.abs(g(pts)))) <= 9 / 8 * 2.0**-n * (1 + 1e-12)


def test_zigzag_difference_quotients(zigzag):
    f = zigzag.function("f")
    for n in range(1, 9):
        z = 2.0 ** (-2 * n)
        assert (f(z) - f(0)) / z == pytest.approx(1.0, abs=1e-12)


def test_zigzag_ftc_on_pieces(zigzag):
    rep = verify_fderivative(zigzag.function("f"), zigzag.function("g"), zigzag.family("pieces"))
    assert rep.verdict


def test_zigzag_printed_formula_mismatch():
    e = get_entry("zigzag", N=4, resolution=1e-3, formula="printed")
    f = e.function("f")
    for n in range(1, 5):
        z, w, _ = zigzag_points(n)
        # the printed cubic gives (7/4) 2^-2n at w_n, not z_{n+1}
        assert f(w) == pytest.approx(7 / 4 * 2.0 ** (-2 * n), rel=1e-12)
        assert f(w) != pytest.approx(2.0 ** (-2 * n - 2))


def test_zigzag_validation():
    with pytest.raises(ValueError):
        get_entry("zigzag", N=1)
    with pytest.raises(ValueError):
        get_entry("zigzag", N=4, formula="other")


def test_zigzag_truncations(zigzag):
    f = zigzag.function("f")
    for n in (2, 4, 6):
        fn = zigzag.function(f"f_{n}")
        pts = zigzag.X.samples
        # f on gamma_1..gamma_{n-1}, constant z_n past it
        assert np.max(np.abs(fn(pts) - f(pts))) == pytest.approx(2.0 ** (-2 * n), abs=1e-15)
        right = pts[pts.real > 2.0 ** (-2 * n + 2) * 1.001]
        assert np.array_equal(fn(right), f(right))


# ---------------------------------------------------------------- many components


def test_many_components_structure():
    for N in (3, 5):
        e = get_entry("many_components", N=N)
        assert len(components(e.X)) == N + 1


def test_many_components_quotients():
    e = get_entry("many_components", N=6)
    f = e.function("f")
    for n in range(1, 7):
        z = 2.0**-n
        assert (f(z) - f(0)) / z == 1.0
        assert f(z + 0.5j * 2.0**-n) == z


def test_many_components_truncations_have_zero_derivative():
    e = get_entry("many_components", N=5)
    for i in range(6):
        rep = verify_fderivative(e.function(f"f_{i}"), Const(0), e.family())
        assert rep.max_defect < 1e-12


def test_many_components_validation():
    with pytest.raises(ValueError):
        get_entry("many_components", N=2)


# ---------------------------------------------------------------- unit square


def test_square_vertical():
    e = get_entry("square_vertical", resolution=0.02)
    F = e.family("vertical")
    assert verify_fderivative(e.function("f"), e.function("g"), F).max_defect < 1e-12
    vals = classical_limit_check(e.function("f"), e.function("g"), e.X, 0.5 + 0.5j, [0.4, 0.2, 0.1])
    assert vals == pytest.approx([1.0, 1.0, 1.0], abs=1e-12)
    # every sample lies on some vertical generator
    cp = F.carrier_points(0.02)[0]
    d = np.min(np.abs(e.X.samples[:, None] - cp[None, :]), axis=1)
    assert d.max() < 1e-12


# ---------------------------------------------------------------- standard shapes


def test_standard_shapes():
    assert radial_check(get_entry("disk").X, 17 / 16)[0]
    assert not radial_check(get_entry("square_annulus").X, 17 / 16)[0]
    seg = get_entry("segment")
    assert uniform_constant(seg.X) == pytest.approx(1.0, abs=1e-12)
    assert len(seg.family().generators) == 1


def test_unknown_names():
    with pytest.raises(UnknownCorpusError):
        get_entry("nope")
    with pytest.raises(UnknownCorpusError):
        get_entry("disk").family("vertical")
    with pytest.raises(UnknownCorpusError):
        get_entry("disk").function("nope")
    with pytest.raises(KeyError):
        get_entry("nope")


def test_names_and_describe():
    names = corpus_names()
    assert names == sorted(names)
    assert {"zigzag", "many_components", "square_vertical", "disk", "square", "segment", "square_annulus", "star"} == set(names)
    d = get_entry("square_annulus").describe()
    assert d["expected"][1]["value"] == pytest.approx(1 + np.sqrt(2))


@pytest.mark.parametrize("name", ["zigzag", "many_components", "square_vertical", "square_annulus"])
def test_builders_are_pure(name):
    a, b = get_entry(name), get_entry(name)
    assert a.describe() == b.describe()
    assert np.array_equal(a.X.samples, b.X.samples)
    assert (a.X.graph != b.X.graph).nnz == 0


# ---------------------------------------------------------------- expected descriptors


def _check_expected(e, item):
    kind = item["kind"]
    if kind == "radially_self_absorbing":
        # margin h must fit inside the spikes of the star at r = 17/16
        X = discretize(e.shape, min(e.resolution, 0.01))
        return radial_check(X, 17 / 16)[0] == item["value"]
    if kind == "uniform_regularity":
        return abs(uniform_constant(e.X) - item["value"]) < 0.02
    if kind == "geodesic":
        from pathcalc.regularity import geodesic_distance

        return abs(geodesic_distance(e.X, complex(*item["z"]), complex(*item["w"])) - item["value"]) < 0.02
    if kind == "components":
        return len(components(e.X)) == item["value"]
    if kind in ("diff_quotient", "diff_quotient_limit"):
        f = e.function("f")
        a = complex(*item["point"])
        return all(abs((f(z) - f(a)) / (z - a) - item["value"]) < 1e-9 for z in e.data["z_n"])
    if kind == "fderivative" and "function" in item:
        names = [k for k in e.functions if k.startswith("f_")]
        return all(verify_fderivative(e.function(k), Const(item["value"]), e.family()).max_defect < 1e-12 for k in names)
    if kind == "fderivative":
        rep = verify_fderivative(e.function("f"), e.function("g"), e.family(item["family"]))
        return ("yes" if rep.verdict else "no") == item["verdict"]
    if kind == "classical_derivative":
        vals = classical_limit_check(e.function("f"), e.function("g"), e.X, 0.5 + 0.5j, [0.2, 0.1, 0.05])
        return (vals[-1] < 1e-2) == (item["verdict"] == "yes")
    if kind == "carrier_dense":
        cp = e.family("vertical").carrier_points(e.resolution)[0]
        d = np.min(np.abs(e.X.samples[:, None] - cp[None, :]), axis=1)
        return bool(d.max() <= e.resolution) == item["value"]
    if kind == "derivative_limit":
        g = e.function("g")
        return all(abs(g(2.0 ** (-2 * n) + 0.5j * 2.0**-n)) <= 9 / 8 * 2.0**-n for n in range(1, e.params["N"] + 1)) and abs(g(0)) == item["value"]
    if kind == "sup_derivative_bound":
        g = e.function("g")
        for n in range(1, e.params["N"] + 1):
            p = zigzag_generator(n)
            if np.max(np.abs(g(p.at(np.linspace(0, p.length, 1001))))) > 9 / 8 * 2.0**-n * (1 + 1e-12):
                return False
        return True
    if kind == "pointwise_regularity":
        from pathcalc.regularity import pointwise_constant

        ks = [pointwise_constant(get_entry("zigzag", N=N, resolution=1e-2).X, complex(*item["point"])) for N in (4, 6, 8)]
        growing = ks[0] < ks[1] < ks[2] and ks[2] > 2.0**8
        return growing != item["regular"]
    raise AssertionError(f"no check for {kind}")


_EXPECTED = [(n, i) for n in corpus_names() for i in range(len(get_entry(n).expected))]


@pytest.mark.parametrize("name, i", _EXPECTED)
def test_expected_descriptor(name, i):
    e = get_entry(name)
    assert _check_expected(e, e.expected[i]), e.expected[i]
