"""Command-line interface: file I/O, JSON reports, CSV series and SVG plots.

Exit codes: 0 success, 1 error, 2 computed fine but the verdict is negative.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import NotDifferentiableError, PathCalcError
from .functions import NAMED, Const, Fn, parse_fn
from .geometry import Path, PathFamily, PlaneSet, components, discretize, parse_path, parse_shape

SCHEMA_VERSION = 1
THREADS_ENV = "PATHCALC_NUM_THREADS"


class CliError(PathCalcError):
    pass


# ---------------------------------------------------------------- input


def load_json(arg, what="input"):
    """Parse inline JSON (starting with '{' or '[') or read a JSON file."""
    if not isinstance(arg, str):
        return arg
    text, src = (arg, "<inline>") if arg.lstrip()[:1] in "{[" else (None, arg)
    if text is None:
        try:
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise CliError(f"cannot read {what} {arg!r}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(f"malformed JSON in {what} {src}: {e.msg} at line {e.lineno}, column {e.colno}") from None


def parse_point(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float, complex)):
        return complex(v)
    parts = str(v).split(",")
    if len(parts) != 2:
        raise CliError(f"point {v!r} must be 're,im'")
    return complex(float(parts[0]), float(parts[1]))


def parse_int_list(v):
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    return [int(x) for x in str(v).split(",") if x.strip()]


class Inputs:
    """Resolves set, family and function arguments against an optional corpus entry."""

    def __init__(self, params):
        self.p = params
        self.entry = None
        self._X = None

    def _corpus_params(self):
        extra = dict(load_json(self.p.get("set_params") or {}, "set parameters"))
        if self.p.get("h") is not None:
            extra["resolution"] = float(self.p["h"])
        return extra

    def set(self, key="set"):
        if self._X is not None:
            return self._X
        arg = self.p.get(key)
        if arg is None:
            raise CliError(f"missing --{key}")
        from .corpus import corpus_names, get_entry

        if isinstance(arg, str) and arg in corpus_names():
            self.entry = get_entry(arg, **self._corpus_params())
            self._X = self.entry.X
            self.p["h"] = self.entry.resolution
        else:
            h = self.p.get("h")
            h = 0.02 if h is None else float(h)
            self.p["h"] = h
            self._X = discretize(parse_shape(load_json(arg, "shape")), h)
        return self._X

    def family(self):
        X = self.set()
        arg = self.p.get("family")
        entry = self.entry
        if arg is None:
            if entry is not None:
                return entry.family()
            arg = "grid"
        if arg == "grid":
            from .corpus import grid_family

            return grid_family(X, seed=int(self.p.get("seed", 0)))
        if entry is not None and arg in entry.family_builders:
            return entry.family(arg)
        desc = load_json(arg, "family")
        if isinstance(desc, list):
            desc = {"generators": desc}
        if not isinstance(desc, dict) or "generators" not in desc:
            raise CliError("family must be 'grid', a corpus family name or {'generators': [path, ...]}")
        return PathFamily(
            [parse_path(g) for g in desc["generators"]],
            piecewise=bool(desc.get("piecewise", False)),
            max_length=desc.get("max_length"),
            resolution=desc.get("resolution", X.h),
        )

    def fn(self, key, required=True):
        arg = self.p.get(key)
        if arg is None:
            if required:
                raise CliError(f"missing --{key.replace('_', '-')}")
            return None
        if isinstance(arg, str):
            if self.entry is not None and arg in self.entry.functions:
                return self.entry.function(arg)
            if arg in NAMED:
                return parse_fn(arg)
            try:
                return Const(complex(arg.replace(" ", "").replace("i", "j")))
            except ValueError:
                pass
        elif isinstance(arg, (int, float)):
            return Const(complex(arg))
        return parse_fn(load_json(arg, "function"))

    def derivative_of(self, key_g, f, f_key):
        g = self.fn(key_g, required=False)
        if g is not None:
            return g
        name = self.p.get(f_key)
        if self.entry is not None and isinstance(name, str) and name in self.entry.derivatives:
            return self.entry.derivatives[name]
        try:
            return f.derivative()
        except NotDifferentiableError:
            raise CliError(f"--{key_g} is required: the function has no closed-form derivative") from None

    def path(self, key="path"):
        arg = self.p.get(key)
        if arg is None:
            raise CliError(f"missing --{key}")
        return parse_path(load_json(arg, "path"))


# ---------------------------------------------------------------- output


def to_jsonable(v):
    """Strict-JSON form: complex -> [re, im], non-finite floats -> strings."""
    if isinstance(v, dict):
        return {str(k): to_jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [to_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return to_jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [to_jsonable(v.real), to_jsonable(v.imag)]
    if isinstance(v, Path):
        return v.to_dict()
    if isinstance(v, Fn):
        try:
            return v.to_descriptor()
        except (PathCalcError, AttributeError):
            return repr(v)
    return v


def timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return t.isoformat(timespec="seconds")


def dumps_report(report):
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def write_svg(path, draw):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "pathcalc", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        draw(ax)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


@dataclass
class Outcome:
    result: dict
    ok: bool = True
    series: tuple = None  # (header, rows)
    plot: object = None  # callable(ax)


# ---------------------------------------------------------------- commands


def cmd_integrate(p, inp):
    from .integrate import path_integral

    g = inp.fn("fn")
    path = inp.path()
    r = path_integral(g, path, tol=float(p["tol"]))
    return Outcome({"value": r.value, "est_error": r.est_error, "segments_used": r.segments_used, "length": path.length})


def cmd_ftc_check(p, inp):
    from .fderiv import _sup_on_path
    from .integrate import ftc_defect

    f = inp.fn("f")
    g = inp.derivative_of("g", f, "f")
    path = inp.path()
    d = ftc_defect(f, g, path, tol=float(p["tol"]))
    bound = float(p["threshold"]) * (1 + _sup_on_path(g, path) * path.length)
    return Outcome({"defect": d, "bound": bound, "pass": d < bound}, d < bound)


def cmd_fderiv_verify(p, inp):
    from .fderiv import verify_fderivative

    inp.set()
    f = inp.fn("f")
    g = inp.derivative_of("g", f, "f")
    F = inp.family()
    r = verify_fderivative(f, g, F, probes_per_path=int(p["probes"]), tol=float(p["tol"]), seed=int(p["seed"]))
    rows = [(idx[0], idx[1], d, nd) for idx, d, nd in r.defects]
    return Outcome(r.to_dict(), r.verdict, (["generator", "probe", "defect", "normalized"], rows))


def cmd_fderiv_estimate(p, inp):
    from .fderiv import estimate_fderivative

    X = inp.set()
    f = inp.fn("f")
    F = inp.family()
    h = float(p["step"]) if p.get("step") is not None else X.h
    est = estimate_fderivative(f, F, h, on_ill_conditioned=p["on_ill_conditioned"])
    res = {"n_points": int(est.points.size), "step": h, "sup": float(np.max(np.abs(est.values))), "max_spread": float(np.max(est.spread)) if est.spread.size else 0.0}
    ref = inp.fn("g", required=False)
    if ref is not None:
        res["sup_error_vs_g"] = float(np.max(np.abs(est.values - ref(est.points))))
    rows = [(z.real, z.imag, v.real, v.imag, s) for z, v, s in zip(est.points, est.values, est.spread)]
    return Outcome(res, True, (["re", "im", "value_re", "value_im", "spread"], rows))


def cmd_fderiv_bisect(p, inp):
    from .fderiv import bisect_subpaths

    path = inp.path()
    r = bisect_subpaths(path, int(p["levels"]))
    rows = [(i, q.length, abs(q.chord), q.length / abs(q.chord)) for i, q in enumerate(r.paths)]
    res = {"k": r.k, "limit": r.limit, "levels": [{"length": a, "chord": b, "ratio": c} for _, a, b, c in rows]}
    return Outcome(res, True, (["level", "length", "chord", "ratio"], rows))


def cmd_regularity_scan(p, inp):
    from .regularity import componentwise_regularity, pointwise_constant

    X = inp.set("shape" if p.get("shape") is not None else "set")
    straight = not p["raw"]
    if p.get("point") is not None:
        z = parse_point(p["point"])
        d = pointwise_constant(X, z, straightened=straight, return_detail=True)
        ok = d["k"] <= float(p["cutoff"])
        return Outcome({"point": z, "h": X.h, **d, "regular": ok}, ok)
    reps = componentwise_regularity(X, cutoff=float(p["cutoff"]), straightened=straight)
    res = {"h": X.h, "n_components": len(reps), "components": [reps[c].to_dict() for c in sorted(reps)]}
    ok = not any(r.suspect for r in reps.values())
    pts = [(z, k) for c in sorted(reps) for z, k in reps[c].per_point_k.items()]
    pts.sort(key=lambda t: (t[0].real, t[0].imag))

    def draw(ax):
        if not pts:
            return
        z = np.array([t[0] for t in pts])
        k = np.array([t[1] for t in pts])
        sc = ax.scatter(z.real, z.imag, c=k, s=8, cmap="viridis")
        ax.figure.colorbar(sc, ax=ax, label="k_z")
        ax.set_aspect("equal")
        ax.set_title("pointwise regularity constant")

    rows = [(z.real, z.imag, k) for z, k in pts]
    return Outcome(res, ok, (["re", "im", "k"], rows), draw)


def cmd_norm(p, inp):
    from .spaces import DerivativeStack, dn_norm, dxm_norm, fnorm

    X = inp.set()
    f = inp.fn("fn")
    space = p["space"]
    if space in ("d1", "dn"):
        n = 1 if space == "d1" else int(p["n"])
        val = dn_norm(DerivativeStack.from_fn(f, n), X, n)
        return Outcome({"space": space, "n": n, "norm": val})
    if space == "dxm":
        from .spaces import MSequence

        M = MSequence.parse(load_json(p["M"]) if str(p["M"]).lstrip()[:1] == "[" else p["M"])
        s = dxm_norm(DerivativeStack.from_fn(f, int(p["depth"])), M, X)
        rows = [(k, t) for k, t in enumerate(s.terms)]
        return Outcome({"space": space, "M": M.to_dict(), "depth": int(p["depth"]), **s.to_dict()}, s.verdict != "diverged", (["n", "term"], rows))
    if space == "df":
        g = inp.derivative_of("g", f, "fn")
        F = inp.family()
        return Outcome({"space": space, "norm": fnorm(f, g, X, F)})
    raise CliError(f"unknown space {space!r}; use d1, dn, dxm or df")


def cmd_approx_pipeline(p, inp):
    from .approx import approx_pipeline
    from .spaces import fnorm

    X = inp.set()
    f = inp.fn("f")
    g = inp.derivative_of("g", f, "f")
    F = inp.family()
    r = approx_pipeline(f, g, X, F, float(p["eps"]), degree_cap=int(p["degree_cap"]))
    check = fnorm(r.h - f, r.h.derivative() - g, X, F)
    res = {**r.to_dict(), "recomputed_fnorm": check}
    rows = [(e["degree"], e["sup_error"]) for e in r.history]

    def draw(ax):
        ax.semilogy([t[0] for t in rows], [max(t[1], 1e-300) for t in rows], "o-", label="sup |p - g|")
        ax.axhline(r.target, color="k", ls="--", label="target")
        ax.set_xlabel("degree")
        ax.legend()

    return Outcome(res, bool(r.success and check < float(p["eps"])), (["degree", "sup_error"], rows), draw)


def cmd_approx_rational(p, inp):
    from .approx import rational_antiderivative, rational_fit_with_residue_correction

    X = inp.set()
    f = inp.fn("f", required=False)
    g = inp.fn("g", required=False)
    if g is None:
        if f is None:
            raise CliError("give --g (or --f with a closed-form derivative)")
        g = inp.derivative_of("g", f, "f")
    poles = [parse_point(a) for a in load_json(p["poles"], "poles")] if p.get("poles") is not None else []
    loops = [parse_path(d) for d in load_json(p["loops"], "loops")] if p.get("loops") is not None else []
    r = rational_fit_with_residue_correction(g, X, poles, loops, int(p["degree"]), int(p["pole_order"]))
    res = r.to_dict()
    ok = all(abs(c) < float(p["residue_tol"]) for c in r.residues.values())
    ok = ok and all(abs(v) < b for v, b in zip(r.loop_integrals, r.loop_bounds))
    if f is not None:
        z0 = X.samples[0]
        R = rational_antiderivative(r.rational, z0, f(z0))
        res["antiderivative_sup_error"] = float(np.max(np.abs(R(X.samples) - f(X.samples))))
    return Outcome(res, ok)


def cmd_approx_dilate(p, inp):
    from .approx import dilation_approx, radial_check
    from .errors import NotRadiallySelfAbsorbingError
    from .spaces import DerivativeStack, MSequence, dxm_norm

    X = inp.set()
    f = inp.fn("fn")
    ns = parse_int_list(p["ns"])
    M = MSequence.parse(p["M"])
    rows = []
    for n in ns:
        try:
            fd = dilation_approx(f, X, n)
        except NotRadiallySelfAbsorbingError:
            _, bad = radial_check(X, (n + 1) / n)
            return Outcome({"radially_self_absorbing": False, "n": n, "bad_sample": bad}, False)
        s = dxm_norm(DerivativeStack.from_fn(fd - f, int(p["depth"])), M, X)
        rows.append((n, s.partial))
    mono = all(b < a for (_, a), (_, b) in zip(rows, rows[1:]))
    res = {"radially_self_absorbing": True, "M": M.to_dict(), "errors": [{"n": n, "dxm": v} for n, v in rows], "monotone": mono}

    def draw(ax):
        ax.loglog([t[0] for t in rows], [t[1] for t in rows], "o-")
        ax.set_xlabel("n")
        ax.set_ylabel("D(X,M) error")

    return Outcome(res, mono, (["n", "dxm_error"], rows), draw)


def cmd_mseq_check(p, inp):
    from .spaces import MSequence, is_algebra_sequence, is_nonanalytic

    m_arg = p["M"]
    M = MSequence.parse(load_json(m_arg) if str(m_arg).lstrip()[:1] == "[" else m_arg)
    upto = int(p["upto"])
    if M.size != math.inf:
        upto = min(upto, int(M.size) - 1)
    a = is_algebra_sequence(M, upto)
    na = is_nonanalytic(M, None if p.get("nonanalytic_upto") is None else int(p["nonanalytic_upto"]))
    res = {
        "M": M.to_dict(),
        "algebra": {"ok": a.ok, "first_violation": a.first_violation, "all_equal": a.all_equal, "checked": a.checked},
        "nonanalytic": na.to_dict(),
    }
    return Outcome(res, bool(a.ok))


# ---------------------------------------------------------------- demos


def _demo_zigzag(entry, p):
    f, g = entry.function("f"), entry.function("g")
    zs = np.array(entry.data["z_n"])
    q = (f(zs) - f(0.0)) / zs
    trace = [{"n": n, "z_n": z, "quotient": v} for n, (z, v) in enumerate(zip(zs, q), start=1)]
    sups = []
    for n, gen in enumerate(entry.data["generators"], start=1):
        _, pts = gen.sample(min(entry.resolution, gen.length / 64))
        sups.append({"n": n, "sup_g": float(np.max(np.abs(g(np.concatenate([pts, gen.vertices]))))), "bound": 9 / 8 * 2.0**-n})
    last = abs(q[-1] - 1)
    ok = bool(last < 1e-3 and all(s["sup_g"] <= s["bound"] * (1 + 1e-9) for s in sups))
    res = {"trace": trace, "trace_end_error": float(last), "sup_g": sups, "g_at_0": g(0.0)}
    rows = [(t["n"], t["z_n"], t["quotient"].real, t["quotient"].imag) for t in trace]

    def draw(ax):
        n = [r[0] for r in rows]
        ax.plot(n, [r[2] for r in rows], "o-", label="(f(z_n) - f(0)) / z_n")
        ax.plot([s["n"] for s in sups], [s["sup_g"] for s in sups], "s--", label="sup |g| on gamma_n")
        ax.axhline(1.0, color="k", lw=0.5)
        ax.set_xlabel("n")
        ax.legend()

    return res, ok, (["n", "z_n", "quotient_re", "quotient_im"], rows), draw


def _demo_many_components(entry, p):
    from .fderiv import verify_fderivative

    X = entry.X
    f = entry.function("f")
    zs = np.array(entry.data["z_n"])
    q = (f(zs) - f(0.0)) / zs
    F = entry.family()
    n_comp = len(components(X))
    defects = {}
    for name in sorted(k for k in entry.functions if k.startswith("f_")):
        defects[name] = verify_fderivative(entry.function(name), 0.0, F, seed=int(p["seed"])).normalized
    ok = bool(n_comp == entry.params["N"] + 1 and np.allclose(q, 1, atol=1e-12) and max(defects.values()) < 1e-12)
    res = {"components": n_comp, "quotients": q, "fderivative_defects": defects}
    return res, ok, (["n", "quotient"], [(n, v.real) for n, v in enumerate(q, start=1)]), None


def _demo_square_vertical(entry, p):
    from .fderiv import classical_limit_check, verify_fderivative

    f, g = entry.function("f"), entry.function("g")
    rv = verify_fderivative(f, g, entry.family("vertical"), seed=int(p["seed"]))
    rg = verify_fderivative(f, g, entry.family("grid"), seed=int(p["seed"]))
    lim = classical_limit_check(f, g, entry.X, 0.5 + 0.5j, [0.4, 0.2, 0.1, 0.05])
    ok = bool(rv.verdict and not rg.verdict and min(lim) > 0.5)
    return {"vertical": rv.to_dict(), "grid": rg.to_dict(), "classical_quotient_gap": lim}, ok, None, None


def _demo_standard(entry, p):
    from .approx import radial_check
    from .regularity import geodesic_distance, uniform_constant

    X = entry.X
    res, ok = {}, True
    for e in entry.expected:
        if e["kind"] == "radially_self_absorbing":
            got, _ = radial_check(X, 17 / 16)
            res["radially_self_absorbing"] = got
            ok &= got == e["value"]
        elif e["kind"] == "uniform_regularity":
            k = uniform_constant(X)
            res["uniform_constant"] = k
            ok &= k <= e["value"] + 0.02
        elif e["kind"] == "geodesic":
            d = geodesic_distance(X, parse_point(e["z"]), parse_point(e["w"]))
            res["geodesic"] = d
            ok &= abs(d - e["value"]) <= 0.02
    return res, bool(ok), None, None


DEMOS = {"zigzag": _demo_zigzag, "many_components": _demo_many_components, "square_vertical": _demo_square_vertical}


def cmd_demo(p, inp):
    from .corpus import get_entry

    name = p["name"]
    params = dict(load_json(p.get("set_params") or {}, "corpus parameters"))
    if p.get("N") is not None:
        params["N"] = int(p["N"])
    if p.get("h") is not None:
        params["resolution"] = float(p["h"])
    if p.get("formula") is not None:
        params["formula"] = p["formula"]
    entry = get_entry(name, **params)
    res, ok, series, plot = DEMOS.get(name, _demo_standard)(entry, p)
    return Outcome({"entry": entry.describe(), **res}, ok, series, plot)


# ---------------------------------------------------------------- parser

_SET = [("--set", None, "corpus entry name or shape JSON (file or inline)"), ("--h", None, "sampling resolution"), ("--set-params", None, "corpus builder parameters as JSON")]
_FAMILY = [("--family", None, "'grid', a corpus family name, or JSON {'generators': [...]}")]

COMMANDS = {
    ("integrate",): (cmd_integrate, [("--fn", None, "integrand"), ("--path", None, "path JSON"), ("--tol", 1e-10, "tolerance")]),
    ("ftc-check",): (cmd_ftc_check, [("--f", None, "function"), ("--g", None, "derivative (default f')"), ("--path", None, "path JSON"), ("--tol", 1e-12, "quadrature tolerance"), ("--threshold", 1e-8, "relative pass threshold")]),
    ("fderiv", "verify"): (
        cmd_fderiv_verify,
        _SET + _FAMILY + [("--f", None, "function"), ("--g", None, "candidate F-derivative"), ("--probes", 4, "random subpaths per generator"), ("--tol", 1e-8, "normalized defect threshold")],
    ),
    ("fderiv", "estimate"): (
        cmd_fderiv_estimate,
        _SET + _FAMILY + [("--f", None, "function"), ("--g", None, "optional reference derivative"), ("--step", None, "chord step (default h)"), ("--on-ill-conditioned", "raise", "raise or skip")],
    ),
    ("fderiv", "bisect"): (cmd_fderiv_bisect, [("--path", None, "path JSON"), ("--levels", 10, "nesting depth")]),
    ("regularity", "scan"): (
        cmd_regularity_scan,
        [("--shape", None, "shape JSON or corpus name")] + _SET + [("--point", None, "re,im"), ("--cutoff", 1e3, "divergence cutoff"), ("--raw", False, "skip straightening")],
    ),
    ("norm",): (
        cmd_norm,
        _SET + _FAMILY + [("--space", "dxm", "d1, dn, dxm or df"), ("--fn", None, "function"), ("--g", None, "F-derivative for df"), ("--n", 2, "order for dn"), ("--M", "factorial", "M-sequence"), ("--depth", 30, "series depth for dxm")],
    ),
    ("approx", "pipeline"): (
        cmd_approx_pipeline,
        _SET + _FAMILY + [("--f", None, "target function"), ("--g", None, "its F-derivative"), ("--eps", 0.1, "target accuracy"), ("--degree-cap", 64, "largest polynomial degree")],
    ),
    ("approx", "rational"): (
        cmd_approx_rational,
        _SET
        + [("--f", None, "optional function to antidifferentiate back to"), ("--g", None, "function to fit"), ("--poles", None, "JSON list of [re, im]"), ("--loops", None, "JSON list of path descriptors"), ("--degree", 8, "polynomial degree"), ("--pole-order", 6, "orders per pole"), ("--residue-tol", 1e-6, "residue threshold")],
    ),
    ("approx", "dilate"): (cmd_approx_dilate, _SET + [("--fn", None, "function"), ("--ns", "1,2,4,8,16", "dilation indices"), ("--M", "factorial", "M-sequence"), ("--depth", 30, "series depth")]),
    ("mseq", "check"): (cmd_mseq_check, [("--M", None, "M-sequence"), ("--upto", 40, "algebra test bound on m+n"), ("--nonanalytic-upto", None, "tail length for the nonanalytic test")]),
    ("demo",): (cmd_demo, [("--N", None, "truncation depth"), ("--h", None, "resolution"), ("--formula", None, "zigzag cubic: hermite or printed"), ("--set-params", None, "builder parameters as JSON")]),
}

_COMMON = [("--seed", 0, "random seed"), ("--config", None, "JSON file of parameters (flags override)"), ("--out", None, "report path (default stdout)"), ("--csv", None, "CSV series path"), ("--svg", None, "SVG plot path")]


_INT = {"seed", "probes", "levels", "n", "depth", "degree_cap", "degree", "pole_order", "upto", "nonanalytic_upto", "N"}
_FLOAT = {"h", "tol", "threshold", "step", "cutoff", "eps", "residue_tol"}


def _coerce(params):
    out = {}
    for k, v in params.items():
        try:
            if v is None or isinstance(v, bool):
                out[k] = v
            elif k in _INT:
                out[k] = int(v)
            elif k in _FLOAT:
                out[k] = float(v)
            else:
                out[k] = v
        except (TypeError, ValueError):
            raise CliError(f"--{k.replace('_', '-')} expects a number, got {v!r}") from None
    for k in ("tol", "threshold", "eps", "h", "step", "residue_tol"):
        if out.get(k) is not None and not out[k] > 0:
            raise CliError(f"--{k.replace('_', '-')} must be positive")
    return out


def _dest(flag):
    return flag.lstrip("-").replace("-", "_")


def build_parser():
    parser = argparse.ArgumentParser(prog="pathcalc", description="Path-integral calculus on compact plane sets.")
    parser.add_argument("--version", action="version", version=f"pathcalc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    groups = {}
    for cmd, (_, opts) in COMMANDS.items():
        if len(cmd) == 1:
            sp = sub.add_parser(cmd[0], argument_default=argparse.SUPPRESS)
        else:
            if cmd[0] not in groups:
                groups[cmd[0]] = sub.add_parser(cmd[0]).add_subparsers(dest="subcommand", required=True)
            sp = groups[cmd[0]].add_parser(cmd[1], argument_default=argparse.SUPPRESS)
        if cmd == ("demo",):
            sp.add_argument("name", help="corpus entry")
        for flag, default, helptext in opts + _COMMON:
            if default is False:
                sp.add_argument(flag, action="store_true", help=helptext)
            else:
                sp.add_argument(flag, help=f"{helptext} (default {default})" if default is not None else helptext)
    return parser


@dataclass
class RunConfig:
    command: tuple
    params: dict = field(default_factory=dict)

    @property
    def seed(self):
        return int(self.params.get("seed", 0))


def resolve_config(argv=None):
    """Parse argv into a RunConfig: defaults, then --config JSON, then flags."""
    ns = vars(build_parser().parse_args(argv))
    command = (ns.pop("command"),) + ((ns.pop("subcommand"),) if "subcommand" in ns else ())
    _, opts = COMMANDS[command]
    params = {_dest(f): d for f, d, _ in opts + _COMMON}
    if ns.get("config") is not None:
        cfg = load_json(ns["config"], "config")
        if not isinstance(cfg, dict):
            raise CliError("config must be a JSON object")
        for k, v in cfg.items():
            k = _dest(k)
            if k not in params:
                raise CliError(f"unknown config key {k!r} for {' '.join(command)}")
            params[k] = v
    params.update(ns)
    return RunConfig(command, _coerce(params))


def _apply_threads():
    n = os.environ.get(THREADS_ENV)
    if not n:
        return None
    try:
        n = int(n)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be an integer, got {n!r}") from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def run(config, stdout=None):
    """Execute one command; returns the exit code. Always writes a JSON report."""
    stdout = stdout or sys.stdout
    p = dict(config.params)
    p["seed"] = int(p.get("seed") or 0)
    handler, _ = COMMANDS[config.command]
    report = {"command": " ".join(config.command), "engine_version": __version__, "schema_version": SCHEMA_VERSION}
    code = 0
    try:
        limiter = _apply_threads()
        try:
            out = handler(p, Inputs(p))
        finally:
            if limiter is not None:
                limiter.unregister()
        report["result"] = out.result
        report["verdict"] = "positive" if out.ok else "negative"
        code = 0 if out.ok else 2
        if p.get("csv") and out.series is not None:
            write_csv(p["csv"], *out.series)
        if p.get("svg") and out.plot is not None:
            write_svg(p["svg"], out.plot)
    except (PathCalcError, ValueError, KeyError, TypeError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else str(e)
        report["error"] = {"type": type(e).__name__, "message": str(msg)}
        code = 1
    report["params"] = {k: v for k, v in p.items() if k not in ("config", "out", "csv", "svg")}
    report["generated_at"] = timestamp()
    text = dumps_report(report)
    if p.get("out"):
        with open(p["out"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if code == 1:
        print(f"pathcalc: error: {report['error']['message']}", file=sys.stderr)
    return code


def main(argv=None):
    try:
        config = resolve_config(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; 2 is reserved for negative verdicts
        return 1 if e.code else 0
    except CliError as e:
        print(f"pathcalc: error: {e}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
