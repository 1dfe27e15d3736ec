"""JSON and CSV encodings used by the command-line front end.

Floats are written with 17 significant digits so a write/read cycle is
lossless; complex numbers are ``[re, im]`` pairs.
"""

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .filters import CycleSet, FilterBank, Grid, LaurentPoly, SampledFunction
from .frames import VectorFamily
from .kernel import BiKernel, FiniteKernel
from .structured_reps import FiniteGroup, GaborSystem, StateFunctional


def _num(x):
    x = float(x) + 0.0
    if not math.isfinite(x):
        return "null"
    text = "%.17g" % x
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    sep = ",\n" if indent else ", "
    nl = "\n" if indent else ""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return "[%s, %s]" % (_num(obj.real), _num(obj.imag))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + ": " + _encode(v, indent, level + 1)
                 for k, v in obj.items()]
        return "{" + nl + sep.join(items) + nl + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # short numeric rows stay on one line
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, 0, 0) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[" + nl + sep.join(items) + nl + end + "]"
    raise TypeError("cannot encode %r" % type(obj))


def dumps(obj, indent=2) -> str:
    return _encode(obj, indent, 0)


# ------------------------------------------------------------- complex arrays

def cvec_to_json(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128).ravel()]


def cmat_to_json(m):
    m = np.asarray(m, dtype=np.complex128)
    return [cvec_to_json(row) for row in m]


def _scalar(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValidationError("complex numbers are [re, im] pairs")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    raise ValidationError("expected a number or [re, im] pair, got %r" % (x,))


def cvec_from_json(data):
    if not isinstance(data, list):
        raise ValidationError("expected a list of complex entries")
    return np.array([_scalar(x) for x in data], dtype=np.complex128)


def cmat_from_json(data):
    if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
        raise ValidationError("expected a list of rows")
    if not data:
        return np.zeros((0, 0), dtype=np.complex128)
    rows = [cvec_from_json(r) for r in data]
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("ragged matrix")
    return np.array(rows)


def _require(data, *keys):
    if not isinstance(data, dict):
        raise ValidationError("expected a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ValidationError("missing field(s): %s" % ", ".join(missing))


# ---------------------------------------------------------------- kernels

def kernel_to_json(k: FiniteKernel):
    return {"points": list(k.points), "gram": cmat_to_json(k.gram)}


def kernel_from_json(data) -> FiniteKernel:
    _require(data, "points", "gram")
    return FiniteKernel(tuple(data["points"]), cmat_from_json(data["gram"]))


def bikernel_to_json(l: BiKernel):
    return {"left_points": list(l.left_points), "right_points": list(l.right_points),
            "values": cmat_to_json(l.values)}


def bikernel_from_json(data) -> BiKernel:
    _require(data, "left_points", "right_points", "values")
    vals = cmat_from_json(data["values"])
    if vals.size == 0:
        vals = np.zeros((len(data["left_points"]), len(data["right_points"])))
    return BiKernel(tuple(data["left_points"]), tuple(data["right_points"]), vals)


def gram_csv(k: FiniteKernel) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col", "re", "im"])
    for i, a in enumerate(k.points):
        for j, b in enumerate(k.points):
            z = k.gram[i, j]
            w.writerow([a, b, _num(z.real), _num(z.imag)])
    return buf.getvalue()


# ------------------------------------------------------- groups and Gabor

def group_to_json(g: FiniteGroup):
    return {"order": g.order, "cayley": np.asarray(g.cayley).tolist()}


def group_from_json(data) -> FiniteGroup:
    _require(data, "order", "cayley")
    table = np.asarray(data["cayley"], dtype=int)
    if table.shape != (data["order"], data["order"]):
        raise ValidationError("cayley table does not match the order")
    return FiniteGroup(table)


def gabor_to_json(s: GaborSystem):
    return {"lambda": [s.lam.real, s.lam.imag], "dim": s.dim, "U": cmat_to_json(s.U),
            "V": cmat_to_json(s.V), "xi0": cvec_to_json(s.xi0)}


def gabor_from_json(data) -> GaborSystem:
    _require(data, "lambda", "dim", "U", "V", "xi0")
    d = int(data["dim"])
    u, v = cmat_from_json(data["U"]), cmat_from_json(data["V"])
    xi = cvec_from_json(data["xi0"])
    if d and (u.shape != (d, d) or v.shape != (d, d) or xi.shape != (d,)):
        raise ValidationError("Gabor matrices do not match dim")
    return GaborSystem(_scalar(data["lambda"]), d, u.reshape(d, d), v.reshape(d, d), xi)


def state_from_json(data) -> StateFunctional:
    _require(data, "rho")
    return StateFunctional(cmat_from_json(data["rho"]))


def family_to_json(f: VectorFamily):
    return {"dim": f.dim, "vectors": [{"label": l, "v": cvec_to_json(v)}
                                      for l, v in zip(f.labels, f.vectors)]}


def family_from_json(data) -> VectorFamily:
    _require(data, "dim", "vectors")
    vecs = [cvec_from_json(e["v"]) for e in data["vectors"]]
    labels = tuple(e.get("label", str(i)) for i, e in enumerate(data["vectors"]))
    return VectorFamily(int(data["dim"]), tuple(vecs), labels)


# ---------------------------------------------------------------- filters

def poly_to_json(p: LaurentPoly):
    return [{"k": k, "re": float(c.real), "im": float(c.imag)} for k, c in p.items()]


def poly_from_json(entries) -> LaurentPoly:
    if not isinstance(entries, list):
        raise ValidationError("coeffs must be a list")
    out = {}
    for e in entries:
        _require(e, "k")
        out[int(e["k"])] = out.get(int(e["k"]), 0) + complex(float(e.get("re", 0)),
                                                             float(e.get("im", 0)))
    return LaurentPoly.from_dict(out)


def filter_to_json(m0: LaurentPoly, N=2):
    return {"N": N, "coeffs": poly_to_json(m0)}


def filter_from_json(data):
    """(N, m0, bank or None); a bank may be given as "filters": [coeffs, ...]."""
    _require(data, "N")
    N = int(data["N"])
    if N < 2:
        raise ValidationError("scale N must be >= 2")
    if "filters" in data:
        polys = tuple(poly_from_json(c) for c in data["filters"])
        return N, polys[0], FilterBank(N, polys)
    _require(data, "coeffs")
    return N, poly_from_json(data["coeffs"]), None


def bank_to_json(bank: FilterBank):
    return {"N": bank.N, "filters": [poly_to_json(m) for m in bank.filters]}


def cycles_to_json(cs: CycleSet):
    return {"N": cs.N, "cycles": [
        {"angles": [str(a) for a in c.angles], "phases": list(c.phases),
         "total_phase": c.total_phase, "length": c.length} for c in cs]}


def sampled_to_csv(f: SampledFunction) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "re", "im"])
    for x, z in zip(f.grid.points, f.values):
        w.writerow([_num(x), _num(z.real), _num(z.imag)])
    return buf.getvalue()


def sampled_from_csv(text, domain="time") -> SampledFunction:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["x", "re", "im"]:
        raise ValidationError("expected header x,re,im")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    if len(data) < 2:
        raise ValidationError("need at least two samples")
    step = data[1, 0] - data[0, 0]
    grid = Grid(float(data[0, 0]), float(step), len(data))
    return SampledFunction(grid, data[:, 1] + 1j * data[:, 2], domain)


def dilated_to_csv(v) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "block", "component", "re", "im"])
    xs = [_num(x) for x in v.grid.points]
    for j, block in enumerate(v.blocks):
        for k, row in enumerate(block):
            for x, z in zip(xs, row):
                w.writerow([x, j, k, _num(z.real), _num(z.imag)])
    return buf.getvalue()
