"""CSV samples and versioned JSON model documents."""
import csv
import io as _io
import json
import math

import numpy as np

from .likelihood import RegressorSet, VarmaSpec
from .simulate import MatrixVarma

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    pass


def read_csv(path_or_text, text=False):
    """Read a numeric CSV; a non-numeric first row is taken as the header."""
    if text:
        raw = path_or_text
    else:
        with open(path_or_text, newline="") as fh:
            raw = fh.read()
    rows = [r for r in csv.reader(_io.StringIO(raw)) if r and any(c.strip() for c in r)]
    if not rows:
        raise DocumentError("CSV is empty")
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        rows = rows[1:]
    if not rows:
        raise DocumentError("CSV has a header but no data")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DocumentError(f"row {i + 1} has {len(r)} fields, expected {width}")
        try:
            out[i] = [float(c) for c in r]
        except ValueError as exc:
            raise DocumentError(f"row {i + 1}: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise DocumentError("missing or non-finite values are not supported")
    return out


def format_csv(X):
    X = np.atleast_2d(X)
    lines = [",".join(f"x{j + 1}" for j in range(X.shape[1]))]
    lines += [",".join(_fmt_float(v) for v in row) for row in X]
    return "\n".join(lines) + "\n"


def write_csv(path, X):
    with open(path, "w", newline="") as fh:
        fh.write(format_csv(X))


def _fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        raise DocumentError(f"cannot serialise non-finite value {x}")
    s = format(x, ".17g")
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def _dump(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _dump(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _dump(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc):
    """Canonical JSON: two-space indent, floats at 17 significant digits."""
    return _dump(doc, 2, 0) + "\n"


def write_document(path, doc):
    text = dumps(doc)
    if path in (None, "-"):
        print(text, end="")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_document(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"{path}: unsupported or missing schema_version")
    return doc


def regs_to_dict(regs):
    return {"constant": regs.constant, "trend_degree": regs.trend_degree,
            "seasonal_period": regs.seasonal_period}


def model_document(spec, regs=None, loglik=None, aic=None, bic=None, fit_meta=None):
    """Scalar-MA model document from a spec (and optional fit summary)."""
    regs = regs if regs is not None else RegressorSet(p=spec.p)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "scalar_varma",
        "k": spec.k,
        "p": spec.p,
        "q": spec.q,
        "theta": [float(v) for v in spec.theta],
        "mu": [float(v) for v in spec.mu],
        "phi": np.asarray(spec.phi, dtype=float).tolist(),
        "omega": np.asarray(spec.omega, dtype=float).tolist(),
        "regressors": regs_to_dict(regs),
        "beta_extra": None if spec.beta_extra is None else np.asarray(spec.beta_extra).tolist(),
        "loglik": loglik,
        "aic": aic,
        "bic": bic,
    }
    if fit_meta is not None:
        doc["fit"] = fit_meta
    return doc


def spec_from_document(doc):
    """Return ``(VarmaSpec, RegressorSet)`` from a scalar model document."""
    if doc.get("kind") != "scalar_varma":
        raise DocumentError(f"expected a scalar_varma document, got {doc.get('kind')!r}")
    try:
        k, p = int(doc["k"]), int(doc["p"])
        r = doc.get("regressors") or {}
        regs = RegressorSet(p=p, constant=bool(r.get("constant", True)),
                            trend_degree=int(r.get("trend_degree", 0)),
                            seasonal_period=int(r.get("seasonal_period", 0)))
        phi = np.asarray(doc["phi"], dtype=float).reshape(p, k, k) if p else np.zeros((0, k, k))
        spec = VarmaSpec(theta=doc["theta"], mu=doc["mu"], phi=phi, omega=doc["omega"],
                         beta_extra=doc.get("beta_extra"))
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"invalid model document: {exc}") from None
    if spec.k != k or spec.q != int(doc["q"]):
        raise DocumentError("dimensions in document are inconsistent")
    return spec, regs


def matrix_model_from_document(doc):
    """Matrix VARMA document in row form: ``ar`` = Phi_i, ``ma`` = Theta_j."""
    if doc.get("kind") != "matrix_varma":
        raise DocumentError(f"expected a matrix_varma document, got {doc.get('kind')!r}")
    try:
        k = int(doc["k"])
        ar = np.asarray(doc.get("ar", []), dtype=float).reshape(-1, k, k)
        ma = np.asarray(doc.get("ma", []), dtype=float).reshape(-1, k, k)
        return MatrixVarma.from_row_form(ar, ma, doc["omega"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"invalid matrix model document: {exc}") from None
