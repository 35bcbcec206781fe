"""
Command-line front end: ``svarma fit | simulate | eval | convert``.

Exit status is 0 on success, 1 on any error (including a fit whose best
start did not meet the gradient tolerance) and 2 when the fitted MA
polynomial has a root within ``1e-3`` of the unit circle.
"""
import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .calibrate import CalibrationError, FitOptions, fit, select_order
from .gradient import grad_profile_loglik
from .likelihood import (RegressorSet, VarmaSpec, conditional_loglik,
                         profile_loglik)
from .roots import is_invertible
from .simulate import (NoiseConfig, UnstableModelError, matrix_to_scalar,
                       simulate_matrix_varma, simulate_varma, transfer_deviation)

logger = logging.getLogger("svarma")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BOUNDARY = 2


def _read_seeds(path, q):
    rows = io.read_csv(path)
    seeds = []
    for r in rows:
        if r.size == q:
            r = np.r_[1.0, r]
        elif r.size != q + 1 or r[0] != 1.0:
            raise io.DocumentError(
                f"seed rows must hold theta_1..theta_{q} (optionally led by 1.0)")
        seeds.append(r)
    return seeds


def _fit_meta(res):
    return {
        "T": res.T,
        "converged": res.converged,
        "boundary_flag": res.boundary_flag,
        "iterations": res.iterations,
        "max_abs_grad": float(np.max(np.abs(res.grad), initial=0.0)),
        "seeds": [s.seed for s in res.starts],
        "starts": [{"index": s.index, "start_loglik": s.start_loglik if np.isfinite(s.start_loglik) else None,
                    "loglik": s.loglik if np.isfinite(s.loglik) else None,
                    "converged": s.converged, "iterations": s.iterations}
                   for s in res.starts],
    }


def fit_document(res):
    """Model document for a :class:`FitResult`."""
    spec = VarmaSpec(theta=res.theta, mu=res.mu, phi=res.phi, omega=res.omega,
                     beta_extra=res.beta_extra)
    return io.model_document(spec, res.regs, loglik=res.loglik, aic=res.aic,
                             bic=res.bic, fit_meta=_fit_meta(res))


def cmd_fit(args):
    X = io.read_csv(args.data)
    regs = RegressorSet(constant=not args.no_const, trend_degree=args.trend_degree,
                        seasonal_period=args.seasonal, ridge=args.ridge)
    opts = FitOptions(max_iters=args.max_iters, threads=args.threads)
    if args.mcmillan is not None:
        if args.seeds:
            raise ValueError("--seeds cannot be combined with --mcmillan")
        res, _ = select_order(X, args.mcmillan, regs, criterion=args.criterion, options=opts)
    else:
        if args.p is None or args.q is None:
            raise ValueError("--p and --q are required unless --mcmillan is given")
        if X.shape[0] <= args.p:
            raise ValueError(f"{X.shape[0]} rows cannot support p={args.p}")
        if args.seeds:
            opts = FitOptions(max_iters=args.max_iters, threads=args.threads,
                              seeds=_read_seeds(args.seeds, args.q))
        res = fit(X, args.p, args.q, regs, opts)
    io.write_document(args.output, fit_document(res))
    if res.boundary_flag:
        logger.warning("an MA root lies within 1e-3 of the unit circle")
        return EXIT_BOUNDARY
    if not res.converged:
        logger.error("best start did not reach the gradient tolerance (max |grad| = %.3g)",
                     np.max(np.abs(res.grad)))
        return EXIT_ERROR
    return EXIT_OK


def cmd_simulate(args):
    doc = io.read_document(args.model)
    noise = NoiseConfig(seed=args.seed, burn_in=args.burn_in)
    if doc.get("kind") == "matrix_varma":
        X = simulate_matrix_varma(io.matrix_model_from_document(doc), args.T, noise)
    else:
        spec, regs = io.spec_from_document(doc)
        if regs.n_extra:
            raise ValueError("simulation supports an intercept only (no trend or seasonal terms)")
        X = simulate_varma(spec, args.T, noise)
    if args.output in (None, "-"):
        sys.stdout.write(io.format_csv(X))
    else:
        io.write_csv(args.output, X)
    return EXIT_OK


def eval_report(doc, X, gradient=False):
    """Profile and conditional likelihood of a model document on a sample."""
    spec, regs = io.spec_from_document(doc)
    if X.shape[1] != spec.k:
        raise ValueError(f"data has {X.shape[1]} columns, model has k={spec.k}")
    if X.shape[0] <= spec.p:
        raise ValueError(f"{X.shape[0]} rows cannot support p={spec.p}")
    out = {
        "k": spec.k, "p": spec.p, "q": spec.q,
        "invertible": bool(is_invertible(spec.theta)),
        "profile": profile_loglik(spec.theta, X, regs).as_dict(),
        "conditional": conditional_loglik(spec, X, regs).as_dict(),
    }
    if gradient:
        g = grad_profile_loglik(spec.theta, X, regs)
        out["gradient"] = {"grad": g.grad.tolist(), "grad_omega": g.grad_omega.tolist(),
                           "grad_kbar": g.grad_kbar.tolist(),
                           "max_abs": float(np.max(np.abs(g.grad), initial=0.0))}
    return out


def cmd_eval(args):
    doc = io.read_document(args.model)
    X = io.read_csv(args.data)
    sys.stdout.write(io.dumps(eval_report(doc, X, args.gradient)))
    return EXIT_OK


def convert_document(doc, n_points=16, radius=0.5):
    model = io.matrix_model_from_document(doc)
    scalar = matrix_to_scalar(model)
    spec = scalar.to_spec()
    out = io.model_document(spec, RegressorSet(p=spec.p, constant=False))
    out["verification"] = {"points": n_points, "radius": radius,
                           "max_deviation": transfer_deviation(model, scalar, n_points, radius)}
    return out


def cmd_convert(args):
    doc = io.read_document(args.model)
    io.write_document(args.output, convert_document(doc))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="svarma", description="VARMA models with a scalar moving-average polynomial.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="maximum-likelihood fit from a CSV sample")
    f.add_argument("data")
    f.add_argument("--p", type=int, help="AR order")
    f.add_argument("--q", type=int, help="MA order")
    f.add_argument("--mcmillan", type=int, default=None,
                   help="select (p, q) <= m by information criterion instead")
    f.add_argument("--criterion", choices=("aic", "bic"), default="bic")
    f.add_argument("--no-const", action="store_true", help="drop the intercept")
    f.add_argument("--trend-degree", type=int, default=0)
    f.add_argument("--seasonal", type=int, default=0, help="seasonal dummy period")
    f.add_argument("--seeds", help="CSV of starting polynomials, one per row")
    f.add_argument("--threads", type=int, default=1)
    f.add_argument("--ridge", action="store_true",
                   help="regularise a rank-deficient design instead of failing")
    f.add_argument("--max-iters", type=int, default=200)
    f.add_argument("-o", "--output", default="-")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", help="draw a sample from a model document")
    s.add_argument("model")
    s.add_argument("--T", type=int, required=True, help="rows after the p conditioning rows")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--burn-in", type=int, default=None)
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("eval", help="log-likelihood report as JSON on stdout")
    e.add_argument("model")
    e.add_argument("data")
    e.add_argument("--gradient", action="store_true")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("convert", help="matrix-MA document to scalar-MA form")
    c.add_argument("model")
    c.add_argument("-o", "--output", default="-")
    c.set_defaults(func=cmd_convert)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="svarma: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, np.linalg.LinAlgError, CalibrationError,
            UnstableModelError, json.JSONDecodeError) as exc:
        logger.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
