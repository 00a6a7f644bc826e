"""
Command-line front end.

    matdirac verify-all [--seed S] [--trials T] [--tol R] [--json PATH]
    matdirac nk construct|validate|classify ...
    matdirac field planewave|residual|current|divergence|polar ...

Exit codes: 0 pass, 1 check or assertion failure, 2 usage or input error.
"""

import argparse
import sys

import numpy as np

from . import nk as nkmod
from .commutant import lie_algebra_basis
from .dynamics import (
    build_plane_wave,
    current_J,
    dirac_residual,
    divergence,
    kg_residual,
    random_solution,
    residual_scale,
    sup_norm,
)
from .errors import MatDiracError
from .fields import GaugeTransformField
from .gauge import GaugeField, gauge_transform, polar_gauge, ym_residual
from .linalg import Tolerances
from .sampling import make_rng, random_antihermitian, random_real_scalar_field, random_unitary
from .serialization import dumps, load_json_arg, matrix_from_json, matrix_to_json
from .verify import RunConfig, run_all

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# relative sup-norm accepted by --assert-zero at the default tolerance
ASSERT_ZERO_REL = 1e-9


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _signs(text):
    vals = [int(v) for v in _floats(text)]
    if any(v not in (1, -1) for v in vals):
        raise argparse.ArgumentTypeError("sign pattern entries must be +1 or -1")
    return vals


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--l", type=int, default=None, help="matrix size l (default 4; 1 for --standard)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--tol", type=float, default=Tolerances().rel, help="relative tolerance")
    p.add_argument("--samples", type=int, default=10, help="sample points per check")
    p.add_argument("--json", metavar="PATH", default=None, help="write JSON here instead of stdout")
    p.add_argument("--strict", action="store_true", help="exit 1 when validation fails")
    p.add_argument("--assert-zero", action="store_true", help="exit 1 when the reported residual is not zero")
    p.add_argument("--timings", action="store_true", help="include elapsed_ms in reports")
    return p


def _pair_source(p):
    g = p.add_argument_group("pair source")
    g.add_argument("--pair", help="NKPair JSON (inline or file path)")
    g.add_argument("--N", dest="N", help="matrix JSON for N")
    g.add_argument("--K", dest="K", help="matrix JSON for K")
    g.add_argument("--standard", action="store_true", help="N = 1, K = 0")
    g.add_argument("--diagonal", action="store_true", help="diagonal pair z_k, y_k with z_k^2 + y_k^2 = 1")
    g.add_argument("--jordan", action="store_true", help="4x4 nilpotent-polynomial pair")
    g.add_argument("--canonical", action="store_true", help="canonical pair (random unless parameters given)")
    g.add_argument("--z", type=_floats, default=None)
    g.add_argument("--y", type=_floats, default=None)
    g.add_argument("--blocks", type=_floats, default=None, help="angle block sizes 'p,q'")
    g.add_argument("--xi", type=float, default=None)
    g.add_argument("--eta", type=float, default=None)
    g.add_argument("--signs", type=_signs, default=None, help="sign pattern for the signs form")
    g.add_argument("--signs-k", type=_signs, default=None, help="separate sign pattern for K")
    g.add_argument("--random-U", action="store_true", help="draw a random unitary frame from --seed")


def build_parser():
    common = _common()
    parser = _Parser(prog="matdirac", description="Matrix Dirac equation verification toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("verify-all", parents=[common], help="run every verification suite")

    nk_p = sub.add_parser("nk", help="construct, validate or classify (N, K) pairs")
    nk_sub = nk_p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("construct", "validate", "classify"):
        sp = nk_sub.add_parser(name, parents=[common])
        _pair_source(sp)

    fp = sub.add_parser("field", help="plane waves, residuals, currents and polar gauge")
    f_sub = fp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("planewave", "residual", "current", "divergence", "polar"):
        sp = f_sub.add_parser(name, parents=[common])
        _pair_source(sp)
        sp.add_argument("--m", type=float, default=1.0, help="mass")
        sp.add_argument("--p", "--momentum", dest="mom", type=_floats, default=None,
                        help="covariant momentum p_mu as 'E,px,py,pz'")
        sp.add_argument("--modes", type=int, default=3, help="plane waves in a random solution")
    return parser


# helpers ---------------------------------------------------------------------


def _tolerances(args):
    try:
        return Tolerances(rel=args.tol)
    except ValueError as exc:
        raise _UsageError(str(exc))


def _emit(obj, args):
    text = dumps(obj) + "\n"
    if args.json:
        try:
            with open(args.json, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise _UsageError(f"cannot write {args.json}: {exc}")
    else:
        sys.stdout.write(text)


def _size(args, default):
    l = default if args.l is None else args.l
    if l < 1:
        raise _UsageError("--l must be positive")
    return l


def _pair_from_args(args, rng, tol):
    if args.pair:
        return nkmod.NKPair.from_json(load_json_arg(args.pair), tol)
    if args.N or args.K:
        if not (args.N and args.K):
            raise _UsageError("--N and --K must be given together")
        N = matrix_from_json(load_json_arg(args.N))
        K = matrix_from_json(load_json_arg(args.K))
        return nkmod.NKPair.from_matrices(N, K, tol=tol)
    if args.standard:
        return nkmod.standard_pair(_size(args, 1))
    if args.jordan:
        z = args.z[0] if args.z else 0.6
        y = args.y[0] if args.y else 0.8
        V = random_unitary(rng, 4) if args.random_U else None
        return nkmod.make_jordan_pair(z, y, V, tol)
    if args.diagonal:
        if args.z is None or args.y is None:
            raise _UsageError("--diagonal needs --z and --y lists")
        if len(args.z) != len(args.y):
            raise _UsageError("--z and --y must have the same length")
        l = len(args.z)
        V = random_unitary(rng, l) if args.random_U else np.eye(l)
        return nkmod.make_diagonal_pair(np.array(args.z), np.array(args.y), V, tol)
    return nkmod.make_canonical(_canonical_spec(args, rng), tol)


def _canonical_spec(args, rng):
    from .verify import random_canonical

    given = (args.blocks, args.xi, args.eta, args.signs)
    if all(v is None for v in given):
        return random_canonical(rng, _size(args, 4))
    if args.signs is not None:
        l = len(args.signs)
        U = random_unitary(rng, l) if args.random_U else np.eye(l)
        return nkmod.CanonicalNK("signs", U, xi=args.xi or 0.0, sign_pattern=tuple(args.signs),
                                 sign_pattern_k=None if args.signs_k is None else tuple(args.signs_k))
    if args.blocks is None or len(args.blocks) != 2 or any(b < 0 or b != int(b) for b in args.blocks):
        raise _UsageError("canonical angles form needs --blocks p,q")
    p, q = (int(b) for b in args.blocks)
    if p + q == 0:
        raise _UsageError("--blocks must not both be zero")
    U = random_unitary(rng, p + q) if args.random_U else np.eye(p + q)
    return nkmod.CanonicalNK("angles", U, p=p, q=q, xi=args.xi or 0.0, eta=args.eta or 0.0)


def _sample_points(rng, n):
    return 1.5 * rng.standard_normal((n, 4))


# commands --------------------------------------------------------------------


def cmd_verify_all(args):
    try:
        cfg = RunConfig(l=_size(args, 4), seed=args.seed, trials=args.trials, tol=_tolerances(args),
                        sample_points=args.samples, output=args.json, timings=args.timings)
    except ValueError as exc:
        raise _UsageError(str(exc))
    report = run_all(cfg)
    _emit(report.to_json(timings=args.timings), args)
    return EXIT_OK if report.failed == 0 else EXIT_FAIL


def cmd_nk(args):
    tol = _tolerances(args)
    rng = make_rng(args.seed)
    pair = _pair_from_args(args, rng, tol)
    if args.action == "construct":
        out = pair.to_json()
        out.update(satisfies_consistency=pair.satisfies_consistency, satisfies_structure=pair.satisfies_structure, hermitian=pair.hermitian)
        _emit(out, args)
        return EXIT_OK
    if args.action == "validate":
        res = nkmod.validate_consistency(pair.N, pair.K, tol)
        _emit({
            "l": pair.l,
            "commutator_residual": res.commutator_residual,
            "square_residual": res.square_residual,
            "satisfies_consistency": pair.satisfies_consistency,
            "satisfies_structure": pair.satisfies_structure,
            "hermitian": pair.hermitian,
        }, args)
        return EXIT_FAIL if args.strict and not pair.satisfies_consistency else EXIT_OK
    canon = nkmod.classify(pair.N, pair.K, tol)
    _emit(canon.to_json(), args)
    return EXIT_OK


def _scale(psi, m):
    return residual_scale(psi, m) * psi.coeff_norm()


def cmd_field(args):
    tol = _tolerances(args)
    rng = make_rng(args.seed)
    pair = _pair_from_args(args, rng, tol)
    m = args.m
    if m < 0:
        raise _UsageError("--m must be non-negative")
    if args.samples < 1:
        raise _UsageError("--samples must be at least 1")
    bound = ASSERT_ZERO_REL * tol.rel / Tolerances().rel

    if args.action == "planewave":
        if args.mom is None or len(args.mom) != 4:
            raise _UsageError("planewave needs --p E,px,py,pz")
        sol = build_plane_wave(np.array(args.mom), pair, m, tol)
        _emit(sol.to_json(), args)
        return EXIT_OK

    if args.action == "polar":
        return _cmd_polar(args, rng, pair, m, tol)

    if args.mom is not None:
        if len(args.mom) != 4:
            raise _UsageError("--p needs four components")
        sol = build_plane_wave(np.array(args.mom), pair, m, tol)
        if sol.dim == 0:
            raise _UsageError("no plane-wave solution at this momentum")
        psi = sol.field(rng.standard_normal(sol.dim) + 1j * rng.standard_normal(sol.dim))
    else:
        psi = random_solution(rng, pair, m, n_momenta=args.modes, tol=tol)
    pts = _sample_points(rng, args.samples)
    basis = lie_algebra_basis(pair.N, pair.K, tol)
    scale = _scale(psi, m)

    if args.action == "residual":
        a0 = GaugeField.zero(pair.l, basis)
        dirac = sup_norm(dirac_residual(psi, pair, m), pts) / residual_scale(psi, m)
        kg = sup_norm(kg_residual(psi, m), pts) / residual_scale(psi, m, order=2)
        from .gauge import field_strength

        f0 = field_strength(a0)
        ym = max(np.linalg.norm(ym_residual(a0, f0, psi, basis, x)) for x in pts)
        _emit({"dirac": dirac, "klein_gordon": kg, "yang_mills_free_gauge": float(ym),
               "relative": True, "samples": args.samples}, args)
        failed = args.assert_zero and max(dirac, kg) > bound
        return EXIT_FAIL if failed else EXIT_OK

    J = current_J(psi, basis)
    div = sup_norm(divergence(J), pts) / scale
    out = {"l": pair.l, "dim_L": basis.dim_R, "divergence_sup": div, "relative": True, "samples": args.samples}
    if args.action == "current":
        out["points"] = [[float(v) for v in x] for x in pts]
        out["J"] = [[matrix_to_json(J.value(x)[nu]) for nu in range(4)] for x in pts]
    _emit(out, args)
    return EXIT_FAIL if args.assert_zero and div > bound else EXIT_OK


def _cmd_polar(args, rng, pair, m, tol):
    basis = lie_algebra_basis(pair.N, pair.K, tol)
    psi0 = random_solution(rng, pair, m, n_momenta=args.modes, tol=tol)
    V = GaugeTransformField(random_antihermitian(rng, pair.l), random_real_scalar_field(rng, 2))
    psi, a, _ = gauge_transform(psi0, GaugeField.zero(pair.l, basis), V, pair)
    samples = polar_gauge(psi, a, list(_sample_points(rng, args.samples)), pair, tol)
    records = []
    worst = 0.0
    for s in samples:
        rec = s.to_json()
        r = float(np.linalg.norm(s.covariant_residual(pair, m)))
        rec["covariant_residual"] = r
        worst = max(worst, r)
        records.append(rec)
    _emit({"samples": records, "max_covariant_residual": worst}, args)
    return EXIT_FAIL if args.assert_zero and worst > 1e-6 else EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.trials < 1 or args.samples < 1:
            raise _UsageError("--trials and --samples must be at least 1")
        handler = {"verify-all": cmd_verify_all, "nk": cmd_nk, "field": cmd_field}[args.command]
        return handler(args)
    except _UsageError as exc:
        sys.stderr.write(f"matdirac: error: {exc}\n")
        return EXIT_USAGE
    except MatDiracError as exc:
        sys.stderr.write(f"matdirac: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
