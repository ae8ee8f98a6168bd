"""Command-line front end: ``python -m src.run <command> ...``.

Reports go to stdout (or ``--out``) as sorted JSON; logs go to stderr.
Exit codes: 0 computed (whatever the verdict), 1 usage or input error,
2 enumeration budget exceeded.
"""
import argparse
import json
import platform
import sys
import time
from fractions import Fraction
from pathlib import Path

from src import __version__
from src.algebra.exactlin import QQ, Matrix, field_from_tag
from src.config import get_settings, override, reset_overrides
from src.data import serialize as ser
from src.data.writer import write_rows
from src.errors import BudgetExceeded, InfeasibleConstruction, KroneckerError, MalformedInput
from src.higgs.higgsbridge import su11_component
from src.higgs.realforms import SymmetryClass, realform_check, sostar_construct, sostar_even, sp_generate
from src.logs import configure, get_logger
from src.stability.feathered import (feathered_verdict, flag_correction, mu_flag_configuration, mu_grassmannian,
                                     mu_pair, perturbation_threshold, small_perturbation_check)
from src.stability.kronecker import (INFINITY, existence, is_good_prime, king_bruteforce, lift_semistable, mu_chi,
                                     mu_chi_eigen, pencil)
from src.stability.scaling import king_scaling
from src.weights.multiweight import certificate, degree_vectors, torsion_twist
from src.weights.sweep import sweep
from src.weights.weightgen import ConstructionInput, construct_constant, construct_sp, default_profile

log = get_logger("cli")

SWEEP_FORMATS = ("csv", "parquet")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- argument helpers ---------------------------------------------------------

def rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}")


def rational_list(text):
    return [rational(x) for x in text.split(",") if x.strip()]


def int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}")


def json_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"not valid JSON: {e}")


def _q(x):
    return None if x is None else ser.frac_to_str(x)


def _mu(x):
    return "infinity" if x == INFINITY else ser.frac_to_str(x)


def _profile(values, s):
    if values is None:
        return None
    return values * s if len(values) == 1 else values


def _matrix(doc, field):
    return Matrix.from_rows(field, [[ser.scalar_from_json(field, x) for x in row] for row in doc])


# -- commands -------------------------------------------------------------------

def _construction_result(built):
    cert = certificate(built.mw, built.d)
    deg_u, deg_v = degree_vectors(built.mw, built.d)
    return {
        "feasible": True,
        "a": built.a, "k": built.k, "r": built.r, "d": built.d,
        "k_profile": list(built.k_profile),
        "epsilon_profile": [_q(e) for e in built.epsilon_profile],
        "multiweight": ser.multiweight_to_json(built.mw),
        "certificate": ser.certificate_to_json(cert),
        "degree_vectors": {"U": [_q(x) for x in deg_u], "V": [_q(x) for x in deg_v]},
    }


def _infeasible(e):
    return {"feasible": False, "constraint": e.constraint, "detail": e.detail}


def cmd_weights_construct(args):
    try:
        profile = _profile(args.eps_profile, args.s) or default_profile(args.p, args.q, args.s, args.a)
        built = construct_constant(ConstructionInput(args.p, args.q, args.s, args.a, tuple(profile)))
    except InfeasibleConstruction as e:
        return _infeasible(e)
    return _construction_result(built)


def cmd_weights_certify(args):
    mw = ser.multiweight_from_json(ser.load_json(args.file, "multiweight"))
    return ser.certificate_to_json(certificate(mw, args.d))


def cmd_weights_sp(args):
    try:
        built = construct_sp(args.p, args.s, _profile(args.eps_profile, args.s))
    except InfeasibleConstruction as e:
        return _infeasible(e)
    return _construction_result(built)


def cmd_weights_twist(args):
    mw = ser.multiweight_from_json(ser.load_json(args.file, "multiweight"))
    line, twisted, d = torsion_twist(args.phi, mw, args.d)
    return {"line": ser.line_to_json(line), "multiweight": ser.multiweight_to_json(twisted), "d": d,
            "certificate": ser.certificate_to_json(certificate(twisted, d))}


def cmd_stability_king(args):
    A = ser.tuple_from_json(ser.load_json(args.file, "matrix_tuple"), args.field)
    if A.field == QQ:
        report = lift_semistable(A)
        scaled = king_scaling(A)
        out = {"status": report.status, "per_prime": {str(k): v for k, v in report.per_prime.items()},
               "scaling": {"outcome": scaled.outcome.value, "residual": scaled.residual,
                           "iterations": scaled.iterations, "log_capacity": scaled.log_capacity}}
        if report.witness is not None:
            u, v = report.witness
            out["witness"] = {"U": ser.subspace_to_json(u), "V": ser.subspace_to_json(v)}
        return out
    return ser.verdict_to_json(king_bruteforce(A))


def cmd_stability_feathered(args):
    A = ser.tuple_from_json(ser.load_json(args.tuple, "matrix_tuple"), args.field)
    cfg = ser.flags_from_json(ser.load_json(args.flags, "flag_configuration"))
    if cfg.p_flags[0][0].field != A.field:
        raise MalformedInput(f"flags live over {cfg.p_flags[0][0].field.tag}, tuple over {A.field.tag}")
    fw = ser.feathers_from_json(ser.load_json(args.feathers, "feather_weights"))
    check = small_perturbation_check if args.small else feathered_verdict
    out = ser.verdict_to_json(check(A, cfg, fw))
    out["threshold"] = _mu(perturbation_threshold(A, cfg, fw))
    out["mode"] = "small" if args.small else "exact"
    out["feathers"] = ser.feathers_to_json(fw)
    return out


def cmd_mu_chi(args):
    A = ser.tuple_from_json(ser.load_json(args.tuple, "matrix_tuple"), args.field)
    lam = ser.subgroup_from_json(ser.load_json(args.subgroup, "subgroup"), A.field, A.p, A.q)
    out = {"mu_chi": _mu(mu_chi(lam, A)), "mu_chi_eigen": _mu(mu_chi_eigen(lam, A))}
    if args.flags:
        cfg = ser.flags_from_json(ser.load_json(args.flags, "flag_configuration"))
        fw = ser.feathers_from_json(ser.load_json(args.feathers, "feather_weights"))
        out["mu_flag_configuration"] = _mu(mu_flag_configuration(lam, A, cfg, fw))
    return out


def cmd_mu_grass(args):
    field = field_from_tag(args.field)
    lam = ser.subgroup_from_json(ser.load_json(args.subgroup, "subgroup"), field, args.p, args.q)
    n = args.p if args.side == "p" else args.q
    grading = lam.grading_p if args.side == "p" else lam.grading_q
    F = ser.subspace_from_json(field, n, args.span)
    return {"mu": _mu(mu_grassmannian(grading, F, F.dim, n)), "i": F.dim}


def cmd_mu_pair(args):
    cfg = ser.flags_from_json(ser.load_json(args.flags, "flag_configuration"))
    fw = ser.feathers_from_json(ser.load_json(args.feathers, "feather_weights"))
    field = cfg.p_flags[0][0].field
    u = ser.subspace_from_json(field, cfg.p, args.u)
    v = ser.subspace_from_json(field, cfg.q, args.v)
    return {"mu": _mu(mu_pair(u, v, cfg, fw)), "flag_correction": _mu(flag_correction(u, v, cfg, fw)),
            "king_balance": cfg.p * v.dim - cfg.q * u.dim}


def cmd_pencil(args):
    field = field_from_tag(args.field)
    a1, a2 = _matrix(args.a1, field), _matrix(args.a2, field)
    res = pencil(a1, a2)
    out = {"semistable": res.semistable,
           "binary_form": [ser.scalar_to_json(field, c) for c in res.binary_form],
           "raw_form": [ser.scalar_to_json(field, c) for c in res.raw_form]}
    if field == QQ:
        out["good_primes"] = [ell for ell in get_settings().primes if is_good_prime(a1, a2, ell)]
    return out


def _realform_result(found, kind):
    return {"tuple": ser.tuple_to_json(found.tuple), "kind": kind.value,
            "check": realform_check(found.tuple, kind), "attempts": found.attempts,
            "certificates": {str(k): v for k, v in found.certificates.items()}}


def cmd_realform_sostar(args):
    build = sostar_even if args.p % 2 == 0 else sostar_construct
    return _realform_result(build(args.p, seed=args.seed), SymmetryClass.ANTISYMMETRIC)


def cmd_realform_sp(args):
    return _realform_result(sp_generate(args.p, args.s, seed=args.seed), SymmetryClass.SYMMETRIC)


def cmd_sweep(args):
    if getattr(args, "out", None) in SWEEP_FORMATS:
        # `sweep --out csv` names the row format; the report then goes to stdout
        args.format = args.out
        del args.out
    rows = sweep(args.p, args.q, args.s, args.grid, a=args.a, search_draws=args.search_draws,
                 search_prime=args.prime, seed=args.seed)
    path = Path(args.rows or f"sweep.{args.format}")
    if args.format == "parquet" and path.suffix != ".parquet":
        path = path.with_suffix(".parquet")
    written = write_rows(rows, path)
    return {"rows": written, "path": str(path), "format": args.format,
            "feasible": sum(1 for r in rows if r["feasible"])}


def cmd_component_su11(args):
    try:
        comp = su11_component(args.s, args.beta)
    except InfeasibleConstruction as e:
        return _infeasible(e)
    return {"feasible": True, "s": comp.s, "dim": comp.dim, "d": comp.d,
            "stability_threshold": _q(comp.stability_threshold), "beta_sum": _q(comp.beta_sum),
            "variety": f"P^{comp.dim}"}


def cmd_existence(args):
    rep = existence(args.p, args.q, args.r)
    return {"kind": rep.kind.value, "all_semistable_stable": rep.all_semistable_stable,
            "moduli_dim": rep.moduli_dim, "ratio_sum": _q(rep.ratio_sum),
            "ratio_test": rep.ratio_sum < args.r}


# -- parser ---------------------------------------------------------------------

def _common():
    # defaults are suppressed so the flags work before or after the subcommand
    common = Parser(add_help=False)
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--timing", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--log-level", default=argparse.SUPPRESS,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--out", default=argparse.SUPPRESS)
    return common


def build_parser():
    common = _common()
    parser = Parser(prog="kronecker", parents=[common],
                    description="Compactness certificates and Kronecker stability oracles")
    cmds = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    def leaf(group, name, func, **kw):
        sub = group.add_parser(name, parents=[common], **kw)
        sub.set_defaults(func=func)
        return sub

    weights = cmds.add_parser("weights").add_subparsers(dest="action", required=True, parser_class=Parser)
    sub = leaf(weights, "construct", cmd_weights_construct)
    for flag in ("--p", "--q", "--s", "--a"):
        sub.add_argument(flag, type=int, required=True)
    sub.add_argument("--eps-profile", type=rational_list)
    sub = leaf(weights, "certify", cmd_weights_certify)
    sub.add_argument("--file", required=True)
    sub.add_argument("--d", type=int, required=True)
    sub = leaf(weights, "sp", cmd_weights_sp)
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--eps-profile", type=rational_list)
    sub = leaf(weights, "twist", cmd_weights_twist)
    sub.add_argument("--phi", type=int_list, required=True)
    sub.add_argument("--file", required=True)
    sub.add_argument("--d", type=int, required=True)

    stability = cmds.add_parser("stability").add_subparsers(dest="action", required=True, parser_class=Parser)
    sub = leaf(stability, "king", cmd_stability_king)
    sub.add_argument("--file", required=True)
    sub.add_argument("--field")
    sub = leaf(stability, "feathered", cmd_stability_feathered)
    sub.add_argument("--tuple", required=True)
    sub.add_argument("--flags", required=True)
    sub.add_argument("--feathers", required=True)
    sub.add_argument("--field")
    sub.add_argument("--small", action="store_true", help="small-perturbation verdict instead of exact weights")

    mu = cmds.add_parser("mu").add_subparsers(dest="action", required=True, parser_class=Parser)
    sub = leaf(mu, "chi", cmd_mu_chi)
    sub.add_argument("--tuple", required=True)
    sub.add_argument("--subgroup", required=True)
    sub.add_argument("--field")
    sub.add_argument("--flags")
    sub.add_argument("--feathers")
    sub = leaf(mu, "grass", cmd_mu_grass)
    sub.add_argument("--subgroup", required=True)
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--q", type=int, required=True)
    sub.add_argument("--side", choices=["p", "q"], default="p")
    sub.add_argument("--span", type=json_arg, required=True)
    sub.add_argument("--field", default="ql")
    sub = leaf(mu, "pair", cmd_mu_pair)
    sub.add_argument("--flags", required=True)
    sub.add_argument("--feathers", required=True)
    sub.add_argument("--u", type=json_arg, required=True)
    sub.add_argument("--v", type=json_arg, required=True)

    sub = leaf(cmds, "pencil", cmd_pencil)
    sub.add_argument("--a1", type=json_arg, required=True)
    sub.add_argument("--a2", type=json_arg, required=True)
    sub.add_argument("--field", default="ql")

    realform = cmds.add_parser("realform").add_subparsers(dest="action", required=True, parser_class=Parser)
    sub = leaf(realform, "sostar", cmd_realform_sostar)
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub = leaf(realform, "sp", cmd_realform_sp)
    sub.add_argument("--p", type=int, required=True)
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--seed", type=int, default=0)

    sub = leaf(cmds, "sweep", cmd_sweep)
    for flag in ("--p", "--q", "--s", "--grid"):
        sub.add_argument(flag, type=int, required=True)
    sub.add_argument("--a", type=int)
    sub.add_argument("--search-draws", type=int, default=0)
    sub.add_argument("--prime", type=int, default=5)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--format", choices=SWEEP_FORMATS, default="csv")
    sub.add_argument("--rows", help="table path; defaults to sweep.<format>")

    component = cmds.add_parser("component").add_subparsers(dest="action", required=True, parser_class=Parser)
    sub = leaf(component, "su11", cmd_component_su11)
    sub.add_argument("--s", type=int, required=True)
    sub.add_argument("--beta", type=rational_list, required=True)

    sub = leaf(cmds, "existence", cmd_existence)
    for flag in ("--p", "--q", "--r"):
        sub.add_argument(flag, type=int, required=True)
    return parser


_GLOBAL = {"budget", "threads", "timing", "log_level", "out", "func", "command", "action"}


def _report(args, result, elapsed):
    name = " ".join(x for x in (args.command, getattr(args, "action", None)) if x)
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in _GLOBAL}
    doc = {
        "command": name,
        "input": json.loads(json.dumps(echo, default=str)),
        "result": result,
        "seed": echo.get("seed"),
        "versions": {"kronecker": __version__, "python": platform.python_version()},
    }
    if getattr(args, "timing", False):
        doc["wall_time"] = round(elapsed, 6)
    return ser.validate_doc(doc, "run_report")


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    reset_overrides()
    configure(getattr(args, "log_level", None) or get_settings().log_level)
    override(budget=getattr(args, "budget", None), threads=getattr(args, "threads", None))
    start = time.perf_counter()
    try:
        result = args.func(args)
    except BudgetExceeded as e:
        log.error("%s", e)
        return 2
    except (KroneckerError, ValueError, KeyError, ZeroDivisionError) as e:
        log.error("%s: %s", type(e).__name__, e)
        return 1
    text = ser.dumps(_report(args, result, time.perf_counter() - start))
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
