"""Command-line front end.

Every subcommand writes a JSON result document (to ``--out`` or stdout)
and a one-line summary.  Simulation subcommands write CSV to ``--out``
instead.  Exit codes:

    0   positive verdict / member / success
    1   negative verdict (NOT_POSITIVE, NON_MEMBER); the run itself succeeded
    2   UNKNOWN (heuristic search was inconclusive)
    64  usage error
    65  input validation error (including a rejected --verify certificate)
    70  internal error (e.g. a certificate that failed self-verification)
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from cornerpd import io
from cornerpd.definiteness import Verdict, cpd_exact, cpd_refute, cpd_theorem3, lattice_positive_exact
from cornerpd.errors import CapacityError, CertificateError, CornerPDError, ValidationError
from cornerpd.membership import (
    RESIDUAL_TOL,
    SEPARATION_TOL,
    AcfSequence,
    lattice_membership_test,
    mcmillan_test,
    verify_decomposition,
    verify_witness,
)
from cornerpd.pointproc import (
    EventStream,
    acf_estimate,
    calibrate_ks_null,
    ctmc_simulate_competing,
    ctmc_simulate_embedded,
    model_from_dict,
    poisson_stats,
    sample_renewal,
    sparse_superposition_experiment,
    superpose,
    telegraph_simulate,
    transient_distribution,
    uniformize,
    uniformized_simulate,
)
from cornerpd.quadform import as_sign_vector, as_square, qf_value, symmetrize_zero_diag
from cornerpd.rng import DEFAULT_SEED
from cornerpd.search import HYPERCUBE_CAP, LATTICE_CAP, enumerate_hypercube_min, enumerate_lattice_min, run_anti_stable, run_stable

EXIT_OK, EXIT_NEGATIVE, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_DATAERR, EXIT_SOFTWARE = 64, 65, 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- output -------------------------------------------------------------------


def _emit(args, doc, summary):
    text = io.dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


def _definiteness_doc(cmd, v, n):
    return {
        "command": cmd,
        "n": n,
        "verdict": v.verdict.value,
        "method": v.method.value,
        "m": v.m_bound,
        "margin": v.margin,
        "tol": v.tol,
        "witness": None if v.witness is None else v.witness.tolist(),
        "witness_value": v.witness_value,
    }


_VERDICT_EXIT = {Verdict.POSITIVE: EXIT_OK, Verdict.NOT_POSITIVE: EXIT_NEGATIVE, Verdict.UNKNOWN: EXIT_UNKNOWN}


def _membership_doc(cmd, v, rho):
    doc = {
        "command": cmd,
        "rho": rho.tolist(),
        "m": v.m_bound,
        "order": v.order,
        "verdict": v.verdict.value,
        "method": v.method,
        "iterations": v.iterations,
    }
    if v.member:
        doc["decomposition"] = [{"weight": w, "vector": vec.tolist()} for w, vec in v.decomposition]
        doc["residual"] = v.residual
        doc["weight_sum"] = v.weight_sum
    else:
        doc["witness"] = io.matrix_to_json(v.witness)
        doc["trace_value"] = v.trace_value
        doc["witness_verified"] = True
    return doc


# -- verification of emitted certificates -------------------------------------


def _verify_definiteness(args, c, doc, m_bound):
    claimed = doc.get("verdict")
    a = 0.5 * (c + c.T)
    tol = float(doc.get("tol", 0.0))
    if claimed == Verdict.NOT_POSITIVE.value:
        w = np.asarray(doc.get("witness"), dtype=np.int64)
        if m_bound == 1:
            as_sign_vector(w, a.shape[0])
        ok = bool(np.all((w != 0) & (np.abs(w) <= m_bound))) and qf_value(a, w) < -tol
    elif claimed == Verdict.POSITIVE.value:
        if m_bound == 1:
            res = enumerate_hypercube_min(a, cap=args.cap_enum or HYPERCUBE_CAP)
        else:
            res = enumerate_lattice_min(a, m_bound, cap=args.cap_enum or LATTICE_CAP)
        ok = res.min_value >= -tol
    elif claimed == Verdict.UNKNOWN.value:
        ok = True
    else:
        raise ValidationError(f"unrecognized verdict {claimed!r} in certificate")
    return _verification(args, doc, claimed, ok, _VERDICT_EXIT.get(Verdict(claimed)))


def _verify_membership(args, acf, doc):
    claimed = doc.get("verdict")
    R = acf.toeplitz()
    if claimed == "MEMBER_UP_TO_ORDER_N":
        dec = [(float(d["weight"]), np.asarray(d["vector"], dtype=np.int64)) for d in doc.get("decomposition", [])]
        chk = verify_decomposition(R, dec)
        ok = chk.residual <= RESIDUAL_TOL
        if acf.m_bound == 1:
            ok = ok and abs(chk.weight_sum - 1.0) <= 1e-8
        code = EXIT_OK
    elif claimed == "NON_MEMBER":
        X = io.matrix_from_json(doc.get("witness"), "witness")
        chk = verify_witness(R, X, acf.m_bound, cap=args.cap_enum)
        ok = chk.is_positive_on_set and chk.trace_value <= -SEPARATION_TOL
        code = EXIT_NEGATIVE
    else:
        raise ValidationError(f"unrecognized verdict {claimed!r} in certificate")
    return _verification(args, doc, claimed, ok, code)


def _verification(args, doc, claimed, ok, code):
    out = {"command": doc.get("command"), "mode": "verify", "verdict": claimed, "verified": bool(ok)}
    _emit(args, out, f"verify: {claimed} certificate {'accepted' if ok else 'REJECTED'}")
    return code if ok else EXIT_DATAERR


# -- subcommands --------------------------------------------------------------


def cmd_cpd_check(args):
    c = as_square(io.read_matrix(args.matrix))
    if args.verify:
        return _verify_definiteness(args, c, io.read_json(args.verify), 1)
    cap = args.cap_enum or HYPERCUBE_CAP
    fn = cpd_theorem3 if args.method == "theorem3" else cpd_exact
    v = fn(c, cap=cap, tol=args.tol)
    _emit(args, _definiteness_doc("cpd-check", v, c.shape[0]), f"cpd-check: {v.verdict.value} (margin {v.margin:.6g})")
    return _VERDICT_EXIT[v.verdict]


def cmd_cpd_refute(args):
    c = as_square(io.read_matrix(args.matrix))
    if args.verify:
        return _verify_definiteness(args, c, io.read_json(args.verify), 1)
    v = cpd_refute(c, starts=args.starts, seed=args.seed, workers=args.threads, tol=args.tol)
    _emit(args, _definiteness_doc("cpd-refute", v, c.shape[0]), f"cpd-refute: {v.verdict.value}")
    return _VERDICT_EXIT[v.verdict]


def cmd_lattice_check(args):
    c = as_square(io.read_matrix(args.matrix))
    if args.verify:
        return _verify_definiteness(args, c, io.read_json(args.verify), args.m)
    v = lattice_positive_exact(c, args.m, cap=args.cap_enum or LATTICE_CAP, tol=args.tol)
    _emit(args, _definiteness_doc("lattice-check", v, c.shape[0]), f"lattice-check M={args.m}: {v.verdict.value} (margin {v.margin:.6g})")
    return _VERDICT_EXIT[v.verdict]


def cmd_antistable(args):
    c = as_square(io.read_matrix(args.matrix))
    split = symmetrize_zero_diag(c)
    x0 = None if args.x0 is None else io.parse_floats(args.x0)
    runner = run_stable if args.stable else run_anti_stable
    r = runner(split, x0=x0, seed=args.seed, max_sweeps=args.max_sweeps)
    doc = {
        "command": "antistable",
        "mode": "stable" if args.stable else "anti-stable",
        "point": r.best_point.tolist(),
        "value": r.best_value,
        "value_with_trace": r.best_value + split.trace_offset,
        "initial_value": r.initial_value,
        "sweeps": r.sweeps_used,
        "moves": [list(m) for m in r.moves],
        "energy_trace": list(r.energy_trace),
    }
    _emit(args, doc, f"antistable: fixed point after {r.sweeps_used} sweeps, x^T E x = {r.best_value:.6g}")
    return EXIT_OK


def _read_acf_args(args, m_default):
    if (args.rho is None) == (args.acf is None):
        raise UsageError("give exactly one of --rho or --acf")
    if args.rho is not None:
        return io.parse_floats(args.rho), m_default
    rho, m = io.read_acf(args.acf)
    return rho, m


def cmd_acf_test(args):
    rho, _ = _read_acf_args(args, 1)
    acf = AcfSequence(rho, 1)
    if args.verify:
        return _verify_membership(args, acf, io.read_json(args.verify))
    v = mcmillan_test(acf, method=args.method, seed=args.seed)
    _emit(args, _membership_doc("acf-test", v, acf.rho), f"acf-test N={v.order}: {v.verdict.value}")
    return EXIT_OK if v.member else EXIT_NEGATIVE


def cmd_acf_lattice_test(args):
    rho, m = _read_acf_args(args, args.m)
    if args.m is not None:
        m = args.m
    if m is None:
        raise UsageError("--m is required with --rho")
    acf = AcfSequence(rho, m)
    if args.verify:
        return _verify_membership(args, acf, io.read_json(args.verify))
    v = lattice_membership_test(acf)
    _emit(args, _membership_doc("acf-lattice-test", v, acf.rho), f"acf-lattice-test M={m} N={v.order}: {v.verdict.value}")
    return EXIT_OK if v.member else EXIT_NEGATIVE


def cmd_acf_estimate(args):
    x = io.read_series(args.input)
    est = acf_estimate(x, args.max_lag, "biased" if args.biased else "unbiased")
    doc = {
        "command": "acf-estimate",
        "length": int(x.size),
        "denominator": est.denominator,
        "raw": est.raw.tolist(),
        "normalized": est.normalized.tolist(),
    }
    _emit(args, doc, f"acf-estimate: {args.max_lag + 1} lags from {x.size} samples")
    return EXIT_OK


def _model_from_args(args):
    params = {"kind": args.kind}
    for name in ("rate", "a", "b", "d", "shape", "scale"):
        val = getattr(args, name)
        if val is not None:
            params[name] = val
    return model_from_dict(params)


def _require_out(args):
    if not args.out:
        raise UsageError("--out is required for this subcommand")


def cmd_pp_simulate(args):
    _require_out(args)
    model = _model_from_args(args)
    s = sample_renewal(model, args.horizon, args.seed, source_id=args.source, stationary=args.stationary)
    io.write_events(args.out, s)
    print(f"pp-simulate: {len(s)} events on [0, {args.horizon:g}] -> {args.out}")
    return EXIT_OK


def _stream_from_csv(path, horizon):
    t, s = io.read_events(path)
    if horizon is None:
        horizon = float(t[-1]) if t.size else 1.0
    return EventStream(t, s, horizon)


def cmd_pp_superpose(args):
    _require_out(args)
    streams = [_stream_from_csv(p, args.horizon) for p in args.inputs]
    merged = superpose(streams, relabel=args.relabel)
    io.write_events(args.out, merged)
    print(f"pp-superpose: {len(merged)} events from {len(streams)} streams -> {args.out}")
    return EXIT_OK


def cmd_pp_poisson_test(args):
    s = _stream_from_csv(args.events, args.horizon)
    rep = poisson_stats(s, args.bins)
    doc = {"command": "pp-poisson-test", **rep.__dict__}
    _emit(args, doc, f"pp-poisson-test: KS {rep.ks_statistic:.4g}, dispersion {rep.dispersion_index:.4g}")
    return EXIT_OK


def cmd_ctmc_simulate(args):
    _require_out(args)
    q = io.read_matrix(args.q)
    if args.method == "competing":
        tr = ctmc_simulate_competing(q, args.init, args.horizon, args.seed, args.max_jumps)
    elif args.method == "embedded":
        tr = ctmc_simulate_embedded(q, args.init, args.horizon, args.seed, args.max_jumps)
    else:
        p, lam = uniformize(q, args.lambda_u)
        tr = uniformized_simulate(p, lam, args.init, args.horizon, args.seed, args.max_jumps)
    io.write_trajectory(args.out, tr)
    flag = " (absorbed)" if tr.absorbed else ""
    print(f"ctmc-simulate: {tr.n_jumps} jumps{flag} -> {args.out}")
    return EXIT_OK


def cmd_ctmc_uniformize(args):
    p, lam = uniformize(io.read_matrix(args.q), args.lambda_u)
    _emit(args, {"command": "ctmc-uniformize", "lambda_u": lam, "p": io.matrix_to_json(p)}, f"ctmc-uniformize: lambda_u = {lam:g}")
    return EXIT_OK


def cmd_ctmc_transient(args):
    dist = transient_distribution(io.read_matrix(args.q), args.t, args.init, tol=args.tol or 1e-12, lambda_u=args.lambda_u)
    doc = {"command": "ctmc-transient", "t": args.t, "init": args.init, "distribution": dist.tolist()}
    _emit(args, doc, f"ctmc-transient: t = {args.t:g}")
    return EXIT_OK


def cmd_experiment_sparse(args):
    base = _model_from_args(args)
    ns = [int(v) for v in io.parse_floats(args.sources)]
    rows = sparse_superposition_experiment(ns, base, args.total_rate, args.horizon, args.seeds, args.seed)
    threshold = calibrate_ks_null(args.total_rate, args.horizon, args.calibrate, 0.05, args.seed)
    medians = [r.median_ks for r in rows]
    doc = {
        "command": "experiment-sparse",
        "base": base.to_dict(),
        "total_rate": args.total_rate,
        "horizon": args.horizon,
        "seeds": args.seeds,
        "ks_null_95": threshold,
        "monotone": bool(all(b <= a for a, b in zip(medians, medians[1:]))),
        "rows": [
            {"n_sources": r.n_sources, "median_ks": r.median_ks, "median_dispersion": r.median_dispersion}
            for r in rows
        ],
    }
    last = rows[-1]
    _emit(args, doc, f"experiment-sparse: n={last.n_sources} median KS {last.median_ks:.4g} (null 95% {threshold:.4g})")
    return EXIT_OK


def cmd_experiment_telegraph(args):
    x = telegraph_simulate(args.p, args.length, args.seed)
    est = acf_estimate(x, args.order - 1)
    v = mcmillan_test(est.to_acf(1))
    doc = {
        "command": "experiment-telegraph",
        "p_flip": args.p,
        "length": args.length,
        "acf_hat": est.normalized.tolist(),
        "acf_theory": ((1 - 2 * args.p) ** np.arange(args.order)).tolist(),
        "verdict": v.verdict.value,
        "residual": v.residual,
    }
    _emit(args, doc, f"experiment-telegraph: {v.verdict.value} at N={args.order}")
    return EXIT_OK if v.member else EXIT_NEGATIVE


# -- parser -------------------------------------------------------------------


def _add_model_flags(p, default_kind):
    p.add_argument("--kind", default=default_kind, choices=["exponential", "uniform", "deterministic", "weibull"])
    p.add_argument("--rate", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--shape", type=float)
    p.add_argument("--scale", type=float)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output path (JSON result or CSV)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--cap-enum", type=int, default=None, dest="cap_enum")
    common.add_argument("--tol", type=float, default=None)

    parser = _Parser(prog="cornerpd", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("cpd-check", parents=[common], help="exact corner positive definiteness")
    p.add_argument("--matrix", required=True)
    p.add_argument("--method", choices=["exact", "theorem3"], default="exact")
    p.add_argument("--verify", metavar="RESULT")
    p.set_defaults(func=cmd_cpd_check)

    p = sub.add_parser("cpd-refute", parents=[common], help="heuristic search for a violating vertex")
    p.add_argument("--matrix", required=True)
    p.add_argument("--starts", type=int, default=16)
    p.add_argument("--verify", metavar="RESULT")
    p.set_defaults(func=cmd_cpd_refute)

    p = sub.add_parser("lattice-check", parents=[common], help="bounded-lattice positivity")
    p.add_argument("--matrix", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--verify", metavar="RESULT")
    p.set_defaults(func=cmd_lattice_check)

    p = sub.add_parser("antistable", parents=[common], help="run anti-stable (or stable) serial dynamics")
    p.add_argument("--matrix", required=True)
    p.add_argument("--x0")
    p.add_argument("--stable", action="store_true")
    p.add_argument("--max-sweeps", type=int, default=10_000, dest="max_sweeps")
    p.set_defaults(func=cmd_antistable)

    for name, func, help_text in (
        ("acf-test", cmd_acf_test, "+-1 class membership"),
        ("acf-lattice-test", cmd_acf_lattice_test, "lattice class membership"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--rho")
        p.add_argument("--acf")
        p.add_argument("--verify", metavar="RESULT")
        if name == "acf-test":
            p.add_argument("--method", choices=["auto", "full", "colgen"], default="auto")
        else:
            p.add_argument("--m", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("acf-estimate", parents=[common], help="sample autocorrelation of a series")
    p.add_argument("--input", required=True)
    p.add_argument("--max-lag", type=int, required=True, dest="max_lag")
    p.add_argument("--biased", action="store_true")
    p.set_defaults(func=cmd_acf_estimate)

    p = sub.add_parser("pp-simulate", parents=[common], help="renewal stream to CSV")
    _add_model_flags(p, "exponential")
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--source", type=int, default=0)
    p.add_argument("--stationary", action="store_true")
    p.set_defaults(func=cmd_pp_simulate)

    p = sub.add_parser("pp-superpose", parents=[common], help="merge event CSVs")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--horizon", type=float)
    p.add_argument("--relabel", action="store_true")
    p.set_defaults(func=cmd_pp_superpose)

    p = sub.add_parser("pp-poisson-test", parents=[common], help="Poissonness statistics of an event CSV")
    p.add_argument("--events", required=True)
    p.add_argument("--horizon", type=float)
    p.add_argument("--bins", type=int, default=100)
    p.set_defaults(func=cmd_pp_poisson_test)

    p = sub.add_parser("ctmc-simulate", parents=[common], help="CTMC trajectory to CSV")
    p.add_argument("--q", required=True)
    p.add_argument("--init", type=int, default=0)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--method", choices=["competing", "embedded", "uniformized"], default="competing")
    p.add_argument("--lambda", type=float, dest="lambda_u")
    p.add_argument("--max-jumps", type=int, dest="max_jumps")
    p.set_defaults(func=cmd_ctmc_simulate)

    p = sub.add_parser("ctmc-uniformize", parents=[common], help="uniformized transition matrix")
    p.add_argument("--q", required=True)
    p.add_argument("--lambda", type=float, dest="lambda_u")
    p.set_defaults(func=cmd_ctmc_uniformize)

    p = sub.add_parser("ctmc-transient", parents=[common], help="transient distribution by uniformization")
    p.add_argument("--q", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--init", type=int, default=0)
    p.add_argument("--lambda", type=float, dest="lambda_u")
    p.set_defaults(func=cmd_ctmc_transient)

    p = sub.add_parser("experiment-sparse", parents=[common], help="Poisson limit of sparse superpositions")
    _add_model_flags(p, "uniform")
    p.add_argument("--sources", default="1,5,25,125")
    p.add_argument("--total-rate", type=float, default=1.0, dest="total_rate")
    p.add_argument("--horizon", type=float, default=1e4)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--calibrate", type=int, default=200, help="null replicates for the KS threshold")
    p.set_defaults(func=cmd_experiment_sparse)

    p = sub.add_parser("experiment-telegraph", parents=[common], help="telegraph chain -> acf -> membership")
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--length", type=int, default=10**6)
    p.add_argument("--order", type=int, default=6)
    p.set_defaults(func=cmd_experiment_telegraph)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.command == "experiment-sparse" and args.kind == "uniform":
            args.a = 0.5 if args.a is None else args.a
            args.b = 1.5 if args.b is None else args.b
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, CapacityError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except CertificateError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_SOFTWARE
    except CornerPDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
