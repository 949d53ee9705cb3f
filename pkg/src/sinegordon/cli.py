"""Command-line entry point exposing every workflow of the package.

Subcommand groups::

    trees       enum | classify         catalog enumeration and classification
    renorm      cancel                  counterterm cancellation certificate
    diagram     terms | audit           moment-term inventory and audits
    multiscale  audit                   scale-assignment partition checks
    power       audit                   cluster power-counting audits
    sim         field | dipole | pde | converge    Monte Carlo studies

Exit codes: 0 success, 1 audit/criterion failure, 2 usage error.  All
rational parameters are passed as exact strings ("5", "503/300"); floats are
reserved for lattice and tolerance knobs.  Every emitted file embeds a schema
version plus the fully resolved configuration, and identical (config, seed)
pairs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction

from .tree_core import (ModelParams, SupercriticalError, dipole,
                        canonical_key, parse_key)
from .rule_engine import enumerate_trees, classify_trees
from .counterterm import cancellation_report
from .moment_diagrams import (build_diagram, moment_terms,
                              multilinearity_audit)
from .multiscale import ScaleAssignment, organize_and_check
from .power_counting import sigma_tilde_audit, identity_audit

SCHEMA_VERSION = 1

try:  # metadata is absent when running from a raw source tree
    from importlib.metadata import version as _pkg_version
    VERSION = _pkg_version("artifact")
except Exception:  # pragma: no cover
    VERSION = "unknown"


class UsageError(Exception):
    pass


class AuditFailure(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational: {text!r}") from exc


def _params_from(args) -> ModelParams:
    beta_sq = _rational(args.beta2_over_pi)
    beta_bar = getattr(args, "beta_bar", None)
    if beta_bar is not None:
        beta_bar = _rational(beta_bar)
    mu = getattr(args, "mu", None)
    if mu is not None:
        mu = _rational(mu)
    if beta_bar is None and 0 < beta_sq < 8:
        # hug the coupling from above so only genuinely divergent trees enter
        beta_bar = beta_sq / 4 + (2 - beta_sq / 4) / 8
    try:
        return ModelParams.make(beta_sq, beta_bar=beta_bar, mu=mu)
    except SupercriticalError as exc:
        raise UsageError(f"supercritical: {exc}") from exc


def _payload(args, results) -> dict:
    config = {k: (str(v) if isinstance(v, Fraction) else v)
              for k, v in sorted(vars(args).items())
              if k != "func" and v is not None}
    return {"schema_version": SCHEMA_VERSION, "config": config,
            "results": results}


def _emit(args, payload: dict):
    text = json.dumps(payload, sort_keys=True, indent=2,
                      default=str) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(path: str, rows: list[tuple]):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["scale", "estimate", "stderr"])
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


# --- combinatorial subcommands -------------------------------------------------


def cmd_trees_enum(args):
    cat = enumerate_trees(_params_from(args))
    _emit(args, _payload(args, {"catalog": cat.export()}))
    return 0


def cmd_trees_classify(args):
    cat = enumerate_trees(_params_from(args))
    negative, negative_neutral = classify_trees(cat)
    _emit(args, _payload(args, {
        "total": len(cat.all),
        "negative": sorted(negative),
        "negative_neutral": sorted(negative_neutral),
    }))
    return 0


def cmd_renorm_cancel(args):
    cat = enumerate_trees(_params_from(args))
    ledger = cancellation_report(cat)
    _emit(args, _payload(args, ledger.export()))
    return 0 if ledger.ok else 1


def _diagram_from(args):
    params = _params_from(args)
    tau = dipole() if args.tree == "dipole" else parse_key(args.tree)
    return build_diagram(tau, args.p, params), tau


def cmd_diagram_terms(args):
    d, tau = _diagram_from(args)
    terms = moment_terms(d)
    _emit(args, _payload(args, {
        "tree": canonical_key(tau),
        "n_terms": len(terms),
        "terms": [t.as_dict() for t in terms],
    }))
    return 0


def cmd_diagram_audit(args):
    d, tau = _diagram_from(args)
    terms = moment_terms(d)
    rep = multilinearity_audit(d, terms)
    _emit(args, _payload(args, {
        "tree": canonical_key(tau),
        "n_terms": rep.n_terms,
        "n_pairs": rep.n_pairs,
        "ok": rep.ok,
        "failures": rep.failures,
    }))
    return 0 if rep.ok else 1


def cmd_multiscale_audit(args):
    d, tau = _diagram_from(args)
    rng = random.Random(args.seed)
    failures = []
    interval_checks = 0
    partition_checks = 0
    for _ in range(args.trials):
        assignment = ScaleAssignment.random_assignment(d, args.ncap, rng)
        rep = organize_and_check(d, assignment)
        interval_checks += rep.interval_checks
        partition_checks += rep.compatibility_checks
        if not rep.ok:
            failures.append({"assignment": {str(k): v
                                            for k, v in assignment.n.items()},
                             "failures": rep.failures})
    _emit(args, _payload(args, {
        "tree": canonical_key(tau),
        "trials": args.trials,
        "failures": failures,
        "interval_checks": interval_checks,
        "partition_checks": partition_checks,
    }))
    return 0 if not failures else 1


def _parse_forest(text: str | None):
    if not text:
        return ()
    return tuple(frozenset(int(x) for x in grp.split(","))
                 for grp in text.split(";") if grp)


def _parse_cut(text: str | None):
    if not text:
        return ()
    return tuple(int(x) for x in text.split(",") if x)


def cmd_power_audit(args):
    params = ModelParams.from_beta_bar(_rational(args.beta_bar))
    tau = dipole() if args.tree == "dipole" else parse_key(args.tree)
    d = build_diagram(tau, args.p, params)
    forest = _parse_forest(args.forest)
    s_cut = _parse_cut(args.cuts)
    if args.context == "identity":
        member = forest[0] if forest else frozenset(d.nodes)
        rep = identity_audit(d, member, forest)
    else:
        member = forest[0] if (args.context == "inner" and forest) else None
        rep = sigma_tilde_audit(d, args.context, forest=forest,
                                s_cut=s_cut, S=member)
    out = rep.as_dict()
    out["margins"] = {"min": out.pop("min_margin"), "argmin": out.pop("argmin")}
    _emit(args, _payload(args, out))
    return 0 if rep.ok else 1


# --- simulation subcommands ------------------------------------------------------


def _lattice(args):
    from .stochastic import TorusLattice
    return TorusLattice(args.n, dt=args.dt)


def cmd_sim_field(args):
    from . import stochastic as st
    params = _params_from(args)
    lat = _lattice(args)
    eps_list = args.eps_list or [2.0**-k for k in range(3, 8)
                                 if 2.0**-k >= lat.min_eps()]
    slope = st.renorm_slope(lat, eps_list, params.beta_sq)
    consts = [st.renorm_constant(lat, e, params.beta_sq) for e in eps_list]
    stats = st.chaos_mean(lat, args.eps, params.beta_sq, args.seed,
                          n_fields=args.samples)
    results = {
        "renorm_slope": slope,
        "target_slope": float(-float(params.beta_sq) / 4.0),
        "eps_list": eps_list,
        "constants": consts,
        "chaos_mean_re": stats.mean_re,
        "chaos_mean_im": stats.mean_im,
        "chaos_within_3se": stats.within_3se,
        "n_fields": stats.n_fields,
    }
    if args.out_csv:
        _emit_csv(args.out_csv, list(zip(eps_list, consts, [0.0] * len(consts))))
    _emit(args, _payload(args, results))
    return 0


def cmd_sim_dipole(args):
    from . import stochastic as st
    params = _params_from(args)
    lat = _lattice(args)
    cfg = st.DipoleConfig(beta_sq=params.beta_sq, eps=args.eps,
                          lambdas=tuple(args.lam or st.DipoleConfig.lambdas),
                          dt=args.dt, n_samples=args.samples,
                          n_counter=args.samples)
    rep = st.dipole_moment(lat, cfg, args.seed)
    if args.out_csv:
        _emit_csv(args.out_csv, list(zip(rep.lambdas, rep.second_moments,
                                         rep.stderrs)))
    _emit(args, _payload(args, rep.as_dict()))
    return 0


def cmd_sim_pde(args):
    from . import stochastic as st
    params = _params_from(args)
    if float(params.beta_sq) >= 4.0:
        raise UsageError("pde solver requires beta^2 < 4*pi")
    lat = _lattice(args)
    res = st.solve_pde(lat, args.eps, params.beta_sq, args.seed, args.t_end)
    final = res.final
    _emit(args, _payload(args, {
        "times": [float(t) for t in res.times],
        "max_imag": res.max_imag,
        "final_min": float(final.min()),
        "final_max": float(final.max()),
        "final_mean": float(final.mean()),
    }))
    return 0


def cmd_sim_converge(args):
    from . import stochastic as st
    params = _params_from(args)
    if float(params.beta_sq) >= 4.0:
        raise UsageError("pde solver requires beta^2 < 4*pi")
    lat = _lattice(args)
    eps_list = args.eps_list or [2.0**-3, 2.0**-4, 2.0**-5]
    seeds = list(range(args.seed, args.seed + args.seeds))
    rep = st.convergence_study(lat, params.beta_sq, eps_list, seeds,
                               t_end=args.t_end)
    if args.out_csv:
        rows = list(zip(rep.eps_list[1:], rep.d_values,
                        [0.0] * len(rep.d_values)))
        _emit_csv(args.out_csv, rows)
    _emit(args, _payload(args, rep.as_dict()))
    return 0 if (rep.ratios_ok and rep.swap_ok) else 1


# --- argument plumbing ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 2, not argparse's own
        raise UsageError(message)


def _add_common(p, rational_beta=True):
    if rational_beta:
        p.add_argument("--beta2-over-pi", default="5",
                       help="coupling beta^2/pi as an exact rational string")
        p.add_argument("--beta-bar", help="charge weight override (rational)")
        p.add_argument("--mu", help="enumeration cutoff override (rational)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (results are reduction-order independent)")


def _add_diagram_flags(p):
    p.add_argument("--tree", default="dipole",
                   help="canonical tree key, or the shorthand 'dipole'")
    p.add_argument("--p", type=int, default=1,
                   help="number of conjugate copy pairs in the moment")


def _add_sim_flags(p):
    p.add_argument("--n", type=int, default=128, help="spatial points per axis")
    p.add_argument("--dt", type=float, default=2.0**-10, help="time step")
    p.add_argument("--eps", type=float, default=2.0**-5,
                   help="mollification width")
    p.add_argument("--samples", type=int, default=16,
                   help="independent Monte Carlo samples")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--out-csv", help="write (scale, estimate, stderr) rows here")


def build_parser() -> _Parser:
    top = _Parser(prog="sgbench",
                  description="renormalization workbench: combinatorial audits "
                              "and Monte Carlo scaling studies")
    top.add_argument("--version", action="version",
                     version=f"sgbench {VERSION} (schema {SCHEMA_VERSION})")
    groups = top.add_subparsers(dest="group", required=True)

    trees = groups.add_parser("trees").add_subparsers(dest="sub", required=True)
    p = trees.add_parser("enum");      _add_common(p); p.set_defaults(func=cmd_trees_enum)
    p = trees.add_parser("classify");  _add_common(p); p.set_defaults(func=cmd_trees_classify)

    renorm = groups.add_parser("renorm").add_subparsers(dest="sub", required=True)
    p = renorm.add_parser("cancel");   _add_common(p); p.set_defaults(func=cmd_renorm_cancel)

    diagram = groups.add_parser("diagram").add_subparsers(dest="sub", required=True)
    for name, fn in [("terms", cmd_diagram_terms), ("audit", cmd_diagram_audit)]:
        p = diagram.add_parser(name)
        _add_common(p)
        _add_diagram_flags(p)
        p.set_defaults(func=fn)

    multi = groups.add_parser("multiscale").add_subparsers(dest="sub", required=True)
    p = multi.add_parser("audit")
    _add_common(p)
    _add_diagram_flags(p)
    p.add_argument("--ncap", type=int, default=4, help="largest dyadic scale index")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_multiscale_audit)

    power = groups.add_parser("power").add_subparsers(dest="sub", required=True)
    p = power.add_parser("audit")
    _add_common(p, rational_beta=False)
    _add_diagram_flags(p)
    p.add_argument("--beta-bar", default="5/4",
                   help="charge weight beta_bar as an exact rational string")
    p.add_argument("--context", default="big-graph",
                   choices=["inner", "big-graph", "large-scale", "identity"])
    p.add_argument("--forest", help="semicolon-separated node groups, e.g. '1,2;3,4'")
    p.add_argument("--cuts", help="comma-separated recentered edge ids")
    p.set_defaults(func=cmd_power_audit)

    sim = groups.add_parser("sim").add_subparsers(dest="sub", required=True)
    p = sim.add_parser("field")
    _add_common(p); _add_sim_flags(p)
    p.add_argument("--eps-list", type=float, nargs="+",
                   help="widths for the constant-scaling regression")
    p.set_defaults(func=cmd_sim_field)

    p = sim.add_parser("dipole")
    _add_common(p); _add_sim_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, action="append",
                   help="smearing scale (repeatable)")
    p.set_defaults(func=cmd_sim_dipole)

    p = sim.add_parser("pde")
    _add_common(p); _add_sim_flags(p)
    p.add_argument("--t-end", type=float, default=0.25)
    p.set_defaults(func=cmd_sim_pde)

    p = sim.add_parser("converge")
    _add_common(p); _add_sim_flags(p)
    p.add_argument("--t-end", type=float, default=0.25)
    p.add_argument("--eps-list", type=float, nargs="+",
                   help="dyadic cascade of widths, coarsest first")
    p.add_argument("--seeds", type=int, default=8,
                   help="number of consecutive seeds starting at --seed")
    p.set_defaults(func=cmd_sim_converge)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SupercriticalError as exc:
        print(f"error: supercritical: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
