"""Batch command-line front-end.

Every analysis is a subcommand emitting a JSON report (CSV is a lossy
projection for spreadsheets). Reports are byte-deterministic for a fixed
configuration and seed, up to the timestamp field, which --no-timestamp
suppresses. Exit codes: 0 all asserted checks passed, 1 usage error,
2 assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import cayley, families, funcspace, irreps, linear, structure, verify
from .funcspace import GroupFunction, SetFamily

DEFAULT_SEED = 0xC0FFEE


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; we use 1
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="degree of the group")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=None,
                   help="worker budget hint; results do not depend on it")
    p.add_argument("--out", type=Path, default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--slow", action="store_true",
                   help="acknowledge slow exact paths (degree 8 projections)")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", type=str, default=None, help="family mini-language")
    p.add_argument("--set-file", type=Path, default=None)
    p.add_argument("--func-file", type=Path, default=None)
    p.add_argument("--ambient", choices=("Sn", "An"), default="An")


def build_parser() -> _Parser:
    parser = _Parser(prog="symspec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="level and isotypic tables")
    _add_common(p)
    _add_input(p)

    p = sub.add_parser("linear", help="normalized form, Parseval, convolution")
    _add_common(p)
    _add_input(p)
    p.add_argument("--triple", nargs=3, metavar="SPEC", default=None,
                   help="three family specs for the convolution formula")
    p.add_argument("--eps", type=float, default=None,
                   help="small-coefficient cut for the level-1 ratio report")

    p = sub.add_parser("spectrum", help="level radii, isotypic spectra, trace")
    _add_common(p)
    _add_input(p)
    p.add_argument("--d", type=int, default=1, help="largest level radius")

    p = sub.add_parser("global", help="globalness scan and density bump search")
    _add_common(p)
    _add_input(p)
    p.add_argument("--t", type=int, default=2, help="restriction size cap")
    p.add_argument("--r", type=int, default=1, help="bump search exponent")

    p = sub.add_parser("structure", help="matrix split, stars, star inequalities")
    _add_common(p)
    _add_input(p)
    p.add_argument("--spec-b", type=str, default=None)
    p.add_argument("--spec-c", type=str, default=None)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--log-exponent", type=float, default=None,
                   help="use delta = log(n)^-R with this R instead of --delta")

    p = sub.add_parser("families", help="build, measure, certify a family")
    _add_common(p)
    _add_input(p)
    p.add_argument("--certify", action="store_true")

    p = sub.add_parser("maxpf", help="extremal product-free search in A_n")
    _add_common(p)
    p.add_argument("--mode", choices=("exact", "heuristic"), default="exact")
    p.add_argument("--budget", type=int, default=200_000)

    p = sub.add_parser("verify", help="run the named self-check suite")
    _add_common(p)
    p.add_argument("--suite", choices=verify.SUITES, default="core")

    return parser


# ---------------------------------------------------------------------------
# input plumbing
# ---------------------------------------------------------------------------


def _load_family(args) -> SetFamily:
    given = [x is not None for x in (args.spec, args.set_file)]
    if sum(given) != 1:
        raise UsageError("provide exactly one of --spec or --set-file")
    if args.spec is not None:
        spec = families.parse_family_spec(args.spec, args.n, args.ambient)
        return families.build_family(spec)
    fam, _convention = funcspace.read_set_file(args.set_file.read_text())
    if fam.degree != args.n:
        raise UsageError(f"set file degree {fam.degree} != --n {args.n}")
    return fam


def _load_function(args) -> GroupFunction:
    if args.func_file is not None:
        f = funcspace.read_function_file(args.func_file.read_text())
        if f.degree != args.n:
            raise UsageError(f"function file degree {f.degree} != --n {args.n}")
        return f
    return GroupFunction.indicator(_load_family(args))


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (result dict, rows for csv, all_passed)
# ---------------------------------------------------------------------------


def _run_decompose(args):
    f = _load_function(args)
    rows = irreps.level_table(f, slow=args.slow)
    levels = irreps.level_decompose(f, slow=args.slow)
    level_rows = [
        {"d": d, "norm_sq": funcspace.inner_product(g, g)}
        for d, g in enumerate(levels)
    ]
    return {"partitions": rows, "levels": level_rows}, rows, True


def _run_linear(args):
    result = {}
    rows = []
    passed = True
    if args.triple:
        specs = [families.parse_family_spec(s, args.n, args.ambient) for s in args.triple]
        fams = [families.build_family(s) for s in specs]
        ms = [
            linear.normalized_form(GroupFunction.indicator(fam)) for fam in fams
        ]
        formula = linear.triple_linear_term(*ms)
        result["triple"] = {
            "specs": [s.describe() for s in specs],
            "linear_term": formula,
        }
    else:
        f = _load_function(args)
        m = linear.normalized_form(f)
        result["normalized"] = {
            "entries": m.entries.tolist(),
            "row_sum_max": float(np.max(np.abs(m.entries.sum(axis=1)))),
            "col_sum_max": float(np.max(np.abs(m.entries.sum(axis=0)))),
            "level1_norm_sq": linear.parseval_inner(m, m),
        }
        if args.eps is not None:
            result["level1_ratio"] = linear.level1_ratio_report(f, args.eps)
        rows = [
            {"i": i + 1, "j": j + 1, "a": m.entries[i, j]}
            for i in range(args.n)
            for j in range(args.n)
        ]
    return result, rows, passed


def _run_spectrum(args):
    f = _load_function(args)
    rep = cayley.spectral_report(f, d_max=args.d)
    data = rep.to_dict()
    data["radius_ratios"] = [
        cayley.radius_ratio_report(f, d) for d in range(1, len(data["levels"]))
    ]
    rows = [{"d": r["d"], "r": r["r"], "dim": r["dim"]} for r in data["levels"]]
    return data, rows, True


def _run_global(args):
    fam = _load_family(args)
    rep = structure.globalness(fam, args.t)
    bump = structure.density_bump_search(fam, args.r)
    profile = structure.relative_globalness_profile(fam, args.t)
    rows = [dict(row) for row in bump.per_t]
    return {
        "globalness": rep.to_dict(),
        "bump_search": bump.to_dict(),
        "relative_profile": profile,
    }, rows, True


def _run_structure(args):
    fam = _load_family(args)
    if args.spec_b and args.spec_c:
        fam_b = families.build_family(
            families.parse_family_spec(args.spec_b, args.n, args.ambient)
        )
        fam_c = families.build_family(
            families.parse_family_spec(args.spec_c, args.n, args.ambient)
        )
    else:
        fam_b = fam_c = fam
    if args.log_exponent is not None:
        params = structure.Parameters.from_log_exponent(
            args.n, fam.mu("Sn"), fam_b.mu("Sn"), fam_c.mu("Sn"), args.log_exponent
        )
    else:
        params = structure.Parameters.for_triple(fam, fam_b, fam_c, delta=args.delta)
    m = linear.normalized_form(GroupFunction.indicator(fam))
    dec = structure.decompose_coeffs(m, params.eps_a)
    system = structure.star_system(fam, params)
    l1 = structure.star_l1_report(fam, params)
    terms = structure.struc_terms_report(fam, fam_b, fam_c, params)
    # the zeta inequality on the rescaled star weight vectors
    v = np.maximum(system.star_matrix.sum(axis=1), 0.0)
    u = np.maximum(system.inverse_star_matrix.sum(axis=1), 0.0)
    total = float(v.sum() + u.sum())
    star_ineq = None
    if total > 0:
        zeta = min(0.5, 1.0 - max(v.max(), u.max()) / total)
        res = structure.star_inequalities(v, u, zeta)
        star_ineq = {
            "zeta": res.zeta,
            "lhs": res.lhs,
            "rhs": res.rhs,
            "holds": res.holds,
        }
    result = {
        "params": {
            "delta": params.delta,
            "alpha": params.alpha,
            "beta": params.beta,
            "gamma": params.gamma,
            "eps_A": params.eps_a,
            "eps_B": params.eps_b,
            "eps_C": params.eps_c,
        },
        "split": {
            "minus_norm": float(np.linalg.norm(dec.minus)),
            "rand_norm": float(np.linalg.norm(dec.rand)),
            "struc_norm": float(np.linalg.norm(dec.struc)),
            "exact_reassembly": bool(np.array_equal(dec.reassembled(), m.entries)),
        },
        "stars": {
            "weights": system.weights.tolist(),
            "inverse_weights": system.inverse_weights.tolist(),
            "large": system.large.astype(int).tolist(),
            "inverse_large": system.inverse_large.astype(int).tolist(),
        },
        "l1_bound": l1.to_dict(),
        "star_inequality": star_ineq,
        "terms": terms,
    }
    rows = [
        {"i": i + 1, "s": system.weights[i], "s_inv": system.inverse_weights[i],
         "large": int(system.large[i]), "inverse_large": int(system.inverse_large[i])}
        for i in range(args.n)
    ]
    return result, rows, True


def _run_families(args):
    if args.spec is None:
        raise UsageError("families requires --spec")
    spec = families.parse_family_spec(args.spec, args.n, args.ambient)
    rep = families.measure_family(spec)
    fam = families.build_family(spec)
    result = {
        "spec": spec.describe(),
        "size": rep.size,
        "mu_Sn": rep.mu_sn,
        "mu_An": rep.mu_an,
        "estimate": rep.estimate,
        "ratio": rep.ratio,
        "parity_profile": dict(zip(("even", "odd"), fam.parity_profile)),
    }
    if args.certify:
        cert = families.is_product_free(fam)
        result["product_free"] = cert.product_free
        result["witness"] = cert.witness.to_dict() if cert.witness else None
        result["checked_pairs"] = cert.checked_pairs
    return result, [result], True


def _run_maxpf(args):
    res = families.max_product_free(
        args.n, mode=args.mode, budget=args.budget, seed=args.seed
    )
    data = res.to_dict()
    return data, [{"size": data["size"], "mode": data["mode"]}], True


def _run_verify(args):
    rep = verify.run_suite(args.suite, args.seed)
    rows = [
        {"name": c["name"], "suite": c["suite"], "passed": c["passed"]}
        for c in rep["checks"]
    ]
    return rep, rows, rep["all_passed"]


_RUNNERS = {
    "decompose": _run_decompose,
    "linear": _run_linear,
    "spectrum": _run_spectrum,
    "global": _run_global,
    "structure": _run_structure,
    "families": _run_families,
    "maxpf": _run_maxpf,
    "verify": _run_verify,
}


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------


def _envelope(args, result) -> dict:
    report = {
        "command": args.command,
        "n": args.n,
        "seed": args.seed,
        "result": result,
    }
    if not args.no_timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    return report


def _emit(args, report: dict, rows: list[dict]) -> None:
    if args.format == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()),
                                    lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
        text = buf.getvalue()
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _resolve_threads(args) -> None:
    if args.threads is None:
        env = os.environ.get("SYMSPEC_THREADS")
        args.threads = int(env) if env else 1
    if args.threads < 1:
        raise UsageError("--threads must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _resolve_threads(args)
        result, rows, passed = _RUNNERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, AssertionError) as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return 2
    _emit(args, _envelope(args, result), rows)
    if not passed:
        failed = [
            c["name"] for c in result.get("checks", []) if not c.get("passed", True)
        ]
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
