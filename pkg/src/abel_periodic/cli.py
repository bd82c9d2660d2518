"""Command-line front end: ``abel-periodic {check, find, reproduce}``.

Exit codes: 0 success, 1 usage or input error, 2 certification refused.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from importlib import metadata

import numpy as np

from .certify import CertificationError, WrongNodeCount, certify_C, certify_H, certify_H_prime, suggest_nodes
from .equation import EquationError, transform
from .flow import EmptyUsableRange, assign_components, find_periodic_solutions
from .integrate import ESCAPED, RETURNED, IntegrationConfig
from .poly import PolynomialError, PrecisionMismatch
from .regression import CLAIMS, format_list, format_table, run_claims
from .serialize import (EquationFileError, build_report, certificate_to_json, load_equation, parse_real,
                        refusal_to_json)

EXIT_OK, EXIT_INPUT, EXIT_REFUSED = 0, 1, 2

_HYPOTHESES = {"h": "H", "c": "C", "hprime": "H_prime"}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _parse_lambdas(text: str) -> list:
    """Integers and p/q stay exact; anything else must read as a float."""
    out = []
    for i, tok in enumerate(t.strip() for t in text.split(",") if t.strip()):
        try:
            out.append(parse_real(tok, f"--lambdas[{i}]"))
        except EquationFileError:
            out.append(_float_arg(tok, f"--lambdas[{i}]"))
    if not out:
        raise InputError("--lambdas: empty list")
    return out


def _float_arg(tok: str, field: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise EquationFileError(field, f"cannot read {tok!r} as a number") from None


def _parse_range(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 2:
        raise InputError(f"--range: expected lo:hi, got {text!r}")
    lo, hi = (_float_arg(p, "--range") for p in parts)
    if not lo < hi:
        raise InputError(f"--range: need lo < hi, got {lo}:{hi}")
    return lo, hi


def _provenance(args, started: float, config: dict) -> dict:
    return {
        "tool": "abel-periodic",
        "version": _version(),
        "command": args.command,
        "argv": sys.argv[1:],
        "seed": args.seed,
        "threads": os.environ.get("ABEL_THREADS"),
        "config": config,
        "seconds": round(time.perf_counter() - started, 4),
    }


def _certify(eqf, hypothesis: str, lambdas):
    """Run one certifier; returns the certificate or raises CertificationError."""
    eq = eqf.equation()
    if hypothesis == "c":
        return certify_C(eq)
    if hypothesis == "hprime":
        curves = eqf.curve_family()
        if curves is None:
            raise InputError("--hypothesis hprime needs a curves entry in the equation file")
        if lambdas is None:
            lambdas = suggest_nodes(transform(eq, curves))
        if lambdas is None:
            raise InputError("no --lambdas given and no nodes found for the transformed equation")
        return certify_H_prime(eq, curves, lambdas)
    if lambdas is None:
        lambdas = suggest_nodes(eq)
    if lambdas is None:
        raise InputError("no --lambdas given, no nodes in the file, and no nodes found automatically")
    return certify_H(eq, lambdas)


def cmd_check(args) -> int:
    started = time.perf_counter()
    eqf = load_equation(args.file)
    lambdas = _parse_lambdas(args.lambdas) if args.lambdas else (list(eqf.nodes) if eqf.nodes else None)
    try:
        cert = certificate_to_json(_certify(eqf, args.hypothesis, lambdas))
        code = EXIT_OK
    except WrongNodeCount:
        raise
    except CertificationError as exc:
        cert = refusal_to_json(exc, _HYPOTHESES[args.hypothesis])
        code = EXIT_REFUSED
    report = build_report(cert, None, _provenance(args, started, {"hypothesis": args.hypothesis}))
    print(json.dumps(report, indent=2))
    return code


def _outcome(status: int) -> str:
    return {RETURNED: "returned", ESCAPED: "escaped"}.get(int(status), "step_underflow")


def _write_csv(path, samples):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "displacement", "dH", "outcome"])
        for x0, x1, ldh, st in zip(samples.x0, samples.x1, samples.log_dH, samples.status):
            if st == RETURNED:
                dh = math.exp(ldh) if ldh < 709 else math.inf
                w.writerow([repr(float(x0)), repr(float(x1 - x0)), repr(dh), _outcome(st)])
            else:
                w.writerow([repr(float(x0)), "", "", _outcome(st)])


def _check_writable(path):
    # fail before the scan rather than after it
    try:
        with open(path, "a", encoding="utf-8"):
            pass
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def cmd_find(args) -> int:
    started = time.perf_counter()
    eqf = load_equation(args.file)
    lo, hi = _parse_range(args.range)
    if args.grid < 2:
        raise InputError("--grid must be at least 2")
    if not args.tol > 0:
        raise InputError("--tol must be positive")
    for path in (args.out, args.displacement_csv):
        if path:
            _check_writable(path)
    lambdas = _parse_lambdas(args.lambdas) if args.lambdas else (list(eqf.nodes) if eqf.nodes else None)
    hypothesis = args.hypothesis
    if hypothesis is None and lambdas is not None:
        hypothesis = "hprime" if eqf.curves is not None else "h"

    eq = eqf.equation()
    cert_obj = cert = None
    if hypothesis is not None:
        try:
            cert_obj = _certify(eqf, hypothesis, lambdas)
            cert = certificate_to_json(cert_obj)
        except WrongNodeCount:
            raise
        except CertificationError as exc:
            cert = refusal_to_json(exc, _HYPOTHESES[hypothesis])
    scanned = eq
    if eqf.curves is not None and hypothesis == "hprime":
        scanned = transform(eq, eqf.curve_family())

    try:
        rep = find_periodic_solutions(scanned, (lo, hi), IntegrationConfig(), grid=args.grid, tol=args.tol)
    except EmptyUsableRange as exc:
        raise InputError(f"every sample in {lo}:{hi} leaves the integration domain ({exc})") from None
    nodes = list(cert_obj.nodes) if cert_obj is not None else lambdas
    if nodes is not None:
        rep = assign_components(rep, nodes, bound=cert_obj.bound if cert_obj is not None else None)

    config = {"range": [lo, hi], "grid": args.grid, "tol": args.tol, "hypothesis": hypothesis,
              "scanned": "transformed" if scanned is not eq else "original"}
    report = build_report(cert, rep, _provenance(args, started, config))
    text = json.dumps(report, indent=2)
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        if args.displacement_csv:
            _write_csv(args.displacement_csv, rep.samples)
    except OSError as exc:
        raise InputError(f"cannot write output: {exc.strerror}") from None
    return EXIT_OK


def cmd_reproduce(args) -> int:
    if args.list:
        print(format_list(CLAIMS))
        return EXIT_OK
    results = run_claims(tol=args.tol)
    print(format_table(results))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} claims passed")
    return EXIT_OK if failed == 0 else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="abel-periodic", description="Certify sign hypotheses and locate periodic solutions "
                                                  "of polynomial ODEs with trigonometric coefficients.")
    p.add_argument("--seed", type=int, default=42,
                   help="seed for numpy's global generator, echoed in provenance (default 42)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="certify a sign hypothesis and print the certificate")
    c.add_argument("file", help="equation file (JSON)")
    c.add_argument("--hypothesis", choices=sorted(_HYPOTHESES), default="h",
                   help="c: algebraic criterion, h: straight lines, hprime: the file's curves (default h)")
    c.add_argument("--lambdas", help="comma-separated nodes, numbers or p/q (default: file nodes, then a search)")
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("find", help="locate and classify periodic solutions")
    f.add_argument("file", help="equation file (JSON)")
    f.add_argument("--range", default="-10:10", help="scan interval lo:hi (default -10:10)")
    f.add_argument("--grid", type=int, default=2001, help="number of scan samples (default 2001)")
    f.add_argument("--tol", type=float, default=1e-8, help="zero threshold for the displacement (default 1e-8)")
    f.add_argument("--lambdas", help="nodes for component bookkeeping (default: file nodes)")
    f.add_argument("--hypothesis", choices=sorted(_HYPOTHESES),
                   help="certificate to attach (default: h with nodes, hprime when the file has curves)")
    f.add_argument("--out", help="report path (default stdout)")
    f.add_argument("--displacement-csv", help="write x0,displacement,dH,outcome for every grid sample")
    f.set_defaults(func=cmd_find)

    r = sub.add_parser("reproduce", help="run the built-in regression claims")
    r.add_argument("--list", action="store_true", help="print the claims without running them")
    r.add_argument("--tol", type=float, default=1e-8, help="finder tolerance (default 1e-8)")
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except (InputError, EquationFileError, EquationError, PolynomialError, PrecisionMismatch,
            ValueError) as exc:
        print(f"abel-periodic: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
