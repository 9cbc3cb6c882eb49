"""Command-line entry point: ``qcaplab <subcommand> ...``.

Results are printed to stdout as canonical JSON and logs go to stderr.
Exit codes: 0 success, 2 invalid input, 3 inconclusive or over budget,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import capacity as cap
from . import documents as docs
from . import reductions as red
from . import zero_error as ze
from ._version import __version__
from .channels import validate_cptp
from .errors import QCapError, SizeCapError
from .serialize import canonical_json, decode_complex

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64

log = logging.getLogger("qcaplab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _load(path: str, kind: str | tuple, validate: bool = True):
    doc = docs.load(path, validate=validate)
    kinds = (kind,) if isinstance(kind, str) else kind
    if doc.kind not in kinds:
        raise docs.ValidationError("kind", f"expected {' or '.join(kinds)}, got {doc.kind!r}")
    return doc, (docs.parse(doc) if validate else None)


def _emit(obj) -> None:
    sys.stdout.write(canonical_json(obj))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_graph_alpha(args) -> int:
    _, g = _load(args.input, "graph")
    alpha, witness = ze.independence_number(g, cap=args.cap)
    _emit({"alpha": alpha, "witness": witness})
    return EXIT_OK


def cmd_graph_capacity(args) -> int:
    _, g = _load(args.input, "graph")
    bounds = ze.shannon_capacity_lower_bound(g, args.max_power, cap=args.cap)
    alphas = [int(round(b**p)) for p, b in enumerate(bounds, start=1)]
    _emit({"alpha_powers": alphas, "lower_bounds": bounds, "best": max(bounds) if bounds else None})
    return EXIT_OK


def cmd_confusability(args) -> int:
    _, ch = _load(args.input, "classical_channel")
    g = ze.confusability_graph(ch, threshold=args.threshold)
    _emit(docs.graph_document(g).to_json())
    return EXIT_OK


def cmd_alpha_quantum(args) -> int:
    _, ch = _load(args.input, "channel")
    cert = ze.alpha_search(ch, args.k, restarts=args.restarts, seed=args.seed)
    check = ze.alpha_certificate_check(ch, cert, tol=args.tol)
    _emit({
        "k": args.k,
        "seed": args.seed,
        "restarts": args.restarts,
        "objective": cert.residual,
        "residual": check.residual,
        "max_overlap": check.max_overlap,
        "certified": check.passed,
        "states": np.array(cert.states),
    })
    return EXIT_OK if check.passed else EXIT_INCONCLUSIVE


def cmd_clique_score(args) -> int:
    _, inst = _load(args.input, "clique")
    if args.witness:
        with open(args.witness, encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            states = [decode_complex(s) for s in raw]
        except (ValueError, TypeError) as exc:
            raise docs.ValidationError("witness", str(exc)) from None
        if len(states) != inst.k or any(s.shape != (inst.channel.dim_in,) for s in states):
            raise docs.ValidationError("witness", f"expected {inst.k} state vectors of dimension {inst.channel.dim_in}")
        states = [s / np.linalg.norm(s) for s in states]
        score = ze.clique_score(inst.channel, states)
        source = "witness"
    else:
        cert = ze.alpha_search(inst.channel, inst.k, restarts=args.restarts, seed=args.seed)
        states = list(cert.states)
        score = ze.clique_score(inst.channel, states)
        source = "alpha_search"
    _emit({"score": score, "a": inst.a, "b": inst.b, "k": inst.k, "source": source,
           "below_a": score <= inst.a, "above_b": score >= inst.b, "seed": args.seed})
    return EXIT_OK


def cmd_min_entropy(args) -> int:
    _, ch = _load(args.input, "channel")
    if args.oracle:
        res = cap.min_entropy_oracle(ch, samples=args.samples, seed=args.seed)
    else:
        res = cap.min_entropy_ascent(ch, restarts=args.restarts, seed=args.seed)
    _emit(res)
    return EXIT_OK


def cmd_holevo(args) -> int:
    _, ch = _load(args.input, "channel")
    if args.oracle:
        res = cap.holevo_oracle(ch, samples=args.samples, seed=args.seed)
    else:
        res = cap.holevo_ascent(ch, ensemble_size=args.ensemble_size, restarts=args.restarts, seed=args.seed)
    _emit(res)
    return EXIT_OK


def cmd_arimoto_blahut(args) -> int:
    _, ch = _load(args.input, "classical_channel")
    res = cap.arimoto_blahut(ch, tol=args.tol, max_iters=args.max_iters)
    _emit(res)
    return EXIT_OK if res.converged else EXIT_INCONCLUSIVE


def cmd_reduce(args) -> int:
    if args.which == "ham2clique":
        _, inst = _load(args.input, "localham")
        _emit(docs.clique_document(red.ham_to_clique(inst)).to_json())
    elif args.which == "qsat2clique":
        _, inst = _load(args.input, "qsat")
        _emit(docs.clique_document(red.qsat_to_clique(inst)).to_json())
    elif args.which == "sat24entropy":
        _, inst = _load(args.input, "sat24")
        _emit(docs.channel_document(red.sat24_to_minentropy(inst, trace_form=args.trace_form)).to_json())
    else:
        _, ch = _load(args.input, "channel")
        rep = red.minentropy_to_holevo(ch, seed=args.seed, restarts=args.restarts, samples=args.samples)
        _emit(rep)
        return EXIT_OK if rep["passed"] else EXIT_INCONCLUSIVE
    return EXIT_OK


_REDUCTION_INPUT = {
    "ham2clique": "localham",
    "qsat2clique": "qsat",
    "sat24entropy": "sat24",
    "lift-holevo": "channel",
}


def _budgets(args) -> dict:
    b = {}
    for key in ("restarts", "samples", "joint_samples", "oracle_samples"):
        v = getattr(args, key, None)
        if v is not None:
            b[key] = v
    return b


def run_verify(instance_doc: docs.Document, reduction: str, seed: int, budgets: dict) -> docs.Document:
    inst = docs.parse(instance_doc)
    report = red.verify_gap(inst, reduction, seed=seed, budgets=budgets)
    return docs.report_document(report, instance_doc)


def cmd_verify(args) -> int:
    if args.replay:
        old, _ = _load(args.replay, "report")
        p = old.payload
        inst_doc = docs.Document(p["instance"]["kind"], p["instance"]["payload"])
        new = run_verify(inst_doc, p["reduction"], p["seed"], p.get("budgets", {}))
        same = docs.dumps(new) == docs.dumps(old)
        _emit({"identical": same, "verdict": new.payload["verdict"], "previous_verdict": p["verdict"]})
        return EXIT_OK if same else EXIT_INCONCLUSIVE
    if args.input is None or args.reduction is None or args.seed is None:
        raise UsageError("verify needs --in, --reduction and --seed (or --replay)")
    doc, _ = _load(args.input, _REDUCTION_INPUT[args.reduction])
    out = run_verify(doc, args.reduction, args.seed, _budgets(args))
    text = docs.dumps(out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if out.payload["verdict"] != "inconclusive" else EXIT_INCONCLUSIVE


def cmd_validate_channel(args) -> int:
    doc, _ = _load(args.input, "channel", validate=False)
    ch = docs.channel_from_payload(doc.payload, check=False)
    rep = validate_cptp(ch, tol=args.tol)
    _emit({"form": doc.payload.get("form"), "dim_in": ch.dim_in, "dim_out": ch.dim_out, **rep.to_dict()})
    return EXIT_OK if rep.passed else EXIT_INVALID


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qcaplab", description="Zero-error and Holevo capacity laboratory.")
    p.add_argument("--version", action="version", version=f"qcaplab {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=fn)
        return sp

    sp = add("graph-alpha", cmd_graph_alpha, "exact independence number of a graph")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--cap", type=int, default=ze.EXACT_ALPHA_CAP)

    sp = add("graph-capacity", cmd_graph_capacity, "Shannon capacity lower bounds alpha(G^k)^(1/k)")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--max-power", type=int, default=2)
    sp.add_argument("--cap", type=int, default=ze.EXACT_ALPHA_CAP)

    sp = add("confusability", cmd_confusability, "confusability graph of a classical channel")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--threshold", type=float, default=0.0)

    sp = add("alpha-quantum", cmd_alpha_quantum, "search for k states with orthogonal outputs")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = add("clique-score", cmd_clique_score, "score a witness (or a searched one) for a clique instance")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--witness", default=None, help="JSON list of state vectors as [re, im] pairs")
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("min-entropy", cmd_min_entropy, "minimum output entropy estimate")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--oracle", action="store_true", help="use the sampling oracle")
    sp.add_argument("--samples", type=int, default=cap.DEFAULT_SAMPLES)
    sp.add_argument("--restarts", type=int, default=cap.DEFAULT_RESTARTS)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("holevo", cmd_holevo, "Holevo quantity lower bound")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--oracle", action="store_true", help="use the sampling oracle")
    sp.add_argument("--samples", type=int, default=cap.DEFAULT_SAMPLES)
    sp.add_argument("--restarts", type=int, default=cap.DEFAULT_RESTARTS)
    sp.add_argument("--ensemble-size", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("arimoto-blahut", cmd_arimoto_blahut, "capacity of a classical channel")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iters", type=int, default=100000)

    sp = add("reduce", cmd_reduce, "run a reduction and print the produced instance")
    sp.add_argument("which", choices=list(_REDUCTION_INPUT))
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--trace-form", choices=["plain", "eb"], default="plain")
    sp.add_argument("--samples", type=int, default=cap.DEFAULT_SAMPLES)
    sp.add_argument("--restarts", type=int, default=cap.DEFAULT_RESTARTS)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("verify", cmd_verify, "check a reduction's gap on one instance and emit a report")
    sp.add_argument("--in", dest="input", default=None)
    sp.add_argument("--reduction", choices=list(_REDUCTION_INPUT), default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--restarts", type=int, default=None)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--joint-samples", type=int, default=None)
    sp.add_argument("--oracle-samples", type=int, default=None)
    sp.add_argument("--out", default=None, help="also write the report here")
    sp.add_argument("--replay", default=None, help="re-run a saved report and compare")

    sp = add("validate-channel", cmd_validate_channel, "CPTP diagnostics for a channel document")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--tol", type=float, default=1e-9)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qcaplab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except docs.ValidationError as exc:
        print(f"qcaplab: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SizeCapError as exc:
        print(f"qcaplab: over budget: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (OSError, QCapError, ValueError) as exc:
        print(f"qcaplab: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None) -> None:
    sys.exit(run(argv))
