"""Command-line surface over the whole library.

Every subcommand emits machine-readable output (json by default, csv or
pretty on request) with a fixed exit-code contract so CI can assert verdicts
without parsing:

    0  success / certificate Holds
    1  certificate Fails
    2  enumeration cap exceeded
    3  certificate Inconclusive at the precision cap
    4  structured input error (bad file, non-exchangeable input, ...)

Letters on the command line and in files are 1-indexed, matching the worked
examples; the library is 0-indexed internally.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import serialize
from .conditional import markov_marginal_counterexample, verify_conditional_reduction
from .core import Alphabet
from .errors import CapExceeded, ExkitError
from .games import (
    classical_value,
    definetti_upper_bound,
    iid_kernel,
    parallel_game,
    sequential_game,
    symmetrize_strategy,
    tensor_strategy,
)
from .intervals import DEFAULT_BITS
from .mp import beta_bound, cone_constants, lambda_matrix, mp_of_extreme
from .reduction import (
    alpha_analytic,
    alpha_tight,
    verify_flexible_reduction,
)
from .relations import (
    Exchangeable,
    ExchangeableType,
    LMarkov,
    LMarkovType,
    Markov,
    MarkovType,
    ProductRelation,
    ProductType,
    best_formula_terms,
    enumerate_types,
    type_of,
)

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_CAP = 2
EXIT_INCONCLUSIVE = 3
EXIT_ERROR = 4

_VERDICT_EXIT = {"holds": EXIT_OK, "fails": EXIT_FAILS, "inconclusive": EXIT_INCONCLUSIVE}


def _default_bits() -> int:
    raw = os.environ.get("EXKIT_PRECISION_BITS")
    if raw is None:
        return DEFAULT_BITS
    bits = int(raw)
    if bits < 64:
        raise ExkitError("EXKIT_PRECISION_BITS must be >= 64")
    return bits


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    parser.add_argument("--precision-bits", type=int, default=None)
    parser.add_argument("--enum-cap", type=int, default=10**8)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--output", default=None, help="write to a file instead of stdout")


def _add_relation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--relation",
        choices=("exchangeable", "markov", "lmarkov", "product"),
        default="exchangeable",
    )
    parser.add_argument("--ell", type=int, default=2, help="order for lmarkov")
    parser.add_argument(
        "--product",
        default=None,
        help="comma list of factor relations, e.g. 'exchangeable,markov' or 'lmarkov:2,exchangeable'",
    )
    parser.add_argument("--d", type=int, default=None, help="alphabet size")
    parser.add_argument(
        "--factors", default=None, help="comma list of factor sizes for product alphabets"
    )


def _parse_part(token: str):
    token = token.strip()
    if token == "exchangeable":
        return Exchangeable()
    if token == "markov":
        return Markov()
    if token.startswith("lmarkov"):
        _, _, ell = token.partition(":")
        return LMarkov(int(ell) if ell else 2)
    raise ExkitError(f"unknown relation part {token!r}")


def _relation_from_args(args):
    if args.relation == "exchangeable":
        return Exchangeable()
    if args.relation == "markov":
        return Markov()
    if args.relation == "lmarkov":
        return LMarkov(args.ell)
    parts = args.product or "exchangeable,exchangeable"
    return ProductRelation(tuple(_parse_part(p) for p in parts.split(",")))


def _alphabet_from_args(args) -> Alphabet:
    if args.factors:
        factors = tuple(int(f) for f in args.factors.split(","))
        size = 1
        for f in factors:
            size *= f
        if args.d is not None and args.d != size:
            raise ExkitError("--d disagrees with the product of --factors")
        return Alphabet(size, factors)
    if args.d is None:
        raise ExkitError("--d (or --factors) is required")
    return Alphabet(args.d)


def _bits(args) -> int:
    bits = args.precision_bits if args.precision_bits is not None else _default_bits()
    if bits < 64:
        raise ExkitError("precision must be >= 64 bits")
    return bits


def _emit(args, payload: dict, rows: list[dict] | None = None) -> None:
    if args.format == "json":
        text = serialize.dumps(payload)
    elif args.format == "csv":
        flat = rows if rows is not None else [_flatten(payload)]
        buf = io.StringIO()
        if flat:
            writer = csv.DictWriter(buf, fieldnames=list(flat[0].keys()))
            writer.writeheader()
            for row in flat:
                writer.writerow(row)
        text = buf.getvalue().rstrip("\n")
    else:
        text = _pretty(payload)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _flatten(payload: dict, prefix: str = "") -> dict:
    flat: dict = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        elif isinstance(value, list):
            flat[name] = json.dumps(value)
        else:
            flat[name] = value
    return flat


def _pretty(payload: dict, indent: int = 0) -> str:
    lines = []
    pad = "  " * indent
    for key, value in payload.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_pretty(value, indent + 1))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(_pretty(item, indent + 1))
                lines.append(f"{pad}  -")
        else:
            lines.append(f"{pad}{key}: {value}")
    return "\n".join(line for line in lines if line)


def _pi_summary(descriptor, n: int) -> dict:
    if isinstance(descriptor, ExchangeableType):
        return {
            "pi": [serialize.rational_str(Fraction(c, n)) for c in descriptor.counts]
        }
    if isinstance(descriptor, MarkovType):
        sums = descriptor.row_sums()
        d = len(descriptor.trans)
        rows = [
            [
                serialize.rational_str(
                    Fraction(descriptor.trans[i][j], sums[i]) if sums[i] else Fraction(1, d)
                )
                for j in range(d)
            ]
            for i in range(d)
        ]
        return {"start": descriptor.start + 1, "kernel": rows}
    if isinstance(descriptor, LMarkovType):
        d = len(descriptor.trans[0])
        sums = [sum(row) for row in descriptor.trans]
        rows = [
            [
                serialize.rational_str(
                    Fraction(descriptor.trans[g][j], sums[g]) if sums[g] else Fraction(1, d)
                )
                for j in range(d)
            ]
            for g in range(len(descriptor.trans))
        ]
        return {"start": [v + 1 for v in descriptor.start], "kernel": rows}
    if isinstance(descriptor, ProductType):
        return {"parts": [_pi_summary(p, n) for p in descriptor.parts]}
    return {}


# -- subcommands ----------------------------------------------------------------


def cmd_classes(args) -> int:
    relation = _relation_from_args(args)
    alphabet = _alphabet_from_args(args)
    index = enumerate_types(relation, alphabet, args.n, args.enum_cap)
    items = index.items
    if args.filter_word:
        word = serialize.parse_word(args.filter_word, alphabet.size)
        descr = type_of(word, relation, alphabet)
        items = tuple((t, s) for t, s in items if t == descr)
    rows = []
    for descr, size in items:
        rows.append(
            {
                "type": json.dumps(serialize.descriptor_to_json(descr), sort_keys=True),
                "size": size,
                "alpha_tight": serialize.rational_str(alpha_tight(descr, args.n)),
                "pi": json.dumps(_pi_summary(descr, args.n), sort_keys=True),
            }
        )
    payload = {
        "relation": serialize.relation_to_json(relation),
        "d": alphabet.size,
        "n": args.n,
        "N": index.N,
        "classes": [
            {
                "type": serialize.descriptor_to_json(descr),
                "size": size,
                "alpha_tight": serialize.rational_str(alpha_tight(descr, args.n)),
                "pi": _pi_summary(descr, args.n),
            }
            for descr, size in items
        ],
    }
    _emit(args, payload, rows)
    return EXIT_OK


def cmd_size(args) -> int:
    relation = _relation_from_args(args)
    alphabet = _alphabet_from_args(args)
    word = serialize.parse_word(args.word, alphabet.size)
    descr = type_of(word, relation, alphabet)
    from .relations import class_size

    payload = {
        "type": serialize.descriptor_to_json(descr),
        "size": class_size(descr, len(word)),
    }
    if isinstance(descr, MarkovType):
        terms = best_formula_terms(descr, len(word))
        payload["best_formula"] = {
            "t_w": terms["t_w"],
            "spanning_trees": terms["spanning_trees"],
            "factorial_ratio": serialize.rational_str(terms["factorial_ratio"]),
            "end_vertex": terms["end_vertex"] + 1,
        }
    _emit(args, payload)
    return EXIT_OK


def cmd_certify(args) -> int:
    with open(args.file) as fh:
        obj = json.load(fh)
    if args.verify:
        return _recheck_certificate(args, obj)
    dist = serialize.distribution_from_json(obj)
    bits = _bits(args)
    if args.conditional:
        cert = verify_conditional_reduction(dist, bits, args.enum_cap)
        payload = serialize.conditional_certificate_to_json(cert)
    else:
        relation = _relation_from_args(args)
        cert = verify_flexible_reduction(
            dist,
            relation,
            bits,
            cap=args.enum_cap,
            alpha_mode=args.alpha_mode,
            threads=args.threads,
        )
        payload = serialize.reduction_certificate_to_json(cert)
        payload["relation"] = serialize.relation_to_json(relation)
    payload["input"] = obj
    payload["options"] = {
        "conditional": bool(args.conditional),
        "alpha_mode": args.alpha_mode,
        "bits": bits,
    }
    _emit(args, payload)
    return _VERDICT_EXIT[cert.verdict]


def _recheck_certificate(args, cert_obj: dict) -> int:
    options = cert_obj.get("options", {})
    dist = serialize.distribution_from_json(cert_obj["input"])
    bits = int(options.get("bits", _bits(args)))
    if options.get("conditional"):
        cert = verify_conditional_reduction(dist, bits, args.enum_cap)
        fresh = serialize.conditional_certificate_to_json(cert)
    else:
        relation = serialize.relation_from_json(cert_obj["relation"])
        cert = verify_flexible_reduction(
            dist, relation, bits, cap=args.enum_cap, alpha_mode=options.get("alpha_mode", "analytic")
        )
        fresh = serialize.reduction_certificate_to_json(cert)
        fresh["relation"] = serialize.relation_to_json(relation)
    fresh["input"] = cert_obj["input"]
    fresh["options"] = options
    match = serialize.dumps(fresh) == serialize.dumps(cert_obj)
    _emit(args, {"verified": match, "verdict": cert.verdict})
    return EXIT_OK if match else EXIT_ERROR


def cmd_alpha(args) -> int:
    relation = _relation_from_args(args)
    alphabet = _alphabet_from_args(args)
    bound = alpha_analytic(relation, args.n, alphabet, _bits(args))
    payload = {
        "relation": serialize.relation_to_json(relation),
        "d": alphabet.size,
        "n": args.n,
        "alpha": bound.value.to_json(),
        "alpha_squared": bound.squared.to_json(),
        "degree": bound.degree,
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_mp(args) -> int:
    lam = lambda_matrix(args.n, args.d)
    payload: dict = {
        "d": args.d,
        "n": args.n,
        "types": [list(t) for t in lam.types],
    }
    if args.type:
        t = tuple(int(x) for x in args.type.split(","))
        col = lam.types.index(t)
        mp = mp_of_extreme(t, args.n, args.enum_cap)
        payload["type"] = list(t)
        payload["lambda_row"] = [serialize.rational_str(lam.entries[i][col]) for i in range(len(lam.types))]
        payload["mp_distribution"] = serialize.distribution_to_json(mp)
        cone = cone_constants(t, args.n)
        payload["cone"] = {
            "alpha_tight": serialize.rational_str(cone["alpha_tight"]),
            "beta_self": serialize.rational_str(cone["beta_self"]),
            "smaller": cone["smaller"],
        }
    else:
        payload["lambda"] = [
            [serialize.rational_str(v) for v in row] for row in lam.entries
        ]
    _emit(args, payload)
    return EXIT_OK


def cmd_beta(args) -> int:
    bound = beta_bound(args.n, args.d, _bits(args))
    payload = {
        "d": args.d,
        "n": args.n,
        "beta_exact": serialize.rational_str(bound.beta_exact),
        "argmax_type": list(bound.argmax_type),
        "beta_analytic": bound.beta_analytic.to_json() if bound.beta_analytic else None,
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_conditional(args) -> int:
    args.conditional = True
    args.alpha_mode = "analytic"
    return cmd_certify(args)


def cmd_counterexample(args) -> int:
    report = markov_marginal_counterexample()
    payload = {
        "joint_sequence": [[a + 1, x + 1] for a, x in report.joint_sequence],
        "x_marginal_support": serialize.word_str(report.x_marginal_support, 2),
        "x_class_members": [serialize.word_str(w, 2) for w in report.x_class_members],
        "marginal_masses": [serialize.rational_str(m) for m in report.marginal_masses],
        "marginal_is_markov_exchangeable": report.marginal_is_markov_exchangeable,
        "exchangeable_analogue_holds": report.exchangeable_analogue_holds,
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_game(args) -> int:
    with open(args.file) as fh:
        game = serialize.game_from_json(json.load(fh))
    bits = _bits(args)
    n = args.n
    value, witness = classical_value(game, args.enum_cap)
    payload: dict = {"classical_value": serialize.rational_str(value), "n": n, "mode": args.mode}

    kernel = None
    if args.mode == "sequential":
        if args.kernel:
            with open(args.kernel) as fh:
                kernel = serialize.kernel_from_json(json.load(fh))
        else:
            kernel = iid_kernel(game)
        repeated = sequential_game(game, kernel, n, args.enum_cap)
    else:
        repeated = parallel_game(game, n, args.enum_cap)

    try:
        repeated_value, _ = classical_value(repeated, args.enum_cap)
        payload["repeated_value"] = serialize.rational_str(repeated_value)
    except CapExceeded:
        payload["repeated_value"] = None

    if args.strategy:
        with open(args.strategy) as fh:
            base = serialize.strategy_from_json(json.load(fh))
    else:
        base = witness
    from .relations import EXCHANGEABLE, MARKOV

    relation = EXCHANGEABLE if args.mode == "parallel" else MARKOV
    strategy = symmetrize_strategy(
        game, repeated, tensor_strategy(game, base, n), relation, args.enum_cap
    )
    report = definetti_upper_bound(
        game, n, strategy, mode=args.mode, kernel=kernel, bits=bits, cap=args.enum_cap
    )
    payload["strategy_winning"] = serialize.rational_str(report.winning)
    payload["bound"] = report.bound.to_json()
    payload["bound_ge_winning"] = bool(report.bound.certainly_ge(report.winning))
    payload["alpha_certified"] = serialize.rational_str(report.alpha_certified)
    payload["prefactor_analytic"] = report.prefactor_analytic.to_json()
    payload["degree"] = report.degree
    payload["per_pi"] = [
        {
            "type": serialize.descriptor_to_json(row.descriptor),
            "predicate_weight": serialize.rational_str(row.predicate_weight),
            "fidelity_sq": row.fidelity_sq.to_json(),
        }
        for row in report.rows
    ]
    _emit(args, payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exkit",
        description="Exact de Finetti reductions for partially exchangeable distributions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classes", help="enumerate nonempty classes with sizes")
    _add_relation_flags(p)
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--filter-word", default=None)
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("size", help="class size of one word, with BEST terms")
    _add_relation_flags(p)
    _add_common(p)
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_size)

    p = sub.add_parser("certify", help="flexible reduction certificate for a distribution file")
    _add_relation_flags(p)
    _add_common(p)
    p.add_argument("file")
    p.add_argument("--conditional", action="store_true")
    p.add_argument("--alpha-mode", choices=("analytic", "tight"), default="analytic")
    p.add_argument("--verify", action="store_true", help="re-check an emitted certificate")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("alpha", help="analytic pre-factor enclosure")
    _add_relation_flags(p)
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("mp", help="measure-and-prepare lambda matrix / decomposition")
    _add_common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--type", default=None, help="comma list of letter counts")
    p.set_defaults(func=cmd_mp)

    p = sub.add_parser("beta", help="measure-and-prepare pre-factor beta(n)")
    _add_common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_beta)

    p = sub.add_parser("conditional", help="universal conditional reduction certificate")
    _add_relation_flags(p)
    _add_common(p)
    p.add_argument("file")
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_conditional)

    p = sub.add_parser("counterexample", help="Markov marginal counterexample report")
    _add_common(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("game", help="values and reduction bound for a repeated game")
    _add_common(p)
    p.add_argument("file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--mode", choices=("parallel", "sequential"), default="parallel")
    p.add_argument("--kernel", default=None)
    p.add_argument("--strategy", default=None)
    p.set_defaults(func=cmd_game)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as err:
        print(serialize.dumps({"error": "cap_exceeded", "detail": str(err)}), file=sys.stderr)
        return EXIT_CAP
    except ExkitError as err:
        payload = {"error": type(err).__name__, "detail": str(err)}
        witness = getattr(err, "witness", None)
        if witness is not None:
            payload["witness"] = [list(w) for w in witness]
        print(serialize.dumps(payload), file=sys.stderr)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as err:
        print(
            serialize.dumps({"error": type(err).__name__, "detail": str(err)}),
            file=sys.stderr,
        )
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
