"""Command-line front end.

Exit status is 0 on success, 1 for domain errors (out-of-domain
conversions, non-terminating values, division by zero...) and 2 for
usage errors, including malformed numerals and specs.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import selftest as _selftest
from .base_change import convert_approx, convert_exact, convert_state, pf_domain_class
from .complexnum import (
    ComplexOp,
    complex_arith,
    complex_cauchy_report,
    complex_compare_equal,
    complex_from_parts,
    parse_complex,
)
from .errors import ParseError, QukitError, SequenceSpecError
from .fock import apply_op_entangled, make_state, relation_probability, result_mixture, state_from_json, state_to_json
from .frames import (
    build_field,
    can_see,
    descendants,
    field_from_json as frame_field_from_json,
    frame_ids_json,
    iteration_path,
    parse_frame_id,
    winding_number,
)
from .gauge import apply_gauge, composite_signature, field_from_json, field_to_json, random_field
from .numeral import ArithRelation, Op, arith_abs, arith_op, format_numeral, parse_numeral, relate, successor_vj
from .sequences import asymptotic_compare, cauchy_report, seq_from_spec

USAGE_ERRORS = (ParseError, SequenceSpecError)


@dataclass(frozen=True)
class RunConfig:
    N: int = 32
    L: int = 16
    eps: float | None = None  # 1e-9 for basis sequences, 1e-3 otherwise
    seed: int = 0
    fmt: str = "json"


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    if isinstance(obj, str):
        print(obj)
    else:
        print(json.dumps(obj, indent=2, ensure_ascii=False))


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc.msg}") from None


def _operand(text: str):
    """A numeral, or ``@file.json`` holding a state."""
    if text.startswith("@"):
        return state_from_json(_load_json(text[1:]))
    return parse_numeral(text)


def _prob(p: float) -> float:
    return float(f"{p:.12g}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args, cfg: RunConfig) -> None:
    ops = [_operand(x) for x in args.operands]
    op = args.op
    arity = 1 if op in ("abs", "succ") else 2
    if len(ops) != arity:
        raise UsageError(f"--op {op} takes {arity} operand(s), got {len(ops)}")
    states = [o for o in ops if not hasattr(o, "digits")]
    if states:
        psi, phi = (o if not hasattr(o, "digits") else make_state([(o, 1)]) for o in ops)
        if op in ("eq", "lt", "gt"):
            rel = {"eq": ArithRelation.EQ_A, "lt": ArithRelation.LT_A, "gt": ArithRelation.GT_A}[op]
            _emit({"relation": op, "probability": _prob(relation_probability(rel, psi, phi))})
            return
        if op not in ("add", "sub", "mul", "div"):
            raise UsageError(f"--op {op} does not take states")
        ent = apply_op_entangled(op, psi, phi, args.accuracy)
        _emit(result_mixture(ent).to_json())
        return
    if op == "abs":
        _emit(format_numeral(arith_abs(ops[0])))
    elif op == "succ":
        _emit(format_numeral(successor_vj(args.site, ops[0])))
    elif op in ("eq", "lt", "gt", "rel"):
        r = relate(*ops)
        _emit(r.name if op == "rel" else str(r.value == op).lower())
    else:
        if op == "div" and args.accuracy is None:
            raise UsageError("--op div needs --accuracy")
        _emit(format_numeral(arith_op(Op(op), ops[0], ops[1], args.accuracy)))


def cmd_convert(args, cfg: RunConfig) -> None:
    if args.classify:
        text = args.value.strip()
        if text.isdigit():
            src = int(text)
        elif ":" in text:
            src = parse_numeral(text).base
        else:
            raise UsageError(f"--classify wants a base or a numeral, got {text!r}")
        dc = pf_domain_class(src, args.to)
        _emit({"source": src, "target": args.to, "class": dc.kind.name,
               "pf_source": sorted(dc.pf_source), "pf_target": sorted(dc.pf_target)})
        return
    x = _operand(args.value)
    if args.source is not None and x.base != args.source:
        raise UsageError(f"input is base {x.base}, not --from {args.source}")
    if hasattr(x, "digits"):
        out = convert_exact(x, args.to) if args.accuracy is None else convert_approx(x, args.to, args.accuracy)
        _emit(format_numeral(out))
    else:
        _emit(state_to_json(convert_state(x, args.to, args.accuracy)))


def cmd_gauge(args, cfg: RunConfig) -> None:
    if args.signature is not None:
        sig = composite_signature(args.signature)
        _emit({"base": sig.base, "factors": [list(f) for f in sig.factors], "group": str(sig),
               "elementary": list(sig.elementary)})
        return
    if args.state is None:
        raise UsageError("gauge needs --state (or --signature)")
    psi = state_from_json(_load_json(args.state))
    if args.field:
        U = field_from_json(_load_json(args.field))
    elif args.random_sites:
        sites = [(int(j), None) for j in args.random_sites.split(",")]
        U = random_field(psi.base, sites, np.random.default_rng(cfg.seed), name=f"rand{cfg.seed}")
    else:
        raise UsageError("gauge needs --field or --random-sites")
    if args.inverse:
        U = U.inverse()
    out = {"field": U.name, "state": state_to_json(apply_gauge(U, psi))}
    if args.dump_field:
        out["field_json"] = field_to_json(U)
    _emit(out)


def _spec(text: str | None, config: str | None):
    if config:
        return seq_from_spec(_load_json(config))
    if text is None:
        raise UsageError("give --spec or --config")
    return seq_from_spec(text)


def cmd_cauchy(args, cfg: RunConfig) -> None:
    psi = _spec(args.spec, args.config)
    report = cauchy_report(psi, cfg.N, cfg.L, cfg.eps)
    if cfg.fmt == "csv":
        sys.stdout.write(report.lattice.to_csv())
    elif cfg.fmt == "text":
        _emit(f"{report.classification.value} witness_p={report.witness_p}")
    else:
        _emit(report.to_json())


def cmd_compare(args, cfg: RunConfig) -> None:
    a = _spec(args.spec, args.config)
    b = _spec(args.spec2, args.config2)
    _emit(asymptotic_compare(a, b, cfg.N, cfg.L, cfg.eps).to_json())


def cmd_complex(args, cfg: RunConfig) -> None:
    if args.re_spec or args.im_spec:
        if not (args.re_spec and args.im_spec):
            raise UsageError("give both --re-spec and --im-spec")
        seq = complex_from_parts(seq_from_spec(args.re_spec), seq_from_spec(args.im_spec))
        if args.re_spec2 or args.im_spec2:
            other = complex_from_parts(seq_from_spec(args.re_spec2), seq_from_spec(args.im_spec2))
            _emit(complex_compare_equal(seq, other, cfg.N, cfg.L, cfg.eps).to_json())
        else:
            _emit(complex_cauchy_report(seq, cfg.N, cfg.L, cfg.eps).to_json())
        return
    if args.op is None or len(args.operands) != 2:
        raise UsageError("complex needs --op with two operands, or --re-spec/--im-spec")
    z, w = (parse_complex(x) for x in args.operands)
    if args.op == "div" and args.accuracy is None:
        raise UsageError("--op div needs --accuracy")
    _emit(str(complex_arith(ComplexOp(args.op), z, w, args.accuracy)))


def _frame_field(args):
    if args.config:
        return frame_field_from_json(_load_json(args.config))
    if not args.scheme:
        raise UsageError("give --config or --scheme")
    return build_field(args.scheme, args.bases.split(","), args.gauges.split(","), args.n)


def cmd_frames(args, cfg: RunConfig) -> None:
    field = _frame_field(args)
    if args.see:
        obs, tgt = (parse_frame_id(x) for x in args.see)
        v = can_see(obs, tgt, field)
        _emit({"observer": str(obs), "target": str(tgt), "visible": v.visible, "wraps": v.wraps})
    elif args.descendants:
        _emit(frame_ids_json(descendants(parse_frame_id(args.descendants), field, args.depth)))
    elif args.parents:
        _emit(frame_ids_json(field.parents(parse_frame_id(args.parents))))
    elif args.winding:
        path = iteration_path(field, parse_frame_id(args.winding), args.steps)
        _emit({"start": str(path.frames[0]), "steps": path.steps, "winding_number": winding_number(path, field)})
    else:
        stages = None if field.n is not None else range(0, args.depth + 1)
        _emit({"field": field.to_json(), "frames": frame_ids_json(field.frames(stages))})


def cmd_selftest(args, cfg: RunConfig) -> int:
    return 0 if _selftest.run(cfg.seed) else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qukit", description="Exact qukit-string number representations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-N", type=int, default=32, help="sequence horizon (default 32)")
    common.add_argument("-L", type=int, default=16, help="accuracy horizon (default 16)")
    common.add_argument("--eps", type=float, default=None, help="tolerance (default 1e-9, 1e-3 for superpositions)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="arithmetic on numerals or states")
    e.add_argument("--op", required=True, choices=("add", "sub", "mul", "div", "abs", "succ", "eq", "lt", "gt", "rel"))
    e.add_argument("--accuracy", type=int, help="fraction digits for div")
    e.add_argument("--site", type=int, default=0, help="site j for succ")
    e.add_argument("operands", nargs="+", help="numerals like 10:12+5, or @state.json")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("convert", parents=[common], help="change of base")
    c.add_argument("--from", dest="source", type=int, help="expected base of the input")
    c.add_argument("--to", type=int, required=True)
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact conversion (default)")
    mode.add_argument("--approx", "--accuracy", dest="accuracy", type=int, help="truncate to this many fraction digits")
    mode.add_argument("--classify", action="store_true", help="prime-factor domain class of VALUE's base -> --to")
    c.add_argument("value", help="numeral, @state.json, or a base with --classify")
    c.set_defaults(func=cmd_convert)

    g = sub.add_parser("gauge", parents=[common], help="apply a gauge field to a state")
    g.add_argument("--state", help="state JSON file")
    g.add_argument("--field", help="gauge field JSON file")
    g.add_argument("--random-sites", help="comma-separated sites for a seeded random field")
    g.add_argument("--inverse", action="store_true")
    g.add_argument("--dump-field", action="store_true")
    g.add_argument("--signature", type=int, help="print the composite-qukit group signature of a base")
    g.set_defaults(func=cmd_gauge)

    for name, func, helptext in (("cauchy", cmd_cauchy, "Cauchy report"), ("compare", cmd_compare, "asymptotic comparison")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--spec")
        s.add_argument("--config", help="sequence spec JSON file")
        if name == "compare":
            s.add_argument("--spec2")
            s.add_argument("--config2")
        s.set_defaults(func=func)

    x = sub.add_parser("complex", parents=[common], help="complex pairs and sequences")
    x.add_argument("--op", choices=[o.value for o in ComplexOp])
    x.add_argument("--accuracy", type=int)
    x.add_argument("--re-spec")
    x.add_argument("--im-spec")
    x.add_argument("--re-spec2")
    x.add_argument("--im-spec2")
    x.add_argument("operands", nargs="*", help="pairs like '10:1+;10:2-i'")
    x.set_defaults(func=cmd_complex)

    f = sub.add_parser("frames", parents=[common], help="frame-field queries")
    f.add_argument("--config", help="field description JSON")
    f.add_argument("--scheme", choices=("finite", "one_way", "two_way", "cyclic"))
    f.add_argument("--n", type=int)
    f.add_argument("--bases", default="10")
    f.add_argument("--gauges", default="g")
    f.add_argument("--see", nargs=2, metavar=("OBSERVER", "TARGET"))
    f.add_argument("--descendants", metavar="FRAME")
    f.add_argument("--parents", metavar="FRAME")
    f.add_argument("--winding", metavar="START")
    f.add_argument("--steps", type=int, default=0)
    f.add_argument("--depth", type=int, default=1)
    f.set_defaults(func=cmd_frames)

    t = sub.add_parser("selftest", parents=[common], help="seeded invariant suite")
    t.set_defaults(func=cmd_selftest)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(args.N, args.L, args.eps, args.seed, args.format)
    try:
        rc = args.func(args, cfg)
    except UsageError as exc:
        print(f"qukit {args.command}: E_USAGE: {exc}", file=sys.stderr)
        return 2
    except USAGE_ERRORS as exc:
        print(f"qukit {args.command}: {exc.code}: {exc}", file=sys.stderr)
        return 2
    except QukitError as exc:
        print(f"qukit {args.command}: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"qukit {args.command}: E_DOMAIN: {exc}", file=sys.stderr)
        return 1
    return rc or 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
