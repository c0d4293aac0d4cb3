"""Command line interface: ``empchoice <command> ...``.

Every command prints a JSON report on stdout (or writes it to ``--json``);
commands with plot data also write a CSV when ``--csv`` is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .choice import RegularizationSchedule, ecf_dominance, ecf_eu, ecf_regularized, recf_gamma_robust
from .classes import EuSingleton, parse_class
from .errors import EmpChoiceError
from .harness import (BinomialIid, DeterministicAdversary, Engine, FromFile, ScenarioSpec,
                      example4_engine, example4_scenario, replicate_prompting_study,
                      replicate_table1, run_scenario, ssd_assumption3_demo)
from .inference import (Mode, TestConfig, breakdown_curve, membership_test,
                        robust_membership_test)
from .protocol import load_protocol, load_protocol_json, sub_protocol
from .statistics import ContaminationSpec


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, default=_json_default)
    if getattr(args, "json", None):
        Path(args.json).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.ndarray,)):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _write_csv(path, header, rows) -> None:
    if not path:
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _protocol(args):
    dirs = {c: "min" for c in args.min or []}
    dirs.update({c: "max" for c in args.max or []})
    if str(args.protocol).endswith(".json"):
        return load_protocol_json(args.protocol)
    return load_protocol(args.protocol, directions=dirs or None)


def _config(args) -> TestConfig:
    return TestConfig(args.alpha, args.resamples, args.seed, Mode(args.mode),
                      n_jobs=args.jobs)


def _parse_shares(text: str) -> list[float]:
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise EmpChoiceError("--shares expects lo:hi:step") from None
    if step <= 0 or hi < lo:
        raise EmpChoiceError("--shares needs step > 0 and hi >= lo")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(n)]


def _contamination(args) -> ContaminationSpec:
    """``--gamma 0.1`` or ``--gamma a=0.1,b=0.2``; same for ``--k``."""
    if args.gamma is not None and args.k is not None:
        raise EmpChoiceError("give either --gamma or --k")
    if args.gamma is None and args.k is None:
        raise EmpChoiceError("robust analysis needs --gamma or --k")
    text = args.gamma if args.gamma is not None else args.k
    if "=" not in text:
        if args.gamma is not None:
            return ContaminationSpec.uniform(float(text))
        return _KAll(int(text))
    pairs = dict(item.split("=", 1) for item in text.split(","))
    if args.gamma is not None:
        return ContaminationSpec(gamma={a: float(v) for a, v in pairs.items()})
    return ContaminationSpec(k={a: int(v) for a, v in pairs.items()})


class _KAll:
    """Placeholder for a uniform ``k`` resolved once the protocol is known."""

    def __init__(self, k):
        self.k = k

    def resolve(self, protocol) -> ContaminationSpec:
        return ContaminationSpec(k={a: self.k for a in protocol.actions})


def _resolve(spec, protocol) -> ContaminationSpec:
    return spec.resolve(protocol) if isinstance(spec, _KAll) else spec


# ------------------------------------------------------------ commands

def cmd_test(args):
    p = _protocol(args)
    rep = membership_test(p, args.target, args.set, parse_class(args.cls), _config(args))
    _emit(args, rep.to_dict())
    _write_csv(args.csv, ["j", "i", "statistic", "p_value", "reject"],
               [[r.j, r.i, r.observed.value, r.p_value, int(r.reject)] for r in rep.pairwise])


def cmd_robust(args):
    p = _protocol(args)
    spec = _resolve(_contamination(args), p)
    rep = robust_membership_test(p, args.target, args.set, parse_class(args.cls), spec, _config(args))
    _emit(args, rep.to_dict())
    _write_csv(args.csv, ["j", "i", "d0", "q_alpha", "p_value", "reject"],
               [[r.j, r.i, r.d0, r.q_alpha, r.p_value, int(r.reject)] for r in rep.pairwise])


def cmd_breakdown(args):
    p = _protocol(args)
    curve = breakdown_curve(p, args.j, args.i, parse_class(args.cls), _config(args),
                            _parse_shares(args.shares))
    _emit(args, curve.to_dict())
    _write_csv(args.csv, ["share", "p_value"], curve.rows())


def cmd_choice(args):
    p = _protocol(args)
    sp = sub_protocol(p, args.set)
    cls = parse_class(args.cls)
    if args.rule == "eu":
        cs = ecf_eu(sp, cls if isinstance(cls, EuSingleton) else EuSingleton())
    elif args.rule == "dominance":
        cs = ecf_dominance(sp, cls)
    elif args.rule == "regularized":
        cs = ecf_regularized(sp, cls, RegularizationSchedule(args.c, args.L, args.regularize_first))
    else:
        cs = recf_gamma_robust(sp, cls, _resolve(_contamination(args), p))
    if args.table:
        print(cs.table(), file=sys.stderr)
    _emit(args, cs.to_dict())


def _engine(args) -> Engine:
    cls = parse_class(args.cls)
    sched = RegularizationSchedule(args.c, args.L, args.regularize_first)
    spec = None
    if args.rule == "robust":
        spec = _contamination(args)
        if isinstance(spec, _KAll):
            raise EmpChoiceError("simulate takes --gamma for the robust rule")
    return Engine(args.rule, cls, sched, spec)


def cmd_simulate(args):
    if args.scenario == "binomial":
        p = [float(x) for x in args.p.split(",")]
        kind = BinomialIid(tuple(p), args.size, tuple(args.actions.split(",")) if args.actions
                           else BinomialIid.__dataclass_fields__["actions"].default)
    elif args.scenario == "adversary":
        kind = DeterministicAdversary()
    else:
        kind = FromFile(args.file)
    spec = ScenarioSpec(kind, args.rounds, args.seed)
    trace = run_scenario(spec, _engine(args))
    _emit(args, trace.to_dict())
    _write_csv(args.csv, trace.csv_header(), trace.csv_rows())


def cmd_replicate(args):
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    name = args.study
    if name == "table1":
        res = replicate_table1()
        payload = {k: v.to_dict() for k, v in res.items()}
    elif name in ("example4-eu", "example4-fsd"):
        scenario = 1 if name == "example4-eu" else 2
        trace = run_scenario(example4_scenario(scenario, args.rounds, args.seed),
                             example4_engine(scenario))
        payload = trace.to_dict()
        if out:
            _write_csv(out / f"{name}.csv", trace.csv_header(), trace.csv_rows())
    elif name == "prompting":
        cfg = TestConfig(args.alpha, args.resamples, args.seed, n_jobs=args.jobs)
        bundle = replicate_prompting_study(cfg=cfg)
        payload = bundle.to_dict()
        if out:
            for c in bundle.breakdown:
                _write_csv(out / f"breakdown_{c.pair[0]}_{c.pair[1]}.csv", ["share", "p_value"], c.rows())
            _write_csv(out / "pairwise.csv", ["j", "i", "statistic", "p_value", "reject"],
                       [[r.j, r.i, r.observed.value, r.p_value, int(r.reject)] for r in bundle.pairwise])
    else:
        payload = {}
        for n in args.n or [5, 50]:
            demo = ssd_assumption3_demo(n, args.n_rep, args.seed)
            payload[str(n)] = demo.to_dict()
            if out:
                _write_csv(out / f"ssd_demo_n{n}.csv", ["value", "ecdf_t1", "ecdf_t2"], demo.csv_rows())
    if out:
        (out / f"{name}.json").write_text(json.dumps(payload, indent=2, default=_json_default) + "\n",
                                          encoding="utf-8")
    _emit(args, payload)


# ------------------------------------------------------------ parser

def _add_protocol(sp):
    sp.add_argument("protocol", help="protocol CSV (header action,<c1>,...) or JSON export")
    sp.add_argument("--min", action="append", metavar="COL", help="column to minimize")
    sp.add_argument("--max", action="append", metavar="COL", help="column to maximize")
    sp.add_argument("--class", dest="cls", default="fsd",
                    help="fsd | eu | eu:<w1,..> | ssd | ssd:<lo>:<hi>:<points> | file:<path>")
    sp.add_argument("--json", help="write the JSON report here instead of stdout")


def _add_test_opts(sp):
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--resamples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mode", choices=[m.value for m in Mode], default="permutation")
    sp.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
    sp.add_argument("--csv", help="write plot data CSV")


def _add_contamination(sp):
    sp.add_argument("--gamma", help="share for all actions, or a=0.1,b=0.2")
    sp.add_argument("--k", help="contaminated points for all actions, or a=1,b=2")


def _add_rule(sp, default="dominance"):
    sp.add_argument("--rule", choices=["eu", "dominance", "regularized", "robust"], default=default)
    sp.add_argument("--c", type=float, default=1.0, help="regularization scale")
    sp.add_argument("--L", type=float, default=2.0, help="Lipschitz factor of delta")
    sp.add_argument("--regularize-first", action="store_true",
                    help="also require cr1 > 4 delta for an exclusion")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="empchoice", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="membership test of a target action")
    _add_protocol(t)
    _add_test_opts(t)
    t.add_argument("--target", required=True)
    t.add_argument("--set", nargs="+", help="comparison set (default: all actions)")
    t.set_defaults(func=cmd_test)

    r = sub.add_parser("robust", help="contamination-robust membership test")
    _add_protocol(r)
    _add_test_opts(r)
    _add_contamination(r)
    r.add_argument("--target", required=True)
    r.add_argument("--set", nargs="+")
    r.set_defaults(func=cmd_robust)

    b = sub.add_parser("breakdown", help="robust p-value against contamination share")
    _add_protocol(b)
    _add_test_opts(b)
    b.add_argument("--j", required=True, help="competitor action")
    b.add_argument("--i", required=True, help="target action")
    b.add_argument("--shares", default="0:0.3:0.01", help="lo:hi:step")
    b.set_defaults(func=cmd_breakdown)

    c = sub.add_parser("choice", help="empirical choice set with rationale")
    _add_protocol(c)
    _add_rule(c)
    _add_contamination(c)
    c.add_argument("--set", nargs="+", help="sub-protocol actions (default: all)")
    c.add_argument("--table", action="store_true", help="print a readable table on stderr")
    c.set_defaults(func=cmd_choice)

    s = sub.add_parser("simulate", help="choice sets along a growing protocol")
    s.add_argument("--scenario", choices=["binomial", "adversary", "file"], default="binomial")
    s.add_argument("--p", default="0.25,0.2,0.22,0.22,0.21", help="binomial success probabilities")
    s.add_argument("--size", type=int, default=10)
    s.add_argument("--actions", help="comma separated action names")
    s.add_argument("--file", help="protocol for --scenario file")
    s.add_argument("--rounds", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--class", dest="cls", default="fsd")
    _add_rule(s)
    _add_contamination(s)
    s.add_argument("--json")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replicate", help="bundled worked examples")
    p.add_argument("study", choices=["table1", "example4-eu", "example4-fsd", "prompting", "ssd-demo"])
    p.add_argument("--out", help="directory for JSON and CSV outputs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rounds", type=int, default=500)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--resamples", type=int, default=10_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--n", type=int, action="append", help="ssd-demo group size (repeatable)")
    p.add_argument("--n-rep", type=int, default=10_000)
    p.add_argument("--json")
    p.set_defaults(func=cmd_replicate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (EmpChoiceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
