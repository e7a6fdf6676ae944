"""Command-line front end: ``qinfo <command> [flags]``.

Every command prints one document (JSON by default) with the top-level
keys ``command``, ``config``, ``results`` and ``timings_ms``. Timings are
``null`` unless ``--timings`` is passed, which keeps repeated runs
byte-identical.

Exit status: 0 on success, 1 on usage or input errors, 2 when ``verify``
finds a failing item.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from typing import Callable

import numpy as np

from . import bitcommit, circuits, info, protocols, qkd, states
from .golden import run_golden
from .linalg import eig_hermitian
from .seeding import make_rng
from .serialize import csv_rows, dumps, to_plain


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _complexes(text: str) -> list[complex]:
    try:
        return [complex(x.strip().replace(" ", "")) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated complex numbers, got {text!r}") from exc


def _matrix(text: str) -> np.ndarray:
    rows = [_complexes(r) for r in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise UsageError("matrix rows must have equal length")
    return np.array(rows, dtype=complex)


def _kets(text: str) -> list[np.ndarray]:
    out = []
    for part in text.split(";"):
        v = np.array(_complexes(part), dtype=complex)
        out.append(v / np.linalg.norm(v))
    return out


PRESET_ENSEMBLES = {
    "zero-plus": ([0.5, 0.5], "1,0;1,1"),
    "bb84": ([0.25] * 4, "1,0;0,1;1,1;1,-1"),
    "trine": ([1 / 3] * 3, f"1,0;0.5,{math.sqrt(3) / 2};0.5,{-math.sqrt(3) / 2}"),
    "orthogonal": ([0.5, 0.5], "1,0;0,1"),
}


def _ensemble(args) -> states.Ensemble:
    if args.kets:
        kets = _kets(args.kets)
        weights = _floats(args.weights) if args.weights else [1 / len(kets)] * len(kets)
    else:
        weights, spec = PRESET_ENSEMBLES[args.preset]
        kets = _kets(spec)
    return states.Ensemble.pure(weights, kets)


def _add_ensemble_flags(p):
    p.add_argument("--preset", choices=sorted(PRESET_ENSEMBLES), default="zero-plus")
    p.add_argument("--kets", help="pure states as 'a,b;c,d' (normalized automatically)")
    p.add_argument("--weights", help="comma-separated weights (default uniform)")


def _transcript_summary(t: qkd.ProtocolTranscript, with_rounds: bool) -> dict:
    d = t.to_dict()
    if not with_rounds:
        d.pop("rounds")
    return d


# --- command handlers -------------------------------------------------------


def cmd_entropy(args):
    p = np.array(_floats(args.dist))
    code = info.huffman_code(p)
    return {
        "H": info.shannon_entropy(p),
        "codewords": list(code.codewords),
        "lengths": list(code.lengths),
        "expected_length": code.expected_length(p),
    }


def cmd_vn_entropy(args):
    rho = _matrix(args.rho)
    e = eig_hermitian(states.as_density(rho))
    return {"S": info.von_neumann_entropy(rho), "eigenvalues": e.eigenvalues}


def cmd_holevo(args):
    e = _ensemble(args)
    rho = states.density_from_ensemble(e)
    out = {"chi": info.holevo_chi(e), "H_p": info.shannon_entropy(e.weights), "S_rho": info.von_neumann_entropy(rho)}
    z = states.Povm((np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)))
    if e.dim == 2:
        out["z_measurement_mutual_info"] = info.measurement_mutual_info(e, z)
    return out


def cmd_schumacher(args):
    e = _ensemble(args)
    rep = info.schumacher_roundtrip(e, args.n, args.delta, make_rng(args.seed), args.samples, args.code_space)
    rho = states.density_from_ensemble(e)
    return {
        "S_rho": info.von_neumann_entropy(rho),
        "H_p": info.shannon_entropy(e.weights),
        **to_plain(rep),
    }


def cmd_teleport(args):
    psi = _kets(args.state)[0]
    rng = make_rng(args.seed)
    counts = [0, 0, 0, 0]
    worst = 1.0
    for _ in range(args.trials):
        r = protocols.teleport(psi, rng)
        counts[r.outcome - 1] += 1
        worst = min(worst, r.fidelity)
    return {"trials": args.trials, "outcome_counts": counts, "min_fidelity": worst}


def cmd_dense(args):
    msgs = [args.bits] if args.bits else ["00", "01", "10", "11"]
    return {"messages": [{"sent": m, "decoded": circuits.int_to_bits(protocols.dense_code(m), 2)} for m in msgs]}


def cmd_bell(args):
    return to_plain(protocols.singlet_correlation(args.theta1, args.theta2, args.n, make_rng(args.seed)))


def cmd_bb84(args):
    t = qkd.bb84_run(args.n, qkd.EveStrategy.parse(args.eve), args.test_fraction, args.seed, args.threshold)
    return _transcript_summary(t, args.rounds)


def cmd_ekert(args):
    t = qkd.ekert_run(args.n, qkd.EveStrategy.parse(args.eve), args.seed)
    return _transcript_summary(t, args.rounds)


def cmd_prepost(args):
    t = qkd.prepost_run(args.n, qkd.EveStrategy.parse(args.eve), args.seed)
    return _transcript_summary(t, args.rounds)


def cmd_bitcommit(args):
    rng = make_rng(args.seed)
    seen = []
    for _ in range(args.trials):
        if args.mode == "honest":
            c = bitcommit.honest_commit(args.bit, rng)
            seen.append((c.index, c.state))
        else:
            o = bitcommit.cheat_open(args.bit, rng)
            seen.append((o.outcome, o.bob_state))
    density = sum(states.projector(s) for _, s in seen) / len(seen)
    counts = {str(i): sum(1 for k, _ in seen if k == i) for i in range(args.bit, 6, 2)}
    return {
        "mode": args.mode,
        "bit": args.bit,
        "trials": args.trials,
        "state_counts": counts,
        "bob_density": density,
        "concealment_gap": bitcommit.concealment_check(bitcommit.peres_pair()),
    }


def _oracle_from_table(text: str, n_out: int = 1) -> circuits.BooleanOracle:
    bits = text.strip()
    n_in = int(round(math.log2(len(bits)))) if bits else -1
    if n_in < 0 or 2**n_in != len(bits) or set(bits) - {"0", "1"}:
        raise UsageError("--table must be a 0/1 string of length 2**n")
    return circuits.BooleanOracle(n_in, n_out, tuple(int(b) for b in bits))


def cmd_deutsch(args):
    f = _oracle_from_table(args.table)
    c = circuits.deutsch_circuit(f)
    return {"table": args.table, "verdict": circuits.deutsch_decide(f), **c.gate_counts()}


def cmd_dj(args):
    if args.table:
        f = _oracle_from_table(args.table)
    else:
        rng = make_rng(args.seed)
        n = args.n
        if args.kind == "constant":
            table = [int(rng.integers(2))] * 2**n
        else:
            table = rng.permutation([0, 1] * 2 ** (n - 1)).tolist()
        f = circuits.BooleanOracle(n, 1, tuple(table))
    c = circuits.deutsch_jozsa_circuit(f)
    return {"n": f.n_in, "verdict": circuits.deutsch_jozsa_decide(f), **c.gate_counts()}


def cmd_simon(args):
    rng = make_rng(args.seed)
    n = len(args.period)
    f = circuits.periodic_oracle(n, circuits.bits_to_int(args.period), rng)
    rep = circuits.simon_find_period(f, rng)
    return {"n": n, "true_period": args.period, **to_plain(rep)}


def cmd_shor(args):
    rng = make_rng(args.seed)
    try:
        rep = circuits.shor_factor(args.N, rng, s=args.s, max_attempts=args.max_attempts, a=args.a)
        failed = False
    except circuits.ShorFailure as exc:
        rep, failed = exc.report, True
    out = to_plain(rep)
    out["history"] = [to_plain(h) for h in rep.history]
    out["succeeded"] = not failed
    return out


def cmd_verify(args):
    items = run_golden(args.seed)
    return {
        "items": [to_plain(i) for i in items],
        "n_pass": sum(i.passed for i in items),
        "n_fail": sum(not i.passed for i in items),
    }


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", dest="out_format", choices=["json", "csv", "text"], default="json")
    common.add_argument("--out", dest="out_path")
    common.add_argument("--timings", action="store_true", help="report wall-clock milliseconds")

    parser = _Parser(prog="qinfo", description="Quantum information toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn: Callable, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=fn)
        return p

    p = add("entropy", cmd_entropy, "Shannon entropy and Huffman code of a distribution")
    p.add_argument("--dist", required=True)
    p = add("vn-entropy", cmd_vn_entropy, "von Neumann entropy of a density matrix")
    p.add_argument("--rho", required=True, help="rows separated by ';', entries by ','")
    p = add("holevo", cmd_holevo, "Holevo quantity of a pure-state ensemble")
    _add_ensemble_flags(p)
    p = add("schumacher", cmd_schumacher, "block compression round trip")
    _add_ensemble_flags(p)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--code-space", choices=["register", "typical"], default="register")
    p = add("teleport", cmd_teleport, "teleport a qubit state")
    p.add_argument("--state", default="1,1")
    p.add_argument("--trials", type=int, default=1000)
    p = add("dense", cmd_dense, "dense coding of two-bit messages")
    p.add_argument("--bits", choices=["00", "01", "10", "11"])
    p = add("bell", cmd_bell, "singlet same-outcome statistics")
    p.add_argument("--theta1", type=float, default=0.0)
    p.add_argument("--theta2", type=float, default=2 * math.pi / 3)
    p.add_argument("--n", type=int, default=100_000)
    for name, fn, default_n in (("bb84", cmd_bb84, 10_000), ("ekert", cmd_ekert, 30_000), ("prepost", cmd_prepost, 10_000)):
        p = add(name, fn, f"{name} key distribution run")
        p.add_argument("--n", type=int, default=default_n)
        p.add_argument("--eve", default="none", help="none, random-xz, fixed-x, fixed-y or fixed-z")
        p.add_argument("--rounds", action="store_true", help="include per-round records")
        if name == "bb84":
            p.add_argument("--test-fraction", type=float, default=0.5)
            p.add_argument("--threshold", type=float, default=qkd.BB84_THRESHOLD)
    p = add("bitcommit", cmd_bitcommit, "honest or cheating commitment runs")
    p.add_argument("mode", choices=["honest", "cheat"])
    p.add_argument("--bit", type=int, choices=[0, 1], default=0)
    p.add_argument("--trials", type=int, default=10_000)
    p = add("deutsch", cmd_deutsch, "Deutsch's problem for a one-bit function")
    p.add_argument("--table", required=True, help="truth table, e.g. 01")
    p = add("dj", cmd_dj, "Deutsch-Jozsa decision")
    p.add_argument("--table", help="truth table as a 0/1 string of length 2**n")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--kind", choices=["constant", "balanced"], default="balanced")
    p = add("simon", cmd_simon, "Simon period finding")
    p.add_argument("--period", required=True, help="non-zero bit string, e.g. 101")
    p = add("shor", cmd_shor, "order finding and factoring")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--a", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--max-attempts", type=int, default=20)
    add("verify", cmd_verify, "run the reference-value suite")
    return parser


_SKIP_CONFIG = {"handler", "out_format", "out_path", "timings", "command"}


def _render_text(doc: dict) -> str:
    lines = [f"command: {doc['command']}"]
    res = doc["results"]
    if doc["command"] == "verify":
        for it in res["items"]:
            lines.append(f"{'PASS' if it['passed'] else 'FAIL'} {it['name']}: computed={it['computed']} expected={it['expected']}")
        lines.append(f"{res['n_pass']} passed, {res['n_fail']} failed")
    else:
        for k, v in res.items():
            lines.append(f"{k}: {v}")
    if doc["timings_ms"] is not None:
        lines.append(f"timings_ms: {doc['timings_ms']}")
    return "\n".join(lines) + "\n"


def _render_csv(doc: dict) -> str:
    res = doc["results"]
    if doc["command"] == "verify":
        rows = [[i["name"], i["passed"], dumps(i["computed"]), dumps(i["expected"]), i["tolerance"]] for i in res["items"]]
        return csv_rows(["name", "passed", "computed", "expected", "tolerance"], rows)
    if isinstance(res.get("rounds"), list) and res["rounds"]:
        keys = sorted({k for r in res["rounds"] for k in r})
        return csv_rows(keys, [[r.get(k, "") for k in keys] for r in res["rounds"]])
    scalars = {k: v for k, v in res.items() if not isinstance(v, (list, dict))}
    return csv_rows(list(scalars), [list(scalars.values())])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "n", 1) is not None and getattr(args, "n", 1) < 1:
            raise UsageError("--n must be at least 1")
        start = time.perf_counter()
        results = args.handler(args)
        elapsed = (time.perf_counter() - start) * 1000
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"qinfo: error: {exc}", file=sys.stderr)
        return 1
    config = {k: v for k, v in vars(args).items() if k not in _SKIP_CONFIG}
    doc = {
        "command": args.command,
        "config": to_plain(config),
        "results": to_plain(results),
        "timings_ms": round(elapsed, 3) if args.timings else None,
    }
    if args.out_format == "json":
        text = dumps(doc) + "\n"
    elif args.out_format == "csv":
        text = _render_csv(doc)
    else:
        text = _render_text(doc)
    if args.out_path:
        with open(args.out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify" and doc["results"]["n_fail"]:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
