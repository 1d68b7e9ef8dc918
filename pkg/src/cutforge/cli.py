"""Command-line pipeline: bench, cut, verify, estimate, analyze.

Circuits are given as a QASM/JSON file or as a generator spec such as
``qft:n=6``, ``ising:d=3,steps=1``, ``qaoa:n=20,p=1`` or ``bell``.

Exit codes: 0 success, 1 usage, 2 guard or infeasibility, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import analytic, benchgen, ftre, qpd, reconstruct, sim
from .circuit import Circuit, circuit as build_circuit
from .cutfinder import InfeasibleCutError, PlanError, extract_subcircuits, find_cuts, plan_summary
from .qasm import QasmError, emit_qasm, parse_qasm_subset

log = logging.getLogger("cutforge")

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    circuit: str = ""
    m: int = 0
    eps_total: float = 1e-2
    fractions: tuple[float, ...] = ftre.DEFAULT_FRACTIONS
    eps_rct: float = 1e-2
    profile: str | None = None
    factories: int = 1
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("eps_total", "eps_rct"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise UsageError(f"{name} must lie in (0, 1)")
        if self.m < 0:
            raise UsageError("m must be >= 1")


# ---------------------------------------------------------------- helpers


def _clean(x):
    """Fixed-precision floats so reports are byte-stable."""
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return float(f"{x:.10g}")
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=1, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _sci(log10_value: float) -> str:
    e = math.floor(log10_value)
    return f"{10 ** (log10_value - e):.2f}e{e:+d}"


def _kv(spec: str) -> dict[str, str]:
    out = {}
    for part in filter(None, spec.split(",")):
        if "=" not in part:
            raise UsageError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def generate(name: str, opts: dict[str, str]) -> Circuit:
    name = name.lower()
    geti = lambda k, d: int(opts.get(k, d))  # noqa: E731
    getf = lambda k, d: float(opts.get(k, d))  # noqa: E731
    if name == "bell":
        return build_circuit(2, [("h", (0,)), ("cx", (0, 1))], "bell")
    if name == "qft":
        return benchgen.gen_qft(geti("n", 6), swaps=bool(geti("swaps", 0)))
    if name in ("ising", "heisenberg", "fermihubbard", "hubbard"):
        model = {"ising": "Ising", "heisenberg": "Heisenberg"}.get(name, "FermiHubbard")
        spec = benchgen.LatticeSpec(geti("d", 3), model, getf("t", 1.0), geti("steps", 1), (getf("j", 1.0), getf("h", 1.0)))
        return benchgen.gen_lattice_model(spec, geti("order", 4))
    if name == "qaoa":
        n = geti("n", 6)
        edges = benchgen.ring_edges(n) if opts.get("graph") == "ring" else None
        spec = benchgen.QAOASpec(n, geti("p", 1), geti("seed", 0), geti("degree", 3), edges)
        return benchgen.gen_qaoa(spec)
    if name == "qpe":
        return benchgen.gen_qpe(geti("bits", 3), getf("phase", 0.25), geti("targets", 1))
    if name == "random":
        return benchgen.gen_random(geti("n", 5), geti("depth", 4), geti("seed", 0))
    raise UsageError(f"unknown benchmark {name!r}")


def load_circuit(ref: str) -> Circuit:
    p = Path(ref)
    if p.exists():
        text = p.read_text()
        if text.lstrip().startswith("{"):
            return Circuit.from_json(text)
        return parse_qasm_subset(text)
    name, _, rest = ref.partition(":")
    return generate(name, _kv(rest))


def load_profile(path: str | None) -> ftre.HardwareProfile:
    if not path:
        return ftre.HardwareProfile()
    data = json.loads(Path(path).read_text())
    fac = data.pop("factory", None)
    hw = ftre.HardwareProfile(**data)
    if fac:
        hw = ftre.HardwareProfile(**{**asdict(hw), "factory": ftre.FactorySpec(**fac)})
    return hw


def _observable(spec: str, n: int) -> sim.Observable:
    if spec == "parity":
        return sim.Observable.parity(n)
    if spec.startswith("z:"):
        return sim.Observable.z(*(int(x) for x in spec[2:].split(",")))
    raise UsageError(f"unknown observable {spec!r}")


# ---------------------------------------------------------------- commands


def cmd_bench(args) -> int:
    opts = {k: str(v) for k, v in vars(args).items() if k in ("n", "d", "steps", "p", "seed", "degree", "bits", "phase", "depth", "order", "t") and v is not None}
    if args.swaps:
        opts["swaps"] = "1"
    if args.graph:
        opts["graph"] = args.graph
    c = generate(args.benchmark, opts)
    text = emit_qasm(c) if args.format == "qasm" else c.to_json() + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _cut_report(c: Circuit, plan, eps_rct: float) -> dict:
    s = plan_summary(plan)
    rep = qpd.overhead_report(plan, eps_rct)
    bases = qpd.plan_bases(plan)
    rep.update(
        {
            "n_cuts": plan.n_cuts,
            "widths": s.widths,
            "gammas": s.gammas,
            "pool_size_verified_log10": math.fsum(math.log10(len(b.terms)) for b in bases),
            "flops_log10": reconstruct.flops_estimate_log10(plan.n_cuts, c.num_qubits),
        }
    )
    return rep


def cmd_cut(args) -> int:
    c = load_circuit(args.circuit)
    m = c.num_qubits if args.m is None else args.m
    plan = find_cuts(c, m, allow_wire=not args.no_wire, allow_gate=not args.no_gate)
    out = {"circuit": c.name, "num_qubits": c.num_qubits, "plan": plan.to_dict(), "summary": _cut_report(c, plan, args.eps_rct)}
    _emit(_dumps(out), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    c = load_circuit(args.circuit)
    sim.check_guard(c.num_qubits)
    m = c.num_qubits if args.m is None else args.m
    plan = find_cuts(c, m).bind(c)
    o = _observable(args.observable, c.num_qubits)
    ref = sim.expectation(c, o)
    report: dict = {"circuit": c.name, "m": m, "n_cuts": plan.n_cuts, "uncut": ref}
    status = EXIT_OK
    if args.mode in ("exact", "both"):
        val = reconstruct.exact_expectation(c, plan, o)
        dist = reconstruct.reconstruct_distribution(reconstruct.cut_tensors(c, plan))
        gap = abs(val - ref)
        report["exact"] = {"estimate": val, "gap": gap, "tv_distance": reconstruct.total_variation(dist, sim.simulate(c).probabilities())}
        if gap > 1e-6:
            status = EXIT_VERIFY
    if args.mode in ("mc", "both"):
        hits, ests = 0, []
        for t in range(args.trials):
            r = reconstruct.mc_expectation(c, plan, o, args.eps, seed=args.seed + t)
            ests.append(r.estimate)
            hits += abs(r.estimate - ref) <= args.eps
        rate = hits / max(args.trials, 1)
        report["mc"] = {"eps_rct": args.eps, "trials": args.trials, "N_s": r.N_s_used if args.trials else 0, "pass_rate": rate, "mean": sum(ests) / max(len(ests), 1)}
        print(f"mc pass-rate {hits}/{args.trials} = {rate:.2%} (eps={args.eps})", file=sys.stderr)
        if rate < 0.95:
            status = EXIT_VERIFY
    _emit(_dumps(report), args.out)
    return status


def estimate_row(c: Circuit, cfg: RunConfig, hw: ftre.HardwareProfile, split: str = "proportional", weights=None) -> dict:
    base_budget = ftre.ErrorBudget.from_total(cfg.eps_total, cfg.fractions)
    base = ftre.estimate(c, base_budget, hw, cfg.factories)
    m = cfg.m or c.num_qubits
    plan = find_cuts(c, m).bind(c)
    subs = extract_subcircuits(c, plan)
    budgets = ftre.split_budget(subs, cfg.eps_total, split, weights, cfg.fractions)
    ests = [ftre.estimate(ftre.subcircuit_for_estimation(s), b, hw, cfg.factories) for s, b in zip(subs, budgets)]
    g_log = qpd.total_overhead_log10(plan)
    ns_log = qpd.num_samples_log10(g_log, cfg.eps_rct) if plan.n_cuts else 0.0
    q_max, t_log = ftre.aggregate_log10(ests, ns_log)
    return {
        "benchmark": c.name,
        "N": c.num_qubits,
        "m": m,
        "n_gate": plan.n_gate,
        "n_wire": plan.n_wire,
        "baseline_runtime_s": base.runtime,
        "baseline_physical_qubits": base.physical_qubits,
        "cutting_runtime_log10": t_log,
        "cutting_runtime": _sci(t_log),
        "cut_physical_qubits": q_max,
        "percent_reduction": ftre.percent_reduction(base.physical_qubits, [e.physical_qubits for e in ests]),
        "N_s_log10": ns_log,
        "subcircuits": [dict(width=s.width, **e.to_dict()) for s, e in zip(subs, ests)],
    }


_CSV_COLS = [
    "benchmark", "N", "m", "n_gate", "n_wire", "baseline_runtime_s", "cutting_runtime",
    "baseline_physical_qubits", "cut_physical_qubits", "percent_reduction", "N_s_log10",
]


def cmd_estimate(args) -> int:
    cfg = RunConfig(args.circuit, args.m or 0, args.eps_total, eps_rct=args.eps_rct, profile=args.profile, factories=args.factories)
    hw = load_profile(cfg.profile)
    weights = [float(x) for x in args.weights.split(",")] if args.weights else None
    rows, status = [], EXIT_OK
    for ref in args.circuit:
        try:
            rows.append(estimate_row(load_circuit(ref), RunConfig(ref, cfg.m, cfg.eps_total, eps_rct=cfg.eps_rct, factories=cfg.factories), hw, args.split, weights))
        except (ftre.EstimationError, PlanError) as exc:
            log.error("%s: %s", ref, exc)
            rows.append({"benchmark": ref, "error": str(exc)})
            status = EXIT_GUARD
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=_CSV_COLS + ["error"], extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(_clean(r))
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_dumps(rows), args.out)
    return status


def cmd_analyze(args) -> int:
    insts: list[analytic.ModelInstance] = []
    if args.suite in ("qft", "all"):
        insts += analytic.qft_suite(range(args.n_min, args.n_max + 1))
    if args.suite in ("ising", "all"):
        insts += analytic.lattice_suite(range(args.d_min, args.d_max + 1), "Ising", args.steps)
    rows = analytic.validate_against_finder(insts)
    if args.format == "csv":
        _emit(analytic.rows_to_csv(rows), args.out)
    else:
        _emit(_dumps({"rows": [asdict(r) for r in rows], "max_log10_gap": analytic.max_gap(rows), "flagged": sum(r.flagged for r in rows)}), args.out)
    print(f"{len(rows)} instances, max |log10 gap| = {analytic.max_gap(rows):.3f}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cutforge", description="Circuit cutting and fault-tolerant resource estimation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="generate a benchmark circuit")
    b.add_argument("benchmark")
    for flag, typ in (("--n", int), ("--d", int), ("--steps", int), ("--p", int), ("--seed", int), ("--degree", int),
                      ("--bits", int), ("--phase", float), ("--depth", int), ("--order", int), ("--t", float)):
        b.add_argument(flag, type=typ)
    b.add_argument("--swaps", action="store_true", help="QFT: append the qubit-reversal swaps")
    b.add_argument("--graph", choices=["ring"])
    b.add_argument("--format", choices=["qasm", "json"], default="qasm")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("cut", help="find cuts and report overheads")
    c.add_argument("circuit")
    c.add_argument("--m", type=int)
    c.add_argument("--eps-rct", type=float, default=0.01)
    c.add_argument("--no-wire", action="store_true")
    c.add_argument("--no-gate", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_cut)

    v = sub.add_parser("verify", help="check reconstruction against uncut simulation")
    v.add_argument("circuit")
    v.add_argument("--m", type=int)
    v.add_argument("--mode", choices=["exact", "mc", "both"], default="exact")
    v.add_argument("--eps", type=float, default=0.05)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--observable", default="parity")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("estimate", help="baseline vs cutting resource report")
    e.add_argument("circuit", nargs="+")
    e.add_argument("--m", type=int)
    e.add_argument("--eps-total", type=float, default=0.01)
    e.add_argument("--eps-rct", type=float, default=0.01)
    e.add_argument("--factories", type=int, default=1)
    e.add_argument("--profile")
    e.add_argument("--split", choices=["proportional", "equal", "explicit"], default="proportional")
    e.add_argument("--weights", help="comma-separated weights for --split explicit")
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    a = sub.add_parser("analyze", help="cut-count models vs finder")
    a.add_argument("--suite", choices=["qft", "ising", "all", "none"], default="qft")
    a.add_argument("--n-min", type=int, default=5)
    a.add_argument("--n-max", type=int, default=20)
    a.add_argument("--d-min", type=int, default=3)
    a.add_argument("--d-max", type=int, default=6)
    a.add_argument("--steps", type=int, default=1)
    a.add_argument("--format", choices=["json", "csv"], default="csv")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, QasmError, ValueError) as exc:
        if isinstance(exc, PlanError) and not isinstance(exc, InfeasibleCutError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if isinstance(exc, InfeasibleCutError):
            print(f"infeasible: {exc}", file=sys.stderr)
            return EXIT_GUARD
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (sim.TooManyQubitsError, reconstruct.PoolTooLargeError) as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ftre.EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
