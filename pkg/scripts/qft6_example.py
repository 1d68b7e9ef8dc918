"""Worked 6-qubit QFT example: cuts, overheads, reconstruction check and resource estimate."""

import argparse

from cutforge import ftre, qpd
from cutforge import reconstruct as rc
from cutforge.benchgen import gen_qft
from cutforge.cutfinder import extract_subcircuits, find_cuts
from cutforge.sim import Observable, expectation


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--eps-total", type=float, default=0.01)
    ap.add_argument("--eps-rct", type=float, default=0.01)
    args = ap.parse_args()

    c = gen_qft(6, swaps=False)
    plan = find_cuts(c, args.m).bind(c)
    subs = extract_subcircuits(c, plan)
    g2 = qpd.total_overhead(plan)
    n_s = qpd.num_samples(g2, args.eps_rct)
    print(f"partition widths {[s.width for s in subs]}, {plan.n_gate} gate + {plan.n_wire} wire cuts")
    print(f"gamma^2 = {g2:.1f}, N_s = {n_s:,}, pool = {qpd.pool_size(plan.n_gate, plan.n_wire):,}")
    print(f"recombination multiplications = {rc.flops_estimate(plan.n_cuts, c.num_qubits):,}")

    o = Observable.parity(6)
    r = rc.tensor_result(c, plan, o, exact_reference=expectation(c, o))
    print(f"<Z^6>: reconstructed {r.estimate:.12f}, uncut {r.exact_reference:.12f}, flops {r.flops_performed:,}")

    hw = ftre.HardwareProfile()
    base = ftre.estimate(c, ftre.ErrorBudget.from_total(args.eps_total), hw)
    widest = max(s.width for s in subs)
    budgets = ftre.split_budget(subs, args.eps_total, "explicit", [0.8 if s.width == widest else 0.2 for s in subs])
    ests = [ftre.estimate(ftre.subcircuit_for_estimation(s), b, hw) for s, b in zip(subs, budgets)]
    q, t = ftre.aggregate_cut_execution(ests, n_s)
    print(f"baseline: {base.physical_qubits} physical qubits, {base.runtime:.4f} s (d={base.code_distance})")
    for s, e in zip(subs, ests):
        print(f"  subcircuit width {s.width}: {e.physical_qubits} qubits, {e.runtime:.4f} s (d={e.code_distance})")
    red = ftre.percent_reduction(base.physical_qubits, [e.physical_qubits for e in ests])
    print(f"cutting: {q} qubits ({red:.1f}% fewer), total runtime {t / 3600:.2f} h")


if __name__ == "__main__":
    main()
