"""Closed-form cut counts against the finder, plus the model sweeps."""

import argparse

from cutforge import analytic as an


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qft-max", type=int, default=20)
    ap.add_argument("--d-max", type=int, default=6)
    ap.add_argument("--csv", help="write per-instance rows here")
    args = ap.parse_args()

    print("QFT model, mean over m=1..n-1:")
    for n in (5, 10, 20, 30, 40, 50, 60):
        print(f"  n={n:3d}  10^{an.qft_average_log10(n):.3f}")
    print("Ising model (steps=100), mean over m=2..D^2-1:")
    for D in range(3, 11):
        print(f"  D={D:2d}  10^{an.lattice_average_log10(D, 100):.3f}")

    rows = an.validate_against_finder(an.qft_suite(range(5, args.qft_max + 1)))
    rows += an.validate_against_finder(an.lattice_suite(range(3, args.d_max + 1), "Ising", 1))
    flagged = [r for r in rows if r.flagged]
    print(f"finder vs model: {len(rows)} instances, max |log10 gap| {an.max_gap(rows):.3f}, flagged {len(flagged)}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(an.rows_to_csv(rows))


if __name__ == "__main__":
    main()
