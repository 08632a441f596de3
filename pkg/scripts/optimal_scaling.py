"""Optimal focal width against initial width for thick and thin lenses.

For each sigma0 the lens strength is optimized on the lattice, then the
achieved focal width is fitted to sigma_f = kappa * sigma0^p. The
quadratic families should give p near 1/3; higher thick-lens orders
push the exponent down.

Usage: python scripts/optimal_scaling.py [--sites N] [--sigma0 S ...]
       [--orders Q ...] [--csv PATH]
"""

import argparse

import numpy as np

from spinlens.lattice import NearestNeighbor, build_lattice
from spinlens.lens import optimize_lens


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sites", type=int, default=800)
    ap.add_argument("--sigma0", type=float, nargs="+",
                    default=[10.0, 20.0, 40.0, 80.0])
    ap.add_argument("--orders", type=int, nargs="+", default=[2],
                    help="thick-lens polynomial orders")
    ap.add_argument("--n-time", type=int, default=200)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    table = build_lattice((args.sites,))
    model = NearestNeighbor(1.0)
    families = [("thick", q) for q in args.orders] + [("thin", 2)]
    rows = []
    for kind, order in families:
        widths = []
        for sigma0 in args.sigma0:
            res = optimize_lens(table, model, sigma0, kind=kind, order=order,
                                n_time=args.n_time)
            widths.append(res.focal_width)
            rows.append((kind, order, sigma0, res.focal_time, res.focal_width,
                         res.focal_width / sigma0 ** (1.0 / 3.0)))
            print(f"{kind} Q={order} sigma0={sigma0:6.1f}  "
                  f"t_f={res.focal_time:8.2f}  sigma_f={res.focal_width:7.3f}  "
                  f"kappa={res.focal_width / sigma0 ** (1/3):6.3f}"
                  f"{'  [grid edge]' if res.boundary else ''}")
        slope, intercept = np.polyfit(np.log(args.sigma0), np.log(widths), 1)
        print(f"{kind} Q={order}: sigma_f ~ {np.exp(intercept):.3f} "
              f"* sigma0^{slope:.3f}\n")

    if args.csv:
        from spinlens import io_utils
        io_utils.write_csv(args.csv,
                           ["kind", "order", "sigma0 [a]", "t_f [1/J]",
                            "sigma_f [a]", "kappa [a^(2/3)]"],
                           rows)
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
