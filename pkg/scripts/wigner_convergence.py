"""Convergence of injective traffic-state estimates to the Wigner limits.

Sweeps an n grid for a handful of doubled trees (plus one cycle as a
vanishing control) and prints one CSV row per (graph, n) with the estimate,
its standard error, the exact limit and the z-score.  Useful for eyeballing
the O(1/n) approach to the limit before trusting a larger run.

    python scripts/wigner_convergence.py --n 50,100,200,400 --samples 200
"""

import argparse
import sys

from traffics.engine import estimate_traffic_state
from traffics.ensembles import BandProfile, EntrySpec, MatrixModel
from traffics.graphs import Edge, TestGraph, directed_cycle
from traffics.limits import wigner_ltd


def doubled_tree(adjacencies, orientations):
    edges = []
    for (u, v), ori in zip(adjacencies, orientations, strict=True):
        edges.append(Edge(u, v, "x"))
        edges.append(Edge(u, v, "x") if ori == "c" else Edge(v, u, "x"))
    n = max(max(u, v) for u, v in adjacencies) + 1
    return TestGraph(n, tuple(edges))


GRAPHS = {
    "pad": doubled_tree([(0, 1)], "o"),
    "congruent_pad": doubled_tree([(0, 1)], "c"),
    "star": doubled_tree([(0, 1), (0, 2)], "oo"),
    "mixed_path": doubled_tree([(0, 1), (1, 2), (2, 3)], "oco"),
    "cycle": directed_cycle(4),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="50,100,200,400",
                    help="comma-separated n grid")
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--beta", type=float, default=1.0,
                    help="pseudo-variance of the entry law")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--graphs", default=",".join(GRAPHS),
                    help="subset of: " + ", ".join(GRAPHS))
    args = ap.parse_args(argv)

    ns = [int(tok) for tok in args.n.split(",")]
    model = MatrixModel(
        {"x": (BandProfile("wigner"), EntrySpec.gaussian(args.beta))})
    print("graph,n,samples,mean,stderr,theory,z")
    for name in args.graphs.split(","):
        g = GRAPHS[name]
        theory = complex(wigner_ltd(g, {"x": args.beta}))
        for n in ns:
            est = estimate_traffic_state(
                g, model, n, args.samples, args.seed, injective=True)
            print("%s,%d,%d,%.8g,%.8g,%.8g,%.3f" % (
                name, n, args.samples, est.mean.real, est.stderr,
                theory.real, est.z(theory)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
