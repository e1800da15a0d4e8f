"""Compare the two cover strategies of random_spanning_tree on a graph where keeping the first
covering walk out of a batch skews the tree law."""

import argparse

from scipy.stats import chisquare

from stitchwalk.graph import Graph, parse_graph_spec
from rst_frequencies import tree_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", help="graph spec; default is a 4-cycle with one chord")
    ap.add_argument("--runs", type=int, default=20000)
    args = ap.parse_args()
    g = parse_graph_spec(args.graph) if args.graph else Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    for strategy in ("extend", "restart"):
        trees, obs = tree_table(g, args.runs, 0, strategy)
        freqs = " ".join(f"{c / args.runs:.3f}" for c in obs)
        print(f"{strategy:>8}: p = {chisquare(obs).pvalue:.3g}  frequencies {freqs}  (uniform {1 / len(trees):.3f})")


if __name__ == "__main__":
    main()
