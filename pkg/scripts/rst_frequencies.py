"""Tree-frequency table for random_spanning_tree with a chi-square test against the uniform law."""

import argparse
from collections import Counter

from scipy.stats import chisquare

from stitchwalk.apps import random_spanning_tree
from stitchwalk.congest import SimConfig
from stitchwalk.graph import parse_graph_spec
from stitchwalk.oracle import enumerate_spanning_trees


def tree_table(g, runs: int, seed: int = 0, strategy: str = "extend") -> tuple[list, list[int]]:
    trees = sorted(enumerate_spanning_trees(g), key=sorted)
    counts = Counter(random_spanning_tree(g, 0, SimConfig(seed=seed + s), strategy=strategy).edges
                     for s in range(runs))
    return trees, [counts[t] for t in trees]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", default="complete:4")
    ap.add_argument("--runs", type=int, default=50000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--strategy", choices=("extend", "restart"), default="extend")
    args = ap.parse_args()
    g = parse_graph_spec(args.graph)
    trees, obs = tree_table(g, args.runs, args.seed, args.strategy)
    for t, c in zip(trees, obs):
        print(f"{c / args.runs:.4f}  {sorted(t)}")
    print(f"{len(trees)} trees, chi-square p = {chisquare(obs).pvalue:.4g}")


if __name__ == "__main__":
    main()
