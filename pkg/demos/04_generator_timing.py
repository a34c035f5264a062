"""Wall-clock of the four construction / swap-chain pairings on one target.

    python demos/04_generator_timing.py --nodes 5000
    python demos/04_generator_timing.py --edge-list my_graph.txt
"""
import argparse
import logging

from dk25.datasets import clustered_synthetic
from dk25.generation import McmcConfig, generate_25k
from dk25.graph import read_edge_list
from dk25.postprocess import TargetSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=5000)
    ap.add_argument("--edge-list", help="use this graph instead of a synthetic one")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    logging.disable(logging.WARNING)

    g = read_edge_list(args.edge_list, connected_only=True) if args.edge_list else \
        clustered_synthetic(args.nodes, seed=5)
    spec = TargetSpec.from_graph(g)
    print(f"{g.n_nodes} nodes, {g.n_edges} edges\n")
    print(f"{'pairing':<14}{'construct':>10}{'swaps':>10}{'total':>10}  converged")
    for gen in ("2kt", "2k"):
        for var in ("improved", "plain"):
            res = generate_25k(spec, McmcConfig(variant=var, seed=args.seed), gen)
            t = res.timings
            print(f"{gen + '+' + var:<14}{t['construction']:>9.2f}s{t['mcmc']:>9.2f}s{t['total']:>9.2f}s  "
                  f"{res.converged}")


if __name__ == "__main__":
    main()
