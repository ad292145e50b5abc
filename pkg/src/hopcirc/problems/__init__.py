"""Instance generators and exact oracles for connectivity, tree isomorphism and S5 words."""
from .connectivity import (UnionFind, bfs_connected, connectivity_tokens,
                           gen_connectivity, make_connectivity, oracle_connectivity)
from .instance import KINDS, ProblemInstance, read_jsonl, write_jsonl
from .rng import SplitMix64
from .s5 import (ELEMENTS, IDENTITY, compose, compose_balanced, compose_word,
                 gen_s5_word, inverse, make_s5_word, oracle_s5, parse_cycles,
                 parse_token, perm_token)
from .trees import (Tree, ahu_canonical, all_rooted_trees, brute_force_iso,
                    decode_tree_string, encode_tree_string, gen_tree_pair,
                    make_tree_pair, oracle_tree_iso, random_tree, tree_tokens)


def oracle(inst: ProblemInstance) -> bool:
    """Ground truth for any instance kind."""
    return {"connectivity": oracle_connectivity, "tree_iso": oracle_tree_iso,
            "s5_word": oracle_s5}[inst.kind](inst)


__all__ = [
    "ELEMENTS", "IDENTITY", "KINDS", "ProblemInstance", "SplitMix64", "Tree",
    "UnionFind", "ahu_canonical", "all_rooted_trees", "bfs_connected",
    "brute_force_iso", "compose", "compose_balanced", "compose_word",
    "connectivity_tokens", "decode_tree_string", "encode_tree_string",
    "gen_connectivity", "gen_s5_word", "gen_tree_pair", "inverse",
    "make_connectivity", "make_s5_word", "make_tree_pair", "oracle",
    "oracle_connectivity", "oracle_s5", "oracle_tree_iso", "parse_cycles",
    "parse_token", "perm_token", "random_tree", "read_jsonl", "tree_tokens",
    "write_jsonl",
]
