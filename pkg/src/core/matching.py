"""
Graph matching helpers

Maximum-weight matching (blossom, via networkx), maximum bipartite matching
(Hopcroft-Karp, via networkx) and the decomposition of a bipartite graph of
maximum degree d into exactly d matchings.
"""
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
from networkx.algorithms import bipartite
from pydantic import BaseModel, ConfigDict, model_validator

from src.core.gf2core import BitMatrix


class WeightedGraph(BaseModel):
    """Undirected graph with integer weights and an optional payload per edge"""
    n_vertices: int
    edges: List[Tuple[int, int, int]] = []
    payloads: Dict[Tuple[int, int], Any] = {}

    @model_validator(mode="after")
    def _check_edges(self) -> "WeightedGraph":
        seen = set()
        for u, v, _ in self.edges:
            if u == v:
                raise ValueError(f"self loop on vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u}, {v}) outside {self.n_vertices} vertices")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}, merge it before building the graph")
            seen.add(key)
        return self

    @classmethod
    def from_directed(cls, n_vertices: int, weights: Dict[Tuple[int, int], int]) -> "WeightedGraph":
        """
        Merge directed weights w(i->j), w(j->i) into one undirected edge

        The edge keeps the larger weight and its direction as payload; ties
        keep the direction with the smaller source.
        """
        best: Dict[Tuple[int, int], Tuple[int, Tuple[int, int]]] = {}
        for (u, v), w in sorted(weights.items()):
            key = (min(u, v), max(u, v))
            if key not in best or w > best[key][0]:
                best[key] = (w, (u, v))
        edges = [(u, v, w) for (u, v), (w, _) in sorted(best.items())]
        payloads = {key: direction for key, (_, direction) in best.items()}
        return cls(n_vertices=n_vertices, edges=edges, payloads=payloads)

    def weight_of(self, u: int, v: int) -> Optional[int]:
        for a, b, w in self.edges:
            if {a, b} == {u, v}:
                return w
        return None


class BipartiteGraph(BaseModel):
    """Bipartite graph given by its biadjacency matrix (rows = left side)"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    adjacency: BitMatrix

    @property
    def left_count(self) -> int:
        return self.adjacency.n_rows

    @property
    def right_count(self) -> int:
        return self.adjacency.n_cols

    def edges(self) -> List[Tuple[int, int]]:
        dense = self.adjacency.to_array()
        return [(int(i), int(j)) for i, j in zip(*dense.nonzero())]

    def max_degree(self) -> int:
        if self.adjacency.weight() == 0:
            return 0
        return int(max(self.adjacency.row_weights().max(), self.adjacency.col_weights().max()))


class MatchingSet(BaseModel):
    """Vertex-disjoint pairs"""
    pairs: List[Tuple[int, int]] = []

    @model_validator(mode="after")
    def _vertex_disjoint(self) -> "MatchingSet":
        left = [u for u, _ in self.pairs]
        right = [v for _, v in self.pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise ValueError("a vertex appears in two pairs")
        return self

    def __len__(self) -> int:
        return len(self.pairs)


def max_weight_matching(graph: WeightedGraph) -> MatchingSet:
    """
    Matching of maximum total weight, using only positive-weight edges

    Pairs come back as (smaller vertex, larger vertex), sorted.
    """
    g = nx.Graph()
    for u, v, w in graph.edges:
        if w > 0:
            g.add_edge(u, v, weight=w)
    if g.number_of_edges() == 0:
        return MatchingSet()
    matched = nx.max_weight_matching(g, maxcardinality=False, weight="weight")
    return MatchingSet(pairs=sorted((min(u, v), max(u, v)) for u, v in matched))


def matching_weight(graph: WeightedGraph, matching: MatchingSet) -> int:
    return sum(graph.weight_of(u, v) or 0 for u, v in matching.pairs)


def max_bipartite_matching(graph: BipartiteGraph) -> MatchingSet:
    """Maximum-cardinality matching as sorted (left, right) pairs"""
    edges = graph.edges()
    if not edges:
        return MatchingSet()
    g = nx.Graph()
    left_nodes = sorted({("L", i) for i, _ in edges})
    g.add_nodes_from(left_nodes, bipartite=0)
    g.add_edges_from((("L", i), ("R", j)) for i, j in edges)
    matched = bipartite.hopcroft_karp_matching(g, top_nodes=left_nodes)
    return MatchingSet(pairs=sorted((u[1], v[1]) for u, v in matched.items() if u[0] == "L"))


def edge_color_bipartite(graph: BipartiteGraph) -> List[MatchingSet]:
    """
    Split the edges into exactly max-degree matchings

    Edges are colored one at a time. If the free color a at the left end is
    busy at the right end, the a/b alternating path starting at the right end
    (b free there) is swapped first, which never reaches the left end.
    """
    degree = graph.max_degree()
    if degree == 0:
        return []
    # color -> partner, per vertex
    at_left: List[Dict[int, int]] = [dict() for _ in range(graph.left_count)]
    at_right: List[Dict[int, int]] = [dict() for _ in range(graph.right_count)]

    def free_color(used: Dict[int, int]) -> int:
        return next(c for c in range(degree) if c not in used)

    for u, v in graph.edges():
        a = free_color(at_left[u])
        b = free_color(at_right[v])
        if a in at_right[v]:
            # walk v -a- u1 -b- v1 -a- ... and swap a <-> b along it
            path = []
            side, vertex, color = "R", v, a
            while True:
                table = at_right if side == "R" else at_left
                partner = table[vertex].get(color)
                if partner is None:
                    break
                path.append((side, vertex, partner, color))
                side = "L" if side == "R" else "R"
                vertex = partner
                color = b if color == a else a
            for side, vertex, partner, color in path:
                if side == "R":
                    del at_right[vertex][color]
                    del at_left[partner][color]
                else:
                    del at_left[vertex][color]
                    del at_right[partner][color]
            for side, vertex, partner, color in path:
                other = b if color == a else a
                if side == "R":
                    at_right[vertex][other] = partner
                    at_left[partner][other] = vertex
                else:
                    at_left[vertex][other] = partner
                    at_right[partner][other] = vertex
        at_left[u][a] = v
        at_right[v][a] = u

    classes: List[List[Tuple[int, int]]] = [[] for _ in range(degree)]
    for u, colors in enumerate(at_left):
        for color, v in colors.items():
            classes[color].append((u, v))
    return [MatchingSet(pairs=sorted(pairs)) for pairs in classes]
