"""Ordered chains of edges carrying the same b-edge label"""

from collections import defaultdict
from typing import Dict, List, Set

from .trimesh import Edge, LabeledTriMesh, ekey


def label_chains(mesh: LabeledTriMesh, bedge: int) -> List[List[int]]:
    """The maximal chains of edges labeled ``bedge``, each as a vertex
    sequence ordered by increasing curve parameter.

    Chains end at b-vertex-labeled vertices, so that two chains sharing
    their end points (like the two sides of a cut seam) stay apart. A closed
    chain starts and ends with the same vertex.
    """
    adj: Dict[int, List[int]] = defaultdict(list)
    for a, b in mesh.labeled_edges(bedge):
        adj[a].append(b)
        adj[b].append(a)
    for nbrs in adj.values():
        nbrs.sort()

    used: Set[Edge] = set()
    chains = []

    def walk(start: int, nxt: int) -> List[int]:
        seq = [start]
        prev, cur = start, nxt
        used.add(ekey(prev, cur))
        while True:
            seq.append(cur)
            if cur in mesh.bvertex or cur == start:
                return seq
            cands = [w for w in adj[cur] if ekey(cur, w) not in used]
            if not cands:
                return seq
            prev, cur = cur, cands[0]
            used.add(ekey(prev, cur))

    starts = sorted(v for v in adj if v in mesh.bvertex)
    starts += sorted(v for v in adj if len(adj[v]) == 1 and v not in starts)
    starts += sorted(adj)
    for v in starts:
        for w in adj[v]:
            if ekey(v, w) not in used:
                chains.append(_orient(mesh, bedge, walk(v, w)))
    return chains


def _orient(mesh: LabeledTriMesh, bedge: int, seq: List[int]) -> List[int]:
    inner = [v for v in seq[1:-1] if v in mesh.bedge]
    if len(inner) >= 2:
        if mesh.bedge[inner[0]][1] > mesh.bedge[inner[-1]][1]:
            return seq[::-1]
        return seq

    ends = mesh.bedge_ends.get(bedge)
    first, last = seq[0], seq[-1]
    if ends is not None and ends[0] != ends[1]:
        if ends[1] == mesh.bvertex.get(first) or (
            ends[0] == mesh.bvertex.get(last)
        ):
            return seq[::-1]
    return seq


def chain_params(
    mesh: LabeledTriMesh, chain: List[int], bedge: int
) -> List[float]:
    """Curve parameters along an oriented chain; b-vertex ends map to 0 and
    1 as far as the chain's direction allows"""
    params = []
    for i, v in enumerate(chain):
        if v in mesh.bvertex:
            if i == 0:
                params.append(0.0 if _is_start(mesh, bedge, v) else 1.0)
            else:
                params.append(1.0 if _is_end(mesh, bedge, v) else 0.0)
        else:
            params.append(mesh.param_on(v, bedge))
    return params


def _is_start(mesh, bedge, v) -> bool:
    ends = mesh.bedge_ends.get(bedge)
    return ends is None or mesh.bvertex[v] == ends[0]


def _is_end(mesh, bedge, v) -> bool:
    ends = mesh.bedge_ends.get(bedge)
    return ends is None or mesh.bvertex[v] == ends[1]
