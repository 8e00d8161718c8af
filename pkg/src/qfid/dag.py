"""Gate dependency DAG: multi-directed graph over gates and measures.

Nodes are the circuit's non-barrier ops; for every qubit, consecutive ops
touching it are linked by a directed edge carrying that qubit, so two ops
sharing two qubits get two parallel edges.  Barriers contribute no nodes
and no extra edges.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .circuit import Barrier, Circuit, Gate, Measure


class DagError(ValueError):
    pass


class EmptyGraph(DagError):
    """An operation that needs at least one node got an empty DAG."""


@dataclass(frozen=True)
class DagNode:
    id: int
    kind: str  # gate name, or "measure"
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()


@dataclass
class GateDag:
    nodes: list[DagNode] = field(default_factory=list)
    # (src id, dst id, carrier qubit); node order is topological by construction
    edges: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def node_index(self) -> dict[int, int]:
        return {node.id: i for i, node in enumerate(self.nodes)}

    def in_degrees(self) -> Counter:
        degs = Counter({node.id: 0 for node in self.nodes})
        for _, dst, _ in self.edges:
            degs[dst] += 1
        return degs

    def out_degrees(self) -> Counter:
        degs = Counter({node.id: 0 for node in self.nodes})
        for src, _, _ in self.edges:
            degs[src] += 1
        return degs

    def total_degrees(self) -> Counter:
        degs = Counter({node.id: 0 for node in self.nodes})
        for src, dst, _ in self.edges:
            degs[src] += 1
            degs[dst] += 1
        return degs

    def topological_order(self) -> list[int]:
        """Kahn's algorithm; raises DagError on a cycle (cannot happen for
        DAGs built from circuits, but guards hand-constructed graphs)."""
        indeg = self.in_degrees()
        succs: dict[int, list[int]] = {node.id: [] for node in self.nodes}
        for src, dst, _ in self.edges:
            succs[src].append(dst)
        queue = deque(nid for nid, d in sorted(indeg.items()) if d == 0)
        order: list[int] = []
        while queue:
            nid = queue.popleft()
            order.append(nid)
            for succ in succs[nid]:
                indeg[succ] -= 1
                if indeg[succ] == 0:
                    queue.append(succ)
        if len(order) != len(self.nodes):
            raise DagError("graph contains a cycle")
        return order


def build_dag(c: Circuit) -> GateDag:
    dag = GateDag()
    last_on_qubit: dict[int, int] = {}
    for op in c.ops:
        if isinstance(op, Barrier):
            continue
        if isinstance(op, Gate):
            node = DagNode(op.id, op.kind, op.qubits, op.params)
        elif isinstance(op, Measure):
            node = DagNode(op.id, "measure", (op.qubit,))
        else:
            continue
        dag.nodes.append(node)
        for q in node.qubits:
            prev = last_on_qubit.get(q)
            if prev is not None:
                dag.edges.append((prev, node.id, q))
            last_on_qubit[q] = node.id
    return dag


def degree_histogram(dag: GateDag, mode: str = "total") -> dict[int, int]:
    """Histogram of node degrees; counts sum to the node count."""
    if mode == "in":
        degs = dag.in_degrees()
    elif mode == "out":
        degs = dag.out_degrees()
    elif mode == "total":
        degs = dag.total_degrees()
    else:
        raise DagError(f"mode must be in|out|total, got {mode!r}")
    hist: dict[int, int] = {}
    for d in degs.values():
        hist[d] = hist.get(d, 0) + 1
    return hist


def _longest_dists(dag: GateDag, from_sources: bool) -> dict[int, int]:
    order = dag.topological_order()
    if not from_sources:
        order = order[::-1]
    dist = {nid: 0 for nid in order}
    adj: dict[int, list[int]] = {nid: [] for nid in order}
    for src, dst, _ in dag.edges:
        if from_sources:
            adj[src].append(dst)
        else:
            adj[dst].append(src)
    for nid in order:
        for nxt in adj[nid]:
            if dist[nid] + 1 > dist[nxt]:
                dist[nxt] = dist[nid] + 1
    return dist


def longest_dist_from_sources(dag: GateDag) -> dict[int, int]:
    """Per node, the max edge count of any path reaching it from a source."""
    return _longest_dists(dag, from_sources=True)


def longest_dist_to_sinks(dag: GateDag) -> dict[int, int]:
    """Per node, the max edge count of any path from it to a sink."""
    return _longest_dists(dag, from_sources=False)


def longest_path_len(dag: GateDag) -> int:
    """Length (in edges) of the longest path; 0 for edgeless graphs."""
    if not dag.nodes:
        return 0
    return max(longest_dist_from_sources(dag).values())


def to_dot(dag: GateDag, name: str = "gatedag") -> str:
    lines = [f"digraph {name} {{"]
    for node in dag.nodes:
        qubits = ",".join(str(q) for q in node.qubits)
        lines.append(f'  n{node.id} [label="{node.kind} q{qubits} (#{node.id})"];')
    for src, dst, carrier in dag.edges:
        lines.append(f'  n{src} -> n{dst} [label="q{carrier}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
