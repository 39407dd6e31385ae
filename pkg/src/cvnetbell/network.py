"""Depth-2 network topologies and independent party sets.

Parties are numbered from 1.  Each source is an ordered pair (p, q): its
first arm goes to party p and its second arm to party q.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ContractViolation, DomainError, ResourceError, StructuralError

FAMILIES = ("chain", "star", "tree", "cycle")
MAX_EXACT_PARTIES = 24


@dataclass(frozen=True)
class NetworkTopology:
    party_count: int
    sources: tuple[tuple[int, int], ...]
    family: str = "custom"
    params: tuple[int, ...] = ()

    def __post_init__(self):
        y = self.party_count
        if int(y) != y or y < 1:
            raise StructuralError(f"party count must be a positive integer, got {y!r}")
        srcs = []
        for src in self.sources:
            if len(src) != 2:
                raise StructuralError(f"each source needs exactly two endpoints, got {src!r}")
            p, q = (int(v) for v in src)
            if not (1 <= p <= y and 1 <= q <= y):
                raise StructuralError(f"source {src!r} references a party outside 1..{y}")
            if p == q:
                raise StructuralError(f"source {src!r} connects a party to itself")
            srcs.append((p, q))
        touched = {v for pq in srcs for v in pq}
        missing = sorted(set(range(1, y + 1)) - touched)
        if missing:
            raise StructuralError(f"parties {missing} are not attached to any source")
        object.__setattr__(self, "sources", tuple(srcs))
        object.__setattr__(self, "params", tuple(self.params))

    @property
    def source_count(self) -> int:
        return len(self.sources)

    def neighbours(self) -> dict[int, set[int]]:
        nb = {i: set() for i in range(1, self.party_count + 1)}
        for p, q in self.sources:
            nb[p].add(q)
            nb[q].add(p)
        return nb

    def label(self) -> str:
        """Short human-readable form such as ``chain(6)`` or ``tree(3,2)``."""
        if self.family == "custom":
            return f"custom({self.party_count})"
        return f"{self.family}({','.join(map(str, self.params))})"


@dataclass(frozen=True)
class IndependentSet:
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        if not members:
            raise StructuralError("an independent set needs at least one party")
        object.__setattr__(self, "members", members)

    @property
    def k(self) -> int:
        return len(self.members)

    def __contains__(self, party) -> bool:
        return party in self.members


class PartyClass(enum.Enum):
    IN_K = "InK"
    NOT_IN_K = "NotInK"


def _need(value, minimum, what):
    if int(value) != value or value < minimum:
        raise DomainError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def chain(y: int) -> NetworkTopology:
    y = _need(y, 3, "chain size")
    return NetworkTopology(y, tuple((i, i + 1) for i in range(1, y)), "chain", (y,))


def star(y: int) -> NetworkTopology:
    y = _need(y, 3, "star size")
    return NetworkTopology(y, tuple((j, y) for j in range(1, y)), "star", (y,))


def cycle(y: int) -> NetworkTopology:
    y = _need(y, 3, "cycle size")
    srcs = tuple((i, i + 1) for i in range(1, y)) + ((y, 1),)
    return NetworkTopology(y, srcs, "cycle", (y,))


def tree_party_count(m: int, f: int) -> int:
    return (f**m - 1) // (f - 1)


def tree(m: int, f: int) -> NetworkTopology:
    """Complete f-ary tree with m layers; source i joins party ceil(i/f) to party i+1."""
    m = _need(m, 2, "tree depth m")
    f = _need(f, 2, "tree fan-out f")
    n_src = tree_party_count(m, f) - 1
    srcs = tuple((-(-i // f), i + 1) for i in range(1, n_src + 1))
    return NetworkTopology(n_src + 1, srcs, "tree", (m, f))


def build(family: str, *params: int) -> NetworkTopology:
    makers = {"chain": chain, "star": star, "cycle": cycle, "tree": tree}
    if family not in makers:
        raise StructuralError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return makers[family](*params)


def _tree_layer(t: int, f: int) -> range:
    return range(tree_party_count(t - 1, f) + 1, tree_party_count(t, f) + 1)


def canonical_independent_set(topology: NetworkTopology, family: str | None = None) -> IndependentSet:
    """Closed-form maximum independent set for the four named families.

    Any other family (including custom topologies) falls back to the exact
    search.
    """
    family = topology.family if family is None else family
    y = topology.party_count
    if family == "chain":
        return IndependentSet(range(1 if y % 2 else 2, y + 1, 2))
    if family == "star":
        return IndependentSet(range(1, y))
    if family == "cycle":
        return IndependentSet(range(1, y - 1, 2) if y % 2 else range(2, y + 1, 2))
    if family == "tree":
        m, f = topology.params
        layers = range(3, m + 1, 2) if m % 2 else range(2, m + 1, 2)
        members = [1] if m % 2 else []
        for t in layers:
            members.extend(_tree_layer(t, f))
        return IndependentSet(members)
    return exact_independent_set(topology)


def exact_independent_set(topology: NetworkTopology) -> IndependentSet:
    """Maximum independent set by branch and bound.

    Vertices are branched in increasing order with the include branch first
    and only strict improvements are kept, so among the optimal sets the
    lexicographically smallest one is returned.
    """
    y = topology.party_count
    if y > MAX_EXACT_PARTIES:
        raise ResourceError(
            f"exact search is capped at {MAX_EXACT_PARTIES} parties (got {y}); "
            "use canonical_independent_set for the named families"
        )
    nb = topology.neighbours()
    best: list[int] = []

    def search(v: int, chosen: list[int], blocked: frozenset[int]):
        nonlocal best
        free = sum(1 for u in range(v, y + 1) if u not in blocked)
        if len(chosen) + free <= len(best):
            return
        if v > y:
            best = list(chosen)
            return
        if v not in blocked:
            chosen.append(v)
            search(v + 1, chosen, blocked | nb[v])
            chosen.pop()
        search(v + 1, chosen, blocked)

    search(1, [], frozenset())
    return IndependentSet(best)


def is_independent(topology: NetworkTopology, K: IndependentSet) -> bool:
    return all(not (p in K and q in K) for p, q in topology.sources)


def classify_parties(topology: NetworkTopology, K: IndependentSet) -> list[PartyClass]:
    """Class of parties 1..y (list index 0 is party 1)."""
    bad = [m for m in K.members if not 1 <= m <= topology.party_count]
    if bad:
        raise ContractViolation(f"parties {bad} are not in the network")
    if not is_independent(topology, K):
        raise ContractViolation(f"K={list(K.members)} shares a source between two members")
    return [
        PartyClass.IN_K if i in K else PartyClass.NOT_IN_K
        for i in range(1, topology.party_count + 1)
    ]
