"""Synthetic trace logs: canonical topologies and routing scenarios.

Scenarios reproduce routing behaviours that make one source/destination pair
show several paths (load balancing, fail-over) plus a few fixed networks used
to exercise the analyses end to end.  Output is a list of
:class:`~pathmetrics.ingest.TraceRecord` in emission order; everything is a
pure function of the arguments, including ``seed``.
"""

from __future__ import annotations

import json
import random
from typing import Callable

from .classify import topology_paths
from .ingest import TraceRecord

BASE_TIME = 1_700_000_000

# Lincroft <-> Basking Ridge routes and their observation counts.
NJ_PATHS = {
    "path1": (["Lin", "B", "C", "F", "H", "I", "BR"], 552),
    "path2": (["Lin", "B", "D", "F", "H", "I", "BR"], 1336),
    "path3": (["BR", "I", "G", "E", "C", "A", "Lin"], 1889),
}


def _record(k: int, nodes: list[str]) -> TraceRecord:
    return TraceRecord(BASE_TIME + k, nodes[0], nodes[-1], tuple(nodes[1:-1]))


def topology_log(kind: str, n: int, rounds: int = 1, seed: int = 0) -> list[TraceRecord]:
    """``rounds`` passes over every ordered pair of a canonical network.

    Within a round the pair order is shuffled with ``seed``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    rng = random.Random(seed)
    seqs = topology_paths(kind, n)
    out: list[TraceRecord] = []
    for _ in range(rounds):
        order = list(range(len(seqs)))
        rng.shuffle(order)
        out.extend(_record(len(out), seqs[i]) for i in order)
    return out


def nj_table(rounds: int = 1, seed: int = 0, **_: object) -> list[TraceRecord]:
    """Two New Jersey endpoints: Lin->BR split 552/1336 over two routes, BR->Lin fixed.

    ``rounds`` is ignored; the counts are fixed.  ``seed`` decides which of
    the 1888 Lin->BR tests took the less common route.
    """
    rng = random.Random(seed)
    (p1, n1), (p2, n2), (p3, n3) = NJ_PATHS.values()
    forward = [p1] * n1 + [p2] * n2
    rng.shuffle(forward)
    out: list[TraceRecord] = []
    for k in range(max(len(forward), n3)):
        if k < n3:
            out.append(_record(len(out), p3))
        if k < len(forward):
            out.append(_record(len(out), forward[k]))
    return out


def _load_balanced(ways: int) -> Callable[..., list[TraceRecord]]:
    def scenario(rounds: int = 1800, seed: int = 0, **_: object) -> list[TraceRecord]:
        routes = [["S", "r1", f"lb{i}", "r2", "D"] for i in range(ways)]
        return [_record(k, routes[k % ways]) for k in range(rounds)]

    scenario.__doc__ = (
        f"One pair S->D alternating round-robin over {ways} equal-cost routes."
    )
    return scenario


def failover(
    rounds: int = 1800, seed: int = 0, failover_round: int | None = None, **_: object
) -> list[TraceRecord]:
    """One pair S->D on a primary route that fails over to a backup at ``failover_round``.

    Defaults to switching half way through.
    """
    switch = rounds // 2 if failover_round is None else failover_round
    primary = ["S", "r1", "p1", "r2", "D"]
    backup = ["S", "r1", "b1", "b2", "r2", "D"]
    return [_record(k, primary if k < switch else backup) for k in range(rounds)]


def enterprise(
    rounds: int = 2, seed: int = 0, n: int | None = None, **_: object
) -> list[TraceRecord]:
    """Hub-dominated network: every endpoint reaches every other through one core router.

    Endpoint ``e<i>`` sits behind access router ``a<i>``; a third of the
    pairs (chosen with ``seed``) are load balanced over a second core, so
    it takes at least two rounds for both branches to show up.
    """
    size = n or 20
    rng = random.Random(seed)
    pairs = [(s, d) for s in range(size) for d in range(size) if s != d]
    balanced = set(rng.sample(pairs, len(pairs) // 3))
    out: list[TraceRecord] = []
    for r in range(rounds):
        order = pairs[:]
        rng.shuffle(order)
        for s, d in order:
            core = "core2" if (s, d) in balanced and (r + s + d) % 2 else "core"
            out.append(_record(len(out), [f"e{s}", f"a{s}", core, f"a{d}", f"e{d}"]))
    return out


def four_block(
    rounds: int = 1, seed: int = 0, n: int | None = None, **_: object
) -> list[TraceRecord]:
    """Two tight sites of ``n`` endpoints each (default 4) joined by a long backbone.

    Site X hangs off router ``RX`` and site Y off ``RY``; the backbone is
    ``RX - B1 - B2 - B3 - RY`` used in both directions.
    """
    size = n or 4
    rng = random.Random(seed)
    sites = {"x": "RX", "y": "RY"}
    endpoints = [(f"{site}{i}", site) for site in sites for i in range(size)]
    backbone = ["RX", "B1", "B2", "B3", "RY"]
    out: list[TraceRecord] = []
    for _ in range(rounds):
        pairs = [(a, b) for a in endpoints for b in endpoints if a != b]
        rng.shuffle(pairs)
        for (src, s_site), (dst, d_site) in pairs:
            if s_site == d_site:
                mid = [sites[s_site]]
            else:
                mid = backbone if s_site == "x" else backbone[::-1]
            out.append(_record(len(out), [src, *mid, dst]))
    return out


SCENARIOS: dict[str, Callable[..., list[TraceRecord]]] = {
    "nj-table": nj_table,
    "lb-5050": _load_balanced(2),
    "lb-4way": _load_balanced(4),
    "failover": failover,
    "enterprise": enterprise,
    "four-block": four_block,
}


def scenario_log(name: str, rounds: int | None = None, seed: int = 0, **kwargs: object) -> list[TraceRecord]:
    try:
        fn = SCENARIOS[name]
    except KeyError:
        raise ValueError(
            f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}"
        ) from None
    if rounds is not None:
        kwargs["rounds"] = rounds
    return fn(seed=seed, **kwargs)


def to_text(records: list[TraceRecord]) -> str:
    return "".join(r.to_text() + "\n" for r in records)


def to_structured(records: list[TraceRecord]) -> str:
    return "".join(
        json.dumps({"ts": int(r.timestamp), "src": r.source, "dst": r.destination, "hops": list(r.hops)})
        + "\n"
        for r in records
    )
