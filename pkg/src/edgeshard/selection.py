"""Trust- and capability-weighted selection of share-holding nodes.

Total score of node i::

    SS = w_st * ST + w_sc * SC
    ST = w_st_att / attack_risk + w_st_sh * ST_sh          (EXCLUDED if corrupt)
    ST_sh = w_st_no / max(1, N_no) + w_st_as / (1 + max_j co(i, j))
    SC = min-max normalised capability                     (EXCLUDED if full
                                                            or unreachable)

``N_no`` is the number of active shares the node holds and ``co(i, j)`` the
number of active secrets placed on both i and j; both come from
:class:`RegistryStats`, which the orchestrator keeps up to date.
"""

import math
from dataclasses import dataclass, field, replace
from functools import total_ordering
from itertools import combinations

from .errors import InsufficientNodes, InvalidRecord

MIN_ATTACK_RISK = 1e-6


@total_ordering
class _Excluded:
    """Score of a node that must never be selected; below every number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("EXCLUDED")

    def __repr__(self):
        return "EXCLUDED"

    def __reduce__(self):
        return (_Excluded, ())


EXCLUDED = _Excluded()


def is_excluded(score):
    return score is EXCLUDED


@dataclass(frozen=True)
class NodeProfile:
    node_id: str
    attack_risk: float
    free_capacity: int
    corrupt: bool = False
    reachable: bool = True
    capability_raw: float = 1.0
    link_latency: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.attack_risk <= 1.0:
            raise ValueError(f"{self.node_id}: attack_risk must lie in (0, 1]")
        if self.free_capacity < 0:
            raise ValueError(f"{self.node_id}: free_capacity must be >= 0")
        if self.capability_raw < 0:
            raise ValueError(f"{self.node_id}: capability_raw must be >= 0")


@dataclass(frozen=True)
class ScoreWeights:
    w_st: float = 0.5
    w_sc: float = 0.5
    w_st_att: float = 0.5
    w_st_sh: float = 0.5
    w_st_no: float = 0.5
    w_st_as: float = 0.5

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"weight {name} must be finite and >= 0, got {value}")
        if self.w_st <= 0 and self.w_sc <= 0:
            raise ValueError("at least one of w_st, w_sc must be positive")

    def as_dict(self):
        return {
            "w_st": self.w_st, "w_sc": self.w_sc, "w_st_att": self.w_st_att,
            "w_st_sh": self.w_st_sh, "w_st_no": self.w_st_no, "w_st_as": self.w_st_as,
        }

    def scaled(self, factor):
        return ScoreWeights(**{k: v * factor for k, v in self.as_dict().items()})


@dataclass(frozen=True)
class TopN:
    pass


@dataclass(frozen=True)
class ThresholdRandom:
    threshold: float
    rng: object = field(compare=False)

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")


def _clean(counts):
    return {k: v for k, v in counts.items() if v}


@dataclass(frozen=True)
class RegistryStats:
    """Snapshot of active placements; updates return a new snapshot.

    ``active_share_count[node]`` counts active secrets placed on the node,
    ``partners[a][b]`` counts active secrets placed on both a and b, and
    ``placements`` maps each active secret id to its node tuple.
    """

    active_share_count: dict = field(default_factory=dict)
    partners: dict = field(default_factory=dict)
    placements: dict = field(default_factory=dict)
    time_step: int = field(default=0, compare=False)

    def co_occurrence(self, a, b):
        return self.partners.get(a, {}).get(b, 0)

    def max_co_occurrence(self, node_id):
        row = self.partners.get(node_id)
        return max(row.values()) if row else 0

    def count(self, node_id):
        return self.active_share_count.get(node_id, 0)

    def as_dict(self):
        pairs = {}
        for a, row in self.partners.items():
            for b, c in row.items():
                if str(a) < str(b):
                    pairs[f"{a}|{b}"] = c
        return {
            "time_step": self.time_step,
            "active_share_count": dict(sorted(self.active_share_count.items())),
            "co_occurrence": dict(sorted(pairs.items())),
            "active_records": len(self.placements),
        }


def _apply(stats, secret_id, nodes, delta):
    counts = dict(stats.active_share_count)
    partners = {k: dict(v) for k, v in stats.partners.items()}
    for node in nodes:
        counts[node] = counts.get(node, 0) + delta
    for a, b in combinations(nodes, 2):
        for x, y in ((a, b), (b, a)):
            row = partners.setdefault(x, {})
            row[y] = row.get(y, 0) + delta
    placements = dict(stats.placements)
    if delta > 0:
        placements[secret_id] = tuple(nodes)
    else:
        del placements[secret_id]
    partners = {k: _clean(v) for k, v in partners.items()}
    return replace(
        stats,
        active_share_count=_clean(counts),
        partners={k: v for k, v in partners.items() if v},
        placements=placements,
    )


def register_sharing(stats, record):
    """Account for a newly placed secret (needs ``secret_id``, ``assigned_nodes``)."""
    nodes = list(record.assigned_nodes)
    if len(set(nodes)) != len(nodes):
        raise InvalidRecord(f"record {record.secret_id!r} lists a node twice")
    if record.secret_id in stats.placements:
        raise InvalidRecord(f"record {record.secret_id!r} already registered")
    return _apply(stats, record.secret_id, nodes, +1)


def retire_sharing(stats, record):
    placed = stats.placements.get(record.secret_id)
    if placed is None:
        raise InvalidRecord(f"record {record.secret_id!r} is not registered")
    if sorted(placed) != sorted(record.assigned_nodes):
        raise InvalidRecord(f"record {record.secret_id!r} does not match its registration")
    return _apply(stats, record.secret_id, placed, -1)


def recount(records):
    """Rebuild registry stats from scratch out of the given active records."""
    stats = RegistryStats()
    for record in records:
        stats = register_sharing(stats, record)
    return stats


def sharing_score(node_id, stats, weights):
    n_no = stats.count(node_id)
    st_as = 1.0 / (1 + stats.max_co_occurrence(node_id))
    return weights.w_st_no / max(1, n_no) + weights.w_st_as * st_as


def trust_score(profile, stats, weights):
    if profile.corrupt:
        return EXCLUDED
    risk = min(1.0, max(MIN_ATTACK_RISK, profile.attack_risk))
    return (weights.w_st_att / risk
            + weights.w_st_sh * sharing_score(profile.node_id, stats, weights))


def passes_capability_gate(profile, sh_size):
    return profile.reachable and profile.free_capacity >= sh_size


def capability_bounds(profiles, sh_size):
    """(lo, hi) of raw capability over the nodes passing the capability gate."""
    raws = [p.capability_raw for p in profiles if passes_capability_gate(p, sh_size)]
    if not raws:
        return None
    return min(raws), max(raws)


def capability_score(profile, sh_size, bounds=None):
    """Capability in [0, 1]; ``bounds=None`` means the raw value is normalised."""
    if not passes_capability_gate(profile, sh_size):
        return EXCLUDED
    if bounds is None:
        return float(profile.capability_raw)
    lo, hi = bounds
    if hi <= lo:
        return 1.0
    return (profile.capability_raw - lo) / (hi - lo)


def total_score(profile, stats, weights, sh_size, bounds=None):
    st = trust_score(profile, stats, weights)
    sc = capability_score(profile, sh_size, bounds)
    if st is EXCLUDED or sc is EXCLUDED:
        return EXCLUDED
    return weights.w_st * st + weights.w_sc * sc


def score_candidates(candidates, stats, weights, sh_size):
    bounds = capability_bounds(candidates, sh_size)
    return {p.node_id: total_score(p, stats, weights, sh_size, bounds) for p in candidates}


def select_from_scores(scores, n, strategy):
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(strategy, ThresholdRandom):
        eligible = sorted(
            node for node, s in scores.items()
            if s is not EXCLUDED and s >= strategy.threshold
        )
        if len(eligible) < n:
            raise InsufficientNodes(len(eligible), n)
        return strategy.rng.sample(eligible, n)
    ranked = sorted(
        ((node, s) for node, s in scores.items() if s is not EXCLUDED),
        key=lambda item: (-item[1], item[0]),
    )
    if len(ranked) < n:
        raise InsufficientNodes(len(ranked), n)
    return [node for node, _ in ranked[:n]]


def select_nodes(candidates, n, strategy, stats, weights, sh_size):
    """Pick ``n`` node ids; EXCLUDED nodes are never returned."""
    scores = score_candidates(candidates, stats, weights, sh_size)
    return select_from_scores(scores, n, strategy)
