"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

import functools
import itertools
import os
import random
import subprocess
import sys
from collections import Counter
from types import SimpleNamespace

from edgeshard import kernels
from edgeshard.bench import default_k, run_bench, run_scaling
from edgeshard.cluster import EdgeCluster, FaultAction, FaultEntry, MehNode
from edgeshard.errors import InsufficientNodes, InsufficientShares
from edgeshard.rng import RandomSource
from edgeshard.selection import (
    NodeProfile,
    RegistryStats,
    ScoreWeights,
    ThresholdRandom,
    TopN,
    register_sharing,
    select_nodes,
    sharing_score,
    total_score,
    trust_score,
)
from edgeshard.shares import HEADER_SIZE, SHARE_OVERHEAD, TRAILER_SIZE, SharePolicy, encode_share
from edgeshard.sss import reconstruct, split, split_data

RESULTS = {}


class _Fixed(RandomSource):
    """Serves a prepared byte string as its random stream."""

    def __init__(self, stream):
        super().__init__(0)
        self._stream, self._pos = stream, 0

    def random_bytes(self, count):
        out = self._stream[self._pos:self._pos + count]
        assert len(out) == count
        self._pos += count
        return out


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            try:
                ok, detail = fn()
            except Exception as exc:  # report, then fail below
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            line = f"[{'PASS' if ok else 'FAIL'}] AC{number:<2} {title}: {detail}"
            RESULTS[number] = line
            print(line)
            assert ok, line
        return run
    return wrap


@criterion(1, "round trip, 500 secrets x all 2<=k<=n<=10 x every k-subset")
def test_ac01_round_trip():
    gen = random.Random(2024)
    rng = RandomSource(2024)
    policies = [SharePolicy(k, n) for n in range(2, 11) for k in range(2, n + 1)]
    checked = bad = 0
    for _ in range(500):
        secret = gen.randbytes(gen.randint(1, 4096))
        for policy in policies:
            shares = split(secret, policy, rng)
            for subset in itertools.combinations(shares, policy.k):
                checked += 1
                bad += reconstruct(subset, policy) != secret
    return bad == 0, f"{checked} reconstructions over {len(policies)} policies, {bad} wrong"


def _packed_split(secret, policy, coeff_rows):
    """One split whose byte position p uses coefficient tuple p."""
    span = len(coeff_rows[0])
    return split(bytes([secret]) * span, policy, _Fixed(bytes(16) + b"".join(coeff_rows)))


@criterion(2, "perfect secrecy by exhaustive coefficient enumeration")
def test_ac02_secrecy():
    p23 = SharePolicy(2, 3)
    row = bytes(range(256))
    k2_ok = True
    for secret in range(256):
        for share in _packed_split(secret, p23, [row]):
            k2_ok &= sorted(share.payload) == list(range(256))

    p33 = SharePolicy(3, 3)
    span = 1 << 16
    rows = [bytes(p & 0xFF for p in range(span)), bytes(p >> 8 for p in range(span))]
    k3_ok = True
    baseline = None
    for secret in (0x00, 0x01, 0x2A, 0x55, 0x80, 0xAA, 0xF0, 0xFF):
        shares = _packed_split(secret, p33, rows)
        view = []
        for s in shares:
            view.append(Counter(s.payload))
            k3_ok &= set(view[-1].values()) == {256}
        for a, b in itertools.combinations(shares, 2):
            pairs = Counter(zip(a.payload, b.payload))
            k3_ok &= len(pairs) == span and set(pairs.values()) == {1}
        baseline = baseline or view
        k3_ok &= view == baseline
    return k2_ok and k3_ok, (f"k=2: 256 secrets x 256 coefficients exact={k2_ok}; "
                             f"k=3: 8 secrets x 65536 pairs, singles and pairs uniform={k3_ok}")


def _five_node_cluster():
    nodes = [MehNode(f"meh{i}", 1 << 20, link_latency=1.0 + i / 4) for i in range(5)]
    return EdgeCluster(nodes, seed=5)


@criterion(3, "n=5,k=3 survives every 2-crash pattern, fails every 3-crash pattern")
def test_ac03_fault_boundary():
    data = RandomSource(3).random_bytes(200)
    survived = refused = 0
    for size in (2, 3):
        for pattern in itertools.combinations(range(5), size):
            cluster = _five_node_cluster()
            sid = cluster.store("meh0", data, SharePolicy(3, 5))
            cluster.settle()
            holders = cluster.records[sid].assigned_nodes
            for i in pattern:
                cluster.inject_fault(FaultEntry(cluster.clock, holders[i], FaultAction.CRASH))
            retriever = next(h for i, h in enumerate(holders) if i not in pattern)
            try:
                ok = cluster.retrieve(retriever, sid) == data
                survived += ok and size == 2
            except InsufficientShares as exc:
                refused += size == 3 and exc.available == 2 and exc.required == 3
    return survived == 10 and refused == 10, (
        f"2-crash successes {survived}/10, 3-crash InsufficientShares {refused}/10")


@criterion(4, "stored payload bytes = n*|s|, metadata per share = fixed header")
def test_ac04_storage_overhead():
    policy = SharePolicy(3, 5)
    problems = []
    for size in (1, 25, 64, 4096, 10_000):
        data = RandomSource(size).random_bytes(size)
        cluster = EdgeCluster([MehNode(f"m{i}", 1 << 24) for i in range(5)], seed=1)
        sid = cluster.store("m0", data, policy)
        cluster.settle()
        if cluster.stored_payload_bytes(sid) != policy.n * size:
            problems.append(f"size {size}: payload {cluster.stored_payload_bytes(sid)}")
        for holder in split_data(data, policy, RandomSource(1)):
            for share in holder:
                if len(encode_share(share)) - len(share.payload) != SHARE_OVERHEAD:
                    problems.append(f"size {size}: metadata mismatch")
    return not problems, (f"5 sizes exact; per-share metadata {SHARE_OVERHEAD} B "
                          f"({HEADER_SIZE} header + {TRAILER_SIZE} CRC)" if not problems
                          else "; ".join(problems))


@criterion(5, "selection gates over 10^4 random candidate sets")
def test_ac05_selection_gates():
    gen = random.Random(55)
    violations = selections = 0
    for trial in range(10_000):
        sh_size = gen.randint(0, 100)
        cands = [NodeProfile(f"n{i}", gen.uniform(1e-3, 1.0), gen.randint(0, 150),
                             corrupt=gen.random() < 0.25, reachable=gen.random() > 0.25,
                             capability_raw=gen.uniform(0, 5))
                 for i in range(gen.randint(1, 12))]
        weights = ScoreWeights(*(gen.uniform(0.01, 2) for _ in range(6)))
        strategy = TopN() if trial % 2 else ThresholdRandom(gen.uniform(0, 3), RandomSource(trial))
        stats = RegistryStats()
        for j in range(gen.randint(0, 4)):
            stats = register_sharing(stats, SimpleNamespace(
                secret_id=j, assigned_nodes=tuple(gen.sample([c.node_id for c in cands],
                                                             min(2, len(cands))))))
        try:
            chosen = select_nodes(cands, gen.randint(1, 5), strategy, stats, weights, sh_size)
        except InsufficientNodes:
            continue
        selections += 1
        by_id = {c.node_id: c for c in cands}
        for node_id in chosen:
            c = by_id[node_id]
            violations += c.corrupt or not c.reachable or c.free_capacity < sh_size
    return violations == 0 and selections > 1000, (
        f"{selections} successful selections, {violations} gated nodes selected")


@criterion(6, "scoring arithmetic 1.25, 0.95, 0.5 within 1e-12")
def test_ac06_scoring():
    rec = lambda sid, *nodes: SimpleNamespace(secret_id=sid, assigned_nodes=nodes)
    stats = register_sharing(register_sharing(RegistryStats(), rec(1, "A", "B")), rec(2, "A", "C"))
    half = ScoreWeights()
    profile = NodeProfile("A", attack_risk=0.5, free_capacity=100, capability_raw=0.5)
    got = {
        "ST_sh": (sharing_score("A", stats, half), 0.5),
        "ST": (trust_score(profile, stats, half), 1.25),
        "SS": (total_score(profile, stats, ScoreWeights(w_st=0.6, w_sc=0.4), 1), 0.95),
        "ST_sh(empty)": (sharing_score("Z", RegistryStats(), half), 1.0),
    }
    ok = all(abs(v - want) <= 1e-12 for v, want in got.values())
    return ok, ", ".join(f"{k}={v!r}" for k, (v, _) in got.items())


@criterion(7, "spread <= 2 after 200 TopN sharings on 10 identical nodes")
def test_ac07_spread():
    weights = ScoreWeights(w_st=1, w_sc=0, w_st_att=0, w_st_sh=1, w_st_no=1, w_st_as=0.1)
    cands = [NodeProfile(f"meh{i}", 0.2, 1 << 20) for i in range(10)]
    stats = RegistryStats()
    worst = 0
    for sid in range(200):
        chosen = select_nodes(cands, 5, TopN(), stats, weights, 64)
        stats = register_sharing(stats, SimpleNamespace(secret_id=sid, assigned_nodes=chosen))
        counts = [stats.count(c.node_id) for c in cands]
        worst = max(worst, max(counts) - min(counts))
    return worst <= 2, f"max spread during run {worst}, final counts {counts}"


@criterion(8, "timing orderings over 100 trials at 25/32/40/64 B, n=5 k=3")
def test_ac08_timing_orderings():
    results, _ = run_bench((25, 32, 40, 64), k=3, n=5, trials=100, latency_ms=2.0,
                           split_blocks=100)
    local = all(r.t_share_local.mean > r.t_local.mean for r in results)
    network = all(r.t_share_network.mean > r.t_share_local.mean for r in results)
    splits = [r.t_split.mean for r in results]
    monotone = all(a <= b for a, b in zip(splits, splits[1:]))
    detail = (f"share_local>local {local}, share_network>share_local {network}, "
              f"split us {[round(s * 1e6, 3) for s in splits]} nondecreasing {monotone} "
              f"[{kernels.BACKEND} kernels]")
    return local and network and monotone, detail


@criterion(9, "split time at n=20 exceeds n=2 (k=ceil(n/2), 1 KiB, 30 trials)")
def test_ac09_scaling():
    rows = run_scaling(ns=(2, 20), size=1024, trials=30, k_rule=default_k)
    small, large = rows
    ok = large.t_split.mean > small.t_split.mean and all(r.round_trip_ok for r in rows)
    return ok, (f"n=2: {small.t_split.mean * 1e6:.1f} us, n=20: {large.t_split.mean * 1e6:.1f} us")


def _cli(args, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    return subprocess.run([sys.executable, "-m", "edgeshard.cli", *args], env=env,
                          capture_output=True, check=True)


@criterion(10, "simulate and bench --seed outputs byte-identical across runs")
def test_ac10_determinism():
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        same = {}
        for name in ("tolerance.scn", "collapse.scn", "lifecycle.scn"):
            outs = []
            for run in (1, 2):
                path = root / f"{name}.{run}.json"
                _cli(["simulate", "--scenario", name, "--out", str(path)], run)
                outs.append(path.read_bytes())
            same[name] = outs[0] == outs[1]
        outs = []
        for run in (1, 2):
            folder = root / f"bench{run}"
            _cli(["bench", "--seed", "7", "--trials", "20", "--out", str(folder)], run)
            outs.append((folder / "bench.json").read_bytes())
        same["bench.json"] = outs[0] == outs[1]
    return all(same.values()), ", ".join(f"{k} identical={v}" for k, v in same.items())


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_ac"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
