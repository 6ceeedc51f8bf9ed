"""Timing experiments: sharing vs plain local storage, and cost against n.

Wall-clock figures come from ``time.perf_counter`` around the measured region
with the garbage collector paused and warm-up runs discarded. Network time
is taken from the virtual clock of an :class:`EdgeCluster` and kept in its
own column, so nothing here depends on a real network.

Two machine-readable artifacts are produced: a deterministic record (inputs,
byte counts, virtual-network times, share digests) that is byte-identical
for identical seeds, and a separate file with the wall-clock measurements.
"""

import gc
import hashlib
import json
import math
import random
import statistics
import tempfile
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

from . import kernels
from .cluster import EdgeCluster, MehNode
from .rng import RandomSource
from .shares import SHARE_OVERHEAD, SharePolicy, encode_share
from .sss import reconstruct, split

DEFAULT_SIZES = (25, 32, 40, 64)


@dataclass
class Stat:
    mean: float
    std: float

    @classmethod
    def of(cls, samples):
        samples = list(samples)
        std = statistics.stdev(samples) if len(samples) > 1 else 0.0
        return cls(statistics.fmean(samples), std)


@dataclass
class BenchResult:
    payload_size: int
    trials: int
    t_local: Stat
    t_split: Stat
    t_share_local: Stat
    t_network_virtual: Stat
    t_share_network: Stat
    t_ingress: float


@contextmanager
def _gc_paused():
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def _write(path, blob):
    with open(path, "wb") as fh:
        fh.write(blob)


def _time_splits(datas, policy, rng, order_rng, repeats, blocks):
    """Per-size seconds per split: best of ``blocks`` interleaved blocks.

    Each block times ``repeats`` back-to-back splits for every size, sizes in a
    freshly shuffled order, so drift and position effects hit all sizes alike.
    Keeping the fastest block rejects scheduler noise, as :mod:`timeit` does.
    """
    best = dict.fromkeys(datas, math.inf)
    sizes = list(datas)
    for _ in range(blocks):
        order_rng.shuffle(sizes)
        for size in sizes:
            data = datas[size]
            t0 = time.perf_counter()
            for _ in range(repeats):
                split(data, policy, rng)
            best[size] = min(best[size], (time.perf_counter() - t0) / repeats)
    return best


def run_bench(sizes=DEFAULT_SIZES, k=3, n=5, trials=100, latency_ms=2.0, jitter_ms=0.0,
              ingress_ms=0.0, bandwidth_mbps=1000.0, seed=0, warmup=5, split_repeats=5,
              split_blocks=100, workdir=None):
    """Measure the timing categories for every payload size.

    Per trial and size:

    * ``t_local``: write the plain payload to local storage;
    * ``t_share_local``: split, then write all n encoded shares locally;
    * ``t_network_virtual``: virtual time until the last remote share is
      delivered in a simulated cluster;
    * ``t_share_network``: ``t_share_local`` plus the virtual transit, since
      the simulated holders persist the same bytes on this host;
    * ``t_split``: the split alone, see :func:`_time_splits`.

    Returns ``(results, record)``; ``record`` holds only the deterministic part.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sizes = list(dict.fromkeys(sizes))
    policy = SharePolicy(k, n)
    rng = RandomSource(seed)
    data_rng = rng.spawn()
    share_rng = rng.spawn()
    scratch_rng = rng.spawn()
    order_rng = random.Random(seed)

    nodes = [MehNode(f"meh{i}", 1 << 40, link_latency=latency_ms / 2) for i in range(n)]
    cluster = EdgeCluster(nodes, seed=seed, jitter_ms=jitter_ms, bandwidth_mbps=bandwidth_mbps)

    samples = {s: {"local": [], "split": [], "share_local": [], "net": []} for s in sizes}
    digests = {s: hashlib.sha256() for s in sizes}

    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        root = Path(tmp)
        for trial in range(-warmup, trials):
            measured = trial >= 0
            datas = {size: (data_rng if measured else scratch_rng).random_bytes(size)
                     for size in sizes}
            with _gc_paused():
                split_times = _time_splits(datas, policy, scratch_rng, order_rng,
                                           split_repeats, split_blocks)
            for size in sizes:
                data = datas[size]
                folder = root / f"{size}-{trial}"
                folder.mkdir()
                with _gc_paused():
                    t0 = time.perf_counter()
                    _write(folder / "plain.bin", data)
                    t_local = time.perf_counter() - t0

                    t0 = time.perf_counter()
                    shares = split(data, policy, share_rng if measured else scratch_rng)
                    for s in shares:
                        _write(folder / f"share-{s.x}.esh", encode_share(s))
                    t_share_local = time.perf_counter() - t0

                if not measured:
                    continue
                for s in shares:
                    digests[size].update(encode_share(s))
                start = cluster.clock
                sid = cluster.store("meh0", data, policy)
                cluster.settle()
                net_ms = cluster.clock - start
                cluster.retire(sid)

                bucket = samples[size]
                bucket["local"].append(t_local)
                bucket["split"].append(split_times[size])
                bucket["share_local"].append(t_share_local)
                bucket["net"].append(net_ms / 1e3)

    results = []
    for size in sizes:
        b = samples[size]
        ingress = ingress_ms / 1e3 + (size * 8 / (bandwidth_mbps * 1e6) if bandwidth_mbps else 0.0)
        results.append(BenchResult(
            payload_size=size, trials=trials,
            t_local=Stat.of(b["local"]), t_split=Stat.of(b["split"]),
            t_share_local=Stat.of(b["share_local"]),
            t_network_virtual=Stat.of(b["net"]),
            t_share_network=Stat.of(a + v for a, v in zip(b["share_local"], b["net"])),
            t_ingress=ingress,
        ))

    record = {
        "config": {
            "sizes": sizes, "k": k, "n": n, "trials": trials, "seed": seed,
            "latency_ms": latency_ms, "jitter_ms": jitter_ms, "ingress_ms": ingress_ms,
            "bandwidth_mbps": bandwidth_mbps, "warmup": warmup,
            "split_repeats": split_repeats, "split_blocks": split_blocks,
        },
        "rows": [
            {
                "payload_size": r.payload_size,
                "trials": r.trials,
                "payload_bytes_stored": n * r.payload_size,
                "share_bytes_stored": n * (r.payload_size + SHARE_OVERHEAD),
                "t_ingress_s": r.t_ingress,
                "t_network_virtual_s": asdict(r.t_network_virtual),
                "shares_sha256": digests[r.payload_size].hexdigest(),
            }
            for r in results
        ],
    }
    return results, record


def timings_dict(results):
    return {
        "backend": kernels.BACKEND,
        "rows": [
            {"payload_size": r.payload_size, "trials": r.trials,
             "t_local_s": asdict(r.t_local), "t_split_s": asdict(r.t_split),
             "t_share_local_s": asdict(r.t_share_local),
             "t_network_virtual_s": asdict(r.t_network_virtual),
             "t_share_network_s": asdict(r.t_share_network),
             "t_ingress_s": r.t_ingress}
            for r in results
        ],
    }


def bench_table(results):
    cols = ("size(B)", "t_ingress", "t_split", "t_share_local", "t_net(virt)",
            "t_share_network", "t_local")
    lines = ["  ".join(f"{c:>16}" for c in cols)]
    for r in results:
        cells = [f"{r.payload_size:>16d}", f"{r.t_ingress:>16.6f}"]
        for st in (r.t_split, r.t_share_local, r.t_network_virtual, r.t_share_network, r.t_local):
            cells.append(f"{st.mean:>9.6f}±{st.std:<6.1e}")
        lines.append("  ".join(cells))
    lines.append(f"(seconds; mean±std over {results[0].trials if results else 0} trials; "
                 f"kernel backend: {kernels.BACKEND})")
    return "\n".join(lines) + "\n"


@dataclass
class ScalingRow:
    n: int
    k: int
    size: int
    trials: int
    t_split: Stat
    t_reconstruct: Stat
    round_trip_ok: bool


def default_k(n):
    return max(2, math.ceil(n / 2))


def run_scaling(ns=(2, 5, 10, 20), size=1024, trials=30, k_rule=default_k, seed=0,
                warmup=3, repeats=5):
    """Split and reconstruct wall time for each n (k from ``k_rule``)."""
    rng = RandomSource(seed)
    data = rng.random_bytes(size)
    rows = []
    for n in ns:
        policy = SharePolicy(k_rule(n), n)
        splits, recons = [], []
        ok = True
        for trial in range(-warmup, trials):
            with _gc_paused():
                t0 = time.perf_counter()
                for _ in range(repeats):
                    shares = split(data, policy, rng)
                t_split = (time.perf_counter() - t0) / repeats
                subset = shares[-policy.k:]
                t0 = time.perf_counter()
                for _ in range(repeats):
                    out = reconstruct(subset, policy)
                t_rec = (time.perf_counter() - t0) / repeats
            ok = ok and out == data
            if trial >= 0:
                splits.append(t_split)
                recons.append(t_rec)
        rows.append(ScalingRow(n, policy.k, size, trials, Stat.of(splits), Stat.of(recons), ok))
    return rows


def scaling_table(rows):
    lines = [f"{'n':>4} {'k':>4} {'size':>6} {'t_split(s)':>22} {'t_reconstruct(s)':>22} round-trip"]
    for r in rows:
        lines.append(
            f"{r.n:>4} {r.k:>4} {r.size:>6} {r.t_split.mean:>12.7f}±{r.t_split.std:<9.1e}"
            f"{r.t_reconstruct.mean:>12.7f}±{r.t_reconstruct.std:<9.1e} "
            f"{'ok' if r.round_trip_ok else 'FAIL'}"
        )
    return "\n".join(lines) + "\n"


def scaling_dict(rows):
    return {"backend": kernels.BACKEND, "rows": [asdict(r) for r in rows]}


def dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
