"""Virtual-clock simulation of an edge cluster storing secret-shared data.

A dealer node chunks and shares incoming data, keeps one share per chunk and
ships the rest to nodes picked by :mod:`edgeshard.selection`. Retrieval asks
the lowest-latency reachable holders for their shares and interpolates.
Faults (crash, unreachability, corruption, full disks) arrive as timed
events; audits and repair keep the fault-tolerance margin visible and
restore it.

Everything is driven by one event queue ordered by (time, insertion order),
and every random draw comes from a seeded :class:`RandomSource`, so a run is
reproducible event for event.
"""

import heapq
import itertools
from dataclasses import dataclass, replace
from enum import Enum

from .errors import (
    DealerUnavailable,
    InsufficientShares,
    UnknownNode,
    UnknownSecret,
)
from .rng import RandomSource
from .selection import (
    EXCLUDED,
    NodeProfile,
    RegistryStats,
    ScoreWeights,
    TopN,
    register_sharing,
    retire_sharing,
    score_candidates,
    select_from_scores,
)
from .shares import SECRET_ID_LEN, SHARE_OVERHEAD, ChunkLayout, SharePolicy
from .sss import chunk, reconstruct, split

DEFAULT_CHUNK_SIZE = 4096


class RecordState(Enum):
    ACTIVE = "active"
    RETIRED = "retired"


class FaultAction(Enum):
    CRASH = "crash"
    UNREACH = "unreach"
    CORRUPT = "corrupt"
    RESTORE = "restore"
    FILL_CAPACITY = "fill_capacity"


@dataclass(frozen=True)
class FaultEntry:
    time: float
    node_id: str
    action: FaultAction


class FaultScript:
    """Timed node state changes, in non-decreasing time order."""

    def __init__(self, entries=()):
        self.entries = []
        for entry in entries:
            self.append(entry)

    def append(self, entry):
        if self.entries and entry.time < self.entries[-1].time:
            raise ValueError("fault script times must be non-decreasing")
        self.entries.append(entry)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass
class SecretRecord:
    secret_id: bytes
    policy: SharePolicy
    layout: ChunkLayout
    dealer: str
    assigned_nodes: tuple
    created_at: float
    state: RecordState = RecordState.ACTIVE

    def x_of(self, node_id):
        return self.assigned_nodes.index(node_id) + 1


@dataclass(frozen=True)
class HealthReport:
    secret_id: bytes
    k: int
    n: int
    reachable_holders: int
    margin: int
    intact_checksums: int

    @property
    def recoverable(self):
        return self.margin >= 0

    def as_dict(self):
        return {
            "secret_id": self.secret_id.hex(), "k": self.k, "n": self.n,
            "reachable_holders": self.reachable_holders, "margin": self.margin,
            "intact_checksums": self.intact_checksums,
        }


@dataclass
class RetrievalReport:
    data: bytes
    responders: list
    checksum_failures: int
    rounds: int
    started_at: float
    finished_at: float

    @property
    def elapsed(self):
        return self.finished_at - self.started_at


class MehNode:
    """One edge host and its share store."""

    def __init__(self, node_id, capacity, attack_risk=0.1, capability_raw=1.0,
                 link_latency=1.0, dealer_capable=True):
        self.node_id = node_id
        self.capacity = capacity
        self.attack_risk = attack_risk
        self.capability_raw = capability_raw
        self.link_latency = link_latency
        self.dealer_capable = dealer_capable
        self.reachable = True
        self.crashed = False
        self.corrupt = False
        self.epoch = 0
        self.stored_shares = {}
        self._capacity_before_fill = None

    @property
    def used(self):
        return sum(s.stored_size for s in self.stored_shares.values())

    @property
    def free_capacity(self):
        return max(0, self.capacity - self.used)

    def shares_of(self, secret_id):
        return sorted(
            (s for (sid, _), s in self.stored_shares.items() if sid == secret_id),
            key=lambda s: s.chunk_index,
        )

    def drop_secret(self, secret_id):
        for key in [key for key in self.stored_shares if key[0] == secret_id]:
            del self.stored_shares[key]

    def profile(self):
        return NodeProfile(
            node_id=self.node_id, attack_risk=self.attack_risk,
            free_capacity=self.free_capacity, corrupt=self.corrupt,
            reachable=self.reachable, capability_raw=self.capability_raw,
            link_latency=self.link_latency,
        )


class VirtualNetwork:
    """Latency, bandwidth and loss model for the internal edge network.

    One-way latency from a to b is an explicit per-link override when given,
    else the sum of both nodes' access-link latencies, plus uniform jitter.
    """

    def __init__(self, rng, loss_probability=0.0, bandwidth_mbps=1000.0,
                 jitter_ms=0.0, links=None):
        if not 0.0 <= loss_probability < 1.0:
            raise ValueError("loss_probability must lie in [0, 1)")
        self.rng = rng
        self.loss_probability = loss_probability
        self.bandwidth_mbps = bandwidth_mbps
        self.jitter_ms = jitter_ms
        self.links = dict(links or {})

    def base_latency(self, src, dst):
        if (src.node_id, dst.node_id) in self.links:
            return self.links[(src.node_id, dst.node_id)]
        return src.link_latency + dst.link_latency

    def transit(self, src, dst, size):
        """Sampled one-way delay in ms for a message of ``size`` bytes."""
        delay = self.base_latency(src, dst)
        if self.jitter_ms:
            delay += self.rng.random() * self.jitter_ms
        if self.bandwidth_mbps:
            delay += size * 8 / (self.bandwidth_mbps * 1e3)
        return delay

    def lost(self):
        return self.loss_probability > 0 and self.rng.random() < self.loss_probability


class EdgeCluster:
    def __init__(self, nodes, *, seed=0, loss_probability=0.0, bandwidth_mbps=1000.0,
                 jitter_ms=0.0, links=None, retry_timeout_ms=50.0,
                 chunk_size=DEFAULT_CHUNK_SIZE):
        self.nodes = {}
        for node in nodes:
            if node.node_id in self.nodes:
                raise ValueError(f"duplicate node id {node.node_id!r}")
            self.nodes[node.node_id] = node
        root = RandomSource(seed)
        self.network = VirtualNetwork(root.spawn(), loss_probability, bandwidth_mbps,
                                      jitter_ms, links)
        self.share_rng = root.spawn()
        self.select_rng = root.spawn()
        self.retry_timeout_ms = retry_timeout_ms
        self.chunk_size = chunk_size
        self.clock = 0.0
        self.registry = RegistryStats()
        self.records = {}
        self.decisions = []
        self.trace = []
        self._queue = []
        self._seq = itertools.count()
        self._msg_ids = itertools.count(1)
        self._retrievals = {}

    # ------------------------------------------------------------------ events

    def _node(self, node_id):
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node {node_id!r}") from None

    def _record(self, secret_id):
        try:
            return self.records[secret_id]
        except KeyError:
            raise UnknownSecret(f"unknown secret {secret_id.hex()}") from None

    def _push(self, time, kind, payload):
        heapq.heappush(self._queue, (time, next(self._seq), kind, payload))

    def _log(self, event, /, **fields):
        entry = {"t": round(self.clock, 9), "event": event, **fields}
        self.trace.append(entry)
        return entry

    def schedule_faults(self, script):
        for entry in script:
            self._node(entry.node_id)
            self._push(max(entry.time, self.clock), "fault", entry)

    def run_until(self, t):
        """Deliver every queued event due at or before ``t``; clock ends at ``t``."""
        if t < self.clock:
            raise ValueError(f"cannot run backwards from {self.clock} to {t}")
        delivered = []
        while self._queue and self._queue[0][0] <= t:
            delivered.extend(self._step())
        self.clock = t
        return delivered

    def _step(self):
        time, _, kind, payload = heapq.heappop(self._queue)
        self.clock = max(self.clock, time)
        if kind == "fault":
            return [self.inject_fault(payload)]
        if kind == "message":
            return self._deliver(payload)
        if kind == "timeout":
            return self._on_timeout(payload)
        raise AssertionError(kind)

    def _in_flight(self):
        return any(kind != "fault" for _, _, kind, _ in self._queue)

    def _run_while(self, predicate):
        """Process events in order while ``predicate`` says work is outstanding."""
        while self._queue and predicate():
            self._step()

    def settle(self):
        """Run until no message or timer is outstanding (faults stay queued)."""
        self._run_while(self._in_flight)

    # ---------------------------------------------------------------- messages

    def _send(self, src_id, dst_id, kind, body, size, attempt=1):
        src, dst = self.nodes[src_id], self.nodes[dst_id]
        msg = {
            "id": next(self._msg_ids), "kind": kind, "src": src_id, "dst": dst_id,
            "size": size, "attempt": attempt, "body": body,
            "src_epoch": src.epoch, "dst_epoch": dst.epoch, "sent": self.clock,
        }
        delay = self.network.transit(src, dst, size)
        if self.network.lost():
            self._log("lost", msg=msg["id"], kind=kind, src=src_id, dst=dst_id)
            if kind == "store" and attempt == 1:
                self._push(self.clock + self.retry_timeout_ms, "timeout",
                           {"kind": "store_retry", "msg": msg})
            return msg
        self._push(self.clock + delay, "message", msg)
        return msg

    def _deliver(self, msg):
        src, dst = self.nodes[msg["src"]], self.nodes[msg["dst"]]
        alive = (src.reachable and dst.reachable and src.epoch == msg["src_epoch"]
                 and dst.epoch == msg["dst_epoch"])
        if not alive:
            self._log("dropped", msg=msg["id"], kind=msg["kind"], src=msg["src"], dst=msg["dst"])
            return []
        entry = self._log("delivered", msg=msg["id"], kind=msg["kind"], src=msg["src"],
                          dst=msg["dst"], size=msg["size"])
        handler = getattr(self, "_on_" + msg["kind"])
        handler(msg, src, dst)
        return [entry]

    def _on_store(self, msg, src, dst):
        shares = msg["body"]
        record = self.records.get(shares[0].secret_id)
        if record is None or record.state is not RecordState.ACTIVE:
            self._log("stale_store", node=dst.node_id)
            return
        need = sum(s.stored_size for s in shares)
        if dst.free_capacity < need:
            self._log("rejected_full", node=dst.node_id, secret=shares[0].secret_id.hex())
            return
        for s in shares:
            dst.stored_shares[(s.secret_id, s.chunk_index)] = s

    def _on_request(self, msg, src, dst):
        rid = msg["body"]
        state = self._retrievals.get(rid)
        if state is None:
            return
        shares = dst.shares_of(state["secret_id"])
        if not shares:
            self._log("missing_share", node=dst.node_id, secret=state["secret_id"].hex())
        self._send(dst.node_id, src.node_id, "response", (rid, shares),
                   sum(s.stored_size for s in shares) or SHARE_OVERHEAD)

    def _on_response(self, msg, src, dst):
        rid, shares = msg["body"]
        state = self._retrievals.get(rid)
        if state is None or src.node_id not in state["outstanding"]:
            return
        state["outstanding"].discard(src.node_id)
        state["responses"][src.node_id] = shares

    def _on_timeout(self, payload):
        kind = payload["kind"]
        if kind == "store_retry":
            old = payload["msg"]
            if old["dst"] in self.nodes and self.nodes[old["src"]].reachable:
                self._send(old["src"], old["dst"], "store", old["body"], old["size"], attempt=2)
            return []
        state = self._retrievals.get(payload["rid"])
        holder = payload["holder"]
        if state is None or holder not in state["outstanding"]:
            return []
        if payload["attempt"] == 1 and self.nodes[state["retriever"]].reachable:
            self._log("retry", node=holder, secret=state["secret_id"].hex())
            self._request(state, holder, attempt=2)
        else:
            state["outstanding"].discard(holder)
            state["unresponsive"].append(holder)
            self._log("unresponsive", node=holder, secret=state["secret_id"].hex())
        return []

    def _request(self, state, holder, attempt=1):
        retriever = self.nodes[state["retriever"]]
        self._send(retriever.node_id, holder, "request", state["rid"], SHARE_OVERHEAD,
                   attempt=attempt)
        rtt = 2 * self.network.base_latency(retriever, self.nodes[holder]) + 2 * self.network.jitter_ms
        self._push(self.clock + self.retry_timeout_ms + rtt, "timeout",
                   {"kind": "request_timeout", "rid": state["rid"], "holder": holder,
                    "attempt": attempt})

    # ------------------------------------------------------------------ faults

    def inject_fault(self, entry):
        node = self._node(entry.node_id)
        action = FaultAction(entry.action)
        if action is FaultAction.CRASH:
            node.reachable = False
            node.crashed = True
            node.epoch += 1
        elif action is FaultAction.UNREACH:
            node.reachable = False
        elif action is FaultAction.CORRUPT:
            node.corrupt = True
        elif action is FaultAction.FILL_CAPACITY:
            if node._capacity_before_fill is None:
                node._capacity_before_fill = node.capacity
            node.capacity = node.used
        elif action is FaultAction.RESTORE:
            node.reachable = True
            node.crashed = False
            node.corrupt = False
            if node._capacity_before_fill is not None:
                node.capacity = node._capacity_before_fill
                node._capacity_before_fill = None
            self._purge_retired(node)
        return self._log("fault", node=node.node_id, action=action.value)

    def _purge_retired(self, node):
        for secret_id in {sid for sid, _ in node.stored_shares}:
            record = self.records.get(secret_id)
            if record is None or record.state is RecordState.RETIRED:
                node.drop_secret(secret_id)
                self._log("purged", node=node.node_id, secret=secret_id.hex())

    def damage_share(self, node_id, secret_id, chunk_index=0):
        """Flip one payload bit in a stored share, leaving its checksum stale."""
        node = self._node(node_id)
        share = node.stored_shares[(secret_id, chunk_index)]
        payload = bytearray(share.payload) or bytearray(b"\x00")
        payload[0] ^= 0x01
        node.stored_shares[(secret_id, chunk_index)] = replace(share, payload=bytes(payload))

    # ------------------------------------------------------------------ store

    def store(self, dealer_id, data, policy, weights=None, strategy=None):
        """Share ``data`` from ``dealer_id``; returns the new secret id.

        Remote shares travel as timed messages; run the clock (``settle`` or
        ``run_until``) to deliver them.
        """
        plan = self._plan_store(dealer_id, data, policy, weights, strategy, self.registry)
        del data
        return self._commit_store(plan)

    def _plan_store(self, dealer_id, data, policy, weights, strategy, registry):
        """Validate and select holders without touching cluster state."""
        dealer = self._node(dealer_id)
        weights = weights or ScoreWeights()
        strategy = strategy or TopN()
        if not dealer.reachable:
            raise DealerUnavailable(f"dealer {dealer_id!r} is unreachable")
        if not dealer.dealer_capable:
            raise DealerUnavailable(f"node {dealer_id!r} cannot act as dealer")
        if dealer.corrupt:
            raise DealerUnavailable(f"dealer {dealer_id!r} is known to be corrupt")

        layout, pieces = chunk(data, self.chunk_size)
        sh_size = sum(len(p) + SHARE_OVERHEAD for p in pieces)
        if dealer.free_capacity < sh_size:
            raise DealerUnavailable(f"dealer {dealer_id!r} lacks capacity for its share")

        candidates = [n.profile() for n in self.nodes.values() if n.node_id != dealer_id]
        scores = score_candidates(candidates, registry, weights, sh_size)
        chosen = select_from_scores(scores, policy.n - 1, strategy)
        return {"dealer": dealer, "policy": policy, "layout": layout, "pieces": pieces,
                "scores": scores, "chosen": chosen}

    def _commit_store(self, plan):
        dealer, policy, layout = plan["dealer"], plan["policy"], plan["layout"]
        dealer_id, chosen = dealer.node_id, plan["chosen"]
        assigned = (dealer_id, *chosen)

        secret_id = self.share_rng.random_bytes(SECRET_ID_LEN)
        bundles = {node_id: [] for node_id in assigned}
        for index, piece in enumerate(plan["pieces"]):
            shares = split(piece, policy, self.share_rng, secret_id=secret_id,
                           chunk_index=index, chunk_size=layout.chunk_size)
            for share in shares:
                bundles[assigned[share.x - 1]].append(share)
        plan["pieces"].clear()

        record = SecretRecord(secret_id, policy, layout, dealer_id, assigned, self.clock)
        self.records[secret_id] = record
        self.registry = register_sharing(self.registry, record)
        self.decisions.append({
            "t": self.clock, "secret": secret_id.hex(), "dealer": dealer_id,
            "scores": {k: ("EXCLUDED" if v is EXCLUDED else round(v, 12))
                       for k, v in sorted(plan["scores"].items())},
            "selected": list(chosen),
        })
        self._log("store", secret=secret_id.hex(), dealer=dealer_id, nodes=list(assigned),
                  chunks=layout.chunk_count)

        for s in bundles[dealer_id]:
            dealer.stored_shares[(s.secret_id, s.chunk_index)] = s
        for node_id in chosen:
            if bundles[node_id]:
                self._send(dealer_id, node_id, "store", bundles[node_id],
                           sum(s.stored_size for s in bundles[node_id]))
        return secret_id

    # --------------------------------------------------------------- retrieve

    def _holders_by_latency(self, retriever, record):
        holders = [h for h in record.assigned_nodes
                   if h != retriever.node_id and self.nodes[h].reachable]
        return sorted(holders, key=lambda h: (
            self.network.base_latency(retriever, self.nodes[h]), h))

    def retrieve(self, retriever_id, secret_id, over_request=0):
        return self.retrieve_detailed(retriever_id, secret_id, over_request).data

    def retrieve_detailed(self, retriever_id, secret_id, over_request=0):
        if over_request < 0:
            raise ValueError("over_request must be >= 0")
        record = self._record(secret_id)
        if record.state is not RecordState.ACTIVE:
            raise UnknownSecret(f"secret {secret_id.hex()} has been retired")
        retriever = self._node(retriever_id)
        if not retriever.reachable:
            raise DealerUnavailable(f"retriever {retriever_id!r} is unreachable")
        k = record.policy.k
        started = self.clock

        remote = self._holders_by_latency(retriever, record)
        local = retriever.shares_of(secret_id) if retriever_id in record.assigned_nodes else []
        reachable_count = len(remote) + (1 if local else 0)
        if reachable_count < k:
            self._log("retrieve_failed", secret=secret_id.hex(), reachable=reachable_count)
            raise InsufficientShares(reachable_count, k)

        valid = {i: {} for i in range(record.layout.chunk_count)}
        failures = 0
        responders = []

        def absorb(node_id, shares):
            nonlocal failures
            got = False
            for s in shares:
                if s.secret_id != secret_id or s.chunk_index not in valid:
                    continue
                if not s.verify() or s.x != record.x_of(node_id):
                    failures += 1
                    self._log("checksum_failure", node=node_id, secret=secret_id.hex(),
                              chunk=s.chunk_index)
                    continue
                valid[s.chunk_index][s.x] = s
                got = True
            if got:
                responders.append(node_id)

        if local:
            absorb(retriever_id, local)

        def short():
            return max((k - len(v) for v in valid.values()), default=0)

        rid = next(self._msg_ids)
        state = {"rid": rid, "secret_id": secret_id, "retriever": retriever_id,
                 "outstanding": set(), "responses": {}, "unresponsive": []}
        self._retrievals[rid] = state
        untried = list(remote)
        rounds = 0
        want = min(short() + over_request, len(untried))
        try:
            while short() > 0 and untried:
                rounds += 1
                batch, untried = untried[:max(want, 1)], untried[max(want, 1):]
                for holder in batch:
                    state["outstanding"].add(holder)
                    self._request(state, holder)
                self._run_while(lambda: bool(state["outstanding"]))
                for holder in batch:
                    if holder in state["responses"]:
                        absorb(holder, state["responses"].pop(holder))
                want = short()
        finally:
            del self._retrievals[rid]

        missing = short()
        if missing > 0:
            have = min((len(v) for v in valid.values()), default=0)
            self._log("retrieve_failed", secret=secret_id.hex(), valid=have)
            raise InsufficientShares(have, k)
        data = b"".join(reconstruct(valid[i].values(), record.policy)
                        for i in range(record.layout.chunk_count))
        self._log("retrieved", secret=secret_id.hex(), retriever=retriever_id,
                  responders=responders, rounds=rounds, checksum_failures=failures)
        return RetrievalReport(data, responders, failures, rounds, started, self.clock)

    # ------------------------------------------------------ audit and repair

    def audit(self, secret_id):
        record = self._record(secret_id)
        reachable = intact = 0
        for node_id in record.assigned_nodes:
            node = self.nodes[node_id]
            if not node.reachable:
                continue
            reachable += 1
            shares = node.shares_of(secret_id)
            if (len(shares) == record.layout.chunk_count
                    and all(s.verify() for s in shares)):
                intact += 1
        return HealthReport(secret_id, record.policy.k, record.policy.n, reachable,
                            reachable - record.policy.k, intact)

    def retire(self, secret_id):
        """Retire a record and delete its shares from every reachable holder."""
        record = self._record(secret_id)
        if record.state is RecordState.RETIRED:
            return record
        self.registry = retire_sharing(self.registry, record)
        record.state = RecordState.RETIRED
        for node_id in record.assigned_nodes:
            node = self.nodes[node_id]
            if node.reachable:
                node.drop_secret(secret_id)
        self._log("retired", secret=secret_id.hex())
        return record

    def repair(self, dealer_id, secret_id, weights=None, strategy=None):
        """Re-share a still-recoverable secret onto a freshly selected node set.

        If no new placement is possible the old record is left untouched.
        """
        record = self._record(secret_id)
        health = self.audit(secret_id)
        if health.margin < 0:
            raise InsufficientShares(health.reachable_holders, record.policy.k)
        data = self.retrieve(dealer_id, secret_id)
        # select against the registry as it will be once the old record is
        # retired, but fail here, before anything is deleted
        after = retire_sharing(self.registry, record)
        plan = self._plan_store(dealer_id, data, record.policy, weights, strategy, after)
        del data
        self.retire(secret_id)
        new_id = self._commit_store(plan)
        self.settle()
        self._log("repaired", old=secret_id.hex(), new=new_id.hex())
        return self.records[new_id]

    # ------------------------------------------------------------ inspection

    def active_records(self):
        return [r for r in self.records.values() if r.state is RecordState.ACTIVE]

    def stored_payload_bytes(self, secret_id):
        return sum(len(s.payload) for node in self.nodes.values()
                   for s in node.shares_of(secret_id))
