"""Scenario documents: load, validate, run, and report.

A scenario is a JSON document (``*.scn``) describing nodes, a sharing
policy, selection weights and strategy, a fault script, and a timed workload
of store / retrieve / audit / repair actions. The schema ships as
``edgeshard/schema/scenario.schema.json``.
"""

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .cluster import DEFAULT_CHUNK_SIZE, EdgeCluster, FaultEntry, FaultScript, MehNode
from .errors import EdgeShardError, ScenarioError
from .rng import RandomSource
from .selection import ScoreWeights, ThresholdRandom, TopN
from .shares import SharePolicy

DEFAULT_CAPACITY = 1 << 30
DEFAULT_LATENCY_MS = 1.0


def load_schema():
    text = resources.files("edgeshard").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def bundled_scenarios():
    folder = resources.files("edgeshard").joinpath("scenarios")
    return sorted(p.name for p in folder.iterdir() if p.name.endswith(".scn"))


def resolve_scenario_path(name):
    """A filesystem path if it exists, else the bundled scenario of that name."""
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("edgeshard").joinpath("scenarios", path.name)
    if bundled.is_file():
        return bundled
    raise FileNotFoundError(f"no scenario file {name!r}")


@dataclass
class ScenarioConfig:
    seed: int
    policy: SharePolicy
    nodes: list
    workload: list
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    strategy: dict = field(default_factory=lambda: {"type": "top_n"})
    network: dict = field(default_factory=dict)
    faults: FaultScript = field(default_factory=FaultScript)
    chunk_size: int = DEFAULT_CHUNK_SIZE
    name: str = ""


def _field_path(error):
    parts = [str(p) for p in error.absolute_path]
    if error.validator == "required":
        missing = error.message.split("'")[1]
        parts.append(missing)
    elif error.validator == "additionalProperties":
        parts.append(error.message.split("'")[1])
    return ".".join(parts) or "<root>"


def parse_scenario(doc):
    """Validate a decoded scenario document and build a :class:`ScenarioConfig`."""
    validator = jsonschema.Draft202012Validator(load_schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        raise ScenarioError(_field_path(err), err.message)

    try:
        policy = SharePolicy(doc["policy"]["k"], doc["policy"]["n"])
    except ValueError as exc:
        raise ScenarioError("policy", str(exc)) from exc
    try:
        weights = ScoreWeights(**doc.get("weights", {}))
    except ValueError as exc:
        raise ScenarioError("weights", str(exc)) from exc

    ids = [n["id"] for n in doc["nodes"]]
    if len(set(ids)) != len(ids):
        raise ScenarioError("nodes", "node ids must be unique")
    known = set(ids)

    faults = FaultScript()
    for i, f in enumerate(doc.get("faults", [])):
        if f["node"] not in known:
            raise ScenarioError(f"faults.{i}.node", f"unknown node {f['node']!r}")
        try:
            faults.append(FaultEntry(f["at"], f["node"], f["action"]))
        except ValueError as exc:
            raise ScenarioError(f"faults.{i}.at", str(exc)) from exc

    stored = set()
    last = 0
    for i, w in enumerate(doc["workload"]):
        if w["at"] < last:
            raise ScenarioError(f"workload.{i}.at", "workload times must be non-decreasing")
        last = w["at"]
        if "node" in w and w["node"] not in known:
            raise ScenarioError(f"workload.{i}.node", f"unknown node {w['node']!r}")
        if w["op"] == "store":
            if sum(key in w for key in ("text", "hex", "random_bytes")) != 1:
                raise ScenarioError(f"workload.{i}",
                                    "store needs exactly one of text, hex, random_bytes")
            if "policy" in w:
                try:
                    SharePolicy(w["policy"]["k"], w["policy"]["n"])
                except ValueError as exc:
                    raise ScenarioError(f"workload.{i}.policy", str(exc)) from exc
            stored.add(w["secret"])
        elif w["secret"] not in stored:
            raise ScenarioError(f"workload.{i}.secret",
                                f"secret {w['secret']!r} used before it is stored")

    for i, link in enumerate(doc.get("network", {}).get("links", [])):
        for end in ("src", "dst"):
            if link[end] not in known:
                raise ScenarioError(f"network.links.{i}.{end}", f"unknown node {link[end]!r}")

    return ScenarioConfig(
        seed=doc["seed"], policy=policy, nodes=doc["nodes"], workload=doc["workload"],
        weights=weights, strategy=doc.get("strategy", {"type": "top_n"}),
        network=doc.get("network", {}), faults=faults,
        chunk_size=doc.get("chunk_size", DEFAULT_CHUNK_SIZE), name=doc.get("name", ""),
    )


def load_scenario(path):
    path = resolve_scenario_path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("<document>", f"not valid JSON: {exc}") from exc
    return parse_scenario(doc)


def build_cluster(config):
    nodes = []
    for entry in config.nodes:
        latency = entry.get("latency_ms", DEFAULT_LATENCY_MS)
        # raw capability: compute power discounted by access-link latency
        capability = entry.get("capability", 1.0) / (1.0 + latency)
        nodes.append(MehNode(
            entry["id"], entry.get("capacity", DEFAULT_CAPACITY),
            attack_risk=entry.get("attack_risk", 0.1), capability_raw=capability,
            link_latency=latency, dealer_capable=entry.get("dealer", True),
        ))
    net = config.network
    links = {(l["src"], l["dst"]): l["latency_ms"] for l in net.get("links", [])}
    return EdgeCluster(
        nodes, seed=config.seed, loss_probability=net.get("loss_probability", 0.0),
        bandwidth_mbps=net.get("bandwidth_mbps", 1000.0), jitter_ms=net.get("jitter_ms", 0.0),
        links=links, retry_timeout_ms=net.get("retry_timeout_ms", 50.0),
        chunk_size=config.chunk_size,
    )


def _strategy(config, cluster):
    if config.strategy["type"] == "threshold_random":
        return ThresholdRandom(config.strategy["threshold"], cluster.select_rng)
    return TopN()


def _payload(action, data_rng):
    if "text" in action:
        return action["text"].encode("utf-8")
    if "hex" in action:
        return bytes.fromhex(action["hex"])
    return data_rng.random_bytes(action["random_bytes"])


def _error(exc):
    out = {"ok": False, "error": type(exc).__name__, "message": str(exc)}
    for attr in ("available", "required", "eligible", "requested"):
        if hasattr(exc, attr):
            out[attr] = getattr(exc, attr)
    return out


def run_scenario(config):
    """Execute a scenario and return its report as a JSON-ready dict."""
    cluster = build_cluster(config)
    cluster.schedule_faults(config.faults)
    strategy = _strategy(config, cluster)
    data_rng = RandomSource(config.seed).spawn()
    default_dealer = next((n["id"] for n in config.nodes if n.get("dealer", True)),
                          config.nodes[0]["id"])

    handles = {}   # scenario name -> current secret id
    digests = {}   # scenario name -> sha256 of what the client stored
    outcomes = []
    for action in config.workload:
        cluster.run_until(max(action["at"], cluster.clock))
        op, name = action["op"], action["secret"]
        outcome = {"at": action["at"], "t": round(cluster.clock, 9), "op": op, "secret": name}
        try:
            if op == "store":
                data = _payload(action, data_rng)
                policy = (SharePolicy(**action["policy"]) if "policy" in action
                          else config.policy)
                node = action.get("node", default_dealer)
                sid = cluster.store(node, data, policy, config.weights, strategy)
                handles[name] = sid
                digests[name] = hashlib.sha256(data).hexdigest()
                del data
                record = cluster.records[sid]
                outcome.update(ok=True, node=node, secret_id=sid.hex(), bytes=record.layout.total_length,
                               k=policy.k, n=policy.n, assigned=list(record.assigned_nodes))
            elif op == "retrieve":
                sid = handles[name]
                node = action.get("node", cluster.records[sid].dealer)
                rep = cluster.retrieve_detailed(node, sid, action.get("over_request", 0))
                outcome.update(
                    ok=True, node=node,
                    matches=hashlib.sha256(rep.data).hexdigest() == digests[name],
                    responders=rep.responders, rounds=rep.rounds,
                    checksum_failures=rep.checksum_failures,
                    elapsed_ms=round(rep.elapsed, 9),
                )
            elif op == "audit":
                outcome.update(ok=True, **_audit_fields(cluster.audit(handles[name])))
            elif op == "repair":
                sid = handles[name]
                node = action.get("node", cluster.records[sid].dealer)
                record = cluster.repair(node, sid, config.weights, strategy)
                handles[name] = record.secret_id
                outcome.update(ok=True, node=node, secret_id=record.secret_id.hex(),
                               assigned=list(record.assigned_nodes),
                               **_audit_fields(cluster.audit(record.secret_id)))
        except EdgeShardError as exc:
            outcome.update(_error(exc))
        outcomes.append(outcome)

    cluster.settle()
    final_audits = {name: _audit_fields(cluster.audit(sid)) for name, sid in sorted(handles.items())}
    trace_blob = json.dumps(cluster.trace, sort_keys=True).encode()
    return {
        "scenario": config.name,
        "seed": config.seed,
        "policy": {"k": config.policy.k, "n": config.policy.n},
        "actions": outcomes,
        "final_audits": final_audits,
        "registry": cluster.registry.as_dict(),
        "selection_decisions": cluster.decisions,
        "trace": {"events": len(cluster.trace),
                  "sha256": hashlib.sha256(trace_blob).hexdigest()},
        "clock_ms": round(cluster.clock, 9),
    }


def _audit_fields(health):
    return {"reachable_holders": health.reachable_holders, "margin": health.margin,
            "intact_checksums": health.intact_checksums}


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_text(report):
    lines = [f"scenario {report['scenario'] or '<unnamed>'}  seed={report['seed']}  "
             f"k={report['policy']['k']} n={report['policy']['n']}", ""]
    header = f"{'t(ms)':>10}  {'op':<8} {'secret':<10} {'result':<20} detail"
    lines += [header, "-" * len(header)]
    for a in report["actions"]:
        if a["ok"]:
            result = "ok"
            if a["op"] == "retrieve":
                result = "ok (match)" if a["matches"] else "ok (MISMATCH)"
                detail = f"from {','.join(a['responders'])} rounds={a['rounds']}"
            elif a["op"] in ("audit", "repair"):
                detail = (f"holders={a['reachable_holders']} margin={a['margin']} "
                          f"intact={a['intact_checksums']}")
            else:
                detail = f"{a['bytes']}B -> {','.join(a['assigned'])}"
        else:
            result = a["error"]
            detail = a["message"]
        lines.append(f"{a['t']:>10.3f}  {a['op']:<8} {a['secret']:<10} {result:<20} {detail}")
    lines += ["", "final audits:"]
    for name, h in report["final_audits"].items():
        lines.append(f"  {name:<10} holders={h['reachable_holders']} margin={h['margin']} "
                     f"intact={h['intact_checksums']}")
    lines += ["", "active shares per node:"]
    for node, count in report["registry"]["active_share_count"].items():
        lines.append(f"  {node:<10} {count}")
    lines += ["", "selection decisions:"]
    for d in report["selection_decisions"]:
        scored = " ".join(f"{k}={v if isinstance(v, str) else f'{v:.4f}'}"
                          for k, v in d["scores"].items())
        lines.append(f"  t={d['t']:.3f} dealer={d['dealer']} chose {','.join(d['selected'])}"
                     f"  [{scored}]")
    lines.append("")
    lines.append(f"trace: {report['trace']['events']} events sha256={report['trace']['sha256'][:16]}")
    return "\n".join(lines) + "\n"
