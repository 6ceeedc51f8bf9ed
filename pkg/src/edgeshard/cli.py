"""``edgeshard`` command line.

Exit codes: 0 success, 1 I/O failure, 2 usage or schema error, 3 shares from
different secrets, 4 not enough shares.
"""

import sys
from pathlib import Path

import click

from . import bench as benchmod
from .errors import CorruptShare, InsufficientShares, InvalidPolicy, ScenarioError
from .rng import RandomSource
from .scenario import load_scenario, report_json, report_text, run_scenario
from .shares import SharePolicy, decode_shares, encode_shares
from .sss import reconstruct_data, split_data

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_INCONSISTENT = 3
EXIT_INSUFFICIENT = 4


def _fail(message, code):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter("expected a comma-separated list of integers") from None


@click.group()
@click.version_option(package_name="edgeshard")
def main():
    """Threshold secret sharing for edge storage."""


@main.command()
@click.argument("input_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--k", "k", type=int, required=True, help="Reconstruction threshold.")
@click.option("--n", "n", type=int, required=True, help="Number of shares.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              required=True, help="Directory receiving the share files.")
@click.option("--seed", type=int, default=None,
              help="Deterministic randomness (testing only; omit for OS entropy).")
@click.option("--chunk-size", type=click.IntRange(min=1), default=4096, show_default=True)
def share(input_file, k, n, out_dir, seed, chunk_size):
    """Split INPUT_FILE into n share files, any k of which rebuild it."""
    try:
        policy = SharePolicy(k, n)
    except InvalidPolicy as exc:
        raise click.UsageError(str(exc)) from None
    try:
        data = input_file.read_bytes()
    except OSError as exc:
        _fail(f"cannot read {input_file}: {exc.strerror or exc}", EXIT_IO)
    per_holder = split_data(data, policy, RandomSource(seed), chunk_size)
    del data
    secret_id = per_holder[0][0].secret_id.hex()
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for shares in per_holder:
            target = out_dir / f"{input_file.name}.{shares[0].x:03d}.esh"
            target.write_bytes(encode_shares(shares))
    except OSError as exc:
        _fail(f"cannot write shares to {out_dir}: {exc.strerror or exc}", EXIT_IO)
    click.echo(secret_id)


@main.command()
@click.argument("share_files", nargs=-1, required=True,
                type=click.Path(dir_okay=False, path_type=Path))
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              required=True, help="Where to write the rebuilt file.")
def reconstruct(share_files, out_path):
    """Rebuild the original file from SHARE_FILES."""
    shares = []
    for path in share_files:
        try:
            blob = path.read_bytes()
        except OSError as exc:
            _fail(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO)
        try:
            records = decode_shares(blob)
        except CorruptShare as exc:
            click.echo(f"warning: skipping {path}: {exc}", err=True)
            continue
        if not records:
            click.echo(f"warning: skipping {path}: no share records", err=True)
            continue
        shares.extend(records)

    if not shares:
        _fail("no readable shares", EXIT_INSUFFICIENT)
    if len({s.secret_id for s in shares}) > 1:
        _fail("share files belong to different secrets", EXIT_INCONSISTENT)
    if len({s.policy for s in shares}) > 1:
        _fail("share files disagree on (k, n)", EXIT_INCONSISTENT)
    policy = shares[0].policy
    holders = {s.x for s in shares}
    if len(holders) < policy.k:
        _fail(f"insufficient shares: required {policy.k}, provided {len(holders)}",
              EXIT_INSUFFICIENT)
    # the same holder passed twice is harmless; keep one copy per (chunk, x)
    unique = {(s.chunk_index, s.x): s for s in shares}
    try:
        data = reconstruct_data(unique.values(), policy)
    except InsufficientShares as exc:
        _fail(f"insufficient shares: required {exc.required}, provided {exc.available}",
              EXIT_INSUFFICIENT)
    except CorruptShare as exc:
        _fail(str(exc), EXIT_INCONSISTENT)
    try:
        out_path.write_bytes(data)
    except OSError as exc:
        _fail(f"cannot write {out_path}: {exc.strerror or exc}", EXIT_IO)


@main.command()
@click.option("--scenario", "scenario", required=True,
              help="Scenario file, or the name of a bundled scenario (e.g. tolerance.scn).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Write the machine-readable JSON report here.")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON report instead of the table.")
def simulate(scenario, out_path, as_json):
    """Run a scenario in the simulated edge cluster and report the outcome."""
    try:
        config = load_scenario(scenario)
    except FileNotFoundError as exc:
        _fail(str(exc), EXIT_IO)
    except ScenarioError as exc:
        _fail(f"invalid scenario: {exc}", EXIT_USAGE)
    report = run_scenario(config)
    click.echo(report_json(report) if as_json else report_text(report), nl=False)
    if out_path:
        try:
            out_path.write_text(report_json(report))
        except OSError as exc:
            _fail(f"cannot write {out_path}: {exc.strerror or exc}", EXIT_IO)


@main.command()
@click.option("--sizes", callback=_int_list, default="25,32,40,64", show_default=True,
              help="Comma-separated payload sizes in bytes.")
@click.option("--k", "k", type=int, default=3, show_default=True)
@click.option("--n", "n", type=int, default=5, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--latency-ms", type=click.FloatRange(min=0), default=2.0, show_default=True,
              help="One-way link latency between simulated nodes.")
@click.option("--jitter-ms", type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option("--ingress-ms", type=click.FloatRange(min=0), default=0.0, show_default=True,
              help="Configured client-to-edge latency, reported in its own column.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              help="Directory for bench.json (deterministic) and bench_timings.json.")
def bench(sizes, k, n, trials, latency_ms, jitter_ms, ingress_ms, seed, out_dir):
    """Time sharing against plain local storage for several payload sizes."""
    try:
        SharePolicy(k, n)
    except InvalidPolicy as exc:
        raise click.UsageError(str(exc)) from None
    if not sizes or any(s < 0 for s in sizes):
        raise click.UsageError("--sizes needs non-negative integers")
    results, record = benchmod.run_bench(sizes, k, n, trials, latency_ms, jitter_ms,
                                         ingress_ms, seed=seed)
    click.echo(benchmod.bench_table(results), nl=False)
    if out_dir:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            benchmod.dump_json(record, out_dir / "bench.json")
            benchmod.dump_json(benchmod.timings_dict(results), out_dir / "bench_timings.json")
        except OSError as exc:
            _fail(f"cannot write to {out_dir}: {exc.strerror or exc}", EXIT_IO)


def _k_rule(value):
    if value == "half":
        return benchmod.default_k
    if value == "all":
        return lambda n: n
    try:
        fixed = int(value)
    except ValueError:
        raise click.BadParameter("use 'half', 'all', or an integer") from None
    return lambda n: fixed


@main.command()
@click.option("--ns", callback=_int_list, default="2,5,10,20", show_default=True,
              help="Comma-separated share counts.")
@click.option("--k-rule", default="half", show_default=True,
              help="'half' for k=ceil(n/2), 'all' for k=n, or a fixed integer.")
@click.option("--size", type=click.IntRange(min=0), default=1024, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Write the table as JSON here.")
def scaling(ns, k_rule, size, trials, seed, out_path):
    """Split and reconstruct time as the number of shares grows."""
    rule = _k_rule(k_rule)
    try:
        for n in ns:
            SharePolicy(rule(n), n)
    except InvalidPolicy as exc:
        raise click.UsageError(str(exc)) from None
    rows = benchmod.run_scaling(ns, size, trials, rule, seed=seed)
    click.echo(benchmod.scaling_table(rows), nl=False)
    if out_path:
        try:
            benchmod.dump_json(benchmod.scaling_dict(rows), out_path)
        except OSError as exc:
            _fail(f"cannot write {out_path}: {exc.strerror or exc}", EXIT_IO)


if __name__ == "__main__":
    main()
