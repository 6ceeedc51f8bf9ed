"""Compare the compiled and pure-Python GF(2^8) kernels.

    python benchmarks/bench_kernels.py [--sizes 64,4096,65536] [--k 3 --n 5] [--json out.json]

Each cell is the best of ``--repeat`` timeit runs, reported per call.
"""

import argparse
import json
import random
import sys
import timeit

from edgeshard.gf256 import lagrange_weights_at_zero
from edgeshard.kernels import available_backends


def measure(fn, number, repeat):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_backend(impl, size, k, n, repeat):
    gen = random.Random(size)
    secret = gen.randbytes(size)
    coeffs = gen.randbytes((k - 1) * size)
    xs = list(range(1, n + 1))
    payloads = impl.split_payloads(secret, coeffs, xs)
    weights = lagrange_weights_at_zero(xs[:k])
    number = max(1, 200_000 // (size + 64))
    return {
        "split": measure(lambda: impl.split_payloads(secret, coeffs, xs), number, repeat),
        "interpolate": measure(lambda: impl.interpolate_at_zero(payloads[:k], weights),
                               number, repeat),
        "crc": measure(lambda: impl.share_crcs(b"p" * 24, b"s" * 16, xs, payloads),
                       number, repeat),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="64,4096,65536")
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--n", type=int, default=5)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", dest="json_path")
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = available_backends()
    if "cython" not in backends:
        print("note: compiled kernels not built; only the fallback is timed", file=sys.stderr)

    rows = []
    for size in sizes:
        timings = {name: bench_backend(impl, size, args.k, args.n, args.repeat)
                   for name, impl in sorted(backends.items())}
        rows.append({"size": size, **timings})

    ops = ("split", "interpolate", "crc")
    header = f"{'size':>8} {'op':<12}" + "".join(f"{name + ' (us)':>16}" for name in sorted(backends))
    if "cython" in backends:
        header += f"{'speedup':>10}"
    print(header)
    for row in rows:
        for op in ops:
            line = f"{row['size']:>8} {op:<12}"
            line += "".join(f"{row[name][op] * 1e6:>16.2f}" for name in sorted(backends))
            if "cython" in backends:
                line += f"{row['python'][op] / row['cython'][op]:>9.1f}x"
            print(line)

    if args.json_path:
        with open(args.json_path, "w") as fh:
            json.dump({"k": args.k, "n": args.n, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
