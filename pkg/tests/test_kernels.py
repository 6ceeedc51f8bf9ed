import json
import os
import subprocess
import sys
import zlib
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeshard import _kernels_py, kernels
from edgeshard.gf256 import gf_mul, poly_eval

BACKENDS = kernels.available_backends()


def test_a_backend_is_selected():
    assert kernels.BACKEND in BACKENDS
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_split_matches_scalar_evaluation(name):
    impl = BACKENDS[name]
    secret = bytes(range(40))
    coeffs = bytes((7 * i + 3) & 0xFF for i in range(80))  # degree 2
    out = impl.split_payloads(secret, coeffs, [1, 2, 200])
    for x, payload in zip([1, 2, 200], out):
        want = bytes(poly_eval([secret[p], coeffs[p], coeffs[40 + p]], x) for p in range(40))
        assert payload == want


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_interpolate_is_weighted_xor(name):
    impl = BACKENDS[name]
    a, b = bytes([1, 2, 3]), bytes([250, 9, 0])
    got = impl.interpolate_at_zero([a, b], [3, 0x8D])
    assert got == bytes(gf_mul(3, p) ^ gf_mul(0x8D, q) for p, q in zip(a, b))
    assert impl.interpolate_at_zero([], []) == b""


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_share_crcs_match_zlib(name):
    impl = BACKENDS[name]
    got = impl.share_crcs(b"head", b"tail", [1, 9], [b"abc", b""])
    assert got == [zlib.crc32(b"head\x01tailabc"), zlib.crc32(b"head\x09tail")]


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
@settings(max_examples=200)
@given(st.binary(max_size=300), st.integers(0, 4), st.lists(st.integers(1, 255), min_size=1,
       max_size=10, unique=True), st.randoms(use_true_random=False))
def test_backends_agree(secret, degree, xs, rnd):
    coeffs = rnd.randbytes(degree * len(secret))
    fast, slow = BACKENDS["cython"], BACKENDS["python"]
    shares = fast.split_payloads(secret, coeffs, xs)
    assert shares == slow.split_payloads(secret, coeffs, xs)
    weights = [rnd.randrange(256) for _ in xs]
    assert fast.interpolate_at_zero(shares, weights) == slow.interpolate_at_zero(shares, weights)
    assert fast.share_crcs(b"p", b"s", xs, shares) == slow.share_crcs(b"p", b"s", xs, shares)


def test_python_fallback_is_importable_alone():
    assert _kernels_py.split_payloads(b"", b"", [1, 2]) == [b"", b""]


def test_environment_forces_fallback():
    env = dict(os.environ, EDGESHARD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import edgeshard; print(edgeshard.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_kernel_benchmark_script_runs(tmp_path):
    script = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    out = tmp_path / "k.json"
    subprocess.run([sys.executable, str(script), "--sizes", "16", "--repeat", "1",
                    "--json", str(out)], check=True, capture_output=True)
    rows = json.loads(out.read_text())["rows"]
    assert rows[0]["size"] == 16 and set(BACKENDS) <= set(rows[0])
