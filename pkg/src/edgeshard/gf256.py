"""Arithmetic in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1 (0x11B).

Elements are plain ints in ``range(256)``. Addition and subtraction are both
XOR. Multiplication goes through log/antilog tables built once at import with
generator 0x03.
"""

from .errors import DuplicateShare, InvalidPolynomial, NonInvertible

REDUCTION_POLY = 0x11B
GENERATOR = 0x03


def _build_tables():
    exp = [0] * 510
    log = [0] * 256
    value = 1
    for power in range(255):
        exp[power] = value
        log[value] = power
        # value *= 3  ->  value ^ xtime(value)
        doubled = value << 1
        if doubled & 0x100:
            doubled ^= REDUCTION_POLY
        value ^= doubled
    # second copy lets log[a] + log[b] index without a modulo
    for power in range(255, 510):
        exp[power] = exp[power - 255]
    return exp, log


EXP, LOG = _build_tables()


def gf_add(a, b):
    return a ^ b


def gf_mul(a, b):
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf_inv(a):
    if a == 0:
        raise NonInvertible("0 has no multiplicative inverse in GF(2^8)")
    return EXP[255 - LOG[a]]


def gf_div(a, b):
    return gf_mul(a, gf_inv(b))


def _build_mul_rows():
    rows = [bytes(256)]
    for a in range(1, 256):
        rows.append(bytes(gf_mul(a, b) for b in range(256)))
    return tuple(rows)


# MUL_ROWS[a] is a bytes.translate table mapping every byte b to a*b.
MUL_ROWS = _build_mul_rows()


def poly_eval(coeffs, x):
    """Evaluate a polynomial (constant term first) at ``x`` by Horner's rule."""
    if not coeffs:
        raise InvalidPolynomial("polynomial needs at least one coefficient")
    acc = 0
    for c in reversed(coeffs):
        acc = gf_mul(acc, x) ^ c
    return acc


def lagrange_weights_at_zero(xs):
    """Weights w with sum(w[i] * f(xs[i])) == f(0) for deg f < len(xs).

    w_i = prod_{j != i} x_j / (x_j - x_i); in characteristic 2 the
    difference is an XOR.
    """
    xs = list(xs)
    if not xs:
        raise InvalidPolynomial("need at least one abscissa")
    if len(set(xs)) != len(xs):
        raise DuplicateShare(f"duplicate x-coordinates in {xs}")
    if 0 in xs:
        raise ValueError("x-coordinate 0 would expose the secret")
    weights = []
    for i, xi in enumerate(xs):
        num = 1
        den = 1
        for j, xj in enumerate(xs):
            if j != i:
                num = gf_mul(num, xj)
                den = gf_mul(den, xj ^ xi)
        weights.append(gf_mul(num, gf_inv(den)))
    return weights
