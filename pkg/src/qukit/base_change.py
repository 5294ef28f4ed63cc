"""Base-changing operators and their prime-factor domains.

Exact conversion preserves the represented rational and is defined only
when the value's denominator primes all divide the target base.  The
accuracy-ℓ variant truncates toward zero and is defined everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import prod

import numpy as np

from .errors import OutOfDomainError
from .fock import FockState, Key, _build
from .gauge import GaugeField, apply_gauge, first_primes, prime_factorize
from .numeral import BasisNumeral, _from_le, _raw, decode_rational, encode_rational


class DomainKind(Enum):
    DISJOINT = "disjoint"
    SUBSET = "subset"
    SUPERSET = "superset"
    OVERLAP = "overlap"
    EQUAL = "equal"


@dataclass(frozen=True)
class DomainClass:
    kind: DomainKind
    pf_source: frozenset[int]
    pf_target: frozenset[int]


def prime_support(k: int) -> frozenset[int]:
    return frozenset(p for p, _ in prime_factorize(k))


def pf_domain_class(k: int, k_target: int) -> DomainClass:
    a, b = prime_support(k), prime_support(k_target)
    if a == b:
        kind = DomainKind.EQUAL
    elif not a & b:
        kind = DomainKind.DISJOINT
    elif a < b:
        kind = DomainKind.SUBSET
    elif a > b:
        kind = DomainKind.SUPERSET
    else:
        kind = DomainKind.OVERLAP
    return DomainClass(kind, a, b)


def in_exact_domain(value, k_target: int) -> bool:
    """True when ``value`` has a terminating base-``k_target`` expansion."""
    q = Fraction(value).denominator
    if q == 1:
        return True
    return {p for p, _ in prime_factorize(q)} <= prime_support(k_target)


def convert_exact(a: BasisNumeral, k_target: int) -> BasisNumeral:
    v = decode_rational(a)
    if not in_exact_domain(v, k_target):
        raise OutOfDomainError(v, k_target)
    return encode_rational(v, k_target).with_label(a.h)


def convert_approx(a: BasisNumeral, k_target: int, accuracy: int) -> BasisNumeral:
    """Magnitude truncated to ``accuracy`` base-``k_target`` fraction digits."""
    if accuracy < 0:
        raise ValueError("accuracy must be nonnegative")
    v = decode_rational(a)
    mag = abs(v.numerator) * k_target**accuracy // v.denominator
    le = []
    while mag:
        mag, d = divmod(mag, k_target)
        le.append(d)
    return _from_le(k_target, -1 if v < 0 else 1, le or [0], -accuracy, a.h)


def smallest_same_pf(k: int) -> int:
    """Smallest base with the same prime support (the radical of k)."""
    return prod(p for p, _ in prime_factorize(k))


def primorial(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return prod(first_primes(n))


def convert_state(psi: FockState, k_target: int, accuracy: int | None = None) -> FockState:
    """Linear extension of the base change to a superposition.

    Padding variants of one number land on the same target numeral, so
    their amplitudes are summed and the result renormalized.
    """
    out: dict[Key, complex] = {}
    for key, c in psi.items():
        if accuracy is None:
            conv = tuple(convert_exact(a, k_target) for a in key)
        else:
            conv = tuple(convert_approx(a, k_target, accuracy) for a in key)
        out[conv] = out.get(conv, 0j) + c
    return _build(k_target, psi.arity, out, normalize=True)


def convert_with_gauges(
    U_target: GaugeField,
    psi: FockState,
    U_source: GaugeField,
    accuracy: int | None = None,
) -> FockState:
    """``U' W U†``: pull back to the reference basis, change base, push forward."""
    pulled = apply_gauge(U_source.inverse(), psi)
    return apply_gauge(U_target, convert_state(pulled, U_target.base, accuracy))


# ---------------------------------------------------------------------------
# k' = k**n: digit regrouping keeps the string structure


def regroup_digits(a: BasisNumeral, n: int) -> BasisNumeral:
    """Base k string to base k**n by grouping n sites per block.

    The interval is widened with zeros to whole blocks; nothing is
    stripped, so padding survives.
    """
    k = a.base
    lo_block = a.low // n
    hi_block = a.high // n
    digits = []
    for J in range(hi_block, lo_block - 1, -1):
        d = 0
        for i in range(n - 1, -1, -1):
            d = d * k + a.digit_at(n * J + i)
        digits.append(d)
    return _raw(k**n, a.sign, tuple(digits), lo_block, a.h)


def regroup_state(psi: FockState, n: int) -> FockState:
    out = {tuple(regroup_digits(a, n) for a in key): c for key, c in psi.items()}
    return _build(psi.base**n, psi.arity, out, normalize=False)


def induced_block_gauge(U: GaugeField, n: int) -> GaugeField:
    """Base k**n field whose block matrix is the Kronecker product of its sites."""
    eye = np.eye(U.base, dtype=complex)
    keys = {(j // n, h) for j, h in U.sites}
    sites = {}
    for J, h in keys:
        mats = []
        for i in range(n - 1, -1, -1):
            pos = n * J + i
            m = U.matrix_at(pos, h) if h is not None else U.sites.get((pos, None))
            mats.append(eye if m is None else m)
        block = mats[0]
        for m in mats[1:]:
            block = np.kron(block, m)
        sites[(J, h)] = block
    return GaugeField(U.base**n, f"{U.name}^[{n}]", sites)
