"""Seeded invariant suite behind ``qukit selftest``.

Each family returns ``(passed, total)``.  Nothing here reads the clock or
the environment, so a fixed seed gives byte-identical output.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

import numpy as np

from .base_change import DomainKind, convert_exact, in_exact_domain, pf_domain_class
from .complexnum import complex_arith, complex_encode, sign_product
from .errors import OutOfDomainError
from .fock import make_state, relation_probability
from .frames import build_field, can_see, iteration_path, winding_number
from .gauge import apply_gauge, random_field, relation_in_gauge
from .numeral import ArithRelation, BasisNumeral, Op, _raw, arith_op, decode_rational, encode_rational, successor_vj
from .sequences import asymptotic_compare, cauchy_report, psiex1, transform_sequence, truncations, alternating

BASES = (2, 3, 10, 16, 30)


def random_numeral(rng: random.Random, k: int, max_len: int = 32) -> BasisNumeral:
    n = rng.randint(1, max_len)
    low = rng.randint(-n + 1, 0) if rng.random() < 0.8 else rng.randint(0, 4)
    return _raw(k, rng.choice((1, -1)), tuple(rng.randrange(k) for _ in range(n)), low)


def digit_value(a: BasisNumeral) -> Fraction:
    """Oracle value from the digits alone, independent of decode_rational."""
    return a.sign * sum((Fraction(a.base) ** j * a.digit_at(j) for j in a.sites()), Fraction(0))


def oracle_result(op: Op, x: Fraction, y: Fraction, k: int, accuracy: int | None) -> Fraction:
    if op is Op.ADD:
        return x + y
    if op is Op.SUB:
        return x - y
    if op is Op.MUL:
        return x * y
    q = abs(x) / abs(y)
    mag = Fraction(q.numerator * k**accuracy // q.denominator, k**accuracy)
    return mag if (x < 0) == (y < 0) else -mag


def check_oracle(rng: random.Random, cases: int) -> tuple[int, int]:
    ok = total = 0
    for k in BASES:
        for _ in range(cases):
            op = rng.choice((Op.ADD, Op.SUB, Op.MUL, Op.DIV))
            a, b = random_numeral(rng, k), random_numeral(rng, k)
            if op is Op.DIV and b.is_zero:
                continue
            acc = rng.randint(0, 12) if op is Op.DIV else None
            r = arith_op(op, a, b, acc)
            total += 1
            ok += digit_value(r) == oracle_result(op, digit_value(a), digit_value(b), k, acc)
    return ok, total


def check_successor(rng: random.Random, cases: int) -> tuple[int, int]:
    ok = 0
    for _ in range(cases):
        k = rng.choice(BASES)
        a = random_numeral(rng, k, 12)
        j = rng.randint(-6, 6)
        x = a
        for _ in range(k):
            x = successor_vj(j, x)
        ok += decode_rational(x) == decode_rational(successor_vj(j + 1, a))
    return ok, cases


def random_superposition(rng: random.Random, nprng: np.random.Generator, k: int, size: int):
    terms = []
    for _ in range(size):
        n = rng.randint(1, 3)
        terms.append((_raw(k, rng.choice((1, -1)), tuple(rng.randrange(k) for _ in range(n)), rng.randint(-1, 0)),
                      complex(*nprng.standard_normal(2))))
    return make_state(terms)


def check_gauge(rng: random.Random, nprng: np.random.Generator, cases: int) -> tuple[int, int]:
    ok = 0
    for i in range(cases):
        k = rng.choice((2, 3))
        a = random_superposition(rng, nprng, k, 3)
        b = random_superposition(rng, nprng, k, 3)
        U = random_field(k, [(j, None) for j in range(-2, 3)], nprng, name=f"u{i}")
        good = True
        for rel in ArithRelation:
            direct = relation_probability(rel, a, b)
            moved = relation_in_gauge(rel, U, apply_gauge(U, a), apply_gauge(U, b))
            good &= abs(direct - moved) <= 1e-10
        ok += good
    return ok, cases


def expansion_terminates(value: Fraction, k: int, digits: int = 64) -> bool:
    """Brute force: long-divide the fraction part for up to ``digits`` places."""
    rem = abs(value.numerator) % value.denominator
    for _ in range(digits):
        if rem == 0:
            return True
        rem = rem * k % value.denominator
    return rem == 0


DOMAIN_PAIRS = {
    (10, 3): DomainKind.DISJOINT,
    (2, 10): DomainKind.SUBSET,
    (10, 2): DomainKind.SUPERSET,
    (6, 10): DomainKind.OVERLAP,
    (6, 12): DomainKind.EQUAL,
}


def check_domain(rng: random.Random, cases: int) -> tuple[int, int]:
    ok = total = 0
    for (k, k2), kind in DOMAIN_PAIRS.items():
        total += 1
        ok += pf_domain_class(k, k2).kind is kind
        for _ in range(cases):
            a = random_numeral(rng, k, 10)
            v = decode_rational(a)
            expect = expansion_terminates(v, k2)
            total += 1
            try:
                back = convert_exact(a, k2)
                good = expect and decode_rational(back) == v
                if kind is DomainKind.EQUAL:
                    good &= decode_rational(convert_exact(back, k)) == v
            except OutOfDomainError:
                good = not expect
            ok += good and in_exact_domain(v, k2) == expect
    return ok, total


def check_monotone(rng: random.Random, cases: int) -> tuple[int, int]:
    ok = 0
    for _ in range(cases):
        k = rng.choice((2, 3, 10))
        kind = rng.randrange(3)
        if kind == 0:
            seq = psiex1(str(rng.randrange(k)), k)
        elif kind == 1:
            seq = truncations(Fraction(rng.randint(-50, 50), rng.randint(1, 30)), k)
        else:
            seq = alternating(encode_rational(0, k), encode_rational(Fraction(rng.randint(1, 5)), k))
        ok += not cauchy_report(seq, 10, 5).defects
    return ok, cases


def check_trichotomy(rng: random.Random, cases: int) -> tuple[int, int]:
    ok = 0
    for _ in range(cases):
        k = rng.choice((2, 3, 10))
        x = Fraction(rng.randint(-40, 40), rng.randint(1, 12))
        y = x if rng.random() < 0.3 else Fraction(rng.randint(-40, 40), rng.randint(1, 12))
        rep = asymptotic_compare(truncations(x, k), truncations(y, k, rate=2), 12, 6)
        want = "EQ" if x == y else ("LT" if x < y else "GT")
        ok += rep.verdict == want
    return ok, cases


_SIGNS = ("+", "-", "+i", "-i")
_UNIT = {"+": 1, "-": -1, "+i": 1j, "-i": -1j}


def check_complex(rng: random.Random, cases: int) -> tuple[int, int]:
    ok = total = 0
    for s1 in _SIGNS:
        for s2 in _SIGNS:
            total += 1
            ok += _UNIT[sign_product(s1, s2)] == _UNIT[s1] * _UNIT[s2]
    for _ in range(cases):
        k = rng.choice((2, 10, 16))
        vals = [Fraction(rng.randint(-99, 99), k ** rng.randint(0, 2)) for _ in range(4)]
        z, w = complex_encode(vals[0], vals[1], k), complex_encode(vals[2], vals[3], k)
        zx, zy, wx, wy = vals
        prod = complex_arith("mul", z, w).value
        total += 1
        ok += prod == (zx * wx - zy * wy, zx * wy + wx * zy)
    return ok, total


def check_frames() -> tuple[int, int]:
    ok = total = 0
    field = build_field("finite", [2, 10], ["g0", "g1"], 3)
    frames = field.frames()
    vis = {(a, b) for a in frames for b in frames if can_see(a, b, field)}
    for a in frames:
        total += 1
        ok += (a, a) not in vis
    for a, b in vis:
        total += 1
        ok += (b, a) not in vis and all((a, c) in vis for b2, c in vis if b2 == b)
    cyc = build_field("cyclic", [2, 10], ["g0", "g1"], 8)
    start = cyc.frames()[0]
    for steps, turns in ((8, 1), (16, 2), (3, 0)):
        total += 1
        ok += winding_number(iteration_path(cyc, start, steps), cyc) == turns
    return ok, total


def check_gauge_cauchy(nprng: np.random.Generator, cases: int) -> tuple[int, int]:
    ok = 0
    for i in range(cases):
        seq = psiex1("1", 2) if i % 2 else alternating(encode_rational(0, 2), encode_rational(1, 2))
        U = random_field(2, [(j, None) for j in range(-4, 2)], nprng, name=f"v{i}")
        a = cauchy_report(seq, 6, 3)
        b = cauchy_report(transform_sequence(seq, gauge=U), 6, 3)
        ok += a.classification == b.classification
    return ok, cases


def run(seed: int = 0, emit: Callable[[str], None] = print) -> bool:
    rng = random.Random(seed)
    nprng = np.random.default_rng(seed)
    families = [
        ("oracle equivalence", lambda: check_oracle(rng, 200)),
        ("successor law", lambda: check_successor(rng, 200)),
        ("gauge covariance", lambda: check_gauge(rng, nprng, 40)),
        ("gauge-conjugated cauchy", lambda: check_gauge_cauchy(nprng, 4)),
        ("domain rules", lambda: check_domain(rng, 40)),
        ("lattice monotonicity", lambda: check_monotone(rng, 10)),
        ("trichotomy", lambda: check_trichotomy(rng, 20)),
        ("complex sign algebra", lambda: check_complex(rng, 100)),
        ("frame visibility", check_frames),
    ]
    all_ok = True
    for name, fn in families:
        ok, total = fn()
        passed = ok == total
        all_ok &= passed
        emit(f"{name:<26} {'PASS' if passed else 'FAIL'} {ok}/{total}")
    emit(f"selftest seed={seed}: {'PASS' if all_ok else 'FAIL'}")
    return all_ok
