"""Signed base-k digit strings and the arithmetic defined directly on them.

A numeral ``|γ,0,h,s⟩`` is a string of base-k digits over an integer
interval ``[l, u]`` with ``l <= 0 <= u``.  The sign sits at site 0 and
doubles as the radix point, so ``10:012-7100`` is -12.71 and ``10:612+``
is 612.  Leading and trailing zeros are allowed and make a *different*
state that is arithmetically equal to the stripped one.

All arithmetic here works digit by digit (schoolbook carries, borrows and
long division).  :func:`decode_rational` is the only place that turns a
numeral into a :class:`fractions.Fraction`; tests use it as the oracle.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd

from .errors import BaseMismatchError, DivisionByZeroError, NonTerminatingError, ParseError

_labels = itertools.count(1)


def fresh_label() -> int:
    """Next string label ``h``.  Labels are only ever compared for distinctness."""
    return next(_labels)


@dataclass(frozen=True)
class BasisNumeral:
    """One basis state of a finite qukit string.

    ``digits`` runs from the most significant site ``u`` down to ``low``.
    The label ``h`` is carried along but takes no part in equality or
    hashing: two numerals are the same Hilbert-space vector when base,
    sign and digit map agree.
    """

    base: int
    sign: int
    digits: tuple[int, ...]
    low: int
    h: int = field(default_factory=fresh_label, compare=False, repr=False)

    def __post_init__(self):
        if self.base < 2:
            raise ParseError(f"base must be >= 2, got {self.base}")
        if self.sign not in (1, -1):
            raise ParseError(f"sign must be +1 or -1, got {self.sign}")
        if not self.digits:
            raise ParseError("empty digit string")
        if self.low > 0 or self.low + len(self.digits) - 1 < 0:
            raise ParseError("digit interval must contain site 0")
        for d in self.digits:
            if not 0 <= d < self.base:
                raise ParseError(f"digit {d} out of range for base {self.base}")

    @property
    def high(self) -> int:
        return self.low + len(self.digits) - 1

    @property
    def is_zero(self) -> bool:
        return not any(self.digits)

    def digit_at(self, j: int) -> int:
        """Digit at site ``j``; zero outside the stored interval."""
        if j < self.low or j > self.high:
            return 0
        return self.digits[self.high - j]

    def sites(self) -> range:
        return range(self.high, self.low - 1, -1)

    def with_label(self, h: int) -> BasisNumeral:
        return _raw(self.base, self.sign, self.digits, self.low, h)

    def with_digits(self, digits: tuple[int, ...]) -> BasisNumeral:
        """Same sign, interval and label with a new digit string (no validation)."""
        return _raw(self.base, self.sign, digits, self.low, self.h)

    @property
    def value(self) -> Fraction:
        return decode_rational(self)

    def __str__(self) -> str:
        return format_numeral(self)


def _raw(base, sign, digits, low, h=None) -> BasisNumeral:
    # trusted constructor for internal results; skips validation
    obj = object.__new__(BasisNumeral)
    object.__setattr__(obj, "base", base)
    object.__setattr__(obj, "sign", sign)
    object.__setattr__(obj, "digits", digits)
    object.__setattr__(obj, "low", low)
    object.__setattr__(obj, "h", fresh_label() if h is None else h)
    return obj


# ---------------------------------------------------------------------------
# text format  <k>:<int-digits><sign><frac-digits>

_NUMERAL_RE = re.compile(r"^\s*(\d+):([0-9,]+)([+-])([0-9,]*)\s*$")


def _split_digits(part: str, base: int) -> list[int]:
    if not part:
        return []
    if base > 10 or "," in part:
        pieces = part.split(",")
        if any(p == "" for p in pieces):
            raise ParseError(f"empty digit in {part!r}")
        return [int(p) for p in pieces]
    return [int(c) for c in part]


def parse_numeral(text: str, h: int | None = None) -> BasisNumeral:
    """Parse ``"10:012-7100"``-style text.  Padding zeros are kept."""
    m = _NUMERAL_RE.match(text)
    if not m:
        raise ParseError(f"malformed numeral {text!r}")
    base = int(m.group(1))
    if base < 2:
        raise ParseError(f"base must be >= 2 in {text!r}")
    int_digits = _split_digits(m.group(2), base)
    frac_digits = _split_digits(m.group(4), base)
    if not int_digits:
        raise ParseError(f"missing integer digits in {text!r}")
    sign = 1 if m.group(3) == "+" else -1
    kwargs = {} if h is None else {"h": h}
    return BasisNumeral(base, sign, tuple(int_digits + frac_digits), -len(frac_digits), **kwargs)


def format_numeral(a: BasisNumeral) -> str:
    sep = "" if a.base <= 10 else ","
    n_int = a.high + 1
    int_part = sep.join(map(str, a.digits[:n_int]))
    frac_part = sep.join(map(str, a.digits[n_int:]))
    return f"{a.base}:{int_part}{'+' if a.sign > 0 else '-'}{frac_part}"


def as_numeral(x) -> BasisNumeral:
    return x if isinstance(x, BasisNumeral) else parse_numeral(x)


# ---------------------------------------------------------------------------
# little-endian magnitude helpers; index i holds the digit at site low + i


def _le(a: BasisNumeral) -> list[int]:
    return list(reversed(a.digits))


def _from_le(base: int, sign: int, le: list[int], low: int, h=None) -> BasisNumeral:
    """Build the canonical numeral for ``sign * Σ le[i] k^(low+i)``."""
    if low > 0:
        le = [0] * low + le
        low = 0
    top = low + len(le) - 1
    if top < 0:
        le = le + [0] * (-top)
    zero_at = -low
    hi = len(le) - 1
    while hi > zero_at and le[hi] == 0:
        hi -= 1
    lo = 0
    while lo < zero_at and le[lo] == 0:
        lo += 1
    digits = tuple(reversed(le[lo:hi + 1]))
    if len(digits) == 1 and digits[0] == 0:
        sign = 1
    return _raw(base, sign, digits, low + lo, h)


def _align(a: BasisNumeral, b: BasisNumeral):
    lo = a.low if a.low < b.low else b.low
    x = [0] * (a.low - lo) + _le(a)
    y = [0] * (b.low - lo) + _le(b)
    return x, y, lo


def _add_le(x, y, k):
    if len(x) < len(y):
        x, y = y, x
    ny = len(y)
    out = []
    carry = 0
    for i in range(len(x)):
        s = x[i] + (y[i] if i < ny else 0) + carry
        if s >= k:
            out.append(s - k)
            carry = 1
        else:
            out.append(s)
            carry = 0
    if carry:
        out.append(1)
    return out


def _sub_le(x, y, k):
    # requires value(x) >= value(y)
    ny = len(y)
    out = []
    borrow = 0
    for i in range(len(x)):
        s = x[i] - (y[i] if i < ny else 0) - borrow
        if s < 0:
            out.append(s + k)
            borrow = 1
        else:
            out.append(s)
            borrow = 0
    return out


def _cmp_le(x, y) -> int:
    i = len(x) - 1
    while i >= 0 and x[i] == 0:
        i -= 1
    j = len(y) - 1
    while j >= 0 and y[j] == 0:
        j -= 1
    if i != j:
        return -1 if i < j else 1
    while i >= 0:
        if x[i] != y[i]:
            return -1 if x[i] < y[i] else 1
        i -= 1
    return 0


def _mul_le(x, y, k):
    out = [0] * (len(x) + len(y))
    for i, xi in enumerate(x):
        if xi == 0:
            continue
        carry = 0
        pos = i
        for yj in y:
            t = out[pos] + xi * yj + carry
            carry, out[pos] = divmod(t, k)
            pos += 1
        while carry:
            t = out[pos] + carry
            carry, out[pos] = divmod(t, k)
            pos += 1
    return out


def _strip_top(x):
    n = len(x)
    while n > 1 and x[n - 1] == 0:
        n -= 1
    return x[:n]


def _floor_div_le(num, den, k):
    """Long division of integer magnitudes; returns floor(num / den) little-endian.

    Each quotient digit is found by binary search over the table of
    multiples ``q * den`` for ``q < k``.
    """
    den = _strip_top(den)
    multiples = [[0]]
    for _ in range(1, k):
        multiples.append(_strip_top(_add_le(multiples[-1], den, k)))
    quotient = []
    rem = [0]
    for d in reversed(num):
        rem = _strip_top([d] + rem)
        lo, hi = 0, k - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if _cmp_le(multiples[mid], rem) <= 0:
                lo = mid
            else:
                hi = mid - 1
        if lo:
            rem = _strip_top(_sub_le(rem, multiples[lo], k))
        quotient.append(lo)
    quotient.reverse()
    return quotient or [0]


def _check_base(a: BasisNumeral, b: BasisNumeral):
    if a.base != b.base:
        raise BaseMismatchError(a.base, b.base)


# ---------------------------------------------------------------------------
# relations


class ArithRelation(Enum):
    EQ_A = "eq"
    LT_A = "lt"
    GT_A = "gt"


def canonicalize(a: BasisNumeral) -> BasisNumeral:
    """Strip padding zeros; zero becomes ``k:0+``.  Keeps the label."""
    return _from_le(a.base, a.sign, _le(a), a.low, a.h)


def _compare(a: BasisNumeral, b: BasisNumeral) -> int:
    _check_base(a, b)
    x, y, _ = _align(a, b)
    a_neg = a.sign < 0 and any(x)
    b_neg = b.sign < 0 and any(y)
    if a_neg != b_neg:
        return -1 if a_neg else 1
    c = _cmp_le(x, y)
    return -c if a_neg else c


def arith_equal(a: BasisNumeral, b: BasisNumeral) -> bool:
    return _compare(a, b) == 0


def arith_less(a: BasisNumeral, b: BasisNumeral) -> bool:
    """Value order: zero below every positive, and a sign flip reverses order."""
    return _compare(a, b) < 0


def relate(a: BasisNumeral, b: BasisNumeral) -> ArithRelation:
    c = _compare(a, b)
    if c == 0:
        return ArithRelation.EQ_A
    return ArithRelation.LT_A if c < 0 else ArithRelation.GT_A


# ---------------------------------------------------------------------------
# operations


class Op(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    ABS = "abs"
    SUCC = "succ"


def _signed_add(a: BasisNumeral, b: BasisNumeral, b_sign: int) -> BasisNumeral:
    k = a.base
    x, y, lo = _align(a, b)
    if a.sign == b_sign:
        return _from_le(k, a.sign, _add_le(x, y, k), lo)
    if _cmp_le(x, y) >= 0:
        return _from_le(k, a.sign, _sub_le(x, y, k), lo)
    return _from_le(k, b_sign, _sub_le(y, x, k), lo)


def arith_add(a: BasisNumeral, b: BasisNumeral) -> BasisNumeral:
    _check_base(a, b)
    return _signed_add(a, b, b.sign)


def arith_sub(a: BasisNumeral, b: BasisNumeral) -> BasisNumeral:
    _check_base(a, b)
    return _signed_add(a, b, -b.sign)


def arith_mul(a: BasisNumeral, b: BasisNumeral) -> BasisNumeral:
    _check_base(a, b)
    return _from_le(a.base, a.sign * b.sign, _mul_le(_le(a), _le(b), a.base), a.low + b.low)


def arith_div(a: BasisNumeral, b: BasisNumeral, accuracy: int) -> BasisNumeral:
    """Quotient magnitude truncated to ``accuracy`` fraction digits."""
    _check_base(a, b)
    if accuracy < 0:
        raise ValueError("accuracy must be nonnegative")
    if b.is_zero:
        raise DivisionByZeroError(f"division of {a} by zero")
    k = a.base
    e = a.low - b.low + accuracy
    if e >= 0:
        num, den = [0] * e + _le(a), _le(b)
    else:
        num, den = _le(a), [0] * (-e) + _le(b)
    q = _floor_div_le(num, den, k)
    return _from_le(k, a.sign * b.sign, q, -accuracy)


def arith_abs(a: BasisNumeral) -> BasisNumeral:
    """Same digits and interval, sign +."""
    return _raw(a.base, 1, a.digits, a.low)


def power_numeral(base: int, j: int) -> BasisNumeral:
    """The numeral ``|+,j⟩`` for k**j (``|+,-ℓ⟩`` is k**-ℓ)."""
    if j >= 0:
        return _raw(base, 1, (1,) + (0,) * j, 0)
    return _raw(base, 1, (0,) * (-j) + (1,), j)


def successor_vj(j: int, a: BasisNumeral) -> BasisNumeral:
    """Add k**j with carry propagation."""
    return _signed_add(a, power_numeral(a.base, j), 1)


def arith_op(kind, a: BasisNumeral, b: BasisNumeral, accuracy: int | None = None) -> BasisNumeral:
    """Result string of a binary operation; inputs are left untouched."""
    kind = Op(kind)
    if kind is Op.ADD:
        return arith_add(a, b)
    if kind is Op.SUB:
        return arith_sub(a, b)
    if kind is Op.MUL:
        return arith_mul(a, b)
    if kind is Op.DIV:
        if accuracy is None:
            raise ValueError("DIV needs an accuracy")
        return arith_div(a, b, accuracy)
    raise ValueError(f"{kind.value} is not a binary operation")


# ---------------------------------------------------------------------------
# rational bridge


def encode_rational(value, base: int) -> BasisNumeral:
    """Exact base-k numeral for ``value``; raises if the expansion never ends."""
    v = Fraction(value)
    q = v.denominator
    e = 0
    while q != 1:
        g = gcd(q, base)
        if g == 1:
            raise NonTerminatingError(v, base)
        q //= g
        e += 1
    mag = abs(v.numerator) * base**e // v.denominator
    le = []
    while mag:
        mag, d = divmod(mag, base)
        le.append(d)
    return _from_le(base, -1 if v < 0 else 1, le or [0], -e)


def decode_rational(a: BasisNumeral) -> Fraction:
    m = 0
    for d in a.digits:
        m = m * a.base + d
    if a.sign < 0:
        m = -m
    if a.low >= 0:
        return Fraction(m * a.base**a.low)
    return Fraction(m, a.base ** (-a.low))


def unary_value(a: BasisNumeral) -> int:
    """Number of qukits in the string, u - l + 1."""
    return len(a.digits)
