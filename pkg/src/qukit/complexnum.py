"""Complex rationals as a real string paired with an imaginary string.

The imaginary part's sign qubit reads as ±i.  Products follow the sign
algebra of the two units: r·r and i·i give reals (the latter flips the
sign), r·i gives an imaginary.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import BaseMismatchError, DivisionByZeroError, ParseError
from .fock import FockState, make_state
from .numeral import (
    BasisNumeral,
    arith_add,
    arith_div,
    arith_mul,
    arith_sub,
    canonicalize,
    decode_rational,
    encode_rational,
    format_numeral,
    fresh_label,
    parse_numeral,
)
from .sequences import (
    Classification,
    ProbabilityLattice,
    StateSequence,
    EPS_BASIS,
    EPS_SUPERPOSITION,
    _levels,
    _truncate,
    asymptotic_compare,
    cauchy_report,
    report_from_lattice,
)


class Unit(str, Enum):
    REAL = "r"
    IMAG = "i"


def sign_product(s1: str, s2: str) -> str:
    """Product of sign types from ``{'+', '-', '+i', '-i'}``."""
    table = {"+": (1, Unit.REAL), "-": (-1, Unit.REAL), "+i": (1, Unit.IMAG), "-i": (-1, Unit.IMAG)}
    try:
        (g1, u1), (g2, u2) = table[s1], table[s2]
    except KeyError as exc:
        raise ValueError(f"unknown sign type {exc.args[0]!r}") from None
    g = g1 * g2
    if u1 is Unit.IMAG and u2 is Unit.IMAG:
        return "+" if g < 0 else "-"
    if u1 is Unit.REAL and u2 is Unit.REAL:
        return "+" if g > 0 else "-"
    return "+i" if g > 0 else "-i"


@dataclass(frozen=True)
class ComplexBasisPair:
    real: BasisNumeral
    imag: BasisNumeral

    def __post_init__(self):
        if self.real.base != self.imag.base:
            raise BaseMismatchError(self.real.base, self.imag.base)
        if self.real.h == self.imag.h:
            object.__setattr__(self, "imag", self.imag.with_label(fresh_label()))

    @property
    def base(self) -> int:
        return self.real.base

    @property
    def value(self) -> tuple[Fraction, Fraction]:
        return decode_rational(self.real), decode_rational(self.imag)

    @property
    def signs(self) -> tuple[str, str]:
        return ("+" if self.real.sign > 0 else "-"), ("+i" if self.imag.sign > 0 else "-i")

    def __str__(self) -> str:
        return f"{format_numeral(self.real)};{format_numeral(self.imag)}i"

    def to_json(self) -> dict:
        return {"real": format_numeral(self.real), "imag": format_numeral(self.imag)}


_PAIR = re.compile(r"^\s*([^;]+);([^;]+)i\s*$")


def parse_complex(text: str) -> ComplexBasisPair:
    m = _PAIR.match(text)
    if not m:
        raise ParseError(f"malformed complex numeral {text!r}; expected '<re>;<im>i'")
    return ComplexBasisPair(parse_numeral(m.group(1)), parse_numeral(m.group(2)))


def complex_encode(re_part, im_part, k: int) -> ComplexBasisPair:
    return ComplexBasisPair(encode_rational(Fraction(re_part), k), encode_rational(Fraction(im_part), k))


class ComplexOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"


def _typed_mul(x: BasisNumeral, ux: Unit, y: BasisNumeral, uy: Unit) -> tuple[BasisNumeral, Unit]:
    p = arith_mul(x, y)
    if ux is Unit.IMAG and uy is Unit.IMAG:
        return _negate(p), Unit.REAL
    return p, Unit.REAL if ux is uy else Unit.IMAG


def _negate(a: BasisNumeral) -> BasisNumeral:
    return canonicalize(arith_sub(encode_rational(0, a.base), a))


def complex_arith(kind, z: ComplexBasisPair, w: ComplexBasisPair, accuracy: int | None = None) -> ComplexBasisPair:
    """Complex operation assembled from the real string operations.

    DIV multiplies by the conjugate and divides both parts by
    ``x'² + y'²`` to ``accuracy`` fraction digits.
    """
    kind = ComplexOp(kind)
    if z.base != w.base:
        raise BaseMismatchError(z.base, w.base)
    x, y, x2, y2 = z.real, z.imag, w.real, w.imag
    if kind is ComplexOp.ADD:
        return ComplexBasisPair(arith_add(x, x2), arith_add(y, y2))
    if kind is ComplexOp.SUB:
        return ComplexBasisPair(arith_sub(x, x2), arith_sub(y, y2))
    R, I = Unit.REAL, Unit.IMAG
    if kind is ComplexOp.MUL:
        rr, _ = _typed_mul(x, R, x2, R)
        ii, _ = _typed_mul(y, I, y2, I)
        ri, _ = _typed_mul(x, R, y2, I)
        ir, _ = _typed_mul(x2, R, y, I)
        return ComplexBasisPair(arith_add(rr, ii), arith_add(ri, ir))
    if accuracy is None:
        raise ValueError("complex division needs an accuracy")
    if w.real.is_zero and w.imag.is_zero:
        raise DivisionByZeroError("complex division by zero")
    # z * conj(w): conj flips the imaginary sign of w
    cy2 = _negate(y2)
    num_re = arith_add(_typed_mul(x, R, x2, R)[0], _typed_mul(y, I, cy2, I)[0])
    num_im = arith_add(_typed_mul(x2, R, y, I)[0], _typed_mul(x, R, cy2, I)[0])
    denom = arith_add(arith_mul(x2, x2), arith_mul(y2, y2))
    return ComplexBasisPair(arith_div(num_re, denom, accuracy), arith_div(num_im, denom, accuracy))


# ---------------------------------------------------------------------------
# sequences


class ComplexSequence:
    """Lazy map ``n -> FockState`` over (real, imaginary) string pairs."""

    def __init__(self, base: int, generator, name: str = ""):
        self.base = base
        self.name = name
        self._gen = generator
        self._cache: dict[int, FockState] = {}

    def __call__(self, n: int) -> FockState:
        state = self._cache.get(n)
        if state is None:
            fresh = self._gen(n)
            if fresh.arity != 2:
                raise ValueError("complex sequence elements must be pair states")
            state = self._cache.setdefault(n, fresh.relabel())
        return state

    def part(self, slot: int) -> StateSequence:
        """Marginal sequence of one part; only its Born distribution matters."""
        def gen(n: int) -> FockState:
            return make_state([(a, p**0.5) for a, p in self(n).distribution(slot)])

        return StateSequence(self.base, gen, name=f"{self.name}.{'re' if slot == 0 else 'im'}")

    @property
    def real(self) -> StateSequence:
        return self.part(0)

    @property
    def imag(self) -> StateSequence:
        return self.part(1)


def complex_from_parts(re_seq: StateSequence, im_seq: StateSequence, name: str = "") -> ComplexSequence:
    """Product-state sequence from independent real and imaginary parts."""
    if re_seq.base != im_seq.base:
        raise BaseMismatchError(re_seq.base, im_seq.base)

    def gen(n: int) -> FockState:
        terms = [((a, b), ca * cb) for (a,), ca in re_seq.reference(n).items() for (b,), cb in im_seq.reference(n).items()]
        return make_state(terms)

    return ComplexSequence(re_seq.base, gen, name or f"({re_seq.name},{im_seq.name})")


def complex_constant(z, name: str = "") -> ComplexSequence:
    z = parse_complex(z) if isinstance(z, str) else z
    return ComplexSequence(z.base, lambda n: make_state([((z.real, z.imag), 1)]), name or str(z))


def complex_truncations(re_value, im_value, k: int, rate: int = 1, name: str = "") -> ComplexSequence:
    """Both parts truncated toward zero to ``rate*n`` base-k digits."""
    r, i = Fraction(re_value), Fraction(im_value)

    def gen(n: int) -> FockState:
        return make_state([((_truncate(r, k, rate * n), _truncate(i, k, rate * n)), 1)])

    return ComplexSequence(k, gen, name or f"trunc({r}+{i}i,k={k})")


def _joint_lattice(psi: ComplexSequence, psi2: ComplexSequence, N: int, L: int) -> ProbabilityLattice:
    """Probability that both parts are within k**-ℓ, drawn jointly."""
    grid = np.zeros((N, N, L + 1))
    cache: dict = {}

    def joint(state: FockState):
        acc: dict = {}
        for (a, b), c in state.items():
            key = (canonicalize(a), canonicalize(b))
            acc[key] = acc.get(key, 0.0) + abs(c) ** 2
        return list(acc.items())

    d1 = [None] + [joint(psi(n)) for n in range(1, N + 1)]
    d2 = d1 if psi2 is psi else [None] + [joint(psi2(m)) for m in range(1, N + 1)]
    for n in range(1, N + 1):
        for m in range(1, N + 1):
            hist = np.zeros(L + 2)
            total = 0.0
            for (a, b), p in d1[n]:
                for (a2, b2), p2 in d2[m]:
                    total += p * p2
                    key = (a, b, a2, b2)
                    lv = cache.get(key)
                    if lv is None:
                        lv = cache[key] = min(_levels(a, a2)[0], _levels(b, b2)[0])
                    if lv >= 0:
                        hist[min(lv, L + 1)] += p * p2
            grid[n - 1, m - 1] = np.cumsum(hist[::-1])[::-1][: L + 1] / total
    return ProbabilityLattice("joint", N, L, np.clip(grid, 0.0, 1.0))


@dataclass
class ComplexCauchyReport:
    real: object
    imag: object
    joint: object
    classification: Classification

    def to_json(self) -> dict:
        return {
            "classification": self.classification.value,
            "real": self.real.to_json(),
            "imag": self.imag.to_json(),
            "joint": self.joint.to_json(),
        }


def _default_eps(psi: ComplexSequence, N: int) -> float:
    return EPS_BASIS if all(psi(n).is_basis for n in range(1, N + 1)) else EPS_SUPERPOSITION


def complex_cauchy_report(psi: ComplexSequence, N: int = 32, L: int = 16, eps: float | None = None) -> ComplexCauchyReport:
    """Cauchy analysis of each part plus the joint lattice.

    The combined verdict is CAUCHY only when both parts are; it is
    REFUTED when either part or the joint lattice is refuted.
    """
    if eps is None:
        eps = _default_eps(psi, N)
    r = cauchy_report(psi.real, N, L, eps)
    i = cauchy_report(psi.imag, N, L, eps)
    j = report_from_lattice(_joint_lattice(psi, psi, N, L), eps)
    kinds = {r.classification, i.classification, j.classification}
    if r.is_cauchy and i.is_cauchy and j.is_cauchy:
        combined = Classification.CAUCHY_AT_HORIZON
    elif Classification.REFUTED_AT_HORIZON in kinds:
        combined = Classification.REFUTED_AT_HORIZON
    else:
        combined = Classification.INDETERMINATE
    return ComplexCauchyReport(r, i, j, combined)


@dataclass
class ComplexEqualityReport:
    real_eq: float
    imag_eq: float
    joint_eq: float
    equal: bool

    def to_json(self) -> dict:
        return {
            "real_EQ": float(f"{self.real_eq:.12g}"),
            "imag_EQ": float(f"{self.imag_eq:.12g}"),
            "joint_EQ": float(f"{self.joint_eq:.12g}"),
            "equal": self.equal,
        }


def complex_compare_equal(psi: ComplexSequence, psi2: ComplexSequence, N: int = 32, L: int = 16,
                          eps: float | None = None) -> ComplexEqualityReport:
    """EQ∞ on the real parts and on the imaginary parts; equal when both are ≈ 1."""
    if psi.base != psi2.base:
        raise BaseMismatchError(psi.base, psi2.base)
    if eps is None:
        eps = min(_default_eps(psi, N), _default_eps(psi2, N))
    re_eq = asymptotic_compare(psi.real, psi2.real, N, L, eps, check_cauchy=False).eq
    im_eq = asymptotic_compare(psi.imag, psi2.imag, N, L, eps, check_cauchy=False).eq
    joint = float(_joint_lattice(psi, psi2, N, L).limit().min())
    return ComplexEqualityReport(re_eq, im_eq, joint, re_eq >= 1 - eps and im_eq >= 1 - eps)


def to_complex(z) -> complex:
    """Float approximation, for display only."""
    r, i = z.value
    return complex(float(r), float(i))


__all__ = [
    "ComplexBasisPair",
    "ComplexOp",
    "ComplexSequence",
    "complex_arith",
    "complex_cauchy_report",
    "complex_compare_equal",
    "complex_constant",
    "complex_encode",
    "complex_from_parts",
    "complex_truncations",
    "parse_complex",
    "sign_product",
]
