"""Finite superpositions of numeral tuples and entangled arithmetic on them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import BaseMismatchError, StateError
from .numeral import (
    ArithRelation,
    BasisNumeral,
    Op,
    arith_op,
    as_numeral,
    canonicalize,
    format_numeral,
    fresh_label,
    relate,
)

NORM_TOL = 1e-12
PRUNE_TOL = 1e-15

Key = tuple[BasisNumeral, ...]


class FockState:
    """Normalized sparse superposition over tuples of numerals of one base.

    Every slot of the tuple carries a single string label ``h`` shared by
    all terms; labels of different slots are distinct.  Instances are
    treated as immutable.
    """

    __slots__ = ("base", "arity", "_terms", "_dist")

    def __init__(self, base: int, arity: int, terms: dict[Key, complex]):
        self.base = base
        self.arity = arity
        self._terms = terms
        self._dist: dict[int, list[tuple[BasisNumeral, float]]] = {}

    def items(self) -> Iterator[tuple[Key, complex]]:
        return iter(self._terms.items())

    def amplitude(self, key) -> complex:
        if not isinstance(key, tuple):
            key = (key,)
        return self._terms.get(tuple(as_numeral(x) for x in key), 0j)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def labels(self) -> tuple[int, ...]:
        first = next(iter(self._terms))
        return tuple(a.h for a in first)

    @property
    def is_basis(self) -> bool:
        return len(self._terms) == 1

    def basis_tuple(self) -> Key:
        if len(self._terms) != 1:
            raise StateError("state is a superposition, not a basis state")
        return next(iter(self._terms))

    def norm_squared(self) -> float:
        return sum(abs(c) ** 2 for c in self._terms.values())

    def relabel(self, labels: Iterable[int] | None = None) -> FockState:
        """Copy with new slot labels (fresh ones by default)."""
        labels = tuple(labels) if labels is not None else tuple(fresh_label() for _ in range(self.arity))
        terms = {tuple(a.with_label(h) for a, h in zip(key, labels)): c for key, c in self._terms.items()}
        return FockState(self.base, self.arity, terms)

    def distribution(self, slot: int = 0) -> list[tuple[BasisNumeral, float]]:
        """Born-rule marginal of one slot, arithmetically equal numerals merged."""
        if slot not in self._dist:
            acc: dict[BasisNumeral, float] = {}
            for key, c in self._terms.items():
                r = canonicalize(key[slot])
                acc[r] = acc.get(r, 0.0) + abs(c) ** 2
            self._dist[slot] = sorted(acc.items(), key=lambda t: format_numeral(t[0]))
        return self._dist[slot]

    def __repr__(self) -> str:
        body = ", ".join(
            f"{'|'.join(map(str, k))}: {c:.6g}" for k, c in sorted(self._terms.items(), key=lambda t: _key_text(t[0]))
        )
        return f"FockState(base={self.base}, {{{body}}})"


def _key_text(key: Key) -> tuple[str, ...]:
    return tuple(format_numeral(a) for a in key)


def _build(base: int, arity: int, terms: dict[Key, complex], normalize: bool) -> FockState:
    terms = {k: c for k, c in terms.items() if abs(c) >= PRUNE_TOL}
    if not terms:
        raise StateError("zero vector")
    if normalize:
        norm = sum(abs(c) ** 2 for c in terms.values()) ** 0.5
        terms = {k: c / norm for k, c in terms.items()}
    return FockState(base, arity, terms)


def make_state(terms) -> FockState:
    """Normalized state from ``[(tuple_or_numeral, amplitude), ...]``.

    Numerals may be given as text.  Duplicate tuples have their
    amplitudes summed before normalizing.
    """
    terms = list(terms)
    if not terms:
        raise StateError("a state needs at least one term")
    base = arity = None
    acc: dict[Key, complex] = {}
    labels: list[int] | None = None
    for key, amp in terms:
        if not isinstance(key, (tuple, list)):
            key = (key,)
        key = tuple(as_numeral(x) for x in key)
        if not key:
            raise StateError("empty tuple")
        if arity is None:
            arity = len(key)
            base = key[0].base
            labels = []
            for a in key:
                labels.append(a.h if a.h not in labels else fresh_label())
        elif len(key) != arity:
            raise StateError(f"inconsistent tuple arity: {len(key)} vs {arity}")
        for a in key:
            if a.base != base:
                raise BaseMismatchError(base, a.base)
        key = tuple(a.with_label(h) for a, h in zip(key, labels))
        acc[key] = acc.get(key, 0j) + complex(amp)
    return _build(base, arity, acc, normalize=True)


def basis_state(*numerals) -> FockState:
    return make_state([(tuple(numerals), 1)])


def apply_op_entangled(kind, psi: FockState, phi: FockState, accuracy: int | None = None) -> FockState:
    """``Σ c_a c'_b |a⟩|b⟩|a O b⟩``: inputs kept, result string appended."""
    kind = Op(kind)
    if kind not in (Op.ADD, Op.SUB, Op.MUL, Op.DIV):
        raise ValueError(f"{kind.value} is not a binary operation")
    if psi.base != phi.base:
        raise BaseMismatchError(psi.base, phi.base)
    if psi.arity != 1 or phi.arity != 1:
        raise StateError("entangled operations take single-string states")
    if psi.labels[0] == phi.labels[0]:
        phi = phi.relabel()
    h_result = fresh_label()
    out: dict[Key, complex] = {}
    for (a,), ca in psi.items():
        for (b,), cb in phi.items():
            r = arith_op(kind, a, b, accuracy).with_label(h_result)
            out[(a, b, r)] = ca * cb
    return _build(psi.base, 3, out, normalize=False)


@dataclass(frozen=True)
class MixedResult:
    """Weighted result numerals after tracing out the two inputs."""

    base: int
    outcomes: tuple[tuple[BasisNumeral, float], ...]

    def probability(self, numeral) -> float:
        r = canonicalize(as_numeral(numeral))
        return sum(p for a, p in self.outcomes if a == r)

    def to_json(self) -> dict:
        return {
            "base": self.base,
            "outcomes": [{"numeral": format_numeral(a), "p": float(f"{p:.12g}")} for a, p in self.outcomes],
        }


def result_mixture(entangled: FockState) -> MixedResult:
    if entangled.arity != 3:
        raise StateError(f"expected (input, input, result) triples, got arity {entangled.arity}")
    return MixedResult(entangled.base, tuple(entangled.distribution(2)))


def inner_product(psi: FockState, phi: FockState) -> complex:
    """``⟨ψ|φ⟩``; padding variants are orthogonal basis vectors."""
    if psi.base != phi.base:
        raise BaseMismatchError(psi.base, phi.base)
    if psi.arity != phi.arity:
        raise StateError(f"arity mismatch: {psi.arity} vs {phi.arity}")
    total = 0j
    for key, c in psi.items():
        other = phi._terms.get(key)
        if other is not None:
            total += c.conjugate() * other
    return total


def relation_probability(rel: ArithRelation, psi: FockState, phi: FockState) -> float:
    """Born probability that ``a rel b`` for a drawn from ψ and b from φ."""
    if psi.base != phi.base:
        raise BaseMismatchError(psi.base, phi.base)
    rel = ArithRelation(rel)
    total = 0.0
    for a, pa in psi.distribution(0):
        for b, pb in phi.distribution(0):
            if relate(a, b) is rel:
                total += pa * pb
    return total


# ---------------------------------------------------------------------------
# JSON


def state_to_json(state: FockState) -> dict:
    rows = sorted(state.items(), key=lambda t: _key_text(t[0]))
    return {
        "base": state.base,
        "arity": state.arity,
        "terms": [
            {"tuple": list(_key_text(k)), "re": float(f"{c.real:.12g}"), "im": float(f"{c.imag:.12g}")}
            for k, c in rows
        ],
    }


def state_from_json(data: dict) -> FockState:
    try:
        terms = [(tuple(t["tuple"]), complex(t.get("re", 0.0), t.get("im", 0.0))) for t in data["terms"]]
    except (KeyError, TypeError) as exc:
        raise StateError(f"malformed state JSON: {exc}") from exc
    state = make_state(terms)
    if "base" in data and data["base"] != state.base:
        raise BaseMismatchError(data["base"], state.base)
    if "arity" in data and data["arity"] != state.arity:
        raise StateError(f"declared arity {data['arity']} does not match terms")
    return state
