"""Gauge fields: a choice of qukit basis at each site, and its action on states.

A field maps sites ``(j, h)`` to k×k unitaries and is the identity off its
finite support.  A site key with ``h=None`` applies to every string that
has no entry of its own, which is how a gauge is made global in ``h``.

Under a field, digit α at a site becomes ``Σ_β U[α, β] |β⟩``; the sign
qubit is never touched.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import BaseMismatchError, NonUnitaryError, ParseError
from .fock import FockState, Key, _build, relation_probability
from .numeral import ArithRelation, BasisNumeral

UNITARY_TOL = 1e-10

Site = tuple[int, "int | None"]


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=tol, rtol=0)


@dataclass(frozen=True, eq=False)
class GaugeField:
    base: int
    name: str = "g"
    sites: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (j, h), m in self.sites.items():
            m = np.asarray(m, dtype=complex)
            if m.shape != (self.base, self.base):
                raise NonUnitaryError(f"site ({j},{h}) matrix has shape {m.shape}, expected {(self.base, self.base)}")
            if not is_unitary(m):
                raise NonUnitaryError(f"site ({j},{h}) matrix of gauge {self.name!r} is not unitary")
            clean[(int(j), None if h is None else int(h))] = m
        object.__setattr__(self, "sites", clean)

    def matrix_at(self, j: int, h: int) -> np.ndarray | None:
        """Matrix acting at ``(j, h)``; ``None`` means identity."""
        m = self.sites.get((j, h))
        if m is None:
            m = self.sites.get((j, None))
        return m

    def inverse(self) -> GaugeField:
        return GaugeField(self.base, f"{self.name}^-1", {s: m.conj().T for s, m in self.sites.items()})

    def then(self, other: GaugeField) -> GaugeField:
        """Field equal to applying ``self`` first and ``other`` second."""
        if other.base != self.base:
            raise BaseMismatchError(self.base, other.base)
        eye = np.eye(self.base, dtype=complex)
        sites = {}
        for j, h in set(self.sites) | set(other.sites):
            a = self.matrix_at(j, h) if h is not None else self.sites.get((j, None))
            b = other.matrix_at(j, h) if h is not None else other.sites.get((j, None))
            sites[(j, h)] = (eye if a is None else a) @ (eye if b is None else b)
        return GaugeField(self.base, f"{self.name}*{other.name}", sites)

    @classmethod
    def identity(cls, base: int, name: str = "g0") -> GaugeField:
        return cls(base, name, {})


def _expand(U: GaugeField, a: BasisNumeral) -> list[tuple[BasisNumeral, complex]]:
    branches: list[tuple[tuple[int, ...], complex]] = [((), 1 + 0j)]
    for j in a.sites():
        d = a.digit_at(j)
        m = U.matrix_at(j, a.h)
        if m is None:
            branches = [(ds + (d,), c) for ds, c in branches]
            continue
        row = m[d]
        nxt = []
        for ds, c in branches:
            for beta, u in enumerate(row):
                if u != 0:
                    nxt.append((ds + (beta,), c * u))
        branches = nxt
    return [(a.with_digits(ds), c) for ds, c in branches]


def apply_gauge(U: GaugeField, psi: FockState) -> FockState:
    """Re-express every digit through the field; linear in ψ."""
    if U.base != psi.base:
        raise BaseMismatchError(U.base, psi.base)
    if not U.sites:
        return psi
    out: dict[Key, complex] = {}
    for key, c in psi.items():
        partial: list[tuple[Key, complex]] = [((), c)]
        for a in key:
            expanded = _expand(U, a)
            partial = [(k + (b,), amp * u) for k, amp in partial for b, u in expanded]
        for k, amp in partial:
            out[k] = out.get(k, 0j) + amp
    return _build(psi.base, psi.arity, out, normalize=False)


def relation_in_gauge(rel: ArithRelation, U: GaugeField, a_prime: FockState, b_prime: FockState) -> float:
    """Probability of the conjugated relation ``U rel U†`` on transformed states."""
    back = U.inverse()
    return relation_probability(rel, apply_gauge(back, a_prime), apply_gauge(back, b_prime))


# ---------------------------------------------------------------------------
# construction helpers


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random k×k unitary (QR of a complex Ginibre matrix)."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_field(base: int, sites, rng: np.random.Generator, name: str = "g1") -> GaugeField:
    return GaugeField(base, name, {s: random_unitary(base, rng) for s in sites})


def phase_field(base: int, thetas: dict[int, float], name: str = "phase") -> GaugeField:
    """Per-site U(1) factors ``e^{iθ_j}``, global in h."""
    eye = np.eye(base, dtype=complex)
    return GaugeField(base, name, {(j, None): np.exp(1j * t) * eye for j, t in thetas.items()})


def string_phase(thetas: dict[int, float], a: BasisNumeral) -> float:
    """Total phase Θ over the string's interval: the sum of its site phases."""
    return sum(thetas.get(j, 0.0) for j in a.sites())


# ---------------------------------------------------------------------------
# prime structure of a base


def prime_factorize(k: int) -> list[tuple[int, int]]:
    if k < 2:
        raise ValueError("k must be >= 2")
    out = []
    p = 2
    while p * p <= k:
        if k % p == 0:
            e = 0
            while k % p == 0:
                k //= p
                e += 1
            out.append((p, e))
        p += 1
    if k > 1:
        out.append((k, 1))
    return out


def first_primes(n: int) -> list[int]:
    primes: list[int] = []
    c = 2
    while len(primes) < n:
        if all(c % p for p in primes if p * p <= c):
            primes.append(c)
        c += 1
    return primes


@dataclass(frozen=True)
class CompositeSignature:
    base: int
    factors: tuple[tuple[int, int], ...]
    group_product: tuple[str, ...]

    def __str__(self) -> str:
        return "×".join(self.group_product)

    @property
    def elementary(self) -> tuple[int, ...]:
        """Prime qukit dimensions, one per factor occurrence."""
        return tuple(p for p, e in self.factors for _ in range(e))


def composite_signature(k: int) -> CompositeSignature:
    factors = tuple(prime_factorize(k))
    groups = ("U(1)",) + tuple(f"SU({p})" for p, e in factors for _ in range(e))
    return CompositeSignature(k, factors, groups)


def composite_matrix(factor_unitaries) -> np.ndarray:
    """Kronecker product of per-prime unitaries, first factor most significant."""
    mats = [np.asarray(m, dtype=complex) for m in factor_unitaries]
    for m in mats:
        if not is_unitary(m):
            raise NonUnitaryError("factor matrix is not unitary")
    return reduce(np.kron, mats)


# ---------------------------------------------------------------------------
# JSON


def field_to_json(U: GaugeField) -> dict:
    rows = []
    for (j, h), m in sorted(U.sites.items(), key=lambda t: (t[0][0], -1 if t[0][1] is None else t[0][1])):
        rows.append({
            "j": j,
            "h": h,
            "matrix": [[{"re": float(x.real), "im": float(x.imag)} for x in row] for row in m],
        })
    return {"base": U.base, "name": U.name, "sites": rows}


def field_from_json(data: dict) -> GaugeField:
    try:
        base = int(data["base"])
        sites = {}
        for s in data.get("sites", []):
            m = np.array([[complex(x.get("re", 0.0), x.get("im", 0.0)) for x in row] for row in s["matrix"]])
            sites[(int(s["j"]), s.get("h"))] = m
        return GaugeField(base, str(data.get("name", "g")), sites)
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed gauge JSON: {exc}") from exc
