"""State sequences and their probabilistic Cauchy analysis at a finite horizon.

The asymptotic quantities (limits in n, m and ℓ) are replaced by a full
grid ``P[n, m, ℓ]`` for ``1 <= n, m <= N`` and ``0 <= ℓ <= L``.  Tail
windows ``(p, N]`` hold at least two indices, so ``p`` runs over
``0 .. N-2`` and the "limit" in p is the value of the last window.
"""
from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable

import numpy as np

from .base_change import convert_state
from .errors import BaseMismatchError, NonBasisError, SequenceSpecError, StateError
from .fock import (
    FockState,
    MixedResult,
    apply_op_entangled,
    basis_state,
    make_state,
    relation_probability,
    result_mixture,
    state_from_json,
)
from .gauge import GaugeField, apply_gauge
from .numeral import (
    ArithRelation,
    BasisNumeral,
    Op,
    _raw,
    arith_abs,
    arith_add,
    arith_div,
    arith_less,
    arith_op,
    arith_sub,
    as_numeral,
    canonicalize,
    decode_rational,
    encode_rational,
    format_numeral,
    parse_numeral,
    power_numeral,
)

EPS_BASIS = 1e-9
EPS_SUPERPOSITION = 1e-3
MONOTONE_TOL = 1e-12


class StateSequence:
    """Lazy, memoized map ``n -> FockState`` (single-string states).

    Each materialized element gets its own fresh string label.  ``frame``
    is the gauge field relating this sequence's coordinates to the
    reference basis; relations are evaluated after pulling back through it.
    """

    def __init__(self, base: int, generator: Callable[[int], FockState], *,
                 gauge: str = "g", frame: GaugeField | None = None, name: str = ""):
        self.base = base
        self.gauge = gauge
        self.frame = frame
        self.name = name
        self._gen = generator
        self._cache: dict[int, FockState] = {}
        self._ref_cache: dict[int, FockState] = {}
        self._lock = threading.Lock()

    def __call__(self, n: int) -> FockState:
        state = self._cache.get(n)
        if state is None:
            if n < 0:
                raise IndexError("sequence index must be >= 0")
            fresh = self._gen(n)
            if fresh.base != self.base:
                raise BaseMismatchError(self.base, fresh.base)
            if fresh.arity != 1:
                raise StateError("sequence elements must be single-string states")
            with self._lock:
                state = self._cache.setdefault(n, fresh.relabel())
        return state

    __getitem__ = __call__

    def reference(self, n: int) -> FockState:
        """Element ``n`` expressed in the reference basis."""
        if self.frame is None:
            return self(n)
        state = self._ref_cache.get(n)
        if state is None:
            pulled = apply_gauge(self.frame.inverse(), self(n))
            with self._lock:
                state = self._ref_cache.setdefault(n, pulled)
        return state

    def __repr__(self) -> str:
        return f"StateSequence({self.name or '?'}, base={self.base}, gauge={self.gauge!r})"


# ---------------------------------------------------------------------------
# built-in families


def _pattern(s, what: str) -> Callable[[int], int]:
    """Digit rule from a callable, an int, or a repeating digit pattern."""
    if callable(s):
        return s
    if isinstance(s, int):
        return lambda i: s
    text = str(s)
    digits = [int(x) for x in (text.split(".") if "." in text else text)]
    if not digits:
        raise SequenceSpecError(f"empty {what} pattern")
    return lambda i: digits[i % len(digits)]


def constant(numeral, name: str = "") -> StateSequence:
    a = as_numeral(numeral)
    return StateSequence(a.base, lambda n: basis_state(a), name=name or f"const({a})")


def alternating(a, b, name: str = "") -> StateSequence:
    a, b = as_numeral(a), as_numeral(b)
    if a.base != b.base:
        raise BaseMismatchError(a.base, b.base)
    return StateSequence(a.base, lambda n: basis_state(b if n % 2 else a), name=name or f"alt({a},{b})")


def psiex1(s, k: int, name: str = "") -> StateSequence:
    """``|+, s[0..-n+1]⟩`` followed by a uniform superposition of digit n.

    ``s`` gives the digit at site ``-i`` for ``i = 0, 1, ...``.
    """
    rule = _pattern(s, "psiex1 digit")

    def gen(n: int) -> FockState:
        fixed = tuple(rule(i) for i in range(n))
        for d in fixed:
            if not 0 <= d < k:
                raise SequenceSpecError(f"digit {d} out of range for base {k}")
        amp = k ** -0.5
        return make_state([(_raw(k, 1, fixed + (j,), -n), amp) for j in range(k)])

    return StateSequence(k, gen, name=name or f"psiex1(s={s},k={k})")


def _truncate(value: Fraction, k: int, digits: int) -> BasisNumeral:
    mag = abs(value.numerator) * k**digits // value.denominator
    return encode_rational(Fraction(-mag if value < 0 else mag, k**digits), k)


def truncations(value, k: int, rate: int = 1, offset: int = 0, name: str = "") -> StateSequence:
    """Element n is ``value`` truncated toward zero to ``rate*n + offset`` digits."""
    v = Fraction(value)
    return StateSequence(
        k, lambda n: basis_state(_truncate(v, k, rate * n + offset)),
        name=name or f"trunc({v},k={k},rate={rate})",
    )


def digit_stream(s, k: int, integer=0, negative: bool = False, name: str = "") -> StateSequence:
    """Integer part followed by the first n fraction digits of the rule ``s``.

    ``s`` gives the fraction digit at site ``-i`` for ``i = 1, 2, ...``.
    """
    rule = _pattern(s, "stream digit")
    head = encode_rational(Fraction(integer), k)

    def gen(n: int) -> FockState:
        frac = tuple(rule(i - 1) for i in range(1, n + 1))
        return basis_state(_raw(k, -1 if negative else 1, head.digits + frac, -n))

    return StateSequence(k, gen, name=name or f"stream({s},k={k})")


def table(states, name: str = "") -> StateSequence:
    """Explicit elements; indices past the end repeat the last one."""
    states = [s if isinstance(s, FockState) else basis_state(as_numeral(s)) for s in states]
    if not states:
        raise SequenceSpecError("empty table")
    base = states[0].base
    return StateSequence(base, lambda n: states[min(n, len(states) - 1)], name=name or "table")


def shifted(psi: StateSequence, by: int = 1) -> StateSequence:
    """The tail ``n -> psi(n + by)``, expressed in the same frame."""
    if by < 0:
        raise ValueError("shift must be nonnegative")
    return StateSequence(psi.base, lambda n: psi(n + by), gauge=psi.gauge, frame=psi.frame,
                         name=f"{psi.name}>>{by}")


def cluster(value, k: int, offsets, amplitudes, decay: float = 0.0, name: str = "") -> StateSequence:
    """Superposition around the truncations of ``value``.

    Term i of element n is ``trunc_n(value) + offsets[i] * k**-n``.  With
    ``decay > 0`` the first term is an outlier at ``value + 1`` whose
    amplitude shrinks like ``decay**n``.
    """
    v = Fraction(value)
    offsets = list(offsets)
    amplitudes = [complex(a) for a in amplitudes]

    def gen(n: int) -> FockState:
        centre = _truncate(v, k, n)
        terms = []
        for off, amp in zip(offsets, amplitudes):
            step = Fraction(off, k**n)
            terms.append((encode_rational(decode_rational(centre) + step, k), amp))
        if decay > 0:
            weight = sum(abs(a) ** 2 for a in amplitudes) ** 0.5
            terms.append((encode_rational(decode_rational(centre) + 1, k), weight * decay**n))
        return make_state(terms)

    return StateSequence(k, gen, name=name or f"cluster({v},k={k})")


def _parse_params(body: str) -> dict[str, str]:
    out = {}
    for part in filter(None, body.split(",")):
        if "=" not in part:
            raise SequenceSpecError(f"expected key=value, got {part!r}")
        key, val = part.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def seq_from_spec(spec) -> StateSequence:
    """Build a sequence from a spec string or dict.

    String forms::

        const:10:5+
        alt:10:0+|10:1+
        psiex1:s=3,k=10
        trunc:value=1/3,k=10[,rate=2][,offset=0]
        stream:k=10,digits=142857[,int=0][,sign=-]
        table:10:1+|10:1+4|10:1+41

    Dict forms use ``{"kind": ..., ...}`` with the same keys; ``table``
    takes ``"states"`` as numeral text or state JSON objects.
    """
    try:
        if isinstance(spec, dict):
            return _seq_from_dict(spec)
        if not isinstance(spec, str) or ":" not in spec:
            raise SequenceSpecError(f"malformed sequence spec {spec!r}")
        kind, body = spec.split(":", 1)
        kind = kind.strip().lower()
        if kind == "const":
            return constant(parse_numeral(body))
        if kind == "alt":
            a, b = body.split("|")
            return alternating(parse_numeral(a), parse_numeral(b))
        if kind == "table":
            return table([parse_numeral(x) for x in body.split("|")])
        params = _parse_params(body)
        return _seq_from_dict({"kind": kind, **params})
    except (ValueError, KeyError, TypeError) as exc:
        if isinstance(exc, SequenceSpecError):
            raise
        raise SequenceSpecError(f"malformed sequence spec {spec!r}: {exc}") from exc


def _seq_from_dict(d: dict) -> StateSequence:
    kind = str(d.get("kind", "")).lower()
    if kind == "const":
        return constant(parse_numeral(d["numeral"]))
    if kind == "alt":
        return alternating(parse_numeral(d["a"]), parse_numeral(d["b"]))
    if kind == "psiex1":
        return psiex1(str(d["s"]), int(d["k"]))
    if kind == "trunc":
        return truncations(Fraction(str(d["value"])), int(d["k"]), int(d.get("rate", 1)), int(d.get("offset", 0)))
    if kind == "stream":
        return digit_stream(str(d["digits"]), int(d["k"]), Fraction(str(d.get("int", 0))), str(d.get("sign", "+")) == "-")
    if kind == "table":
        states = [state_from_json(s) if isinstance(s, dict) else parse_numeral(s) for s in d["states"]]
        return table(states)
    raise SequenceSpecError(f"unknown sequence kind {kind!r}")


# ---------------------------------------------------------------------------
# single-cell probabilities


class SeqRelation(str, Enum):
    SELF_CAUCHY = "self_cauchy"
    EQ = "eq"
    LT = "lt"


def _within(a: BasisNumeral, b: BasisNumeral, threshold: BasisNumeral) -> bool:
    """``|a - b| <= threshold``."""
    return not arith_less(threshold, arith_abs(arith_sub(a, b)))


def p_nml(rel, psi: StateSequence, psi2: StateSequence | None, n: int, m: int, ell: int) -> float:
    """Probability that element n of ψ and element m of ψ' satisfy the relation at accuracy ℓ.

    EQ and SELF_CAUCHY test ``|a - b| <= k**-ℓ``; LT tests ``b - a >= k**-ℓ``.
    """
    rel = SeqRelation(rel)
    if rel is SeqRelation.SELF_CAUCHY or psi2 is None:
        psi2 = psi
    if psi.base != psi2.base:
        raise BaseMismatchError(psi.base, psi2.base)
    thr = power_numeral(psi.base, -ell)
    passed = total = 0.0
    for a, pa in psi.reference(n).distribution():
        for b, pb in psi2.reference(m).distribution():
            if rel is SeqRelation.LT:
                ok = not arith_less(arith_sub(b, a), thr)
            else:
                ok = _within(a, b, thr)
            total += pa * pb
            if ok:
                passed += pa * pb
    return passed / total


def elementwise_equality(psi: StateSequence, psi2: StateSequence, n: int) -> float:
    """Probability that element n of both sequences are arithmetically equal.

    This per-element notion is stronger than asymptotic equality: for
    superposition sequences it stays below 1 even for ``psi2 = psi``.
    """
    return relation_probability(ArithRelation.EQ_A, psi.reference(n), psi2.reference(n))


# ---------------------------------------------------------------------------
# lattices

_INF = 1 << 30


def _top_site(d: BasisNumeral) -> tuple[int, bool]:
    """Highest nonzero site of a nonzero canonical numeral, and whether d is ±k**t."""
    for i, x in enumerate(d.digits):
        if x:
            return d.high - i, x == 1 and not any(d.digits[i + 1:])
    raise ValueError("zero has no top site")


def _levels(a: BasisNumeral, b: BasisNumeral) -> tuple[int, int | None, int | None]:
    """Threshold levels for the pair (a, b), from the digits of a - b.

    Returns ``(eq, lt, gt)``: ``|a-b| <= k**-ℓ`` iff ``ℓ <= eq``;
    ``b-a >= k**-ℓ`` iff ``lt`` is not None and ``ℓ >= lt``; likewise
    ``gt`` for ``a-b``.
    """
    d = arith_sub(a, b)
    if d.is_zero:
        return _INF, None, None
    t, is_power = _top_site(d)
    eq = -t if is_power else -t - 1
    if d.sign > 0:
        return eq, None, -t
    return eq, -t, None


@dataclass
class ProbabilityLattice:
    """``grid[n-1, m-1, ℓ]`` for one relation over the horizon."""

    relation: str
    N: int
    L: int
    grid: np.ndarray

    def cell(self, n: int, m: int, ell: int) -> float:
        return float(self.grid[n - 1, m - 1, ell])

    def p_pl(self) -> np.ndarray:
        """``P_{p,ℓ}``: minimum over the window ``n, m in (p, N]``, for p = 0..N-2."""
        out = np.empty((self.N - 1, self.L + 1))
        for p in range(self.N - 1):
            out[p] = self.grid[p:, p:, :].min(axis=(0, 1))
        return out

    def limit(self) -> np.ndarray:
        """``P_ℓ`` read off the last window."""
        return self.p_pl()[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "m", "l", "P"])
        for n in range(1, self.N + 1):
            for m in range(1, self.N + 1):
                for ell in range(self.L + 1):
                    w.writerow([n, m, ell, _fmt(self.grid[n - 1, m - 1, ell])])
        return buf.getvalue()


def _fmt(p: float) -> str:
    return f"{float(p):.12g}"


def _pair_lattices(psi: StateSequence, psi2: StateSequence, N: int, L: int, want=("eq", "lt", "gt")):
    if psi.base != psi2.base:
        raise BaseMismatchError(psi.base, psi2.base)
    if N < 2 or L < 0:
        raise ValueError("need N >= 2 and L >= 0")
    grids = {w: np.zeros((N, N, L + 1)) for w in want}
    cache: dict = {}
    dists = [None] + [psi.reference(n).distribution() for n in range(1, N + 1)]
    dists2 = dists if psi2 is psi else [None] + [psi2.reference(m).distribution() for m in range(1, N + 1)]
    ells = np.arange(L + 1)
    for n in range(1, N + 1):
        for m in range(1, N + 1):
            eq_h = np.zeros(L + 2)  # mass by eq level, L+1 collects "all levels"
            lt_h = np.zeros(L + 2)
            gt_h = np.zeros(L + 2)
            total = 0.0
            for a, pa in dists[n]:
                for b, pb in dists2[m]:
                    key = (a, b)
                    lv = cache.get(key)
                    if lv is None:
                        lv = cache[key] = _levels(a, b)
                    w = pa * pb
                    total += w
                    eq, lt, gt = lv
                    if eq >= 0:
                        eq_h[min(eq, L + 1)] += w
                    if lt is not None and lt <= L:
                        lt_h[max(lt, 0)] += w
                    if gt is not None and gt <= L:
                        gt_h[max(gt, 0)] += w
            # dividing by the total mass makes "every pair passes" exactly 1.0
            if "eq" in grids:
                # P(ℓ) = mass with level >= ℓ
                grids["eq"][n - 1, m - 1] = np.cumsum(eq_h[::-1])[::-1][: L + 1] / total
            if "lt" in grids:
                grids["lt"][n - 1, m - 1] = np.cumsum(lt_h)[ells] / total
            if "gt" in grids:
                grids["gt"][n - 1, m - 1] = np.cumsum(gt_h)[ells] / total
    for g in grids.values():
        np.clip(g, 0.0, 1.0, out=g)
    return {w: ProbabilityLattice(w, N, L, g) for w, g in grids.items()}


def build_lattice(rel, psi: StateSequence, psi2: StateSequence | None, N: int, L: int) -> ProbabilityLattice:
    rel = SeqRelation(rel)
    if rel is SeqRelation.SELF_CAUCHY or psi2 is None:
        return _pair_lattices(psi, psi, N, L, want=("eq",))["eq"]
    want = "eq" if rel is SeqRelation.EQ else "lt"
    return _pair_lattices(psi, psi2, N, L, want=(want,))[want]


# ---------------------------------------------------------------------------
# reports


class Classification(str, Enum):
    CAUCHY_AT_HORIZON = "CAUCHY_AT_HORIZON"
    REFUTED_AT_HORIZON = "REFUTED_AT_HORIZON"
    INDETERMINATE = "INDETERMINATE"


def _monotone_defects(ppl: np.ndarray, label: str) -> list[str]:
    defects = []
    if np.any(np.diff(ppl, axis=0) < -MONOTONE_TOL):
        defects.append(f"{label}: P_p,l decreases in p")
    if np.any(np.diff(ppl[-1]) > MONOTONE_TOL):
        defects.append(f"{label}: P_l increases in l")
    return defects


@dataclass
class CauchyReport:
    classification: Classification
    epsilon: float
    N: int
    L: int
    lattice: ProbabilityLattice
    p_pl: np.ndarray
    witness_p: list[int | None]
    defects: list[str] = field(default_factory=list)

    @property
    def is_cauchy(self) -> bool:
        return self.classification is Classification.CAUCHY_AT_HORIZON

    def to_json(self) -> dict:
        return {
            "classification": self.classification.value,
            "epsilon": self.epsilon,
            "N": self.N,
            "L": self.L,
            "P_p_l": [[float(_fmt(x)) for x in row] for row in self.p_pl],
            "witness_p": self.witness_p,
            "defects": self.defects,
        }


def _classify(ppl: np.ndarray, eps: float) -> tuple[Classification, list[int | None]]:
    n_p, n_l = ppl.shape
    witness: list[int | None] = []
    for ell in range(n_l):
        hits = np.nonzero(ppl[:, ell] >= 1 - eps)[0]
        witness.append(int(hits[0]) if hits.size else None)
    if all(w is not None for w in witness):
        return Classification.CAUCHY_AT_HORIZON, witness
    top = ppl[n_p // 2:]
    if np.any(np.all(top <= eps, axis=0)):
        return Classification.REFUTED_AT_HORIZON, witness
    return Classification.INDETERMINATE, witness


def report_from_lattice(lat: ProbabilityLattice, eps: float) -> CauchyReport:
    ppl = lat.p_pl()
    cls, witness = _classify(ppl, eps)
    return CauchyReport(cls, eps, lat.N, lat.L, lat, ppl, witness, _monotone_defects(ppl, lat.relation))


def default_epsilon(psi: StateSequence, N: int) -> float:
    basis = all(psi.reference(n).is_basis for n in range(1, N + 1))
    return EPS_BASIS if basis else EPS_SUPERPOSITION


def cauchy_report(psi: StateSequence, N: int = 32, L: int = 16, eps: float | None = None) -> CauchyReport:
    if N < 2 or L < 0:
        raise ValueError("need N >= 2 and L >= 0")
    if eps is None:
        eps = default_epsilon(psi, N)
    return report_from_lattice(build_lattice(SeqRelation.SELF_CAUCHY, psi, None, N, L), eps)


@dataclass
class ComparisonReport:
    eq: float
    lt: float
    gt: float
    verdict: str
    epsilon: float
    both_cauchy: bool
    lattices: dict = field(repr=False, default_factory=dict)
    defects: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "EQ": float(_fmt(self.eq)),
            "LT": float(_fmt(self.lt)),
            "GT": float(_fmt(self.gt)),
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "both_cauchy": self.both_cauchy,
            "defects": self.defects,
        }


def asymptotic_compare(psi: StateSequence, psi2: StateSequence, N: int = 32, L: int = 16,
                       eps: float | None = None, check_cauchy: bool = True) -> ComparisonReport:
    """Estimate EQ∞, LT∞ and GT∞ for two sequences at the horizon."""
    if eps is None:
        eps = min(default_epsilon(psi, N), default_epsilon(psi2, N))
    lats = _pair_lattices(psi, psi2, N, L)
    eq_limit = lats["eq"].limit()
    eq = float(eq_limit.min())
    lt = float(lats["lt"].limit().max())
    gt = float(lats["gt"].limit().max())
    defects = _monotone_defects(lats["eq"].p_pl(), "eq")
    both = True
    if check_cauchy:
        both = cauchy_report(psi, N, L, eps).is_cauchy and cauchy_report(psi2, N, L, eps).is_cauchy
    if not both:
        verdict = "UNDETERMINED"
    else:
        high = [name for name, v in (("EQ", eq), ("LT", lt), ("GT", gt)) if v >= 1 - eps]
        low = [name for name, v in (("EQ", eq), ("LT", lt), ("GT", gt)) if v <= eps]
        verdict = high[0] if len(high) == 1 and len(low) == 2 else "TRICHOTOMY_VIOLATION"
    return ComparisonReport(eq, lt, gt, verdict, eps, both, lats, defects)


# ---------------------------------------------------------------------------
# projection onto a basis-valued sequence


def _window_mass(dist, c: BasisNumeral, thr: BasisNumeral) -> float:
    return sum(p for a, p in dist if _within(a, c, thr))


def nearest_candidates(psi: StateSequence, n: int, ell: int) -> list[tuple[BasisNumeral, float, bool]]:
    """Candidates ``(numeral, P_{n,ℓ}(numeral), in_support)`` for element n.

    The support widened by ±k**-ℓ contains every maximizer: a best window
    can always slide until its lower edge meets a support point.
    """
    dist = psi.reference(n).distribution()
    thr = power_numeral(psi.base, -ell)
    support = {a for a, _ in dist}
    cands = set(support)
    for a in support:
        cands.add(canonicalize(arith_add(a, thr)))
        cands.add(canonicalize(arith_sub(a, thr)))
    return [(c, _window_mass(dist, c, thr), c in support) for c in cands]


def q_value(psi: StateSequence, n: int, ell: int) -> tuple[float, BasisNumeral]:
    """The maximal window probability and its maximizer.

    Ties (within 1e-12) prefer support points, then the smallest text.
    """
    cands = nearest_candidates(psi, n, ell)
    best = max(q for _, q, _ in cands)
    ties = [(not sup, format_numeral(c), c) for c, q, sup in cands if q >= best - 1e-12]
    ties.sort(key=lambda t: (t[0], t[1]))
    return best, ties[0][2]


def nearest_basis_sequence(psi: StateSequence, L_proj: int = 16) -> StateSequence:
    """Basis-valued sequence of window maximizers at accuracy ``L_proj``."""
    def gen(n: int) -> FockState:
        _, c = q_value(psi, n, L_proj)
        return basis_state(c)

    return StateSequence(psi.base, gen, gauge=psi.gauge, name=f"nearest({psi.name},{L_proj})")


def triangle_bounds(psi: StateSequence, proj: StateSequence, n: int, m: int, ell: int) -> tuple[float, float]:
    """``(W, X)`` for the projection ``proj`` of ``psi`` at one cell.

    W is the indicator that the projected elements differ by more than
    3k**-ℓ; X is the probability that the three-leg path through draws of
    ψ(n) and ψ(m) is longer than 3k**-ℓ.  The triangle inequality gives
    W <= X.
    """
    thr = power_numeral(psi.base, -ell)
    thr3 = arith_add(arith_add(thr, thr), thr)
    cn = proj.reference(n).basis_tuple()[0]
    cm = proj.reference(m).basis_tuple()[0]
    w = 1.0 if arith_less(thr3, arith_abs(arith_sub(cn, cm))) else 0.0
    x = 0.0
    dn = psi.reference(n).distribution()
    dm = psi.reference(m).distribution()
    legs_n = [(a, pa, arith_abs(arith_sub(cn, a))) for a, pa in dn]
    legs_m = [(b, pb, arith_abs(arith_sub(b, cm))) for b, pb in dm]
    for a, pa, la in legs_n:
        for b, pb, lb in legs_m:
            total = arith_add(arith_add(la, arith_abs(arith_sub(a, b))), lb)
            if arith_less(thr3, total):
                x += pa * pb
    return w, x


def triangle_grid(psi: StateSequence, proj: StateSequence, N: int, L: int) -> tuple[np.ndarray, np.ndarray]:
    """``W`` and ``X`` over ``1 <= n, m <= N`` and ``0 <= ℓ <= L``, indexed ``[n-1, m-1, ℓ]``.

    Path lengths are computed once per (n, m) and compared against every
    threshold.
    """
    k = psi.base
    thr3 = []
    for ell in range(L + 1):
        t = power_numeral(k, -ell)
        thr3.append(arith_add(arith_add(t, t), t))
    centres = [None] + [proj.reference(n).basis_tuple()[0] for n in range(1, N + 1)]
    dists = [None] + [psi.reference(n).distribution() for n in range(1, N + 1)]
    legs = [None] + [[(a, p, arith_abs(arith_sub(centres[n], a))) for a, p in dists[n]] for n in range(1, N + 1)]
    W = np.zeros((N, N, L + 1))
    X = np.zeros((N, N, L + 1))
    for n in range(1, N + 1):
        for m in range(1, N + 1):
            gap = arith_abs(arith_sub(centres[n], centres[m]))
            paths = []
            for a, pa, la in legs[n]:
                for b, pb, lb in legs[m]:
                    # |c_n - a| + |a - b| + |b - c_m|
                    paths.append((pa * pb, arith_add(arith_add(la, arith_abs(arith_sub(a, b))), lb)))
            for ell, t in enumerate(thr3):
                W[n - 1, m - 1, ell] = 1.0 if arith_less(t, gap) else 0.0
                X[n - 1, m - 1, ell] = sum(w for w, length in paths if arith_less(t, length))
    return W, X


# ---------------------------------------------------------------------------
# arithmetic on sequences


class SeqOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV_DIAG = "div"


def _basis_element(psi: StateSequence, n: int) -> BasisNumeral:
    state = psi.reference(n)
    if not state.is_basis:
        raise NonBasisError(f"element {n} of {psi.name or 'sequence'} is a superposition")
    return state.basis_tuple()[0]


def seq_arith(kind, psi: StateSequence, psi2: StateSequence) -> StateSequence:
    """Result sequence of an elementwise operation on basis-valued sequences.

    DIV_DIAG divides element n to accuracy n.
    """
    kind = SeqOp(kind)
    if psi.base != psi2.base:
        raise BaseMismatchError(psi.base, psi2.base)

    def gen(n: int) -> FockState:
        a, b = _basis_element(psi, n), _basis_element(psi2, n)
        if kind is SeqOp.DIV_DIAG:
            return basis_state(arith_div(a, b, n))
        return basis_state(arith_op(kind.value, a, b))

    return StateSequence(psi.base, gen, gauge=psi.gauge, name=f"{kind.value}({psi.name},{psi2.name})")


def mixture_sequence(kind, psi: StateSequence, psi2: StateSequence) -> Callable[[int], MixedResult]:
    """Per-element result mixtures for superposition-valued operands."""
    kind = SeqOp(kind)
    op = Op.DIV if kind is SeqOp.DIV_DIAG else Op(kind.value)

    def element(n: int) -> MixedResult:
        acc = n if op is Op.DIV else None
        return result_mixture(apply_op_entangled(op, psi.reference(n), psi2.reference(n), acc))

    return element


def transform_sequence(psi: StateSequence, *, gauge: GaugeField | None = None, base: int | None = None) -> StateSequence:
    """Lift a gauge field or a base change to the sequence, element by element.

    With ``gauge`` the amplitudes are kept and the coordinates move to the
    new basis; the result remembers the field, so its relations are the
    conjugated ones.  With ``base`` element n is converted to accuracy n.
    """
    if (gauge is None) == (base is None):
        raise ValueError("give exactly one of gauge= or base=")
    if gauge is not None:
        if gauge.base != psi.base:
            raise BaseMismatchError(psi.base, gauge.base)
        frame = gauge if psi.frame is None else psi.frame.then(gauge)
        return StateSequence(psi.base, lambda n: apply_gauge(gauge, psi(n)), gauge=gauge.name,
                             frame=frame, name=f"{gauge.name}({psi.name})")
    return StateSequence(base, lambda n: convert_state(psi.reference(n), base, accuracy=n),
                         gauge=psi.gauge, name=f"W{base}({psi.name})")


class SequenceOperator:
    """A sequence read as an operator on natural-number numerals."""

    def __init__(self, psi: StateSequence):
        self.psi = psi

    def __call__(self, numeral) -> FockState:
        a = as_numeral(numeral)
        if a.base != self.psi.base:
            raise BaseMismatchError(self.psi.base, a.base)
        if a.sign < 0 and not a.is_zero:
            raise ValueError(f"{a} is negative, not a natural number")
        if a.sign < 0 or a.low != 0 or canonicalize(a) != a:
            raise ValueError(f"{a} is not a canonical natural-number numeral")
        return self.psi(int(decode_rational(a)))


def as_operator(psi: StateSequence) -> SequenceOperator:
    return SequenceOperator(psi)
