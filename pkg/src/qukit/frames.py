"""Fields of reference frames indexed by iteration stage, base and gauge.

Each frame at stage j iterates into every (base, gauge) choice at stage
j+1.  Observers see only strict descendants.  In a cyclic scheme every
frame is reachable from every frame, so visibility wraps around and is
reported with a caveat flag.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product

from .errors import FrameError


class Scheme(str, Enum):
    FINITE = "finite"
    ONE_WAY = "one_way"
    TWO_WAY = "two_way"
    CYCLIC = "cyclic"


@dataclass(frozen=True, order=True)
class FrameId:
    stage: int
    base: int | None
    gauge: str | None

    @property
    def is_ancestor(self) -> bool:
        return self.base is None

    def __str__(self) -> str:
        if self.is_ancestor:
            return f"{self.stage}/R/C"
        return f"{self.stage}/{self.base}/{self.gauge}"


ANCESTOR = FrameId(0, None, None)


def parse_frame_id(text: str) -> FrameId:
    parts = text.strip().split("/")
    if len(parts) != 3:
        raise FrameError(f"malformed frame id {text!r}; expected 'j/k/gauge'")
    try:
        stage = int(parts[0])
    except ValueError:
        raise FrameError(f"malformed stage in {text!r}") from None
    if parts[1] == "R" and parts[2] == "C":
        return FrameId(stage, None, None)
    try:
        return FrameId(stage, int(parts[1]), parts[2])
    except ValueError:
        raise FrameError(f"malformed base in {text!r}") from None


@dataclass(frozen=True)
class Visibility:
    visible: bool
    wraps: bool = False

    def __bool__(self) -> bool:
        return self.visible


@dataclass(frozen=True)
class FrameField:
    scheme: Scheme
    n: int | None
    bases: tuple[int, ...]
    gauges: tuple[str, ...]

    @property
    def has_ancestor(self) -> bool:
        return self.scheme in (Scheme.FINITE, Scheme.ONE_WAY)

    @property
    def is_cyclic(self) -> bool:
        return self.scheme is Scheme.CYCLIC

    def plane(self, stage: int) -> list[FrameId]:
        """All (base, gauge) frames of one stage."""
        return [FrameId(stage, k, g) for k, g in product(self.bases, self.gauges)]

    def stage_ok(self, j: int) -> bool:
        if self.scheme is Scheme.FINITE:
            return 1 <= j <= self.n
        if self.scheme is Scheme.ONE_WAY:
            return j >= 1
        if self.scheme is Scheme.CYCLIC:
            return 0 <= j < self.n
        return True

    def __contains__(self, f: FrameId) -> bool:
        if f.is_ancestor:
            return self.has_ancestor and f == ANCESTOR
        return self.stage_ok(f.stage) and f.base in self.bases and f.gauge in self.gauges

    def check(self, f: FrameId) -> None:
        if f not in self:
            raise FrameError(f"frame {f} is not in this {self.scheme.value} field")

    def frames(self, stages: range | None = None) -> list[FrameId]:
        """Frames of the field; infinite schemes need an explicit stage range."""
        if stages is None:
            if self.scheme is Scheme.FINITE:
                stages = range(1, self.n + 1)
            elif self.scheme is Scheme.CYCLIC:
                stages = range(self.n)
            else:
                raise FrameError("infinite scheme: give a stage range")
        out = [ANCESTOR] if self.has_ancestor and (self.scheme is Scheme.FINITE or stages.start <= 0) else []
        for j in stages:
            if self.stage_ok(j):
                out.extend(self.plane(j))
        return out

    def _next_stage(self, j: int) -> int | None:
        nxt = j + 1
        if self.is_cyclic:
            return nxt % self.n
        if self.scheme is Scheme.FINITE and nxt > self.n:
            return None
        return nxt

    def children(self, f: FrameId) -> list[FrameId]:
        self.check(f)
        nxt = self._next_stage(f.stage)
        return [] if nxt is None else self.plane(nxt)

    def parents(self, f: FrameId) -> list[FrameId]:
        self.check(f)
        if f.is_ancestor:
            return []
        if self.has_ancestor and f.stage == 1:
            return [ANCESTOR]
        prev = (f.stage - 1) % self.n if self.is_cyclic else f.stage - 1
        return self.plane(prev)

    def to_json(self) -> dict:
        out = {"scheme": self.scheme.value, "bases": list(self.bases), "gauges": list(self.gauges)}
        if self.n is not None:
            out["n"] = self.n
        return out


def build_field(scheme, bases, gauges, n: int | None = None) -> FrameField:
    scheme = Scheme(scheme)
    bases = tuple(sorted(set(int(k) for k in bases)))
    gauges = tuple(sorted(set(str(g) for g in gauges)))
    if not bases or not gauges:
        raise FrameError("a frame field needs at least one base and one gauge")
    if any(k < 2 for k in bases):
        raise FrameError("bases must be >= 2")
    if scheme in (Scheme.FINITE, Scheme.CYCLIC):
        if n is None or n < 1:
            raise FrameError(f"{scheme.value} scheme needs n >= 1")
    else:
        n = None
    return FrameField(scheme, n, bases, gauges)


def field_from_json(data: dict) -> FrameField:
    try:
        return build_field(data["scheme"], data["bases"], data["gauges"], data.get("n"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FrameError):
            raise
        raise FrameError(f"malformed frame field description: {exc}") from exc


def can_see(observer: FrameId, target: FrameId, field: FrameField) -> Visibility:
    """Whether ``target`` is a strict descendant of ``observer``."""
    field.check(observer)
    field.check(target)
    if field.is_cyclic:
        return Visibility(True, wraps=True)
    if target.is_ancestor:
        return Visibility(False)
    if observer.is_ancestor:
        return Visibility(True)
    return Visibility(target.stage > observer.stage)


def descendants(frame: FrameId, field: FrameField, depth: int) -> set[FrameId]:
    """Frames reachable in 1..depth iteration steps."""
    if depth < 1:
        raise FrameError("depth must be >= 1")
    field.check(frame)
    out: set[FrameId] = set()
    j = frame.stage
    for _ in range(depth):
        j = field._next_stage(j)
        if j is None:
            break
        out.update(field.plane(j))
    return out


@dataclass(frozen=True)
class IterationPath:
    frames: tuple[FrameId, ...]

    @property
    def steps(self) -> int:
        return len(self.frames) - 1

    def edge_labels(self) -> list[tuple[int, str]]:
        """Each edge is labeled by the (base, gauge) of its child frame."""
        return [(f.base, f.gauge) for f in self.frames[1:]]


def validate_path(path: IterationPath, field: FrameField) -> None:
    if not path.frames:
        raise FrameError("empty path")
    for f in path.frames:
        field.check(f)
    for a, b in zip(path.frames, path.frames[1:]):
        if b not in field.children(a):
            raise FrameError(f"{a} -> {b} is not one iteration step")


def iteration_path(field: FrameField, start: FrameId, steps: int, choose=None) -> IterationPath:
    """Path of ``steps`` iterations from ``start``; ``choose`` picks each child."""
    frames = [start]
    for i in range(steps):
        kids = field.children(frames[-1])
        if not kids:
            raise FrameError(f"no iteration step from {frames[-1]}")
        frames.append(choose(i, kids) if choose else kids[0])
    return IterationPath(tuple(frames))


def winding_number(path: IterationPath, field: FrameField) -> int:
    """Full turns around a cyclic scheme completed by the path."""
    if not field.is_cyclic:
        raise FrameError("winding numbers are defined for cyclic schemes only")
    validate_path(path, field)
    return path.steps // field.n


def frame_ids_json(frames) -> list[str]:
    return [str(f) for f in sorted(frames, key=lambda f: (f.stage, f.base or 0, f.gauge or ""))]
