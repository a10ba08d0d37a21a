"""Limit points of a family: threads, section points, and lifted algebra.

A thread assigns to every index a level point, consistently with the
projections.  A section point stores values only on the members of a
section; it induces a thread by projecting below members and injecting
above them.  When an index sees several members, all of them must agree,
otherwise the data does not describe a limit point at all.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .family import ProfiniteFamily, sample_point
from .maps import DimensionMismatch, as_point
from .poset import Section
from .report import VerificationReport


class IllDefinedSection(Exception):
    """Member values disagree at a commonly visible index."""


class Incomparable(Exception):
    """An index is comparable to no member of the section."""


class MorphismViolation(Exception):
    """A per-level operation is not intertwined by the projections."""


class NotInvertible(Exception):
    """A level value has no inverse under the given structure."""

    def __init__(self, index, msg=""):
        super().__init__(msg or f"value not invertible at level {index!r}")
        self.index = index


class Thread:
    """A lazily evaluated, memoized assignment index -> level point."""

    def __init__(self, family: ProfiniteFamily, fn: Callable[[Any], np.ndarray],
                 name: str = ""):
        self.family = family
        self._fn = fn
        self.name = name
        self._memo: dict = {}
        self._lock = threading.Lock()

    def value(self, J) -> np.ndarray:
        key = self.family.poset.key(J)
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        val = as_point(self._fn(J))
        if val.size != self.family.dim(J):
            raise DimensionMismatch(
                f"thread {self.name or 'anonymous'}: value at {J!r} has dim "
                f"{val.size}, expected {self.family.dim(J)}")
        val = val.copy()
        val.setflags(write=False)
        with self._lock:
            return self._memo.setdefault(key, val)

    __call__ = value

    def __repr__(self):
        return f"Thread({self.name or 'anonymous'})"


def thread_axpy(x: Thread, s: float, v) -> Thread:
    """The assignment J -> x(J) + s * v(J); a thread again when both are
    and the projections are linear."""
    vfn = v.value if isinstance(v, Thread) else v
    return Thread(x.family, lambda J: x(J) + s * as_point(vfn(J)),
                  name=f"{x.name}+{s}*dir")


@dataclass(frozen=True)
class SectionPoint:
    """Values on the members of a section."""

    family: ProfiniteFamily
    section: Section
    values: Mapping[Any, np.ndarray]

    @staticmethod
    def of(family: ProfiniteFamily, section, values: Mapping) -> "SectionPoint":
        sec = section if isinstance(section, Section) else Section.of(family.poset, section)
        vals = {}
        for member in sec:
            if member not in values:
                raise IllDefinedSection(f"missing value for member {member!r}")
            pt = as_point(values[member]).copy()
            if pt.size != family.dim(member):
                raise DimensionMismatch(
                    f"value at {member!r} has dim {pt.size}, expected {family.dim(member)}")
            pt.setflags(write=False)
            vals[member] = pt
        return SectionPoint(family, sec, vals)


def _extension_candidates(sp: SectionPoint, I) -> list[np.ndarray]:
    """All member-induced values at index I: projections from members above,
    injections from members below.  Mixing cannot happen for an antichain."""
    fam, poset = sp.family, sp.family.poset
    out = []
    for member in sp.section:
        if member == I:
            out.append(sp.values[member])
        elif poset.leq(I, member):
            out.append(fam.proj(I, member)(sp.values[member]))
        elif poset.leq(member, I):
            out.append(fam.inj(I, member)(sp.values[member]))
    return out


def extend_section_point(sp: SectionPoint, I, tol: float = 1e-9) -> np.ndarray:
    cands = _extension_candidates(sp, I)
    if not cands:
        raise Incomparable(f"index {I!r} is comparable to no member of {sp.section}")
    first = cands[0]
    for other in cands[1:]:
        if np.max(np.abs(other - first), initial=0.0) > tol:
            raise IllDefinedSection(
                f"member values disagree at {I!r}: {first} vs {other}")
    return first


def validate_section_point(sp: SectionPoint, tol: float = 1e-9,
                           lower_probe: Optional[Iterable] = None) -> None:
    """Eagerly check coherence at pairwise joins and (optionally) below.

    lower_probe defaults to all elements of a finite poset; on oracle posets
    lower conflicts are still caught lazily at evaluation time.
    """
    poset = sp.family.poset
    members = list(sp.section)
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            top = poset.require_join(a, b)
            extend_section_point(sp, top, tol=tol)
    if lower_probe is None and poset.elements is not None:
        lower_probe = poset.elements
    for idx in (lower_probe or ()):
        if any(poset.comparable(idx, m) for m in members):
            extend_section_point(sp, idx, tol=tol)


def thread_from_section(sp: SectionPoint, tol: float = 1e-9,
                        check: bool = True) -> Thread:
    """The thread induced by a section point.

    Member values are returned verbatim at their own index, so restricting
    the thread back to the section is float-exact.  Raises IllDefinedSection
    when two members see conflicting values at a shared index, Incomparable
    when an index is beyond every member's reach.
    """
    if check:
        validate_section_point(sp, tol=tol)
    label = ",".join(repr(m) for m in sp.section)
    return Thread(sp.family, lambda I: extend_section_point(sp, I, tol=tol),
                  name=f"sec[{label}]")


def restrict_thread(t: Thread, section) -> SectionPoint:
    sec = section if isinstance(section, Section) else Section.of(t.family.poset, section)
    return SectionPoint.of(t.family, sec, {m: t(m) for m in sec})


def check_thread(t: Thread, pairs: Iterable[tuple], tol: float = 1e-9) -> VerificationReport:
    """Consistency residual max |t(J) - proj(J, K)(t(K))| over the pairs."""
    res = 0.0
    worst = None
    for J, K in pairs:
        if not t.family.poset.leq(J, K):
            continue
        gap = float(np.max(np.abs(t(J) - t.family.proj(J, K)(t(K))), initial=0.0))
        if gap > res:
            res, worst = gap, (J, K)
    report = VerificationReport(f"thread consistency: {t.name or 'anonymous'}")
    report.add("projection consistency", res, tol,
               detail="" if worst is None else f"worst pair {worst!r}")
    return report


def is_inductive(t: Thread, candidate_sections: Iterable, probe: Optional[Iterable] = None,
                 tol: float = 1e-9) -> Optional[SectionPoint]:
    """First candidate section whose induced thread matches t on the probe.

    The probe defaults to every element of a finite poset; oracle posets
    need an explicit probe, since finitely many values can never certify
    inductivity there on their own.
    """
    poset = t.family.poset
    if probe is None:
        if poset.elements is None:
            raise Incomparable("is_inductive on an oracle poset needs an explicit probe")
        probe = poset.elements
    probe = list(probe)
    for section in candidate_sections:
        sec = section if isinstance(section, Section) else Section.of(poset, section)
        try:
            sp = restrict_thread(t, sec)
            induced = thread_from_section(sp, tol=tol)
            ok = True
            for idx in probe:
                if not any(poset.comparable(idx, m) for m in sec):
                    ok = False
                    break
                if np.max(np.abs(induced(idx) - t(idx)), initial=0.0) > tol:
                    ok = False
                    break
        except (IllDefinedSection, Incomparable):
            continue
        if ok:
            return sp
    return None


# ---------------------------------------------------------------------------
# lifted algebra


@dataclass
class AlgebraicStructure:
    """Per-level operation oracles whose projection-compatibility makes the
    limit inherit the structure."""

    family: ProfiniteFamily
    op: Callable[[Any, np.ndarray, np.ndarray], np.ndarray]
    neutral: Optional[Callable[[Any], np.ndarray]] = None
    inverse: Optional[Callable[[Any, np.ndarray], np.ndarray]] = None
    name: str = ""


@dataclass
class ScalarAction:
    """A ring family acting on a module family, level by level."""

    ring: ProfiniteFamily
    module: ProfiniteFamily
    act: Callable[[Any, np.ndarray, np.ndarray], np.ndarray]
    name: str = ""


def _default_pairs(poset, rng: np.random.Generator, count: int = 12) -> list[tuple]:
    if poset.elements is None:
        raise Incomparable("operand check needs a finite poset or explicit pairs")
    els = list(poset.elements)
    pairs = []
    for _ in range(count):
        a = els[rng.integers(len(els))]
        above = [e for e in els if poset.leq(a, e)]
        pairs.append((a, above[rng.integers(len(above))]))
    return pairs


def lift_binary(structure: AlgebraicStructure, x: Thread, y: Thread,
                pairs: Optional[Iterable[tuple]] = None, tol: float = 1e-9,
                rng: Optional[np.random.Generator] = None) -> Thread:
    """Lift a per-level binary operation to threads.

    The projection-morphism property is verified at the operand values on
    sampled comparable pairs before the lifted thread is returned; a
    violation means the limit carries no such operation along these
    operands and raises MorphismViolation.
    """
    if x.family is not structure.family or y.family is not structure.family:
        raise Incomparable("operands must live in the structure's family")
    rng = rng or np.random.default_rng(0)
    pairs = list(pairs) if pairs is not None else _default_pairs(structure.family.poset, rng)
    for J, K in pairs:
        if not structure.family.poset.leq(J, K) or J == K:
            continue
        lhs = structure.family.proj(J, K)(structure.op(K, x(K), y(K)))
        rhs = structure.op(J, x(J), y(J))
        gap = float(np.max(np.abs(lhs - rhs), initial=0.0))
        if gap > tol:
            raise MorphismViolation(
                f"{structure.name or 'op'} is not projection-compatible at pair "
                f"({J!r}, {K!r}): residual {gap:.3e}")
    return Thread(structure.family, lambda J: structure.op(J, x(J), y(J)),
                  name=f"({x.name}){structure.name or 'op'}({y.name})")


def lift_inverse(structure: AlgebraicStructure, x: Thread,
                 pairs: Optional[Iterable[tuple]] = None, tol: float = 1e-9,
                 rng: Optional[np.random.Generator] = None) -> Thread:
    """Level-wise inverses, verified against the neutral thread."""
    if structure.inverse is None or structure.neutral is None:
        raise NotInvertible(None, "structure has no inverse/neutral oracles")
    rng = rng or np.random.default_rng(0)
    pairs = list(pairs) if pairs is not None else _default_pairs(structure.family.poset, rng)

    def invert(J):
        try:
            return structure.inverse(J, x(J))
        except (np.linalg.LinAlgError, ZeroDivisionError, FloatingPointError) as err:
            raise NotInvertible(J, f"level {J!r}: {err}") from err

    inv = Thread(structure.family, invert, name=f"inv({x.name})")
    product = lift_binary(structure, x, inv, pairs=pairs, tol=tol, rng=rng)
    indices = {J for pair in pairs for J in pair}
    for J in indices:
        gap = float(np.max(np.abs(product(J) - structure.neutral(J)), initial=0.0))
        if gap > tol:
            raise NotInvertible(J, f"inverse check failed at {J!r}: residual {gap:.3e}")
    return inv


def lift_scalar_action(action: ScalarAction, r: Thread, x: Thread,
                       pairs: Optional[Iterable[tuple]] = None, tol: float = 1e-9,
                       rng: Optional[np.random.Generator] = None) -> Thread:
    """Lift r . x level-wise, checking compatibility on both families."""
    if r.family is not action.ring or x.family is not action.module:
        raise Incomparable("operands must live in the ring/module families")
    rng = rng or np.random.default_rng(0)
    pairs = list(pairs) if pairs is not None else _default_pairs(action.module.poset, rng)
    for J, K in pairs:
        if not action.module.poset.leq(J, K) or J == K:
            continue
        lhs = action.module.proj(J, K)(action.act(K, r(K), x(K)))
        rhs = action.act(J, r(J), x(J))
        gap = float(np.max(np.abs(lhs - rhs), initial=0.0))
        if gap > tol:
            raise MorphismViolation(
                f"scalar action not projection-compatible at ({J!r}, {K!r}): "
                f"residual {gap:.3e}")
    return Thread(action.module, lambda J: action.act(J, r(J), x(J)),
                  name=f"({r.name}).({x.name})")
