"""Directed index posets, sections, and the filter of section shadows.

A poset is given by a `leq` oracle together with a `join` oracle that
produces an upper bound for any two indices (directedness).  Finite posets
carry an explicit element tuple; infinite ones ("countable-chain",
"finite-subsets-of-parameter-set") are pure oracles and every check about
them is relative to a caller-supplied finite probe, reported as verified
on that probe and never as a proof.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Any, Callable, Iterable, Optional


class JoinFailure(Exception):
    """The join oracle could not produce an upper bound for a pair."""

    def __init__(self, a, b):
        super().__init__(f"no upper bound for {a!r} and {b!r}")
        self.pair = (a, b)


class EmptySection(Exception):
    """Sections are nonempty by definition."""


class InfinitePoset(Exception):
    """An enumeration was requested from an oracle-only poset."""


def _default_key(x):
    # total order on index identifiers, independent of leq, for canonical
    # sorting and memo keys
    if isinstance(x, frozenset):
        return tuple(sorted(x))
    return x


@dataclass(frozen=True)
class IndexPoset:
    """leq/join oracles plus an optional finite enumeration."""

    leq: Callable[[Any, Any], bool]
    join: Callable[[Any, Any], Optional[Any]]
    kind: str = "finite"
    elements: Optional[tuple] = None
    key: Callable[[Any], Any] = _default_key

    def lt(self, a, b) -> bool:
        return a != b and self.leq(a, b)

    def comparable(self, a, b) -> bool:
        return self.leq(a, b) or self.leq(b, a)

    def sort(self, indices: Iterable) -> list:
        return sorted(indices, key=self.key)

    @property
    def is_finite(self) -> bool:
        return self.elements is not None

    def require_join(self, a, b):
        r = self.join(a, b)
        if r is None or not (self.leq(a, r) and self.leq(b, r)):
            raise JoinFailure(a, b)
        return r


@dataclass(frozen=True)
class Section:
    """A finite antichain; members are canonically sorted."""

    members: tuple

    @staticmethod
    def of(poset: IndexPoset, members: Iterable) -> "Section":
        mem = tuple(poset.sort(set(members)))
        if not mem:
            raise EmptySection("a section must have at least one member")
        return Section(mem)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, item):
        return item in self.members


@dataclass(frozen=True)
class FilterBaseSet:
    """The strict upper shadow of a section: {J | exists K in S with K < J}."""

    poset: IndexPoset
    section: Section

    def membership(self, index) -> bool:
        return any(self.poset.lt(k, index) for k in self.section)

    def __contains__(self, index):
        return self.membership(index)


# ---------------------------------------------------------------------------
# constructors


def chain_poset(indices: Iterable[int]) -> IndexPoset:
    """Finite totally ordered poset over the given integers."""
    els = tuple(sorted(int(i) for i in indices))
    return IndexPoset(leq=lambda a, b: a <= b,
                      join=lambda a, b: max(a, b),
                      kind="finite", elements=els)


def nat_chain() -> IndexPoset:
    """The naturals with the usual order, as a pure oracle."""
    return IndexPoset(leq=lambda a, b: a <= b,
                      join=lambda a, b: max(a, b),
                      kind="countable-chain", elements=None)


def finite_poset(elements: Iterable, leq: Callable[[Any, Any], bool]) -> IndexPoset:
    """Finite poset from an explicit leq oracle; joins found by search.

    The join oracle returns the canonically smallest minimal upper bound,
    or None when the pair has no upper bound at all.
    """
    els = tuple(elements)

    def join(a, b):
        uppers = [r for r in els if leq(a, r) and leq(b, r)]
        if not uppers:
            return None
        minimal = [u for u in uppers
                   if not any(leq(v, u) and v != u for v in uppers)]
        return sorted(minimal, key=_default_key)[0]

    return IndexPoset(leq=leq, join=join, kind="finite", elements=els)


def subset_poset(pool: Optional[Iterable] = None) -> IndexPoset:
    """Finite subsets ordered by inclusion.

    With a finite `pool` the poset is fully enumerable (all subsets of the
    pool, the empty set included); with pool=None it is the oracle poset of
    finite subsets of an unspecified parameter set.
    """
    def leq(a, b):
        return frozenset(a) <= frozenset(b)

    def join(a, b):
        return frozenset(a) | frozenset(b)

    if pool is None:
        return IndexPoset(leq=leq, join=join,
                          kind="finite-subsets-of-parameter-set", elements=None)
    items = sorted(set(pool))
    els = []
    for r in range(len(items) + 1):
        for sub in combinations(items, r):
            els.append(frozenset(sub))
    return IndexPoset(leq=leq, join=join,
                      kind="finite-subsets-of-parameter-set", elements=tuple(els))


# ---------------------------------------------------------------------------
# operations


def is_directed(poset: IndexPoset, sample: Iterable) -> bool:
    """True iff the join oracle produces a valid upper bound for every
    pair in the sample.  Raises JoinFailure when the oracle cannot."""
    sample = list(sample)
    for a, b in combinations(sample, 2):
        r = poset.join(a, b)
        if r is None:
            raise JoinFailure(a, b)
        if not (poset.leq(a, r) and poset.leq(b, r)):
            return False
    return True


def _resolve_probe(poset: IndexPoset, probe: Optional[Iterable]) -> list:
    if probe is not None:
        return list(probe)
    if poset.elements is None:
        raise InfinitePoset("an oracle poset needs an explicit probe")
    return list(poset.elements)


def is_section(poset: IndexPoset, members: Iterable, probe: Optional[Iterable] = None) -> bool:
    """Antichain test plus comparability of every probe index to a member.

    For finite posets the probe defaults to all elements, making the check
    exact; for oracle posets the result is only as strong as the probe.
    """
    mem = list(members.members) if isinstance(members, Section) else list(members)
    if not mem:
        raise EmptySection("a section must have at least one member")
    for a, b in combinations(mem, 2):
        if poset.comparable(a, b):
            return False
    for idx in _resolve_probe(poset, probe):
        if not any(poset.comparable(idx, m) for m in mem):
            return False
    return True


def enumerate_sections(poset: IndexPoset) -> list[Section]:
    """All sections of a finite poset, by antichain search plus coverage.

    Kept deliberately different from the brute-force power-set oracle used
    in the tests: antichains are grown element by element with comparability
    pruning, then filtered by the coverage condition.
    """
    if poset.elements is None:
        raise InfinitePoset("cannot enumerate sections of an oracle poset")
    els = poset.sort(poset.elements)
    found = []

    def covers(antichain):
        return all(any(poset.comparable(idx, m) for m in antichain) for idx in els)

    def grow(prefix, rest):
        if prefix and covers(prefix):
            found.append(Section(tuple(prefix)))
        for i, cand in enumerate(rest):
            if all(not poset.comparable(cand, m) for m in prefix):
                grow(prefix + [cand], rest[i + 1:])

    grow([], els)
    found.sort(key=lambda s: (len(s.members), tuple(poset.key(m) for m in s.members)))
    return found


def filter_base_set(poset: IndexPoset, section) -> FilterBaseSet:
    sec = section if isinstance(section, Section) else Section.of(poset, section)
    return FilterBaseSet(poset, sec)


def is_finitely_cylindrical_witness(poset: IndexPoset, section,
                                    probe: Optional[Iterable] = None) -> bool:
    """Certificate that the section is finite and covers the (probed) poset."""
    mem = list(section.members) if isinstance(section, Section) else list(section)
    return len(mem) < float("inf") and is_section(poset, mem, probe=probe)
