"""Towers of coordinate spaces tied by projections and injections.

A ProfiniteFamily assigns to every index J a level space R^dim(J), to every
comparable pair J <= K a surjective projection proj(J, K): E_K -> E_J and an
injective map inj(K, J): E_J -> E_K with proj(J, K) o inj(K, J) = id.  The
audited axioms are the projection consistency along chains, the retraction,
and the injection cocycle.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .maps import (DifferentiableMap, DimensionMismatch, as_point, compose,
                   identity_map, matrix_map)
from .poset import IndexPoset
from .report import VerificationReport


class FamilyMismatch(Exception):
    """Two objects do not live over the same family (or compatible ones)."""


@dataclass(frozen=True)
class LevelSpace:
    index: Any
    dim: int


class ProfiniteFamily:
    """Level dimensions plus projection/injection factories.

    Factories may return None for pairs they do not store directly; such
    maps are assembled by composing along a chain of stored pairs (the
    stored pair graph must connect J to K through intermediate indices).
    Produced maps are memoized; the family itself is immutable.
    """

    def __init__(self, poset: IndexPoset, level_dim: Callable[[Any], int],
                 proj_factory: Callable[[Any, Any], Optional[DifferentiableMap]],
                 inj_factory: Callable[[Any, Any], Optional[DifferentiableMap]],
                 stored_pairs: Optional[Sequence[tuple]] = None,
                 name: str = ""):
        self.poset = poset
        self._level_dim = level_dim
        self._proj_factory = proj_factory
        self._inj_factory = inj_factory
        # pairs (J, K) with J <= K for which the factories answer directly
        self.stored_pairs = None if stored_pairs is None else tuple(stored_pairs)
        self.name = name
        self._cache: dict = {}
        self._lock = threading.Lock()

    def level(self, J) -> LevelSpace:
        return LevelSpace(J, self.dim(J))

    def dim(self, J) -> int:
        return int(self._level_dim(J))

    def _cached(self, key, build):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = build()
        with self._lock:
            return self._cache.setdefault(key, value)

    def _chain_between(self, J, K) -> list:
        # BFS through stored pairs from K down to J (projection direction)
        if self.stored_pairs is None:
            raise FamilyMismatch(
                f"{self.name or 'family'}: no stored map for pair ({J!r}, {K!r}) "
                "and no stored-pair graph to compose along")
        frontier = [(K, [K])]
        seen = {self.poset.key(K)}
        while frontier:
            node, path = frontier.pop(0)
            for lo, hi in self.stored_pairs:
                if hi == node and self.poset.leq(J, lo):
                    if lo == J:
                        return path + [lo]
                    marker = self.poset.key(lo)
                    if marker not in seen:
                        seen.add(marker)
                        frontier.append((lo, path + [lo]))
        raise FamilyMismatch(
            f"{self.name or 'family'}: stored pairs do not connect {J!r} to {K!r}")

    def proj(self, J, K) -> DifferentiableMap:
        """The projection E_K -> E_J for J <= K."""
        if not self.poset.leq(J, K):
            raise FamilyMismatch(f"proj asked for a non-comparable pair ({J!r}, {K!r})")
        if J == K:
            return self._cached(("id", self.poset.key(J)),
                                lambda: identity_map(self.dim(J)))
        key = ("proj", self.poset.key(J), self.poset.key(K))

        def build():
            direct = self._proj_factory(J, K)
            if direct is not None:
                return self._check_dims(direct, self.dim(K), self.dim(J), f"proj({J!r},{K!r})")
            chain = self._chain_between(J, K)  # K = c0 > c1 > ... > J
            mp = identity_map(self.dim(K))
            for lo, hi in zip(chain[1:], chain[:-1]):
                step = self._proj_factory(lo, hi)
                if step is None:
                    raise FamilyMismatch(f"missing stored projection ({lo!r}, {hi!r})")
                mp = compose(self._check_dims(step, self.dim(hi), self.dim(lo),
                                              f"proj({lo!r},{hi!r})"), mp)
            return mp

        return self._cached(key, build)

    def inj(self, K, J) -> DifferentiableMap:
        """The injection E_J -> E_K for J <= K."""
        if not self.poset.leq(J, K):
            raise FamilyMismatch(f"inj asked for a non-comparable pair ({K!r}, {J!r})")
        if J == K:
            return self._cached(("id", self.poset.key(J)),
                                lambda: identity_map(self.dim(J)))
        key = ("inj", self.poset.key(K), self.poset.key(J))

        def build():
            direct = self._inj_factory(K, J)
            if direct is not None:
                return self._check_dims(direct, self.dim(J), self.dim(K), f"inj({K!r},{J!r})")
            chain = self._chain_between(J, K)  # K = c0 > ... > J, inject upward
            mp = identity_map(self.dim(J))
            for lo, hi in zip(chain[::-1][:-1], chain[::-1][1:]):
                step = self._inj_factory(hi, lo)
                if step is None:
                    raise FamilyMismatch(f"missing stored injection ({hi!r}, {lo!r})")
                mp = compose(self._check_dims(step, self.dim(lo), self.dim(hi),
                                              f"inj({hi!r},{lo!r})"), mp)
            return mp

        return self._cached(key, build)

    @staticmethod
    def _check_dims(mp: DifferentiableMap, dom: int, cod: int, label: str) -> DifferentiableMap:
        if mp.domain_dim != dom or mp.codomain_dim != cod:
            raise DimensionMismatch(
                f"{label}: declared {dom}->{cod}, map has {mp.domain_dim}->{mp.codomain_dim}")
        return mp

    def __repr__(self):
        return f"ProfiniteFamily({self.name or 'anonymous'})"


# ---------------------------------------------------------------------------
# sampling helpers


def sample_point(dim: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(dim)


def sample_chains(poset: IndexPoset, rng: np.random.Generator,
                  count: int = 30, length: int = 3) -> list[tuple]:
    """Random weakly increasing chains from a finite poset."""
    if poset.elements is None:
        raise FamilyMismatch("chain sampling needs a finite poset or explicit chains")
    els = list(poset.elements)
    chains = []
    for _ in range(count):
        top = els[rng.integers(len(els))]
        chain = [top]
        for _ in range(length - 1):
            below = [e for e in els if poset.leq(e, chain[-1])]
            chain.append(below[rng.integers(len(below))])
        chains.append(tuple(reversed(chain)))  # increasing
    return chains


# ---------------------------------------------------------------------------
# family audit


def verify_family(family: ProfiniteFamily, chains: Optional[Iterable[tuple]] = None,
                  points_per_chain: int = 100, tol: float = 1e-9,
                  rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """Numerically audit the family axioms along sampled chains.

    Checks, each reported with its max residual over all samples:
      identity     proj(J, J) = id
      consistency  proj(J, L) = proj(J, K) o proj(K, L)
      retraction   proj(J, K) o inj(K, J) = id on E_J
      cocycle      inj(K, J) o inj(J, I) = inj(K, I)
    """
    rng = rng or np.random.default_rng(0)
    if chains is None:
        chains = sample_chains(family.poset, rng)
    chains = [tuple(c) for c in chains]

    report = VerificationReport(f"family axioms: {family.name or 'anonymous'}")
    res_id = res_cons = res_retr = res_cocy = 0.0

    for chain in chains:
        chain = list(chain)
        for J in chain:
            ident = family.proj(J, J)
            for _ in range(max(1, points_per_chain // 10)):
                x = sample_point(family.dim(J), rng)
                res_id = max(res_id, float(np.max(np.abs(ident(x) - x), initial=0.0)))
        for J, K in zip(chain, chain[1:]):
            if J == K:
                continue
            pr, it = family.proj(J, K), family.inj(K, J)
            for _ in range(points_per_chain):
                y = sample_point(family.dim(J), rng)
                res_retr = max(res_retr, float(np.max(np.abs(pr(it(y)) - y), initial=0.0)))
        for I, K, L in zip(chain, chain[1:], chain[2:]):
            if len({family.poset.key(c) for c in (I, K, L)}) < 3:
                continue
            pJL, pJK, pKL = family.proj(I, L), family.proj(I, K), family.proj(K, L)
            iKJ, iJI, iKI = family.inj(L, K), family.inj(K, I), family.inj(L, I)
            for _ in range(points_per_chain):
                x = sample_point(family.dim(L), rng)
                res_cons = max(res_cons,
                               float(np.max(np.abs(pJL(x) - pJK(pKL(x))), initial=0.0)))
                z = sample_point(family.dim(I), rng)
                res_cocy = max(res_cocy,
                               float(np.max(np.abs(iKJ(iJI(z)) - iKI(z)), initial=0.0)))

    report.add("identity", res_id, tol)
    report.add("consistency", res_cons, tol)
    report.add("retraction", res_retr, tol)
    report.add("cocycle", res_cocy, tol)
    return report


# ---------------------------------------------------------------------------
# maps between families


@dataclass
class ProfiniteMap:
    """An order-preserving index map plus one level map per index.

    The level map at J goes from source level J to target level
    index_map(J); it must commute with the projections on both sides.
    """

    source: ProfiniteFamily
    target: ProfiniteFamily
    index_map: Callable[[Any], Any]
    level_map: Callable[[Any], DifferentiableMap]
    name: str = ""

    def __call__(self, J) -> DifferentiableMap:
        return self.level_map(J)


def compose_profinite_maps(f: ProfiniteMap, g: ProfiniteMap) -> ProfiniteMap:
    """f after g; index maps compose in the same order."""
    if g.target is not f.source:
        raise FamilyMismatch("compose: g must land in the source family of f")
    return ProfiniteMap(
        source=g.source, target=f.target,
        index_map=lambda J: f.index_map(g.index_map(J)),
        level_map=lambda J: compose(f.level_map(g.index_map(J)), g.level_map(J)),
        name=f"{f.name or 'f'}o{g.name or 'g'}")


def check_profinite_map(f: ProfiniteMap, pairs: Iterable[tuple],
                        samples: int = 20, tol: float = 1e-9,
                        rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """Commuting-square residual over sampled comparable pairs."""
    rng = rng or np.random.default_rng(0)
    res = 0.0
    order_ok = True
    for J, K in pairs:
        if not f.source.poset.leq(J, K):
            continue
        if not f.target.poset.leq(f.index_map(J), f.index_map(K)):
            order_ok = False
            continue
        fJ, fK = f.level_map(J), f.level_map(K)
        p_src = f.source.proj(J, K)
        p_tgt = f.target.proj(f.index_map(J), f.index_map(K))
        for _ in range(samples):
            x = sample_point(f.source.dim(K), rng)
            res = max(res, float(np.max(np.abs(p_tgt(fK(x)) - fJ(p_src(x))), initial=0.0)))
    report = VerificationReport(f"profinite map: {f.name or 'anonymous'}")
    report.add("index-map order-preserving", 0.0 if order_ok else 1.0, 0.5)
    report.add("commuting squares", res, tol)
    return report


def is_profinite_diffeomorphism(f: ProfiniteMap, g: ProfiniteMap,
                                indices: Iterable, samples: int = 20,
                                tol: float = 1e-9,
                                rng: Optional[np.random.Generator] = None) -> bool:
    """Check that g inverts f level-wise and on indices, at sampled points."""
    rng = rng or np.random.default_rng(0)
    for J in indices:
        K = f.index_map(J)
        if g.index_map(K) != J:
            return False
        fJ, gK = f.level_map(J), g.level_map(K)
        for _ in range(samples):
            x = sample_point(f.source.dim(J), rng)
            if np.max(np.abs(gK(fJ(x)) - x), initial=0.0) > tol:
                return False
            y = sample_point(f.target.dim(K), rng)
            if np.max(np.abs(fJ(gK(y)) - y), initial=0.0) > tol:
                return False
    return True


# ---------------------------------------------------------------------------
# tangent and cotangent structure


def _tangent_map(mp: DifferentiableMap) -> DifferentiableMap:
    """(x, v) -> (f(x), Df(x) v), with exact block Jacobian for linear f."""
    dom, cod = mp.domain_dim, mp.codomain_dim
    if mp.is_linear:
        block = np.zeros((2 * cod, 2 * dom))
        block[:cod, :dom] = mp.matrix
        block[cod:, dom:] = mp.matrix
        return matrix_map(block, name=f"T{mp.name}")

    def fn(xv):
        x, v = xv[:dom], xv[dom:]
        return np.concatenate([mp(x), mp.jacobian(x) @ v])

    return DifferentiableMap(2 * dom, 2 * cod, fn, name=f"T{mp.name}")


def tangent_family(family: ProfiniteFamily) -> ProfiniteFamily:
    """Levels double in dimension; maps act by (value, pushed vector)."""
    return ProfiniteFamily(
        poset=family.poset,
        level_dim=lambda J: 2 * family.dim(J),
        proj_factory=lambda J, K: _tangent_map(family.proj(J, K)),
        inj_factory=lambda K, J: _tangent_map(family.inj(K, J)),
        stored_pairs=family.stored_pairs,
        name=f"T({family.name or 'family'})")


def cotangent_maps(family: ProfiniteFamily, J, K, point_at_K):
    """Covector transport for the pair J <= K at a base point of E_K.

    Returns (push_up, push_down): push_up carries covectors at level J to
    level K through the transposed projection Jacobian, push_down carries
    them back through the transposed injection Jacobian taken at the
    projected base point.  push_down o push_up is the identity on covectors
    at level J (the dual of the retraction), exactly so for linear maps.
    """
    point_at_K = as_point(point_at_K)
    x_J = family.proj(J, K)(point_at_K)
    dproj = family.proj(J, K).jacobian(point_at_K)
    dinj = family.inj(K, J).jacobian(x_J)
    push_up = matrix_map(dproj.T, name=f"cotangent-up({J!r}->{K!r})")
    push_down = matrix_map(dinj.T, name=f"cotangent-down({K!r}->{J!r})")
    return push_up, push_down


# ---------------------------------------------------------------------------
# fibrations


@dataclass
class FibrationData:
    """A family of bundles: total and base families over one poset plus a
    bundle projection per level."""

    total: ProfiniteFamily
    base: ProfiniteFamily
    bundle_proj: Callable[[Any], DifferentiableMap]
    name: str = ""


def verify_fibration(data: FibrationData, pairs: Iterable[tuple],
                     samples: int = 20, tol: float = 1e-9,
                     rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """Bundle projections must intertwine both projections and injections."""
    rng = rng or np.random.default_rng(0)
    res_p = res_i = 0.0
    for J, K in pairs:
        if not data.total.poset.leq(J, K) or J == K:
            continue
        pJ, pK = data.bundle_proj(J), data.bundle_proj(K)
        for _ in range(samples):
            x = sample_point(data.total.dim(K), rng)
            lhs = pJ(data.total.proj(J, K)(x))
            rhs = data.base.proj(J, K)(pK(x))
            res_p = max(res_p, float(np.max(np.abs(lhs - rhs), initial=0.0)))
            y = sample_point(data.total.dim(J), rng)
            lhs = pK(data.total.inj(K, J)(y))
            rhs = data.base.inj(K, J)(pJ(y))
            res_i = max(res_i, float(np.max(np.abs(lhs - rhs), initial=0.0)))
    report = VerificationReport(f"fibration: {data.name or 'anonymous'}")
    report.add("bundle-projection vs projections", res_p, tol)
    report.add("bundle-projection vs injections", res_i, tol)
    return report
