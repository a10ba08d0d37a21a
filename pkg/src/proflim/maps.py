"""Coordinate maps with Jacobian oracles.

Every level space is modeled as R^dim and every structural map between
levels (projection, injection, cylindrical base, bundle projection) is a
DifferentiableMap: an evaluator plus a Jacobian, analytic when supplied
and central finite differences otherwise.
"""
from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

FD_STEP = 1e-5


class DimensionMismatch(ValueError):
    """A point or map does not have the declared dimension."""


def as_point(x) -> np.ndarray:
    """Coerce to a 1-d float array (dim-0 points are allowed)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def fd_jacobian(fn: Callable, x, codomain_dim: int) -> np.ndarray:
    """Central-difference Jacobian, step h_i = FD_STEP * (1 + |x_i|)."""
    x = as_point(x)
    jac = np.zeros((codomain_dim, x.size))
    for i in range(x.size):
        h = FD_STEP * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (as_point(fn(xp)) - as_point(fn(xm))) / (2.0 * h)
    return jac


class DifferentiableMap:
    """A map R^m -> R^n carrying its own Jacobian oracle.

    `matrix` is set for linear maps; compositions stay linear when both
    factors are, which keeps tower algebra exact.
    """

    def __init__(self, domain_dim: int, codomain_dim: int,
                 fn: Callable[[np.ndarray], np.ndarray],
                 jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 matrix: Optional[np.ndarray] = None,
                 name: str = ""):
        self.domain_dim = int(domain_dim)
        self.codomain_dim = int(codomain_dim)
        self.fn = fn
        self._jac = jac
        self.matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        self.name = name
        if self.matrix is not None and self.matrix.shape != (self.codomain_dim, self.domain_dim):
            raise DimensionMismatch(
                f"matrix shape {self.matrix.shape} vs declared "
                f"({self.codomain_dim}, {self.domain_dim})")

    def __call__(self, x) -> np.ndarray:
        x = as_point(x)
        if x.size != self.domain_dim:
            raise DimensionMismatch(
                f"{self.name or 'map'}: point has dim {x.size}, expected {self.domain_dim}")
        y = as_point(self.fn(x))
        if y.size != self.codomain_dim:
            raise DimensionMismatch(
                f"{self.name or 'map'}: value has dim {y.size}, expected {self.codomain_dim}")
        return y

    def jacobian(self, x) -> np.ndarray:
        x = as_point(x)
        if self.matrix is not None:
            return self.matrix
        if self._jac is not None:
            jac = np.asarray(self._jac(x), dtype=float)
            return jac.reshape(self.codomain_dim, self.domain_dim)
        return self.fd_jacobian(x)

    def fd_jacobian(self, x) -> np.ndarray:
        return fd_jacobian(self.fn, x, self.codomain_dim)

    @property
    def is_linear(self) -> bool:
        return self.matrix is not None

    def __repr__(self):
        tag = self.name or ("linear" if self.is_linear else "smooth")
        return f"DifferentiableMap({tag}: {self.domain_dim}->{self.codomain_dim})"


def matrix_map(matrix, name: str = "") -> DifferentiableMap:
    mat = np.atleast_2d(np.asarray(matrix, dtype=float))
    return DifferentiableMap(mat.shape[1], mat.shape[0],
                             lambda x, _m=mat: _m @ x,
                             matrix=mat, name=name)


def identity_map(dim: int) -> DifferentiableMap:
    return DifferentiableMap(dim, dim, lambda x: x, matrix=np.eye(dim), name=f"id_{dim}")


def selection_map(domain_dim: int, indices: Sequence[int], name: str = "") -> DifferentiableMap:
    """Pick the listed coordinates, in order."""
    idx = tuple(int(i) for i in indices)
    mat = np.zeros((len(idx), domain_dim))
    for row, col in enumerate(idx):
        mat[row, col] = 1.0
    return DifferentiableMap(domain_dim, len(idx),
                             lambda x, _i=idx: x[list(_i)],
                             matrix=mat, name=name or f"select{idx}")


def scatter_map(codomain_dim: int, indices: Sequence[int], name: str = "") -> DifferentiableMap:
    """Place the input coordinates at the listed positions, zero elsewhere."""
    idx = tuple(int(i) for i in indices)
    mat = np.zeros((codomain_dim, len(idx)))
    for row, col in zip(idx, range(len(idx))):
        mat[row, col] = 1.0

    def fn(x, _i=idx, _n=codomain_dim):
        out = np.zeros(_n)
        out[list(_i)] = x
        return out

    return DifferentiableMap(len(idx), codomain_dim, fn, matrix=mat,
                             name=name or f"scatter{idx}")


def compose(outer: DifferentiableMap, inner: DifferentiableMap,
            name: str = "") -> DifferentiableMap:
    """outer after inner, with chain-rule Jacobian (exact when both linear)."""
    if inner.codomain_dim != outer.domain_dim:
        raise DimensionMismatch(
            f"cannot compose {outer!r} after {inner!r}")
    if outer.is_linear and inner.is_linear:
        return matrix_map(outer.matrix @ inner.matrix, name=name)

    def jac(x):
        mid = inner(x)
        return outer.jacobian(mid) @ inner.jacobian(x)

    return DifferentiableMap(inner.domain_dim, outer.codomain_dim,
                             lambda x: outer(inner(x)), jac=jac, name=name)


def fanout_map(maps: Sequence[DifferentiableMap], name: str = "") -> DifferentiableMap:
    """x -> concat(m_i(x)) for maps sharing one domain."""
    maps = list(maps)
    if not maps:
        raise DimensionMismatch("fanout of no maps")
    dom = maps[0].domain_dim
    if any(m.domain_dim != dom for m in maps):
        raise DimensionMismatch("fanout maps must share a domain")
    cod = sum(m.codomain_dim for m in maps)
    if all(m.is_linear for m in maps):
        return matrix_map(np.vstack([m.matrix for m in maps]), name=name)

    def fn(x):
        return np.concatenate([m(x) for m in maps]) if maps else np.zeros(0)

    def jac(x):
        return np.vstack([m.jacobian(x) for m in maps])

    return DifferentiableMap(dom, cod, fn, jac=jac, name=name)


def linear_combination_map(maps: Sequence[DifferentiableMap],
                           coeffs: Sequence[float], name: str = "") -> DifferentiableMap:
    """x -> sum_i c_i m_i(x) for maps sharing domain and codomain."""
    maps = list(maps)
    coeffs = [float(c) for c in coeffs]
    dom, cod = maps[0].domain_dim, maps[0].codomain_dim
    if all(m.is_linear for m in maps):
        total = sum(c * m.matrix for c, m in zip(coeffs, maps))
        return matrix_map(total, name=name)

    def fn(x):
        return sum(c * m(x) for c, m in zip(coeffs, maps))

    def jac(x):
        return sum(c * m.jacobian(x) for c, m in zip(coeffs, maps))

    return DifferentiableMap(dom, cod, fn, jac=jac, name=name)
