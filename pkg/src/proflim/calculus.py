"""Level-wise differential forms and metrics tied together by pullbacks.

A tame r-form stores one antisymmetric component array per level; the
arrays are compatible when each lower level's components equal the
injection pullback of any higher level's.  Exterior derivatives are taken
level by level: analytically for constant and symbolic payloads, by
central finite differences otherwise.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from .cylinder import CylindricalFunction, differential, pair_with_direction
from .family import ProfiniteFamily, sample_point
from .limits import Thread, thread_axpy
from .maps import FD_STEP, as_point
from .report import VerificationReport


def pull_components(comps: np.ndarray, jac: np.ndarray) -> np.ndarray:
    """Contract every slot of an r-form component array with a Jacobian.

    (pullback)_{a1..ar} = comps_{b1..br} * prod_k jac[b_k, a_k]; contracting
    the leading axis r times leaves the new axes in the original order.
    """
    out = np.asarray(comps, dtype=float)
    for _ in range(out.ndim):
        out = np.tensordot(out, jac, axes=([0], [0]))
    return out


def alternating_sum(partials: np.ndarray) -> np.ndarray:
    """Components of d(form) from the partials tensor P[j, i1..ir]."""
    r_plus_1 = partials.ndim
    out = np.zeros_like(partials)
    for k in range(r_plus_1):
        out = out + ((-1) ** k) * np.moveaxis(partials, 0, k)
    return out


class TameForm:
    """Per-level r-form components with a declared compatibility scope.

    comps(J, x) returns the dense antisymmetric component array, shape
    (dim,) * degree.  dcomps(J, x), when given, returns the partial tensor
    P[j, i1..ir] = d(comps_{i1..ir})/dx_j; otherwise finite differences are
    used for exterior derivatives.
    """

    def __init__(self, family: ProfiniteFamily, degree: int,
                 comps: Callable[[Any, np.ndarray], np.ndarray],
                 dcomps: Optional[Callable[[Any, np.ndarray], np.ndarray]] = None,
                 kind: str = "generic", payload=None,
                 certified_pairs: Optional[tuple] = None, name: str = ""):
        self.family = family
        self.degree = int(degree)
        self._comps = comps
        self._dcomps = dcomps
        self.kind = kind
        self.payload = payload
        self.certified_pairs = certified_pairs
        self.name = name

    def comps(self, J, x) -> np.ndarray:
        arr = np.asarray(self._comps(J, as_point(x)), dtype=float)
        expected = (self.family.dim(J),) * self.degree
        if arr.shape != expected:
            raise ValueError(
                f"{self.name or 'form'}: components at {J!r} have shape "
                f"{arr.shape}, expected {expected}")
        return arr

    def matrix(self, J, x) -> np.ndarray:
        if self.degree != 2:
            raise ValueError("matrix() is only defined for 2-forms")
        return self.comps(J, x)

    def partials(self, J, x) -> np.ndarray:
        x = as_point(x)
        if self._dcomps is not None:
            return np.asarray(self._dcomps(J, x), dtype=float)
        dim = self.family.dim(J)
        shape = (dim,) + (dim,) * self.degree
        out = np.zeros(shape)
        for j in range(dim):
            h = FD_STEP * (1.0 + abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            out[j] = (self.comps(J, xp) - self.comps(J, xm)) / (2.0 * h)
        return out

    def __repr__(self):
        return f"TameForm({self.name or 'anonymous'}, degree={self.degree}, kind={self.kind})"


def constant_form(family: ProfiniteFamily, degree: int,
                  level_comps: Callable[[Any], np.ndarray], name: str = "") -> TameForm:
    """x-independent components per level; d is exactly zero."""
    return TameForm(family, degree,
                    comps=lambda J, x: level_comps(J),
                    dcomps=lambda J, x: np.zeros((family.dim(J),) + (family.dim(J),) * degree),
                    kind="constant", payload=level_comps, name=name)


def symbolic_form(family: ProfiniteFamily, degree: int,
                  level_exprs: Callable[[Any], tuple], name: str = "") -> TameForm:
    """Components given per level as sympy expressions in the coordinates.

    level_exprs(J) returns (symbols, object-array of expressions).  The
    exterior derivative of a symbolic form is symbolic again, so repeated
    derivatives of polynomial payloads are exact (d o d vanishes to the
    last bit).
    """
    import sympy

    cache: dict = {}
    lock = threading.Lock()

    def compiled(J):
        key = family.poset.key(J)
        with lock:
            if key in cache:
                return cache[key]
        syms, exprs = level_exprs(J)
        exprs = np.asarray(exprs, dtype=object)
        flat = [sympy.sympify(e) for e in exprs.ravel()]
        fn = sympy.lambdify(list(syms), flat, "numpy")
        entry = (list(syms), exprs, fn)
        with lock:
            return cache.setdefault(key, entry)

    def comps(J, x):
        syms, exprs, fn = compiled(J)
        vals = fn(*x) if syms else fn()
        return np.asarray(vals, dtype=float).reshape(exprs.shape)

    def d_exprs(J):
        import sympy as sp
        syms, exprs, _ = compiled(J)
        dim = family.dim(J)
        shape = (dim,) + exprs.shape
        partial = np.empty(shape, dtype=object)
        for j in range(dim):
            for idx in np.ndindex(exprs.shape):
                partial[(j,) + idx] = sp.diff(sp.sympify(exprs[idx]), syms[j])
        r_plus_1 = partial.ndim
        out = np.empty(shape, dtype=object)
        for idx in np.ndindex(shape):
            total = sp.Integer(0)
            for k in range(r_plus_1):
                perm = (idx[k],) + idx[:k] + idx[k + 1:]
                total = total + ((-1) ** k) * partial[perm]
            out[idx] = sp.expand(total)
        return syms, out

    form = TameForm(family, degree, comps=comps, kind="symbolic",
                    payload=d_exprs, name=name)

    def dcomps(J, x):
        syms, exprs, _ = compiled(J)
        import sympy as sp
        dim = family.dim(J)
        out = np.zeros((dim,) + exprs.shape)
        for j in range(dim):
            for idx in np.ndindex(exprs.shape):
                out[(j,) + idx] = float(sp.diff(sp.sympify(exprs[idx]), syms[j])
                                        .subs(list(zip(syms, x))))
        return out

    form._dcomps = dcomps
    return form


def exterior_derivative(form: TameForm) -> TameForm:
    """Level-wise d; stays exact for constant and symbolic payloads."""
    fam, deg = form.family, form.degree
    if form.kind == "constant":
        return constant_form(fam, deg + 1,
                             lambda J: np.zeros((fam.dim(J),) * (deg + 1)),
                             name=f"d{form.name}")
    if form.kind == "symbolic":
        d_exprs = form.payload
        return symbolic_form(fam, deg + 1, d_exprs, name=f"d{form.name}")
    return TameForm(fam, deg + 1,
                    comps=lambda J, x: alternating_sum(form.partials(J, x)),
                    kind="generic", name=f"d{form.name}")


def pullback_inj(form: TameForm, I, K, point) -> np.ndarray:
    """Components at level I of the injection pullback of the level-K field,
    evaluated at a point of E_I."""
    point = as_point(point)
    inj = form.family.inj(K, I)
    return pull_components(form.comps(K, inj(point)), inj.jacobian(point))


def pushforward_proj(form: TameForm, I, K, point_at_K) -> np.ndarray:
    """Components at level K of the projection pullback of the level-I field
    (the canonical embedding of lower-level forms into higher levels)."""
    point_at_K = as_point(point_at_K)
    pr = form.family.proj(I, K)
    return pull_components(form.comps(I, pr(point_at_K)), pr.jacobian(point_at_K))


def pulled_level_field(form: TameForm, I, K) -> Callable[[np.ndarray], np.ndarray]:
    """The injection pullback of the level-K field as a function on E_I."""
    def field(x):
        return pullback_inj(form, I, K, x)
    return field


def check_tame(form: TameForm, pairs: Iterable[tuple], samples: int = 20,
               tol: float = 1e-9, rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """Injection-pullback compatibility residual over sampled pairs."""
    rng = rng or np.random.default_rng(0)
    res = 0.0
    worst = None
    for I, K in pairs:
        if not form.family.poset.leq(I, K) or I == K:
            continue
        for _ in range(samples):
            x = sample_point(form.family.dim(I), rng)
            gap = float(np.max(np.abs(pullback_inj(form, I, K, x) - form.comps(I, x)),
                               initial=0.0))
            if gap > res:
                res, worst = gap, (I, K)
    report = VerificationReport(f"tame form: {form.name or 'anonymous'}")
    report.add("injection-pullback compatibility", res, tol,
               detail="" if worst is None else f"worst pair {worst!r}")
    return report


# ---------------------------------------------------------------------------
# metrics


_METRIC_KINDS = ("riemannian", "pseudo-riemannian", "hermitian", "pseudo-hermitian")


@dataclass
class CompatibleMetric:
    """Per-level Gram fields g(J, x), compatible under injection pullback.

    Hermitian kinds live on even-dimensional real levels and carry a fixed
    complex-structure matrix per level; the Gram field must be invariant
    under it.
    """

    family: ProfiniteFamily
    symmetry: str
    gram: Callable[[Any, np.ndarray], np.ndarray]
    complex_structure: Optional[Callable[[Any], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        if self.symmetry not in _METRIC_KINDS:
            raise ValueError(f"unknown symmetry type {self.symmetry!r}")
        if "hermitian" in self.symmetry and self.complex_structure is None:
            raise ValueError("hermitian kinds need a complex_structure oracle")

    def matrix(self, J, x) -> np.ndarray:
        arr = np.asarray(self.gram(J, as_point(x)), dtype=float)
        d = self.family.dim(J)
        if arr.shape != (d, d):
            raise ValueError(f"gram at {J!r} has shape {arr.shape}, expected {(d, d)}")
        return arr


def _signature(mat: np.ndarray, rel_threshold: float = 1e-10) -> tuple:
    if mat.shape[0] == 0:
        return (0, 0, 0)
    eig = np.linalg.eigvalsh(mat)
    scale = float(np.max(np.abs(eig), initial=0.0))
    cut = rel_threshold * max(scale, 1e-300)
    return (int(np.sum(eig > cut)), int(np.sum(eig < -cut)),
            int(np.sum(np.abs(eig) <= cut)))


def metric_check(metric: CompatibleMetric, pairs: Iterable[tuple], samples: int = 20,
                 tol: float = 1e-9, rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """Compatibility, symmetry, and the definiteness demanded by the kind."""
    rng = rng or np.random.default_rng(0)
    pairs = [p for p in pairs if metric.family.poset.leq(p[0], p[1])]
    levels = sorted({J for p in pairs for J in p}, key=metric.family.poset.key)

    res_compat = 0.0
    for I, K in pairs:
        if I == K:
            continue
        inj = metric.family.inj(K, I)
        for _ in range(samples):
            x = sample_point(metric.family.dim(I), rng)
            jac = inj.jacobian(x)
            pulled = jac.T @ metric.matrix(K, inj(x)) @ jac
            res_compat = max(res_compat,
                             float(np.max(np.abs(pulled - metric.matrix(I, x)), initial=0.0)))

    res_sym = 0.0
    min_eig = np.inf
    signatures = set()
    res_cstr = 0.0
    for J in levels:
        d = metric.family.dim(J)
        if d == 0:
            continue
        cs = metric.complex_structure(J) if metric.complex_structure else None
        if cs is not None:
            res_cstr = max(res_cstr, float(np.max(np.abs(cs @ cs + np.eye(d)))))
        for _ in range(samples):
            x = sample_point(d, rng)
            g = metric.matrix(J, x)
            res_sym = max(res_sym, float(np.max(np.abs(g - g.T), initial=0.0)))
            min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(g))))
            signatures.add(_signature(g))
            if cs is not None:
                res_cstr = max(res_cstr, float(np.max(np.abs(cs.T @ g @ cs - g))))

    report = VerificationReport(f"metric: {metric.name or metric.symmetry}")
    report.add("injection-pullback compatibility", res_compat, tol)
    report.add("gram symmetry", res_sym, tol)
    if metric.symmetry in ("riemannian", "hermitian"):
        shortfall = 0.0 if (np.isinf(min_eig) or min_eig > 0) else abs(min_eig) + 1e-300
        report.add("positive-definite", shortfall, 0.0,
                   detail="" if np.isinf(min_eig) else f"smallest eigenvalue {min_eig:.3e}")
    else:
        report.add("constant signature", 0.0 if len(signatures) <= 1 else 1.0, 0.5,
                   detail=f"signatures {sorted(signatures)!r}")
    if "hermitian" in metric.symmetry:
        report.add("complex-structure invariance", res_cstr, tol)
    return report


# ---------------------------------------------------------------------------
# tangent threads and the duality check


@dataclass
class TangentThread:
    """A base thread plus a direction assignment compatible with the pushed
    projections: vec(J) = Dproj(J,K)(base(K)) . vec(K)."""

    base: Thread
    vec: Callable[[Any], np.ndarray]

    @staticmethod
    def from_threads(base: Thread, direction: Thread) -> "TangentThread":
        return TangentThread(base=base, vec=direction.value)

    def direction(self, J) -> np.ndarray:
        return as_point(self.vec(J))


def check_tangent_thread(v: TangentThread, pairs: Iterable[tuple],
                         tol: float = 1e-9) -> VerificationReport:
    fam = v.base.family
    res = 0.0
    for J, K in pairs:
        if not fam.poset.leq(J, K) or J == K:
            continue
        pushed = fam.proj(J, K).jacobian(v.base(K)) @ v.direction(K)
        res = max(res, float(np.max(np.abs(v.direction(J) - pushed), initial=0.0)))
    report = VerificationReport("tangent thread compatibility")
    report.add("pushed-projection compatibility", res, tol)
    return report


def tangent_duality_check(f: CylindricalFunction, v: TangentThread,
                          fd_step: float = FD_STEP) -> float:
    """Relative gap between the covector pairing <df, v> and the finite
    difference of f along v; the two coincide for tangent threads."""
    analytic = pair_with_direction(f, differential(f, v.base), v.vec)
    scale = 1.0 + float(np.linalg.norm(f.gather(v.base)))
    h = fd_step * scale
    plus = f(thread_axpy(v.base, h, v.vec))
    minus = f(thread_axpy(v.base, -h, v.vec))
    fd = (plus - minus) / (2.0 * h)
    return abs(analytic - fd) / (1.0 + abs(analytic))
