"""Presymplectic towers, Hamiltonian fields, flows, and momentum maps.

Component arrays contract first slot first, so the field of a Hamiltonian
H solves Omega^T X = grad H at each level (LU with partial pivoting).  Rank
decisions use singular values relative to the largest one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from .calculus import TameForm, exterior_derivative
from .cylinder import CylindricalFunction, level_function, linear_combination
from .family import ProfiniteFamily, sample_point
from .maps import FD_STEP, as_point, fd_jacobian
from .report import VerificationReport

RANK_RTOL = 1e-10


class SingularForm(Exception):
    """The form matrix is rank deficient where full rank was required."""


class NonconvergentSolve(Exception):
    """An implicit integrator step did not converge."""


class NonSymplecticAction(Exception):
    """The group action fails the form-preservation certificate."""


class ZeroVector(Exception):
    """A nondegeneracy probe needs a nonzero vector."""


def level_rank(matrix: np.ndarray, rel_threshold: float = RANK_RTOL) -> int:
    if matrix.size == 0:
        return 0
    sv = np.linalg.svd(matrix, compute_uv=False)
    top = float(sv[0])
    if top == 0.0:
        return 0
    return int(np.sum(sv > rel_threshold * top))


def _level_matrix(obj, J, x) -> np.ndarray:
    # TameForm (degree 2) and CompatibleMetric both expose .matrix
    return obj.matrix(J, x)


@dataclass
class SymplecticStructure:
    """A degree-2 tame form with its closedness certificate and rank profile."""

    omega: TameForm
    closedness_residual: float
    rank_profile: dict
    tol: float

    @property
    def is_symplectic(self) -> bool:
        return (self.closedness_residual <= self.tol and
                all(info["rank"] == info["dim"] and info["constant"]
                    for info in self.rank_profile.values()))

    @property
    def family(self) -> ProfiniteFamily:
        return self.omega.family

    def matrix(self, J, x) -> np.ndarray:
        return self.omega.matrix(J, x)

    @staticmethod
    def build(omega: TameForm, levels: Iterable, samples: int = 10,
              tol: float = 1e-9, rng: Optional[np.random.Generator] = None
              ) -> "SymplecticStructure":
        if omega.degree != 2:
            raise ValueError("a symplectic candidate must be a 2-form")
        rng = rng or np.random.default_rng(0)
        fam = omega.family
        d_omega = exterior_derivative(omega)
        closed_res = 0.0
        profile = {}
        for J in levels:
            dim = fam.dim(J)
            ranks = set()
            for _ in range(samples):
                x = sample_point(dim, rng)
                closed_res = max(closed_res,
                                 float(np.max(np.abs(d_omega.comps(J, x)), initial=0.0)))
                mat = omega.matrix(J, x)
                skew = float(np.max(np.abs(mat + mat.T), initial=0.0))
                closed_res = max(closed_res, 0.0)
                if skew > tol:
                    raise SingularForm(f"components at {J!r} are not antisymmetric")
                ranks.add(level_rank(mat))
            profile[J] = {"dim": dim, "rank": max(ranks) if ranks else 0,
                          "constant": len(ranks) <= 1}
        return SymplecticStructure(omega, closed_res, profile, tol)


def is_projectively_nondegenerate(obj, levels: Iterable, samples: int = 10,
                                  rng: Optional[np.random.Generator] = None,
                                  rel_threshold: float = RANK_RTOL):
    """Full rank at every listed level, with the per-level rank report."""
    rng = rng or np.random.default_rng(0)
    fam = obj.family
    profile = {}
    verdict = True
    for J in levels:
        dim = fam.dim(J)
        rank = dim
        for _ in range(samples):
            x = sample_point(dim, rng)
            rank = min(rank, level_rank(_level_matrix(obj, J, x), rel_threshold))
        profile[J] = {"dim": dim, "rank": rank, "full": rank == dim}
        verdict = verdict and rank == dim
    return verdict, profile


def is_weakly_nondegenerate(obj, u, I, search_levels: Iterable,
                            base_point=None, threshold: float = RANK_RTOL,
                            rng: Optional[np.random.Generator] = None):
    """Search the given levels for a pairing partner of the pushed vector.

    Returns (True, (J, basis_index, value)) on the first witness, else
    (False, None): a False is only "unwitnessed within the search budget",
    never a proof of degeneracy.
    """
    fam = obj.family
    u = as_point(u)
    if float(np.max(np.abs(u), initial=0.0)) == 0.0:
        raise ZeroVector("weak nondegeneracy asks about a nonzero vector")
    if base_point is None:
        base_point = np.zeros(fam.dim(I))
    base_point = as_point(base_point)
    for J in search_levels:
        if not fam.poset.leq(I, J):
            continue
        inj = fam.inj(J, I)
        pushed = inj.jacobian(base_point) @ u
        mat = _level_matrix(obj, J, inj(base_point))
        pairings = mat.T @ pushed  # value against each basis vector
        scale = max(float(np.max(np.abs(mat), initial=0.0)), 1.0)
        hits = np.where(np.abs(pairings) > threshold * scale)[0]
        if hits.size:
            k = int(hits[np.argmax(np.abs(pairings[hits]))])
            return True, (J, k, float(pairings[k]))
    return False, None


# ---------------------------------------------------------------------------
# Hamiltonian fields and flows


def level_gradient(H: CylindricalFunction, J) -> Callable[[np.ndarray], np.ndarray]:
    lf = level_function(H, J)
    return lambda x: lf.jacobian(x).ravel()


def hamiltonian_field(structure, H: CylindricalFunction, J, point) -> np.ndarray:
    """Solve Omega^T X = grad H at one level; SingularForm when deficient."""
    point = as_point(point)
    omega = structure.omega if isinstance(structure, SymplecticStructure) else structure
    mat = omega.matrix(J, point)
    if mat.shape[0] == 0:
        return np.zeros(0)
    if level_rank(mat) < mat.shape[0]:
        raise SingularForm(f"form is degenerate at level {J!r} "
                           f"(rank {level_rank(mat)} < {mat.shape[0]})")
    grad = level_gradient(H, J)(point)
    return np.linalg.solve(mat.T, grad)


def hamiltonian_identity_residual(structure, H: CylindricalFunction, J, point) -> float:
    """max_k | omega(X_H, e_k) - dH(e_k) | at the point."""
    point = as_point(point)
    omega = structure.omega if isinstance(structure, SymplecticStructure) else structure
    X = hamiltonian_field(structure, H, J, point)
    lhs = omega.matrix(J, point).T @ X
    rhs = level_gradient(H, J)(point)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def hamiltonian_compat_check(structure, H: CylindricalFunction, pairs: Iterable[tuple],
                             samples: int = 20, tol: float = 1e-10,
                             rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """Pushed fields agree: Dproj(J,K) X_K = X_J at projected points."""
    rng = rng or np.random.default_rng(0)
    fam = (structure.omega if isinstance(structure, SymplecticStructure) else structure).family
    res = 0.0
    worst = None
    for J, K in pairs:
        if not fam.poset.leq(J, K) or J == K:
            continue
        pr = fam.proj(J, K)
        for _ in range(samples):
            x = sample_point(fam.dim(K), rng)
            XK = hamiltonian_field(structure, H, K, x)
            XJ = hamiltonian_field(structure, H, J, pr(x))
            gap = float(np.max(np.abs(pr.jacobian(x) @ XK - XJ), initial=0.0))
            if gap > res:
                res, worst = gap, (J, K)
    report = VerificationReport("hamiltonian projection compatibility")
    report.add("Dproj . X_K = X_J", res, tol,
               detail="" if worst is None else f"worst pair {worst!r}")
    return report


def canonical_omega(dim: int) -> np.ndarray:
    """Components of sum_i dx_{2i} ^ dx_{2i+1}; odd dims leave a null row."""
    out = np.zeros((dim, dim))
    for i in range(dim // 2):
        out[2 * i, 2 * i + 1] = 1.0
        out[2 * i + 1, 2 * i] = -1.0
    return out


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray

    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energies - self.energies[0])))

    def write_csv(self, fh) -> None:
        dim = self.states.shape[1]
        header = "step,t," + ",".join(f"x{i}" for i in range(dim)) + ",H"
        fh.write(header + "\n")
        for k in range(self.states.shape[0]):
            coords = ",".join(repr(float(c)) for c in self.states[k])
            fh.write(f"{k},{float(self.times[k])!r},{coords},"
                     f"{float(self.energies[k])!r}\n")


def _leapfrog(grad: Callable, x0: np.ndarray, dt: float, steps: int) -> np.ndarray:
    # kick-drift-kick on interleaved (q, p) pairs; assumes separable H
    q_idx = np.arange(0, x0.size, 2)
    p_idx = np.arange(1, x0.size, 2)
    states = np.empty((steps + 1, x0.size))
    states[0] = x0
    x = x0.copy()
    for k in range(steps):
        g = grad(x)
        x[p_idx] -= 0.5 * dt * g[q_idx]          # half kick: dp = -dH/dq
        g = grad(x)
        x[q_idx] += dt * g[p_idx]                # drift: dq = +dH/dp
        g = grad(x)
        x[p_idx] -= 0.5 * dt * g[q_idx]          # half kick
        states[k + 1] = x
    return states


def _implicit_midpoint(omega_at: Callable, grad: Callable, x0: np.ndarray,
                       dt: float, steps: int, newton_iters: int = 50) -> np.ndarray:
    dim = x0.size

    def field(x):
        return np.linalg.solve(omega_at(x).T, grad(x))

    states = np.empty((steps + 1, dim))
    states[0] = x0
    x = x0.copy()
    for k in range(steps):
        y = x + dt * field(x)
        converged = False
        for _ in range(newton_iters):
            mid = 0.5 * (x + y)
            G = y - x - dt * field(mid)
            if float(np.max(np.abs(G), initial=0.0)) <= 1e-12 * (1.0 + float(np.max(np.abs(y)))):
                converged = True
                break
            hess = fd_jacobian(grad, mid, dim)
            JG = np.eye(dim) - 0.5 * dt * np.linalg.solve(omega_at(mid).T, hess)
            y = y - np.linalg.solve(JG, G)
        if not converged:
            raise NonconvergentSolve(f"implicit midpoint stalled at step {k}")
        x = y
        states[k + 1] = x
    return states


def flow(structure, H: CylindricalFunction, J, x0, dt: float, steps: int,
         scheme: str = "leapfrog", newton_iters: int = 50) -> Trajectory:
    """Integrate the Hamiltonian field at one level.

    leapfrog needs the canonical interleaved pair layout and a separable H;
    implicit-midpoint (Newton) works for any constant-rank invertible form.
    """
    omega = structure.omega if isinstance(structure, SymplecticStructure) else structure
    x0 = as_point(x0).copy()
    dim = x0.size
    mat0 = omega.matrix(J, x0)
    if level_rank(mat0) < dim:
        raise SingularForm(f"cannot flow on a degenerate level {J!r}")
    lf = level_function(H, J)
    grad = lambda x: lf.jacobian(x).ravel()

    if scheme == "leapfrog":
        if dim % 2 or float(np.max(np.abs(mat0 - canonical_omega(dim)), initial=0.0)) > 1e-12:
            raise ValueError("leapfrog needs the canonical pair layout; "
                             "use scheme='implicit-midpoint'")
        states = _leapfrog(grad, x0, dt, steps)
    elif scheme == "implicit-midpoint":
        states = _implicit_midpoint(lambda x: omega.matrix(J, x), grad, x0, dt, steps,
                                    newton_iters=newton_iters)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    times = dt * np.arange(steps + 1)
    energies = np.array([float(lf(s)[0]) for s in states])
    return Trajectory(times, states, energies)


# ---------------------------------------------------------------------------
# group actions and momentum maps


@dataclass
class ProfiniteGroupAction:
    """A per-level linear-group action with its Lie algebra generators.

    generators(J) lists the algebra basis at level J; act(J, g, x) applies a
    group element; restrict(J, K, g) carries a level-K element down to level
    J so the compatibility with projections can be sampled.
    """

    family: ProfiniteFamily
    generators: Callable[[Any], Sequence[np.ndarray]]
    act: Callable[[Any, np.ndarray, np.ndarray], np.ndarray]
    restrict: Optional[Callable[[Any, Any, np.ndarray], np.ndarray]] = None
    name: str = ""

    def exp(self, xi: np.ndarray) -> np.ndarray:
        return scipy.linalg.expm(xi)

    def algebra_element(self, J, coeffs: Sequence[float]) -> np.ndarray:
        gens = list(self.generators(J))
        if len(coeffs) != len(gens):
            raise ValueError(f"{len(coeffs)} coefficients for {len(gens)} generators")
        return sum(c * g for c, g in zip(coeffs, gens))


def check_action_compat(action: ProfiniteGroupAction, pairs: Iterable[tuple],
                        samples: int = 10, tol: float = 1e-9,
                        rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """proj(J,K) . act_K(g) = act_J(restrict(g)) . proj(J,K) on samples."""
    rng = rng or np.random.default_rng(0)
    fam = action.family
    res = 0.0
    for J, K in pairs:
        if not fam.poset.leq(J, K) or J == K or action.restrict is None:
            continue
        pr = fam.proj(J, K)
        n_gen = len(list(action.generators(K)))
        for _ in range(samples):
            coeffs = rng.standard_normal(n_gen)
            g = action.exp(action.algebra_element(K, coeffs))
            x = sample_point(fam.dim(K), rng)
            lhs = pr(action.act(K, g, x))
            rhs = action.act(J, action.restrict(J, K, g), pr(x))
            res = max(res, float(np.max(np.abs(lhs - rhs), initial=0.0)))
    report = VerificationReport(f"group action compatibility: {action.name or 'anonymous'}")
    report.add("projections intertwine the action", res, tol)
    return report


@dataclass
class MomentumMap:
    """One cylindrical function per generator; linear in the coefficients."""

    action: ProfiniteGroupAction
    functions: Sequence[CylindricalFunction]

    def of(self, coeffs: Sequence[float]) -> CylindricalFunction:
        return linear_combination(list(self.functions), list(coeffs),
                                  name="momentum")


def momentum_verify(structure, action: ProfiniteGroupAction, mu: MomentumMap,
                    coeffs: Sequence[float], J, samples: int = 10,
                    tol: float = 1e-6, symplectic_tol: float = 1e-8,
                    group_elements: int = 20,
                    rng: Optional[np.random.Generator] = None) -> VerificationReport:
    """Certify the action preserves the form, then compare the finite
    difference generator of the action with the field of mu(coeffs).

    Raises NonSymplecticAction when the preservation certificate fails.
    """
    rng = rng or np.random.default_rng(0)
    omega = structure.omega if isinstance(structure, SymplecticStructure) else structure
    fam = omega.family
    dim = fam.dim(J)
    n_gen = len(list(action.generators(J)))

    sympl_res = 0.0
    for _ in range(group_elements):
        c = rng.standard_normal(n_gen)
        g = action.exp(action.algebra_element(J, c))
        x = sample_point(dim, rng)
        gx = action.act(J, g, x)
        # linear action: Dphi_g = g
        pulled = g.T @ omega.matrix(J, gx) @ g
        sympl_res = max(sympl_res,
                        float(np.max(np.abs(pulled - omega.matrix(J, x)), initial=0.0)))
    if sympl_res > symplectic_tol:
        raise NonSymplecticAction(
            f"action does not preserve the form: residual {sympl_res:.3e}")

    xi = action.algebra_element(J, coeffs)
    H = mu.of(coeffs)
    gen_res = 0.0
    for _ in range(samples):
        x = sample_point(dim, rng)
        h = FD_STEP * (1.0 + float(np.max(np.abs(x))))
        forward = action.act(J, action.exp(h * xi), x)
        backward = action.act(J, action.exp(-h * xi), x)
        fd_gen = (forward - backward) / (2.0 * h)
        X = hamiltonian_field(structure, H, J, x)
        gen_res = max(gen_res, float(np.max(np.abs(fd_gen - X), initial=0.0)))

    report = VerificationReport("momentum map")
    report.add("action preserves the form", sympl_res, symplectic_tol)
    report.add("momentum field matches the action generator", gen_res, tol)
    return report
