"""Independent brute-force oracles the structured implementations are
tested against.  Everything here favors obviousness over speed."""
from itertools import combinations

import numpy as np


def powerset_sections(elements, leq):
    """All sections by filtering the full power set: nonempty subsets that
    are antichains and leave no element incomparable to every member."""
    els = list(elements)
    out = []
    for r in range(1, len(els) + 1):
        for cand in combinations(els, r):
            antichain = all(
                not (leq(a, b) or leq(b, a))
                for a, b in combinations(cand, 2))
            if not antichain:
                continue
            covers = all(
                any(leq(e, m) or leq(m, e) for m in cand) for e in els)
            if covers:
                out.append(frozenset(cand))
    return out


def exterior_derivative_fd(comps, x, dim, degree, h=1e-6):
    """(r+1)-form components by the textbook alternating-sum formula with
    plain central differences, written independently of the library."""
    partial = np.zeros((dim,) + (dim,) * degree)
    for j in range(dim):
        step = h * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        partial[j] = (comps(xp) - comps(xm)) / (2 * step)
    out = np.zeros((dim,) * (degree + 1))
    for idx in np.ndindex(out.shape):
        total = 0.0
        for k in range(degree + 1):
            rest = idx[:k] + idx[k + 1:]
            total += (-1) ** k * partial[(idx[k],) + rest]
        out[idx] = total
    return out


def pull_form(comps_arr, jac):
    """Pullback of an r-form component array along a linear map with the
    given Jacobian, via explicit index summation."""
    degree = comps_arr.ndim
    dom = jac.shape[1]
    out = np.zeros((dom,) * degree)
    for idx in np.ndindex(out.shape):
        total = 0.0
        for src in np.ndindex(comps_arr.shape):
            w = comps_arr[src]
            if w == 0.0:
                continue
            for k in range(degree):
                w *= jac[src[k], idx[k]]
            total += w
        out[idx] = total
    return out


def oscillator_exact(x0, t):
    """Closed-form harmonic oscillator trajectory for interleaved (q, p)
    pairs with H = |x|^2 / 2: each pair rotates clockwise."""
    x0 = np.asarray(x0, float)
    out = np.empty_like(x0)
    c, s = np.cos(t), np.sin(t)
    for i in range(x0.size // 2):
        q, p = x0[2 * i], x0[2 * i + 1]
        out[2 * i] = q * c + p * s
        out[2 * i + 1] = -q * s + p * c
    return out


def pl_interp_anchor(knots, values, t):
    """PL interpolation through (0,0) and the knots, constant after the
    last knot; written with np.interp for independence."""
    ts = np.concatenate([[0.0], np.asarray(knots, float)])
    vs = np.concatenate([[0.0], np.asarray(values, float)])
    return float(np.interp(t, ts, vs))
