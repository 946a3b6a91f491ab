"""Compiled inner loops of the node-relocation optimizer.

These mirror ``energy.strain_energy_density`` and friends on scalar data;
the test suite cross-checks the two implementations.
"""
import math

import numpy as np
from numba import njit

FREE = 0
BOUND = 1
FROZEN = 2


@njit(cache=True)
def _reg(J, root, delta):
    # cancellation-free for J << 0
    if J >= 0.0:
        return 0.5 * (J + root)
    return 2.0 * delta * delta / (root - J)


@njit(cache=True)
def _density(f00, f01, f10, f11, mu, lam, delta):
    J = f00 * f11 - f01 * f10
    root = math.sqrt(J * J + 4.0 * delta * delta)
    Jd = _reg(J, root, delta)
    lg = math.log(Jd)
    I1 = f00 * f00 + f01 * f01 + f10 * f10 + f11 * f11
    return 0.5 * mu * (I1 - 2.0) - mu * lg + 0.5 * lam * lg * lg


@njit(cache=True)
def _element_energy(e, X, conn, G, Tinv, wdet, delta, mu, lam):
    """Returns (energy, min det J_M) of element e."""
    nq = G.shape[0]
    nn = conn.shape[1]
    total = 0.0
    min_det = np.inf
    for q in range(nq):
        j00 = 0.0
        j01 = 0.0
        j10 = 0.0
        j11 = 0.0
        for i in range(nn):
            k = conn[e, i]
            gx = G[q, i, 0]
            gy = G[q, i, 1]
            x = X[k, 0]
            y = X[k, 1]
            j00 += x * gx
            j01 += x * gy
            j10 += y * gx
            j11 += y * gy
        dj = j00 * j11 - j01 * j10
        if dj < min_det:
            min_det = dj
        t00 = Tinv[e, q, 0, 0]
        t01 = Tinv[e, q, 0, 1]
        t10 = Tinv[e, q, 1, 0]
        t11 = Tinv[e, q, 1, 1]
        f00 = j00 * t00 + j01 * t10
        f01 = j00 * t01 + j01 * t11
        f10 = j10 * t00 + j11 * t10
        f11 = j10 * t01 + j11 * t11
        total += wdet[e, q] * _density(f00, f01, f10, f11, mu, lam, delta[e])
    return total, min_det


@njit(cache=True)
def element_energies(X, conn, G, Tinv, wdet, delta, mu, lam):
    m = conn.shape[0]
    out = np.empty(m)
    for e in range(m):
        out[e] = _element_energy(e, X, conn, G, Tinv, wdet, delta, mu, lam)[0]
    return out


@njit(cache=True)
def _patch_energy(n, X, conn, G, Tinv, wdet, delta, mu, lam, ptr, adj):
    """Energy of the elements around node n and whether all stay valid."""
    total = 0.0
    valid = True
    for k in range(ptr[n], ptr[n + 1]):
        en, md = _element_energy(adj[k], X, conn, G, Tinv, wdet, delta, mu, lam)
        total += en
        if not md > 0.0:
            valid = False
    return total, valid


@njit(cache=True)
def _node_gradient(n, X, conn, G, Tinv, wdet, delta, mu, lam, ptr, adj):
    nq = G.shape[0]
    nn = conn.shape[1]
    g0 = 0.0
    g1 = 0.0
    for k in range(ptr[n], ptr[n + 1]):
        e = adj[k]
        loc = 0
        for i in range(nn):
            if conn[e, i] == n:
                loc = i
        for q in range(nq):
            j00 = 0.0
            j01 = 0.0
            j10 = 0.0
            j11 = 0.0
            for i in range(nn):
                kk = conn[e, i]
                gx = G[q, i, 0]
                gy = G[q, i, 1]
                j00 += X[kk, 0] * gx
                j01 += X[kk, 0] * gy
                j10 += X[kk, 1] * gx
                j11 += X[kk, 1] * gy
            t00 = Tinv[e, q, 0, 0]
            t01 = Tinv[e, q, 0, 1]
            t10 = Tinv[e, q, 1, 0]
            t11 = Tinv[e, q, 1, 1]
            f00 = j00 * t00 + j01 * t10
            f01 = j00 * t01 + j01 * t11
            f10 = j10 * t00 + j11 * t10
            f11 = j10 * t01 + j11 * t11
            J = f00 * f11 - f01 * f10
            d = delta[e]
            root = math.sqrt(J * J + 4.0 * d * d)
            Jd = _reg(J, root, d)
            # dJd/dJ = Jd / root
            coef = (lam * math.log(Jd) - mu) / root
            # P = mu F + coef cof(F)
            p00 = mu * f00 + coef * f11
            p01 = mu * f01 - coef * f10
            p10 = mu * f10 - coef * f01
            p11 = mu * f11 + coef * f00
            gx = G[q, loc, 0]
            gy = G[q, loc, 1]
            c0 = gx * t00 + gy * t10
            c1 = gx * t01 + gy * t11
            w = wdet[e, q]
            g0 += w * (p00 * c0 + p01 * c1)
            g1 += w * (p10 * c0 + p11 * c1)
    return g0, g1


@njit(cache=True)
def curve_point(ck, cd, c, t):
    if ck[c] == 0:
        return cd[c, 0] + t * (cd[c, 2] - cd[c, 0]), cd[c, 1] + t * (cd[c, 3] - cd[c, 1])
    th = cd[c, 3] + t * (cd[c, 4] - cd[c, 3])
    return cd[c, 0] + cd[c, 2] * math.cos(th), cd[c, 1] + cd[c, 2] * math.sin(th)


@njit(cache=True)
def curve_tangent(ck, cd, c, t):
    if ck[c] == 0:
        return cd[c, 2] - cd[c, 0], cd[c, 3] - cd[c, 1]
    th = cd[c, 3] + t * (cd[c, 4] - cd[c, 3])
    s = cd[c, 2] * (cd[c, 4] - cd[c, 3])
    return -s * math.sin(th), s * math.cos(th)


@njit(cache=True)
def sweep(order, X, kind, bcurve, bt, step, step_max, conn, G, Tinv, wdet, delta, mu, lam,
          ptr, adj, ck, cd, armijo, backtrack, ls_max):
    """One Gauss-Seidel pass over ``order``; mutates X, bt and step.

    Each node takes a normalized-gradient step of length ``step[n]`` (a
    displacement for free nodes, a parameter change for bound ones),
    backtracked until Armijo holds, the patch energy strictly drops and
    every adjacent element keeps det J_M > 0 at all quadrature points.
    Returns the largest node displacement.
    """
    max_disp = 0.0
    for idx in range(order.shape[0]):
        n = order[idx]
        if kind[n] == FROZEN:
            continue
        e0, _ = _patch_energy(n, X, conn, G, Tinv, wdet, delta, mu, lam, ptr, adj)
        g0, g1 = _node_gradient(n, X, conn, G, Tinv, wdet, delta, mu, lam, ptr, adj)
        x0 = X[n, 0]
        y0 = X[n, 1]
        if kind[n] == FREE:
            gnorm = math.sqrt(g0 * g0 + g1 * g1)
            slope = gnorm
        else:
            c = bcurve[n]
            t0 = bt[n]
            tx, ty = curve_tangent(ck, cd, c, t0)
            gt = g0 * tx + g1 * ty
            slope = abs(gt)
        if not slope > 0.0:
            continue
        s = step[n]
        accepted = False
        for _ in range(ls_max):
            if kind[n] == FREE:
                X[n, 0] = x0 - s * g0 / gnorm
                X[n, 1] = y0 - s * g1 / gnorm
                moved = s
            else:
                t1 = t0 - s if gt > 0 else t0 + s
                t1 = min(max(t1, 0.0), 1.0)
                moved = abs(t1 - t0)
                px, py = curve_point(ck, cd, c, t1)
                X[n, 0] = px
                X[n, 1] = py
            if moved > 0.0:
                e1, valid = _patch_energy(n, X, conn, G, Tinv, wdet, delta, mu, lam, ptr, adj)
                if valid and e1 < e0 and e1 <= e0 - armijo * moved * slope:
                    accepted = True
                    break
            s *= backtrack
        if accepted:
            if kind[n] == BOUND:
                bt[n] = t1
            d = math.hypot(X[n, 0] - x0, X[n, 1] - y0)
            if d > max_disp:
                max_disp = d
            step[n] = min(2.0 * s, step_max[n])
        else:
            X[n, 0] = x0
            X[n, 1] = y0
            step[n] = max(s, 1e-12 * step_max[n])
    return max_disp
