"""Independent reference implementations the tests check the package against.

Everything here is deliberately written on a different code path from the
package: plain loops instead of vectorized cumulative sums, flood fill
instead of scipy labeling, an accelerated projected-gradient QP solver
instead of SMO. Oracles never import the functions they verify.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap


# ---------------------------------------------------------------------------
# Otsu: exhaustive scan over interior bin edges
# ---------------------------------------------------------------------------

def otsu_scan(bin_count, lo, hi, counts):
    """Exhaustive between-class-variance maximizer.

    Returns (threshold, per-edge variance list). Scans every interior edge
    with running prefix sums; ties keep the earliest (lowest) edge.
    """
    total = 0
    for b in range(bin_count):
        total += int(counts[b])
    bw = (hi - lo) / bin_count
    wt = 0.0
    st = 0.0
    for b in range(bin_count):
        w_b = counts[b] / total
        c_b = lo + (b + 0.5) * bw
        wt += w_b
        st += w_b * c_b
    best_k = 1
    best_var = -1.0
    variances = []
    w0 = 0.0
    s0 = 0.0
    for k in range(1, bin_count):
        w_b = counts[k - 1] / total
        c_b = lo + (k - 1 + 0.5) * bw
        w0 += w_b
        s0 += w_b * c_b
        w1 = wt - w0
        if w0 > 0 and w1 > 0:
            mu0 = s0 / w0
            mu1 = (st - s0) / w1
            var = w0 * w1 * (mu0 - mu1) ** 2
        else:
            var = 0.0
        variances.append(var)
        if var > best_var:
            best_var = var
            best_k = k
    return lo + best_k * bw, variances


def class_variances(bin_count, lo, hi, counts, k):
    """(between, within, total) variance for the split at edge k (fresh sums)."""
    total = sum(int(c) for c in counts)
    bw = (hi - lo) / bin_count
    centers = [lo + (b + 0.5) * bw for b in range(bin_count)]
    w = [c / total for c in counts]
    mu_t = sum(wi * ci for wi, ci in zip(w, centers))
    var_t = sum(wi * (ci - mu_t) ** 2 for wi, ci in zip(w, centers))
    w0 = sum(w[:k])
    w1 = sum(w[k:])
    if w0 == 0 or w1 == 0:
        return 0.0, var_t, var_t
    mu0 = sum(wi * ci for wi, ci in zip(w[:k], centers[:k])) / w0
    mu1 = sum(wi * ci for wi, ci in zip(w[k:], centers[k:])) / w1
    var0 = sum(wi * (ci - mu0) ** 2 for wi, ci in zip(w[:k], centers[:k])) / w0
    var1 = sum(wi * (ci - mu1) ** 2 for wi, ci in zip(w[k:], centers[k:])) / w1
    between = w0 * w1 * (mu0 - mu1) ** 2
    within = w0 * var0 + w1 * var1
    return between, within, var_t


# ---------------------------------------------------------------------------
# Connected components: flood fill
# ---------------------------------------------------------------------------

def flood_fill_components(mask):
    """List of 8-connected components, each a set of (row, col)."""
    mask = np.asarray(mask, dtype=bool)
    seen = np.zeros_like(mask)
    comps = []
    nrows, ncols = mask.shape
    for r0 in range(nrows):
        for c0 in range(ncols):
            if not mask[r0, c0] or seen[r0, c0]:
                continue
            comp = set()
            stack = [(r0, c0)]
            seen[r0, c0] = True
            while stack:
                r, c = stack.pop()
                comp.add((r, c))
                for dr in (-1, 0, 1):
                    for dc in (-1, 0, 1):
                        rr, cc = r + dr, c + dc
                        if (
                            0 <= rr < nrows
                            and 0 <= cc < ncols
                            and mask[rr, cc]
                            and not seen[rr, cc]
                        ):
                            seen[rr, cc] = True
                            stack.append((rr, cc))
            comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# Point-in-polygon: scalar even-odd ray cast
# ---------------------------------------------------------------------------

def point_in_ring(px, py, vertices):
    """Even-odd rule with the same half-open boundary convention."""
    inside = False
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if (y1 > py) != (y2 > py):
            xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if px < xint:
                inside = not inside
    return inside


# ---------------------------------------------------------------------------
# Dense QP oracle for the epsilon-SVR dual
# ---------------------------------------------------------------------------

def _project_box_hyperplane(z, c, n):
    """Project z onto {theta in [0, c]^2n : sum(alpha) - sum(alpha*) = 0}.

    The projection is clip(z - lam*p, 0, c) with p = [+1..., -1...]. The
    balance g(lam) = sum(alpha) - sum(alpha*) is piecewise linear and
    nonincreasing in lam, so the exact root is found by evaluating g at
    every clipping breakpoint and interpolating inside the bracketing
    segment.
    """
    zp = z[:n]
    zm = z[n:]
    # lam values where any coordinate enters/leaves its clip range
    bps = np.concatenate([zp, zp - c, -zm, c - zm])
    bps = np.unique(bps)

    def balance(lams):
        a = np.clip(zp[None, :] - lams[:, None], 0.0, c).sum(axis=1)
        b = np.clip(zm[None, :] + lams[:, None], 0.0, c).sum(axis=1)
        return a - b

    g = balance(bps)
    # g(bps[0]) = n*c and g(bps[-1]) = -n*c, so the root is always bracketed
    if g[0] <= 0.0:
        lam = bps[0]
    elif g[-1] >= 0.0:
        lam = bps[-1]
    else:
        hi = int(np.searchsorted(-g, 0.0, side="left"))  # first g[hi] <= 0
        lo = hi - 1
        g_lo, g_hi = g[lo], g[hi]
        if g_hi == g_lo:
            lam = bps[hi]
        else:
            lam = bps[lo] + (bps[hi] - bps[lo]) * g_lo / (g_lo - g_hi)
    out = np.empty_like(z)
    out[:n] = np.clip(zp - lam, 0.0, c)
    out[n:] = np.clip(zm + lam, 0.0, c)
    return out


def qp_dual_objective(K, y, eps, beta):
    """Oracle-side W(beta); independent expression of the dual objective."""
    quad = 0.0
    n = len(beta)
    Kb = K @ beta
    for i in range(n):
        quad += beta[i] * Kb[i]
    return -0.5 * quad - eps * float(np.sum(np.abs(beta))) + float(np.dot(y, beta))


@njit(cache=True)
def _qp_project(z, c, n, bps, out):  # pragma: no cover - jitted
    """Exact projection onto the box-hyperplane set, via binary search over
    the sorted clipping breakpoints of the piecewise-linear balance."""
    nb = bps.shape[0]

    def _balance(lam):
        s = 0.0
        for t in range(n):
            a = z[t] - lam
            if a < 0.0:
                a = 0.0
            elif a > c:
                a = c
            b = z[n + t] + lam
            if b < 0.0:
                b = 0.0
            elif b > c:
                b = c
            s += a - b
        return s

    g_lo = _balance(bps[0])
    g_hi = _balance(bps[nb - 1])
    if g_lo <= 0.0:
        lam = bps[0]
    elif g_hi >= 0.0:
        lam = bps[nb - 1]
    else:
        lo = 0
        hi = nb - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _balance(bps[mid]) > 0.0:
                lo = mid
                g_lo = _balance(bps[mid])
            else:
                hi = mid
        g_lo = _balance(bps[lo])
        g_hi = _balance(bps[hi])
        if g_hi == g_lo:
            lam = bps[hi]
        else:
            lam = bps[lo] + (bps[hi] - bps[lo]) * g_lo / (g_lo - g_hi)
    for t in range(n):
        a = z[t] - lam
        out[t] = 0.0 if a < 0.0 else (c if a > c else a)
        b = z[n + t] + lam
        out[n + t] = 0.0 if b < 0.0 else (c if b > c else b)


@njit(cache=True)
def _fw_gap(theta, grad, c, n):  # pragma: no cover - jitted
    """Frank-Wolfe duality gap: an exact upper bound on f(theta) - f*.

    gap = <g, theta> - min{<g, w> : w in [0,c]^2n, sum(a) = sum(a*)}.
    The LP minimum has a closed form: pairing the k-th smallest gradient
    entries of the two blocks, each pair with negative sum contributes c
    times that sum (continuous knapsack argument).
    """
    gp = np.sort(grad[:n])
    gm = np.sort(grad[n:])
    lp_min = 0.0
    for k in range(n):
        s = gp[k] + gm[k]
        if s < 0.0:
            lp_min += c * s
    cur = 0.0
    for t in range(2 * n):
        cur += grad[t] * theta[t]
    return cur - lp_min


@njit(cache=True)
def _qp_fista(K, y, c, eps, L, max_iter, check_every, gap_tol):  # pragma: no cover
    """FISTA with function-value restarts; returns theta = [alpha; alpha*].

    min f(theta) = 1/2 d' K d + eps*sum(theta) - y'd,  d = alpha - alpha*,
    over the box [0, c]^2n intersected with sum(alpha) = sum(alpha*).
    Stops when the Frank-Wolfe gap certifies excess <= gap_tol.
    """
    n = y.shape[0]
    two_n = 2 * n
    bps_buf = np.empty(4 * n)
    grad = np.empty(two_n)
    z = np.empty(two_n)

    def _f(theta):
        val = 0.0
        for i_ in range(n):
            d_i = theta[i_] - theta[n + i_]
            s = 0.0
            for j_ in range(n):
                s += K[i_, j_] * (theta[j_] - theta[n + j_])
            val += 0.5 * d_i * s - y[i_] * d_i
        for t_ in range(two_n):
            val += eps * theta[t_]
        return val

    def _grad_into(theta):
        for i_ in range(n):
            s = 0.0
            for j_ in range(n):
                s += K[i_, j_] * (theta[j_] - theta[n + j_])
            grad[i_] = s + eps - y[i_]
            grad[n + i_] = -s + eps + y[i_]

    def _proj(src, dst):
        for t_ in range(n):
            bps_buf[4 * t_] = src[t_]
            bps_buf[4 * t_ + 1] = src[t_] - c
            bps_buf[4 * t_ + 2] = -src[n + t_]
            bps_buf[4 * t_ + 3] = c - src[n + t_]
        bps = np.sort(bps_buf)
        _qp_project(src, c, n, bps, dst)

    theta = np.zeros(two_n)
    v = theta.copy()
    theta_new = np.empty(two_n)
    best = theta.copy()
    f_best = _f(theta)
    t_k = 1.0
    for it in range(max_iter):
        _grad_into(v)
        for t_ in range(two_n):
            z[t_] = v[t_] - grad[t_] / L
        _proj(z, theta_new)
        # gradient-alignment adaptive restart (O'Donoghue-Candes)
        align = 0.0
        for t_ in range(two_n):
            align += (v[t_] - theta_new[t_]) * (theta_new[t_] - theta[t_])
        if align > 0.0:
            t_k = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        coef = (t_k - 1.0) / t_next
        for t_ in range(two_n):
            v[t_] = theta_new[t_] + coef * (theta_new[t_] - theta[t_])
        theta[:] = theta_new
        t_k = t_next
        if (it + 1) % check_every == 0:
            f_cur = _f(theta)
            if f_cur < f_best:
                f_best = f_cur
                best[:] = theta
            _grad_into(best)
            if _fw_gap(best, grad, c, n) <= gap_tol:
                break
    f_cur = _f(theta)
    if f_cur < f_best:
        best[:] = theta
    return best


def qp_solve(K, y, c, eps, max_iter=2_000_000, check_every=64, gap_tol=1e-8):
    """Accelerated projected-gradient solve of the epsilon-SVR dual.

    Returns (beta, W, certified_gap). The Frank-Wolfe gap bounds the
    remaining objective excess from above, so gap <= gap_tol guarantees
    the reported W is within gap_tol of the true dual optimum.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = len(y)
    ew = np.linalg.eigvalsh(K)
    L = 2.0 * max(float(ew[-1]), 1e-12) * 1.01
    theta = _qp_fista(K, y, float(c), float(eps), L, max_iter, check_every, gap_tol)
    # collapse complementarity: shrinking both alpha and alpha* by their
    # minimum preserves beta and feasibility and never increases f
    m = np.minimum(theta[:n], theta[n:])
    theta[:n] -= m
    theta[n:] -= m
    beta = theta[:n] - theta[n:]
    d = theta[:n] - theta[n:]
    grad = np.concatenate([K @ d + eps - y, -(K @ d) + eps + y])
    gap = float(_fw_gap(theta, grad, float(c), n))
    return beta, qp_dual_objective(K, y, eps, beta), gap
