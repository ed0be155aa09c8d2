"""Derivative-free reference minimizers for the proximal operators.

Each defining objective is minimized with scipy's Powell / Nelder-Mead over a
real parametrization. Constraints and nonsmooth norms are handled by smooth
reparametrizations so the search never has to sit on a kink:

* Hermitian PD matrices as floor*I + R R^H with R lower triangular.
* ||x||_2 = min_{s>0} (||x||^2 / s + s) / 2, with s = exp(t).
* ||Y||_* = min_{Y = U V^H} (||U||_F^2 + ||V||_F^2) / 2.
"""
import numpy as np
from scipy.optimize import minimize


def herm_from_real(v, p):
    out = np.zeros((p, p), dtype=complex)
    out[np.diag_indices(p)] = v[:p]
    iu = np.triu_indices(p, 1)
    n = len(iu[0])
    out[iu] = v[p:p + n] + 1j * v[p + n:p + 2 * n]
    out[(iu[1], iu[0])] = np.conj(out[iu])
    return out


def lower_from_real(v, p):
    out = np.zeros((p, p), dtype=complex)
    il = np.tril_indices(p)
    n = len(il[0])
    out[il] = v[:n] + 1j * v[n:2 * n]
    return out


def complex_from_real(v, shape):
    n = int(np.prod(shape))
    return (v[:n] + 1j * v[n:2 * n]).reshape(shape)


def real_from_complex(z):
    z = np.asarray(z).ravel()
    return np.concatenate([z.real, z.imag])


def _polish(fun, x0, maxiter=200000):
    best = None
    x = np.asarray(x0, dtype=float)
    for method in ("Powell", "Nelder-Mead"):
        opts = {"maxiter": maxiter, "maxfev": maxiter, "xtol": 1e-12, "ftol": 1e-14}
        if method == "Nelder-Mead":
            opts = {"maxiter": maxiter, "maxfev": maxiter, "xatol": 1e-11, "fatol": 1e-14, "adaptive": True}
        res = minimize(fun, x, method=method, options=opts)
        if best is None or res.fun < best.fun:
            best = res
        x = best.x
    return best


def hermitian_stack(rng, M, p, scale=1.0):
    a = rng.standard_normal((M, p, p)) + 1j * rng.standard_normal((M, p, p))
    return scale * (a + np.conj(np.swapaxes(a, 1, 2))) / 2


def pd_matrix(rng, p, floor=0.2):
    a = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    return a @ a.conj().T / p + floor * np.eye(p)


# ---------------------------------------------------------------- objectives

def logdet_objective(theta, f, s, rho):
    ev = np.linalg.eigvalsh(theta)
    if np.any(ev <= 0):
        return np.inf
    return float(-np.log(ev).sum() + np.trace(theta @ f).real + rho / 2 * np.linalg.norm(theta - s) ** 2)


def logdet_reference(f, s, rho):
    p = f.shape[0]
    n = p * (p + 1) // 2

    def fun(v):
        r = lower_from_real(v, p)
        return logdet_objective(r @ r.conj().T, f, s, rho)

    # start from the identity, not from the closed form
    x0 = np.zeros(2 * n)
    il = np.tril_indices(p)
    x0[:n] = (il[0] == il[1]).astype(float)
    res = _polish(fun, x0)
    r = lower_from_real(res.x, p)
    return r @ r.conj().T, res.fun


def group_objective(x, g, t):
    """1/2 ||X - G||_F^2 + t * sum over ordered pairs k != l of ||X_kl(.)||_2."""
    gn = np.sqrt(np.sum(np.abs(x) ** 2, axis=0))
    return float(0.5 * np.sum(np.abs(x - g) ** 2) + t * (gn.sum() - np.trace(gn)))


def group_reference(g, t):
    """Minimize the group objective over Hermitian stacks.

    The objective separates into the diagonal entries (unpenalized, so the
    minimizer copies G there) and one block per unordered pair (k, l). Each
    pair block holds the 2M real numbers of X_kl(.) and appears twice in the
    Frobenius term and twice in the penalty.
    """
    M, p, _ = g.shape
    x = np.zeros_like(g)
    idx = np.arange(p)
    x[:, idx, idx] = g[:, idx, idx].real
    for k in range(p):
        for l in range(k + 1, p):
            gk = g[:, k, l]

            def fun(v):
                z = v[:M] + 1j * v[M:2 * M]
                s = np.exp(v[2 * M])
                # variational form of ||z||_2, minimized jointly over s
                return float(np.sum(np.abs(z - gk) ** 2) + t * (np.sum(np.abs(z) ** 2) / s + s))

            x0 = np.concatenate([np.zeros(2 * M), [0.0]])
            res = _polish(fun, x0)
            z = res.x[:M] + 1j * res.x[M:2 * M]
            x[:, k, l] = z
            x[:, l, k] = np.conj(z)
    return x, group_objective(x, g, t)


def svt_objective(x, g, t, unfold):
    return float(0.5 * np.sum(np.abs(x - g) ** 2) + t * np.linalg.svd(unfold(x, 1), compute_uv=False).sum())


def svt_reference(g, t, unfold, fold):
    """Minimize 1/2 ||X - G||^2 + t ||X_(1)||_* over arbitrary complex stacks.

    Works on the p x pM unfolding Y = U V^H, which turns the nuclear norm into
    the smooth (||U||^2 + ||V||^2) / 2.
    """
    M, p, _ = g.shape
    y = unfold(g, 1)
    nu, nv = (p, p), (p * M, p)

    def split(v):
        a = 2 * p * p
        return complex_from_real(v[:a], nu), complex_from_real(v[a:], nv)

    def fun(v):
        u, w = split(v)
        return float(
            0.5 * np.sum(np.abs(u @ w.conj().T - y) ** 2)
            + t * 0.5 * (np.sum(np.abs(u) ** 2) + np.sum(np.abs(w) ** 2))
        )

    # balanced start from the unthresholded unfolding
    uu, ss, vh = np.linalg.svd(y, full_matrices=False)
    x0 = np.concatenate([real_from_complex(uu * np.sqrt(ss)), real_from_complex(vh.conj().T * np.sqrt(ss))])
    res = _polish(fun, x0)
    u, w = split(res.x)
    x = fold(u @ w.conj().T, 1, M)
    return x, svt_objective(x, g, t, unfold)


def clip_objective(x, s):
    return float(0.5 * np.linalg.norm(x - s) ** 2)


def clip_reference(s, floor, starts=4, seed=0):
    """Minimize 1/2 ||X - S||_F^2 subject to X >= floor * I, as X = floor*I + R R^H.

    R = 0 is a stationary point of this parametrization, so the search is
    restarted from the identity, a diagonal start read off S and random
    points, keeping the best.
    """
    p = s.shape[0]
    n = p * (p + 1) // 2
    il = np.tril_indices(p)
    diag = (il[0] == il[1]).astype(float)

    def fun(v):
        r = lower_from_real(v, p)
        return clip_objective(floor * np.eye(p) + r @ r.conj().T, s)

    head = np.sqrt(np.abs(np.real(np.diag(s)) - floor) + 0.1)
    inits = [np.concatenate([diag, np.zeros(n)]), np.zeros(2 * n)]
    inits[1][:n][diag > 0] = head
    rng = np.random.default_rng(seed)
    inits += [rng.standard_normal(2 * n) for _ in range(starts)]
    best = min((_polish(fun, x0) for x0 in inits), key=lambda r: r.fun)
    r = lower_from_real(best.x, p)
    x = floor * np.eye(p) + r @ r.conj().T
    return x, clip_objective(x, s)
