"""Independent oracles the tests check the package against.

These deliberately avoid the code paths they verify: the eigenvalue oracle
solves the characteristic cubic in closed form instead of calling LAPACK,
the EOS oracle inverts by plain bisection instead of Newton, and the
Jacobian oracle uses one-sided forward differences.
"""

import numpy as np


def eigvals_cubic(h):
    """Eigenvalues of a 3x3 Hermitian matrix from its characteristic cubic.

    Trigonometric solution of lambda^3 - c2 lambda^2 + c1 lambda - c0 = 0,
    followed by two Newton polish steps on the polynomial.  Returns the
    three real eigenvalues sorted ascending.
    """
    h = np.asarray(h, dtype=complex)
    c2 = h.trace().real
    c1 = (
        h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
        + h[0, 0] * h[2, 2] - h[0, 2] * h[2, 0]
        + h[1, 1] * h[2, 2] - h[1, 2] * h[2, 1]
    ).real
    c0 = np.linalg.det(h).real  # determinant is the only allowed helper

    # depressed cubic t^3 + p t + q with lambda = t + c2/3
    shift = c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = c2 * c1 / 3.0 - 2.0 * c2 ** 3 / 27.0 - c0
    if p >= -1e-300:
        roots = np.full(3, shift)
    else:
        m = 2.0 * np.sqrt(-p / 3.0)
        arg = np.clip(3.0 * q / (p * m), -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        k = np.arange(3)
        roots = m * np.cos(theta - 2.0 * np.pi * k / 3.0) + shift

    def poly(x):
        return ((x - c2) * x + c1) * x - c0

    def dpoly(x):
        return (3.0 * x - 2.0 * c2) * x + c1

    for _ in range(2):
        d = dpoly(roots)
        safe = np.abs(d) > 1e-300
        roots = np.where(safe, roots - poly(roots) / np.where(safe, d, 1.0), roots)
    return np.sort(roots)


def bisect_eos_volume(pressure_fn, p, lo, hi, iters=200):
    """Invert a strictly decreasing P(V) by plain bisection on [lo, hi]."""
    flo, fhi = pressure_fn(lo) - p, pressure_fn(hi) - p
    if flo < 0 or fhi > 0:
        raise ValueError("bisection bracket does not contain the root")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pressure_fn(mid) - p > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def forward_difference_jacobian(fun, x, rel_step=1e-7):
    """One-sided finite-difference Jacobian of a vector-valued function."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x))
    jac = np.empty((len(f0), len(x)))
    for i in range(len(x)):
        h = rel_step * max(abs(x[i]), 1.0)
        xp = x.copy()
        xp[i] += h
        jac[:, i] = (np.asarray(fun(xp)) - f0) / h
    return jac
