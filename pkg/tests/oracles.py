"""Independent reference computations used only by the tests.

Nothing here imports the solver internals: each oracle uses a different
method (closed forms, finite differences, plain adaptive quadrature).
"""
import numpy as np
from scipy import integrate, sparse, special
from scipy.sparse.linalg import spsolve


def principal_root(zeta):
    w = np.sqrt(complex(zeta))
    return w if w.imag > 0 or (w.imag == 0 and w.real >= 0) else -w


def free_resolvent(f, support, zeta, x):
    """``(-d^2/dx^2 - zeta)^{-1} f`` at ``x`` via the kernel ``i e^{iw|x-s|} / (2w)``."""
    w = principal_root(zeta)
    lo, hi = support
    out = []
    for xx in np.atleast_1d(x):
        pts = [xx] if lo < xx < hi else None
        re = integrate.quad(lambda s: (1j * np.exp(1j * w * abs(xx - s)) * f(s) / (2 * w)).real,
                            lo, hi, points=pts, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        im = integrate.quad(lambda s: (1j * np.exp(1j * w * abs(xx - s)) * f(s) / (2 * w)).imag,
                            lo, hi, points=pts, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        out.append(re + 1j * im)
    return np.array(out)


def delta_transmission(k, beta):
    """Transmission amplitude of ``beta * delta(x)``."""
    return 2j * k / (2j * k - beta)


def coulomb_pair_bessel(x):
    """Closed form of the origin pair for ``q = 1``, ``zeta = 0``.

    ``phi = sqrt(x) I1(2 sqrt(x))`` and
    ``psi = 2 sqrt(x) K1(2 sqrt(x)) - 2 gamma phi``: the small-argument
    expansion ``2r K1(2r) = 1 + x ln x + (2 gamma - 1) x + ...`` shows that
    the last term enforces ``psi' - ln x -> 0``.  Returns ``(phi, phi', psi, psi')``.
    """
    r = np.sqrt(x)
    z = 2 * r
    phi = r * special.i1(z)
    dphi = special.i0(z)  # d/dx [r I1(2r)] = I0(2r)
    k_part = 2 * r * special.k1(z)
    dk_part = -2 * special.k0(z)  # d/dx [2r K1(2r)] = -2 K0(2r)
    c = -2 * np.euler_gamma
    return phi, dphi, k_part + c * phi, dk_part + c * dphi


def finite_difference_resolvent(W, zeta, f, L=5.0, n=20001, jumps=()):
    """Second-order finite differences for ``-y'' + (W - zeta) y = f`` on ``[-L, L]``.

    Potential values at nodes sitting on a jump are replaced by the average
    of the one-sided limits.  The ends use the exact outgoing closure
    ``y_ghost = y_end * exp(i w h)``.
    """
    x = np.linspace(-L, L, n)
    h = x[1] - x[0]
    Wv = np.array([W(xx) for xx in x], dtype=float)
    for xj in jumps:
        j = int(round((xj + L) / h))
        if abs(x[j] - xj) < 1e-9 * h:
            Wv[j] = 0.5 * (W(xj - 1e-12) + W(xj + 1e-12))
    w = principal_root(zeta)
    closure = np.exp(1j * w * h)
    main = 2.0 / h**2 + Wv - zeta
    main = main.astype(complex)
    main[0] -= closure / h**2
    main[-1] -= closure / h**2
    off = -np.ones(n - 1) / h**2
    A = sparse.diags([off, main, off], [-1, 0, 1], format="csc")
    y = spsolve(A, f(x).astype(complex))
    return x, y


def brute_pairing(W, psi, support, breaks):
    """``int W psi`` by adaptive quadrature in ``x`` with explicit break points."""
    lo, hi = support
    pts = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        total += integrate.quad(lambda x: W(x) * psi(x), a, b, epsabs=1e-13, epsrel=1e-12, limit=500)[0]
    return total
