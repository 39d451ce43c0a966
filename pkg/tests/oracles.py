"""Reference solutions built without the package's code paths."""

import math

import numpy as np
from scipy import integrate


def waterfill_exact(eigenvalues, noise_variance, budget):
    """Water level by the sorted-prefix formula.

    For the ``K`` smallest noise levels ``nu_k^2`` the candidate level is
    ``(S + sum nu_k^2) / K``; the right ``K`` is the largest one whose level
    still exceeds its own ``nu_{K-1}^2``.
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    lam = lam[lam > 0]
    nu2 = noise_variance / lam
    level = None
    for K in range(1, nu2.size + 1):
        cand = (budget + nu2[:K].sum()) / K
        if cand > nu2[K - 1]:
            level = cand
        else:
            break
    return level


def eig2x2(a, b, c):
    """Eigenvalues of the symmetric matrix ``[[a, b], [b, c]]`` from its characteristic polynomial."""
    tr = a + c
    det = a * c - b * b
    disc = math.sqrt(tr * tr / 4 - det)
    return tr / 2 + disc, tr / 2 - disc


def gaussian_operator_eigenvalues(spread, n):
    """Exact eigenvalues of ``P_r^* P_r`` for the Gaussian Weyl symbol.

    The Weyl operator of ``exp(-(t^2 + omega^2) / (2 r^2))`` is a function of
    the harmonic oscillator (Mehler kernel); with ``b = atanh(1 / (2 r^2))``
    the eigenvalues of ``P_r`` are ``cosh(b) exp(-b (2k + 1))``.
    """
    b = math.atanh(1.0 / (2.0 * spread ** 2))
    k = np.arange(n)
    return math.cosh(b) ** 2 * np.exp(-2.0 * b * (2 * k + 1))


def radial_integral(f, spread, snr):
    """``int int_{u >= 1/snr} f(u) dt domega`` for ``u = exp(-rho^2 / r^2)``.

    A shear preserves area, so the Gaussian symbol reduces to a one
    dimensional radial integral ``2 pi int_0^R f(u(rho)) rho drho``.
    """
    R = spread * math.sqrt(math.log(snr))
    val, _ = integrate.quad(lambda rho: f(math.exp(-rho * rho / spread ** 2)) * rho,
                            0.0, R, epsabs=1e-14, epsrel=1e-13)
    return 2 * math.pi * val


def random_channel(rng, L=None, max_size=8):
    L = int(rng.integers(1, max_size + 1)) if L is None else L
    return rng.standard_normal((L, L))
