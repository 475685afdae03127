"""Small numerical building blocks: bracketed roots and tridiagonal solves."""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack
from scipy.optimize import brentq

from .errors import NumericalError

MAX_ITER = 200


def bracket_root(f, lo: float = 1e-8, hi: float = 1.0, rtol: float = 1e-12,
                 max_expand: int = MAX_ITER) -> float:
    """Root of ``f`` on (0, inf), bracketing by geometric expansion of [lo, hi].

    ``f(lo)`` and ``f(hi)`` must end up with opposite signs; ``lo`` shrinks
    toward zero and ``hi`` grows until they do.
    """
    flo, fhi = f(lo), f(hi)
    for _ in range(max_expand):
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if np.sign(flo) != np.sign(fhi):
            return brentq(f, lo, hi, xtol=1e-300, rtol=rtol, maxiter=MAX_ITER)
        if abs(flo) < abs(fhi):
            lo *= 0.5
            flo = f(lo)
        else:
            hi *= 2.0
            fhi = f(hi)
    raise NumericalError("could not bracket root", diagnostics={"lo": lo, "hi": hi, "flo": flo, "fhi": fhi})


def root_in(f, lo: float, hi: float, rtol: float = 1e-13) -> float:
    """Root of ``f`` on a known sign-changing bracket."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise NumericalError("root not bracketed", diagnostics={"lo": lo, "hi": hi, "flo": flo, "fhi": fhi})
    return brentq(f, lo, hi, xtol=1e-300, rtol=rtol, maxiter=MAX_ITER)


class Tridiagonal:
    """LU-factored tridiagonal matrix, reused for many right-hand sides.

    Diagonals follow LAPACK ``gttrf``: ``lower`` and ``upper`` have n - 1
    entries.
    """

    def __init__(self, lower, diag, upper):
        dl, d, du, du2, ipiv, info = lapack.dgttrf(np.asarray(lower, float),
                                                   np.asarray(diag, float),
                                                   np.asarray(upper, float))
        if info != 0:
            raise NumericalError(f"tridiagonal factorisation failed (info={info})",
                                 diagnostics={"lower": lower, "diag": diag, "upper": upper})
        self._lu = (dl, d, du, du2, ipiv)
        self.n = len(d)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x, info = lapack.dgttrs(*self._lu, rhs)
        if info != 0:
            raise NumericalError(f"tridiagonal solve failed (info={info})")
        return x


def diffusion_matrix(n: int, dx: float, coef: float, shift: float = 1.0,
                     boundary: str = "neumann") -> Tridiagonal:
    """Factor ``shift * I - coef * Laplacian_dx`` on ``n`` nodes.

    ``boundary="neumann"`` uses mirrored ghost nodes (zero flux);
    ``"dirichlet"`` leaves the end values out, so ``n`` counts interior
    nodes only and the caller adds ``coef / dx**2`` times the boundary data
    to the first and last right-hand-side entries.
    """
    r = coef / dx**2
    diag = np.full(n, shift + 2 * r)
    lower = np.full(n - 1, -r)
    upper = np.full(n - 1, -r)
    if boundary == "neumann":
        upper[0] = -2 * r
        lower[-1] = -2 * r
    elif boundary == "dirichlet":
        pass
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    return Tridiagonal(lower, diag, upper)


def second_difference(u: np.ndarray, dx: float) -> np.ndarray:
    """Centred second difference on interior nodes (length n - 2)."""
    return (u[2:] - 2 * u[1:-1] + u[:-2]) / dx**2
