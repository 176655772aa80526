"""Dense primal simplex for  max c.x  s.t.  A x <= b, x >= 0  with b >= 0.

The slack basis is feasible at the origin, so no phase one is needed.  Pivoting
uses Bland's rule (smallest eligible index enters, smallest basic index leaves
on ratio ties), which cannot cycle.  The final basis is re-solved directly to
clean up accumulated tableau error and yields a dual vector, so callers can
certify optimality without trusting the pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure

PIVOT_TOL = 1e-12
OPT_TOL = 1e-10


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    iterations: int
    basis: np.ndarray


def simplex_max(c, A, b, tol: float = PIVOT_TOL, opt_tol: float = OPT_TOL, max_iter: int = 200_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    rows, cols = A.shape
    if c.shape != (cols,) or b.shape != (rows,):
        raise ValueError("shape mismatch between c, A and b")
    if np.any(b < 0):
        raise ValueError("simplex_max needs b >= 0")

    # Tableau [A I b] with objective row [-c 0 0].
    T = np.zeros((rows + 1, cols + rows + 1))
    T[:rows, :cols] = A
    T[:rows, cols:cols + rows] = np.eye(rows)
    T[:rows, -1] = b
    T[-1, :cols] = -c
    basis = np.arange(cols, cols + rows)

    # Relative tolerance on reduced costs keeps Bland from chasing round-off.
    scale = max(1.0, float(np.max(np.abs(c))) if cols else 1.0)
    it = 0
    while True:
        reduced = T[-1, :-1]
        cand = np.flatnonzero(reduced < -opt_tol * scale)
        if cand.size == 0:
            break
        if it >= max_iter:
            raise NumericalFailure(f"simplex did not converge in {max_iter} pivots")
        j = int(cand[0])
        col = T[:rows, j]
        pos = col > tol
        if not pos.any():
            raise NumericalFailure("LP is unbounded")
        ratios = np.full(rows, np.inf)
        ratios[pos] = T[:rows, -1][pos] / col[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + tol * max(1.0, abs(rmin)))
        i = int(ties[np.argmin(basis[ties])])
        T[i] /= T[i, j]
        factors = T[:, j].copy()
        factors[i] = 0.0
        T -= np.outer(factors, T[i])
        basis[i] = j
        it += 1

    full = np.hstack([A, np.eye(rows)])
    B = full[:, basis]
    try:
        xb = np.linalg.solve(B, b)
        cb = np.concatenate([c, np.zeros(rows)])[basis]
        y = np.linalg.solve(B.T, cb)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"singular final basis: {exc}") from exc
    if np.any(xb < -1e-9):
        raise NumericalFailure("final basis is infeasible beyond tolerance")
    z = np.zeros(cols + rows)
    z[basis] = np.clip(xb, 0.0, None)
    x = z[:cols]
    return LPResult(x, float(c @ x), y, it, basis.copy())


def certify(c, A, b, res: LPResult, tol: float = 1e-9) -> float:
    """Check primal feasibility, dual feasibility and the duality gap.

    Returns the gap; raises NumericalFailure if any check fails beyond ``tol``
    (relative to the magnitudes involved).
    """
    c, A, b = (np.asarray(v, dtype=float) for v in (c, A, b))
    x, y = res.x, res.duals
    scale = max(1.0, float(np.max(np.abs(b))))
    if np.any(x < -tol) or np.any(A @ x - b > tol * scale):
        raise NumericalFailure("primal certificate violates a constraint")
    if np.any(y < -tol) or np.any(A.T @ y - c < -tol * max(1.0, float(np.max(np.abs(c))))):
        raise NumericalFailure("dual certificate is infeasible")
    gap = float(b @ y - c @ x)
    if abs(gap) > tol * max(1.0, abs(float(c @ x))):
        raise NumericalFailure(f"duality gap {gap:g} exceeds tolerance")
    return gap
