"""Pure-numpy kernels for the dual functional and its subgradient.

Matches the compiled extension's contract: deterministic reductions
(numpy's pairwise summation), no shared state, identical call signatures.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "fallback"


def eval_dual(s, hbar, wx, wy, f, g, u, v) -> float:
    """I(u,v) = sum [s+u+v]_+ hbar wx wy - sum u f wx - sum v g wy."""
    sig = s + u[:, None] + v[None, :]
    integral = np.sum(np.maximum(sig, 0.0) * hbar * np.outer(wx, wy))
    return float(integral - (u * f) @ wx - (v * g) @ wy)


def eval_dual_with_subgrad(s, hbar, wx, wy, f, g, u, v, du, dv) -> float:
    """Fused evaluation: returns I(u,v) and writes the subgradient into du, dv.

    The subgradient selection at kinks is the strict-positivity indicator:
    du_i = wx_i (sum_j 1[s+u+v > 0] hbar_ij wy_j - f_i), and symmetrically
    for dv.
    """
    sig = s + u[:, None] + v[None, :]
    active = sig > 0.0
    value = float(
        np.sum(np.where(active, sig, 0.0) * hbar * np.outer(wx, wy))
        - (u * f) @ wx
        - (v * g) @ wy
    )
    hbar_active = np.where(active, hbar, 0.0)
    du[:] = wx * (hbar_active @ wy - f)
    dv[:] = wy * (wx @ hbar_active - g)
    return value
