"""Thin wrapper around ``scipy.integrate.solve_ivp`` (RK45) with the
package's failure semantics: blow-up sentinel and stiffness detection."""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BlowupError, StiffnessError

RTOL = 1e-10
ATOL = 1e-12
BLOWUP = 1e12


def integrate(rhs, r_span, y0, r_eval, rtol=RTOL, atol=ATOL, sentinel=BLOWUP,
              events=(), label="system"):
    """Integrate ``y' = rhs(r, y)`` and return ``(r, Y)`` with ``Y`` of shape (len(r), dim).

    Raises
    ------
    BlowupError
        If ``max|y|`` exceeds ``sentinel``.
    StiffnessError
        If the step size underflows or the solver otherwise fails.

    Extra terminal ``events`` may be supplied; the solution is then
    truncated at the first one and ``(r, Y, event_index)`` is returned.
    """
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise StiffnessError(f"{label}: non-finite initial state")

    def blowup(r, y):
        return sentinel - np.max(np.abs(y))

    blowup.terminal = True
    all_events = [blowup] + list(events)
    sol = solve_ivp(rhs, r_span, y0, method="RK45", t_eval=r_eval, rtol=rtol,
                    atol=atol, events=all_events)
    if sol.status == -1:
        raise StiffnessError(f"{label}: {sol.message}")
    if sol.t_events[0].size:
        raise BlowupError(
            f"{label}: state norm exceeded {sentinel:.1e} at r = {sol.t_events[0][0]:.4g}"
        )
    Y = sol.y.T
    if not np.all(np.isfinite(Y)):
        raise StiffnessError(f"{label}: non-finite state")
    if events:
        hit = [i for i, t in enumerate(sol.t_events[1:]) if t.size]
        return sol.t, Y, (hit[0] if hit else None)
    return sol.t, Y
