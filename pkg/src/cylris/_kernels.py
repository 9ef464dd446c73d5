"""Hot optimizer loop, numba-jitted with a pure-numpy fallback.

The same source runs both ways: with numba available (default) the loop is
compiled with ``@njit``; setting the environment variable
``CYLRIS_NO_NUMBA=1`` (or failing to import numba) selects the plain-numpy
path. ``descend`` is the active backend, ``descend_numpy`` always the pure
one; ``benchmarks/bench_backends.py`` times and cross-checks the two.

The loop maximizes the product (f_u + c_u)(f_v + c_v), with
f_i = a_i * |sum_n rho_i[n] e^{j phi_n}|^2, by stepping the shared phases
against the analytic gradient and re-aligning each user-specific phase in
closed form after every step. Coefficients arrive pre-scaled so the
product is O(1); callers undo the scaling on the reported trace.
"""

from __future__ import annotations

import math
import os

import numpy as np

TWO_PI = 2.0 * math.pi

# Step-size control around the configured base step: halve on a rejected
# trial, double after 5 consecutive accepts (never past _GROWTH_CAP times
# the base, never below base when growing). A trial rejected through
# _MAX_BACKTRACK halvings means the gradient step cannot improve the
# objective at float resolution, which is treated as convergence.
_GROWTH_CAP = 2.0 ** 40
_MAX_BACKTRACK = 120
_STREAK_FOR_GROWTH = 5
_TINY = 1e-300


def _descend_impl(rho_u, rho_v, a_u, c_u, a_v, c_v, phases0, shared,
                  spec_u, spec_v, eps_base, tol, max_iter, sweep_tol,
                  max_sweeps):
    """Run the hybrid ascent; see module docstring.

    Returns (phases, trace, gradient_iterations, closed_form_updates,
    converged) where ``trace`` holds the product objective at the start
    and after every accepted iteration.
    """

    def sweeps(phases, z, rho, idx, s):
        # Gauss-Seidel alignment of one user's specific elements, ascending
        # index, repeated until no phase moves more than sweep_tol.
        count = 0
        for _ in range(max_sweeps):
            moved = 0.0
            for k in range(idx.size):
                j = idx[k]
                r = rho[j]
                if r.real == 0.0 and r.imag == 0.0:
                    continue
                rest = s - z[j]
                if rest.real == 0.0 and rest.imag == 0.0:
                    new = 0.0
                else:
                    new = (math.atan2(rest.imag, rest.real)
                           - math.atan2(r.imag, r.real)) % TWO_PI
                delta = abs(new - phases[j])
                if delta > math.pi:
                    delta = TWO_PI - delta
                if delta > moved:
                    moved = delta
                zj = r * (math.cos(new) + 1j * math.sin(new))
                s = rest + zj
                z[j] = zj
                phases[j] = new
                count += 1
            if moved <= sweep_tol:
                break
        return s, count

    phases = np.mod(phases0, TWO_PI)
    z_u = rho_u * np.exp(1j * phases)
    z_v = rho_v * np.exp(1j * phases)
    s_u = z_u.sum()
    s_v = z_v.sum()
    p_u = a_u * (s_u.real * s_u.real + s_u.imag * s_u.imag) + c_u
    p_v = a_v * (s_v.real * s_v.real + s_v.imag * s_v.imag) + c_v
    p = p_u * p_v

    trace = np.empty(max_iter + 2)
    trace[0] = p
    tlen = 1
    cf_updates = 0

    if shared.size == 0:
        # Nothing to descend on: one alignment pass per user settles every
        # active phase (the two specific sets do not interact).
        s_u, n1 = sweeps(phases, z_u, rho_u, spec_u, s_u)
        s_v, n2 = sweeps(phases, z_v, rho_v, spec_v, s_v)
        cf_updates = n1 + n2
        p_u = a_u * (s_u.real * s_u.real + s_u.imag * s_u.imag) + c_u
        p_v = a_v * (s_v.real * s_v.real + s_v.imag * s_v.imag) + c_v
        trace[1] = p_u * p_v
        return phases, trace[:2], 0, cf_updates, True

    eps = eps_base
    streak = 0
    accepted = 0
    converged = False
    while accepted < max_iter and not converged:
        # d(product)/d(phi_n) restricted to shared elements; the step below
        # is phi - eps * dF/dphi with F the negated product.
        g_u = 2.0 * a_u * np.imag(np.conj(z_u[shared]) * s_u)
        g_v = 2.0 * a_v * np.imag(np.conj(z_v[shared]) * s_v)
        grad_f = -(g_u * p_v + p_u * g_v)

        improved = False
        cand = phases
        z_u2 = z_u
        z_v2 = z_v
        s_u2 = s_u
        s_v2 = s_v
        p_u2 = p_u
        p_v2 = p_v
        p2 = p
        n1 = 0
        n2 = 0
        for _ in range(_MAX_BACKTRACK):
            cand = phases.copy()
            cand[shared] = np.mod(phases[shared] - eps * grad_f, TWO_PI)
            z_u2 = rho_u * np.exp(1j * cand)
            z_v2 = rho_v * np.exp(1j * cand)
            s_u2 = z_u2.sum()
            s_v2 = z_v2.sum()
            s_u2, n1 = sweeps(cand, z_u2, rho_u, spec_u, s_u2)
            s_v2, n2 = sweeps(cand, z_v2, rho_v, spec_v, s_v2)
            p_u2 = a_u * (s_u2.real * s_u2.real + s_u2.imag * s_u2.imag) + c_u
            p_v2 = a_v * (s_v2.real * s_v2.real + s_v2.imag * s_v2.imag) + c_v
            p2 = p_u2 * p_v2
            if p2 >= p:
                improved = True
                break
            eps *= 0.5
            streak = 0
        if not improved:
            converged = True
            break

        phases = cand
        z_u = z_u2
        z_v = z_v2
        s_u = s_u2
        s_v = s_v2
        p_u = p_u2
        p_v = p_v2
        cf_updates += n1 + n2
        accepted += 1
        trace[tlen] = p2
        tlen += 1
        streak += 1
        if streak >= _STREAK_FOR_GROWTH:
            grown = 2.0 * eps
            if grown < eps_base:
                grown = eps_base
            cap = eps_base * _GROWTH_CAP
            eps = grown if grown < cap else cap
            streak = 0
        if p2 - p <= tol * max(p2, _TINY):
            converged = True
        p = p2

    return phases, trace[:tlen], accepted, cf_updates, converged


def _pick_backend():
    if os.environ.get("CYLRIS_NO_NUMBA", "").lower() in ("1", "true", "yes"):
        return "numpy", _descend_impl
    try:
        import numba
    except ImportError:
        return "numpy", _descend_impl
    return "numba", numba.njit(cache=True)(_descend_impl)


descend_numpy = _descend_impl
BACKEND, descend = _pick_backend()
