"""Hybrid phase-shift optimizer: closed-form user-specific updates plus
gradient descent on the shared elements.

The sum-SE surrogate factors into one term per user,
f_i(phi) + c_i with f_i = eta_i * M * |h_bar_i^H Phi h_bar_B|^2, and the
optimizer maximizes their product. Elements visible to the BS and exactly
one user admit an exact per-element optimum (align the element's phasor
with the aggregate of all others), so only the elements shared by both
users need iterative treatment. The planar baseline has no user-specific
elements and runs the same loop as pure gradient descent.

Both users' per-element factors enter through rho_i = conj(h_bar_i) *
h_bar_B, which is zero outside the BS/user visible-region overlap; the
rank-one structure A_i = rho_i rho_i^H keeps each gradient entry O(1)
given the running sums, so matrices are never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._kernels import descend
from .channel import (
    DerivedCoefficients,
    LinkStats,
    derive_coefficients,
    los_cascaded_vectors,
)
from .geometry import (
    AngleSet,
    ArrayDescriptor,
    ElementClassification,
    ElementRole,
    classify_elements,
    visibility_mask,
)
from .performance import PhaseProfile


@dataclass(frozen=True)
class OptimizerOptions:
    """Controls for the descent loop.

    The base step is step_k * 10^-(log2(N) + step_t); it is halved while a
    trial step worsens the objective and re-grown after runs of accepted
    steps. Convergence: relative objective change below ``tolerance``, or
    ``max_iterations`` accepted steps. Closed-form sweeps repeat until no
    phase moves more than ``sweep_tolerance`` (at most ``max_sweeps``
    passes).
    """

    step_k: float = 1.0
    step_t: float = -4.0
    max_iterations: int = 100_000
    tolerance: float = 1e-6
    sweep_tolerance: float = 1e-9
    max_sweeps: int = 64

    def base_step(self, n: int) -> float:
        return self.step_k * 10.0 ** -(math.log2(max(n, 1)) + self.step_t)


@dataclass(frozen=True)
class ObjectiveContext:
    """Everything the objective needs: per-user cascade vectors,
    coefficients, and the element partition."""

    rho_u: np.ndarray
    rho_v: np.ndarray
    coeffs_u: DerivedCoefficients
    coeffs_v: DerivedCoefficients
    classification: ElementClassification
    m: int

    def __post_init__(self):
        if not (len(self.rho_u) == len(self.rho_v) == len(self.classification.labels)):
            raise ValueError("rho vectors and classification lengths differ")

    @property
    def n(self) -> int:
        return len(self.rho_u)

    @property
    def a_u(self) -> np.ndarray:
        """Rank-one Hermitian matrix rho_u rho_u^H (materialized on demand)."""
        return np.outer(self.rho_u, self.rho_u.conj())

    @property
    def a_v(self) -> np.ndarray:
        return np.outer(self.rho_v, self.rho_v.conj())

    def rho(self, user: str) -> np.ndarray:
        if user == "uav":
            return self.rho_u
        if user == "itv":
            return self.rho_v
        raise ValueError(f"user must be 'uav' or 'itv', got {user!r}")

    @classmethod
    def from_geometry(cls, desc: ArrayDescriptor, angles: AngleSet,
                      stats_b: LinkStats, stats_u: LinkStats,
                      stats_v: LinkStats) -> "ObjectiveContext":
        h_bar_b, h_bar_u, h_bar_v = los_cascaded_vectors(desc, angles)
        mask_b = visibility_mask(desc, angles.azimuth_aoa_br)
        mask_u = visibility_mask(desc, angles.azimuth_aod_ru)
        mask_v = visibility_mask(desc, angles.azimuth_aod_rv)
        m = desc.num_elements_m
        return cls(
            rho_u=h_bar_u.conj() * h_bar_b,
            rho_v=h_bar_v.conj() * h_bar_b,
            coeffs_u=derive_coefficients(stats_b, stats_u, m, mask_b.overlap(mask_u)),
            coeffs_v=derive_coefficients(stats_b, stats_v, m, mask_b.overlap(mask_v)),
            classification=classify_elements(mask_b, mask_u, mask_v),
            m=m,
        )


@dataclass(frozen=True)
class OptimizerReport:
    """Outcome of one optimization run.

    ``objective_trace`` holds the product (f_u + c_u)(f_v + c_v) at the
    initial point and after each accepted iteration; it is nondecreasing.
    ``gradient_iterations`` counts accepted gradient steps,
    ``closed_form_updates`` individual specific-element phase assignments.
    """

    final_phases: PhaseProfile
    objective_trace: np.ndarray
    gradient_iterations: int
    closed_form_updates: int
    converged: bool
    sum_se_ub: float
    per_user_se_ub: tuple[float, float]


class ClosedFormResult(NamedTuple):
    angle: float
    degenerate: bool


def _coherent_sums(phases: PhaseProfile, ctx: ObjectiveContext) -> tuple[complex, complex]:
    phasor = phases.phasor
    return complex(np.sum(ctx.rho_u * phasor)), complex(np.sum(ctx.rho_v * phasor))


def factor_values(phases: PhaseProfile, ctx: ObjectiveContext) -> tuple[float, float]:
    """(f_u + c_u, f_v + c_v) at the given phases."""
    s_u, s_v = _coherent_sums(phases, ctx)
    return (ctx.coeffs_u.eta * ctx.m * abs(s_u) ** 2 + ctx.coeffs_u.c_const,
            ctx.coeffs_v.eta * ctx.m * abs(s_v) ** 2 + ctx.coeffs_v.c_const)


def objective(phases: PhaseProfile, ctx: ObjectiveContext) -> float:
    """Minimization objective F = -(f_u + c_u)(f_v + c_v)."""
    fu, fv = factor_values(phases, ctx)
    return -fu * fv


def gradient_shared(phases: PhaseProfile, ctx: ObjectiveContext) -> np.ndarray:
    """dF/dphi_n over the shared elements, ascending element index.

    Uses the rank-one identity df_i/dphi_n = 2 eta_i M Im(conj(z_n) S_i)
    with z = rho_i * e^{j phi} and S_i = sum(z), then the product rule with
    the F = -(product) sign.
    """
    shared = ctx.classification.shared_idx
    phasor = phases.phasor
    z_u = ctx.rho_u * phasor
    z_v = ctx.rho_v * phasor
    s_u = z_u.sum()
    s_v = z_v.sum()
    fu = ctx.coeffs_u.eta * ctx.m * abs(s_u) ** 2 + ctx.coeffs_u.c_const
    fv = ctx.coeffs_v.eta * ctx.m * abs(s_v) ** 2 + ctx.coeffs_v.c_const
    df_u = 2.0 * ctx.coeffs_u.eta * ctx.m * np.imag(z_u[shared].conj() * s_u)
    df_v = 2.0 * ctx.coeffs_v.eta * ctx.m * np.imag(z_v[shared].conj() * s_v)
    return -(df_u * fv + fu * df_v)


def closed_form_specific(phases: PhaseProfile, ctx: ObjectiveContext,
                         element: int, user: str) -> Optional[ClosedFormResult]:
    """Optimal phase of one user-specific element, all others fixed.

    Aligns the element's contribution with the aggregate of the remaining
    ones: phi_n = Arg(sum_{k != n} rho[k] e^{j phi_k} / rho[n]). Returns
    None when rho[n] is zero (the element cannot affect this user); a zero
    aggregate is flagged degenerate and gets angle 0 by convention.
    """
    expected = ElementRole.UAV_SPECIFIC if user == "uav" else ElementRole.ITV_SPECIFIC
    if ctx.classification.labels[element] != int(expected):
        raise ValueError(
            f"element {element} is not {expected.name} "
            f"(label {ElementRole(ctx.classification.labels[element]).name})")
    rho = ctx.rho(user)
    r = rho[element]
    if r == 0:
        return None
    z = rho * phases.phasor
    rest = z.sum() - z[element]
    if rest == 0:
        return ClosedFormResult(0.0, True)
    angle = (math.atan2(rest.imag, rest.real) - math.atan2(r.imag, r.real)) % (2.0 * math.pi)
    return ClosedFormResult(angle, False)


def _user_scale(coeffs: DerivedCoefficients, m: int, rho: np.ndarray) -> float:
    # Upper bound of f_i + c_i (triangle inequality on the coherent sum);
    # scaling each user's (eta, c) by 1/scale leaves the stationary set of
    # the product unchanged and keeps the descent numerically sane.
    bound = coeffs.eta * m * float(np.sum(np.abs(rho))) ** 2 + coeffs.c_const
    return bound if bound > 0.0 else 1.0


def _run(ctx: ObjectiveContext, init_seed, options: OptimizerOptions) -> OptimizerReport:
    rng = init_seed if isinstance(init_seed, np.random.Generator) \
        else np.random.default_rng(init_seed)
    phases0 = rng.uniform(0.0, 2.0 * np.pi, ctx.n)

    scale_u = _user_scale(ctx.coeffs_u, ctx.m, ctx.rho_u)
    scale_v = _user_scale(ctx.coeffs_v, ctx.m, ctx.rho_v)
    cls = ctx.classification
    phases, trace, grad_iters, cf_updates, converged = descend(
        ctx.rho_u, ctx.rho_v,
        ctx.coeffs_u.eta * ctx.m / scale_u, ctx.coeffs_u.c_const / scale_u,
        ctx.coeffs_v.eta * ctx.m / scale_v, ctx.coeffs_v.c_const / scale_v,
        phases0,
        cls.shared_idx, cls.uav_specific_idx, cls.itv_specific_idx,
        options.base_step(ctx.n), options.tolerance, options.max_iterations,
        options.sweep_tolerance, options.max_sweeps,
    )

    final = PhaseProfile(phases)
    s_u, s_v = _coherent_sums(final, ctx)
    arg_u = ctx.coeffs_u.snr_s * (ctx.coeffs_u.eta * ctx.m * abs(s_u) ** 2
                                  + ctx.coeffs_u.c_const)
    arg_v = ctx.coeffs_v.snr_s * (ctx.coeffs_v.eta * ctx.m * abs(s_v) ** 2
                                  + ctx.coeffs_v.c_const)
    se_u = math.log2(1.0 + arg_u)
    se_v = math.log2(1.0 + arg_v)
    return OptimizerReport(
        final_phases=final,
        objective_trace=np.asarray(trace) * (scale_u * scale_v),
        gradient_iterations=int(grad_iters),
        closed_form_updates=int(cf_updates),
        converged=bool(converged),
        sum_se_ub=se_u + se_v,
        per_user_se_ub=(se_u, se_v),
    )


def hybrid_optimize(ctx: ObjectiveContext, init_seed,
                    options: OptimizerOptions | None = None) -> OptimizerReport:
    """Optimize a cylindrical-surface context: gradient steps on shared
    elements, closed-form alignment of user-specific ones after each step.

    Phases start i.i.d. uniform from ``init_seed``; identical seeds give
    identical reports. With an empty shared set the run is a single
    closed-form stabilization (zero gradient iterations).
    """
    if ctx.classification.counts()["inactive"] == ctx.n:
        raise ValueError("no element is visible to the BS and a user")
    return _run(ctx, init_seed, options or OptimizerOptions())


def upa_optimize(ctx: ObjectiveContext, init_seed,
                 options: OptimizerOptions | None = None) -> OptimizerReport:
    """Optimize the planar baseline: full-gradient descent, every element
    shared, same convergence contract as the hybrid."""
    if len(ctx.classification.shared_idx) != ctx.n:
        raise ValueError("planar baseline expects full visibility (all elements shared)")
    return _run(ctx, init_seed, options or OptimizerOptions())
