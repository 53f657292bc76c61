"""Iterative solver for the guessing-probability SDP with a verifiable certificate.

The primal problem maximizes sum_x q_x tr[rho_x M_x] over POVMs.  We iterate
the fixed-point map

    G   = sum_y (q_y rho_y) M_y (q_y rho_y)
    M_x <- G^{-1/2} (q_x rho_x) M_x (q_x rho_x) G^{-1/2}

(pseudo-inverse square root on the support of G), followed by a completeness
re-projection.  Every iterate is a valid POVM and the fixed points are exactly
the points where the complementary-slackness and stationarity conditions of
the dual problem (min tr K subject to K >= q_x rho_x) hold, so "converged"
means "certified optimal within tolerance".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    COMPLETENESS_TOL,
    DimensionMismatch,
    Povm,
    QsdError,
    StateEnsemble,
    _frozen,
    check_hermitian,
    guess_value,
    hermitian_part,
    hermiticity_error,
    min_eigenvalue,
    psd_sqrt_pinv,
)

ZERO_PRIOR = 1e-15
# Extra polish: after the residuals first drop below tolerance, keep iterating
# toward tol/POLISH_FACTOR so downstream certificate checks have headroom.
POLISH_FACTOR = 1e4
STALL_LIMIT = 100


class CompletenessDrift(QsdError):
    """Internal invariant failure: the iterate left the POVM set."""


@dataclass(frozen=True)
class SolverOptions:
    """Iteration budget, certificate tolerance and reproducibility knobs."""

    max_iterations: int = 10000
    kkt_tolerance: float = 1e-9
    damping: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kkt_tolerance <= 0:
            raise ValueError(f"kkt_tolerance must be positive, got {self.kkt_tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"damping must lie in [0, 1), got {self.damping}")


@dataclass(frozen=True)
class DualCertificate:
    """Dual data proving (near-)optimality of a measurement.

    k_operator is the dual variable K; sigma[x] = K - q_x rho_x are the
    complementary operators, stored exactly as constructed.  slackness[x] is
    tr[sigma_x M_x] and dual_feasibility[x] the smallest eigenvalue of
    sigma_x; at an optimum the former vanish and the latter are nonnegative.
    """

    k_operator: np.ndarray
    sigma: tuple[np.ndarray, ...]
    slackness: tuple[float, ...]
    dual_feasibility: tuple[float, ...]
    trace_k: float


@dataclass(frozen=True)
class KktReport:
    """Residuals of the joint optimality conditions at a given point."""

    primal_residual: float
    dual_residual: float
    slackness_residual: float
    gap: float

    def max_residual(self) -> float:
        return max(self.primal_residual, self.dual_residual, self.slackness_residual, abs(self.gap))

    def within(self, tolerance: float) -> bool:
        return (
            self.slackness_residual <= tolerance
            and self.dual_residual <= tolerance
            and abs(self.gap) <= tolerance
        )


@dataclass(frozen=True)
class DiscriminationResult:
    """Solved instance: value, measurement, certificate and iteration record."""

    guess_probability: float
    povm: Povm
    certificate: DualCertificate
    iterations: int
    converged: bool
    report: KktReport | None = field(repr=False, default=None)


def dual_operator(ensemble: StateEnsemble, povm: Povm) -> np.ndarray:
    """The dual variable K = Hermitian part of sum_x q_x rho_x M_x.

    By construction tr K equals the primal objective of the given POVM; K is
    dual-feasible (K >= q_x rho_x) exactly when the POVM is optimal.
    """
    _check_match(ensemble, povm)
    r = sum(ensemble.weighted(x) @ povm.elements[x] for x in range(len(ensemble)))
    return hermitian_part(r)


def certificate_from_povm(ensemble: StateEnsemble, povm: Povm) -> DualCertificate:
    """Assemble the dual certificate induced by a measurement."""
    k = dual_operator(ensemble, povm)
    sigma = tuple(_frozen(k - ensemble.weighted(x)) for x in range(len(ensemble)))
    slackness = tuple(float(np.trace(s @ m).real) for s, m in zip(sigma, povm.elements))
    feas = tuple(min_eigenvalue(s) for s in sigma)
    return DualCertificate(
        k_operator=_frozen(k),
        sigma=sigma,
        slackness=slackness,
        dual_feasibility=feas,
        trace_k=float(k.trace().real),
    )


def kkt_check(ensemble: StateEnsemble, povm: Povm, k) -> KktReport:
    """Residuals of the optimality conditions for (povm, k) on the ensemble.

    primal_residual: worst POVM invariant violation (Hermiticity, negativity,
    completeness).  dual_residual: worst violation of K >= q_x rho_x.
    slackness_residual: max |tr[(K - q_x rho_x) M_x]|.  gap: tr K minus the
    primal objective.
    """
    _check_match(ensemble, povm)
    k = np.asarray(k, dtype=complex)
    if k.shape != (ensemble.dim, ensemble.dim):
        raise DimensionMismatch(f"K has shape {k.shape}, expected {(ensemble.dim,) * 2}")
    check_hermitian(k, "dual operator")

    herm = max(hermiticity_error(m) for m in povm.elements)
    neg = max(max(0.0, -min_eigenvalue(m)) for m in povm.elements)
    comp = float(np.abs(sum(povm.elements) - np.eye(ensemble.dim)).max())
    primal = max(herm, neg, comp)

    dual = 0.0
    slack = 0.0
    objective = 0.0
    for x in range(len(ensemble)):
        sigma = k - ensemble.weighted(x)
        dual = max(dual, max(0.0, -min_eigenvalue(sigma)))
        slack = max(slack, abs(float(np.trace(sigma @ povm.elements[x]).real)))
        objective += float(np.trace(ensemble.weighted(x) @ povm.elements[x]).real)
    gap = float(k.trace().real) - objective
    return KktReport(primal_residual=primal, dual_residual=dual, slackness_residual=slack, gap=gap)


def solve(ensemble: StateEnsemble, options: SolverOptions | None = None) -> DiscriminationResult:
    """Optimal minimum-error discrimination via the fixed-point iteration.

    Deterministic for fixed options.  On convergence the returned certificate
    has all KKT residuals within options.kkt_tolerance, which by SDP duality
    pins the value to the optimum within that tolerance.  If the iteration
    budget runs out the best iterate seen is returned with converged=False
    (a flagged result, not an exception).
    """
    opts = options or SolverOptions()
    n = len(ensemble)
    d = ensemble.dim
    identity = np.eye(d)

    active = [x for x in range(n) if ensemble.priors[x] >= ZERO_PRIOR]
    weighted = {x: ensemble.weighted(x) for x in active}

    rng = np.random.default_rng(opts.seed)
    elements = {}
    for x in range(n):
        noise = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        if x in weighted:
            elements[x] = identity / len(active) + 1e-6 * hermitian_part(noise)
    total = sum(elements.values())
    proj = psd_sqrt_pinv(total)
    elements = {x: hermitian_part(proj @ m @ proj) for x, m in elements.items()}

    if len(active) == 1:
        # Degenerate instance: one state carries all the weight.
        elements = {active[0]: identity}

    best_elements = dict(elements)
    best_residual = np.inf
    stall = 0
    iterations = 0

    for it in range(1, opts.max_iterations + 1):
        iterations = it
        if len(active) > 1:
            g = sum(weighted[x] @ elements[x] @ weighted[x] for x in active)
            g_inv_sqrt = psd_sqrt_pinv(g)
            updated = {
                x: hermitian_part(g_inv_sqrt @ weighted[x] @ elements[x] @ weighted[x] @ g_inv_sqrt)
                for x in active
            }
            deficiency = identity - sum(updated.values())
            for x in active:
                updated[x] = updated[x] + deficiency / len(active)
            if opts.damping > 0.0:
                updated = {
                    x: (1.0 - opts.damping) * updated[x] + opts.damping * elements[x] for x in active
                }
            elements = updated

        residual = _internal_residual(weighted, elements, active)
        if residual < best_residual:
            best_residual = residual
            best_elements = dict(elements)
            stall = 0
        else:
            stall += 1
        if residual <= opts.kkt_tolerance / POLISH_FACTOR:
            break
        if best_residual <= opts.kkt_tolerance and stall >= STALL_LIMIT:
            break

    full = []
    for x in range(n):
        m = best_elements.get(x)
        full.append(_frozen(m.copy()) if m is not None else _frozen(np.zeros((d, d), dtype=complex)))
    povm = Povm(elements=tuple(full))
    _assert_valid_iterate(povm)

    certificate = certificate_from_povm(ensemble, povm)
    report = kkt_check(ensemble, povm, certificate.k_operator)
    converged = report.within(opts.kkt_tolerance)
    return DiscriminationResult(
        guess_probability=guess_value(ensemble, povm),
        povm=povm,
        certificate=certificate,
        iterations=iterations if len(active) > 1 else 0,
        converged=converged,
        report=report,
    )


def _internal_residual(weighted, elements, active) -> float:
    """max(slackness, dual infeasibility, |gap|) for the current raw iterate."""
    r = sum(weighted[x] @ elements[x] for x in active)
    k = hermitian_part(r)
    objective = 0.0
    slack = 0.0
    dual = 0.0
    for x in active:
        sigma = k - weighted[x]
        slack = max(slack, abs(float(np.trace(sigma @ elements[x]).real)))
        dual = max(dual, max(0.0, -float(np.linalg.eigvalsh(sigma).min())))
        objective += float(np.trace(weighted[x] @ elements[x]).real)
    gap = abs(float(k.trace().real) - objective)
    return max(slack, dual, gap)


def _assert_valid_iterate(povm: Povm) -> None:
    # Iterates are PSD and complete by construction; this guards against
    # numerical drift producing an invalid certificate.
    d = povm.dim
    comp = float(np.abs(sum(povm.elements) - np.eye(d)).max())
    if comp > COMPLETENESS_TOL:
        raise CompletenessDrift(f"iterate completeness deviation {comp:.3e}")


def _check_match(ensemble: StateEnsemble, povm: Povm) -> None:
    if len(povm) != len(ensemble):
        raise DimensionMismatch(f"POVM has {len(povm)} elements for {len(ensemble)} states")
    if povm.dim != ensemble.dim:
        raise DimensionMismatch(f"POVM dimension {povm.dim} != state dimension {ensemble.dim}")
