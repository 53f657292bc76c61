"""Validated quantum data types and the numerical substrate shared by all modules.

Everything downstream (two-state closed forms, the iterative solver, certificate
checks, steering simulation) works on the three types defined here: density
matrices, prior-weighted ensembles, and POVMs.  A single Hermitian
eigendecomposition backend (`numpy.linalg.eigh`) drives positivity checks,
trace norms, and operator square roots so that tolerances mean the same thing
in every module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# One tolerance regime for the whole package: absolute 1e-9 on eigenvalues and
# traces, Hermiticity scaled by the largest entry, 1e-12 on probability sums.
HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
COMPLETENESS_TOL = 1e-9
PRIOR_TOL = 1e-12
PROB_CLAMP = 1e-9


class QsdError(Exception):
    """Base class for all validation and computation errors in this package."""


class NonFinite(QsdError):
    """Input contains NaN or Inf entries."""


class NotHermitian(QsdError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class NotPsd(QsdError):
    """Matrix has an eigenvalue below -PSD_TOL."""


class TraceNotOne(QsdError):
    """Trace differs from 1 beyond tolerance."""


class CompletenessViolated(QsdError):
    """POVM elements do not sum to the identity within tolerance."""


class DimensionMismatch(QsdError):
    """Operands act on spaces of different dimension or arity."""


class InvalidPriors(QsdError):
    """Prior probabilities are negative or do not sum to 1."""


class InvalidProbability(QsdError):
    """A Born-rule probability falls outside [0, 1] beyond float noise."""


def as_complex_matrix(matrix) -> np.ndarray:
    """Coerce input to a square, finite complex128 array (a defensive copy)."""
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NonFinite("matrix contains NaN or Inf entries")
    return a


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def hermiticity_error(a: np.ndarray) -> float:
    """Largest entrywise deviation |A_ij - conj(A_ji)|."""
    return float(np.abs(a - a.conj().T).max())


def check_hermitian(a: np.ndarray, context: str = "matrix") -> None:
    scale = max(1.0, float(np.abs(a).max()) if a.size else 0.0)
    err = hermiticity_error(a)
    if err > HERMITIAN_TOL * scale:
        raise NotHermitian(f"{context}: max |A_ij - conj(A_ji)| = {err:.3e}")


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(hermitian_part(a)).min())


def psd_sqrt_pinv(a: np.ndarray, cutoff: float = 1e-12) -> np.ndarray:
    """Pseudo-inverse square root of a PSD matrix.

    Eigenvalues below cutoff * max_eigenvalue are treated as zero, the
    standard numerical-rank policy shared with the solver.
    """
    w, v = np.linalg.eigh(hermitian_part(a))
    wmax = max(float(w.max()), 0.0)
    inv = np.where(w > cutoff * wmax, 1.0 / np.sqrt(np.maximum(w, np.finfo(float).tiny)), 0.0)
    return (v * inv) @ v.conj().T


def psd_project(a: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues of a Hermitian matrix to zero."""
    w, v = np.linalg.eigh(hermitian_part(a))
    return (v * np.maximum(w, 0.0)) @ v.conj().T


@dataclass(frozen=True)
class DensityMatrix:
    """A validated d x d quantum state: Hermitian, PSD, unit trace.

    Construct through validate_density; the stored array is read-only.
    """

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigensystem(self):
        """Eigenvalues (ascending) and eigenvectors of the state."""
        return np.linalg.eigh(self.matrix)


@dataclass(frozen=True)
class StateEnsemble:
    """A discrimination instance: N >= 2 states with prior probabilities."""

    priors: np.ndarray
    states: tuple[DensityMatrix, ...]

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def weighted(self, x: int) -> np.ndarray:
        """The prior-weighted operator of state x."""
        return self.priors[x] * self.states[x].matrix

    def permuted(self, order) -> "StateEnsemble":
        """A new ensemble with states and priors jointly reordered."""
        order = list(order)
        return StateEnsemble(
            priors=_frozen(self.priors[order].copy()),
            states=tuple(self.states[i] for i in order),
        )


@dataclass(frozen=True)
class Povm:
    """A validated measurement: PSD elements summing to the identity."""

    elements: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


def validate_density(matrix) -> DensityMatrix:
    """Validate a matrix as a quantum state or raise naming the violation.

    Checks, in order: Hermiticity (scaled tolerance), positive
    semidefiniteness (min eigenvalue >= -1e-9), unit trace (within 1e-9).
    """
    a = as_complex_matrix(matrix)
    check_hermitian(a, "density matrix")
    a = hermitian_part(a)
    lo = min_eigenvalue(a)
    if lo < -PSD_TOL:
        raise NotPsd(f"density matrix: min eigenvalue = {lo:.3e}")
    tr = float(a.trace().real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"density matrix: trace = {tr:.12g}")
    return DensityMatrix(matrix=_frozen(a))


def make_ensemble(priors, matrices) -> StateEnsemble:
    """Build a StateEnsemble from raw priors and matrices, validating both."""
    q = np.asarray(priors, dtype=float)
    if q.ndim != 1 or len(q) < 2:
        raise InvalidPriors(f"need at least 2 priors, got shape {q.shape}")
    if np.any(q < 0):
        raise InvalidPriors(f"negative prior: min = {q.min():.3e}")
    if abs(q.sum() - 1.0) > PRIOR_TOL:
        raise InvalidPriors(f"priors sum to {q.sum():.17g}, expected 1")
    states = tuple(s if isinstance(s, DensityMatrix) else validate_density(s) for s in matrices)
    if len(states) != len(q):
        raise DimensionMismatch(f"{len(q)} priors but {len(states)} states")
    d = states[0].dim
    for i, s in enumerate(states):
        if s.dim != d:
            raise DimensionMismatch(f"state {i} has dimension {s.dim}, expected {d}")
    return StateEnsemble(priors=_frozen(q.copy()), states=states)


def validate_povm(elements) -> Povm:
    """Validate a list of matrices as a POVM or raise on the first violation."""
    if not elements:
        raise DimensionMismatch("POVM needs at least one element")
    mats = [as_complex_matrix(e) for e in elements]
    d = mats[0].shape[0]
    for i, m in enumerate(mats):
        if m.shape[0] != d:
            raise DimensionMismatch(f"element {i} has dimension {m.shape[0]}, expected {d}")
        check_hermitian(m, f"POVM element {i}")
        lo = min_eigenvalue(m)
        if lo < -PSD_TOL:
            raise NotPsd(f"POVM element {i}: min eigenvalue = {lo:.3e}")
    total = sum(mats)
    dev = float(np.abs(total - np.eye(d)).max())
    if dev > COMPLETENESS_TOL:
        raise CompletenessViolated(f"sum of elements deviates from identity by {dev:.3e}")
    return Povm(elements=tuple(_frozen(hermitian_part(m)) for m in mats))


def trace_norm(a, hermitian: bool = True) -> float:
    """Trace norm: sum of absolute eigenvalues (Hermitian) or singular values.

    With hermitian=True (the path used throughout this package) the input's
    Hermiticity is asserted first.
    """
    m = as_complex_matrix(a)
    if hermitian:
        check_hermitian(m, "trace_norm input")
        return float(np.abs(np.linalg.eigvalsh(hermitian_part(m))).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def _clamp_probability(p: float, context: str) -> float:
    if -PROB_CLAMP <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + PROB_CLAMP:
        return 1.0
    if p < 0.0 or p > 1.0:
        raise InvalidProbability(f"{context}: value {p:.12g} outside [0, 1]")
    return p


def born_probabilities(ensemble: StateEnsemble, povm: Povm) -> np.ndarray:
    """Conditional probability table P(x|y) = tr[rho_y M_x].

    Entry (x, y) is the probability that element x clicks on state y; each
    column is a distribution.  Values within 1e-9 of the [0, 1] boundary are
    clamped onto it; larger excursions raise InvalidProbability.
    """
    n = len(ensemble)
    if len(povm) != n:
        raise DimensionMismatch(f"POVM has {len(povm)} elements for {n} states")
    if povm.dim != ensemble.dim:
        raise DimensionMismatch(f"POVM dimension {povm.dim} != state dimension {ensemble.dim}")
    table = np.empty((n, n))
    for x, m in enumerate(povm.elements):
        for y, state in enumerate(ensemble.states):
            p = float(np.trace(state.matrix @ m).real)
            table[x, y] = _clamp_probability(p, f"P({x}|{y})")
    return table


def guess_value(ensemble: StateEnsemble, povm: Povm) -> float:
    """Average success probability sum_x q_x tr[rho_x M_x] of a measurement."""
    table = born_probabilities(ensemble, povm)
    return float(ensemble.priors @ np.diag(table))
