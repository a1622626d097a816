"""Semistability classification and the limit operator of the semigroup.

A generator A is exponentially semistable when every trajectory of
``xdot = A x`` converges exponentially to an equilibrium in ker A that
depends on the initial condition. In finite dimensions this holds exactly
when every eigenvalue has nonpositive real part and each eigenvalue on the
imaginary axis is real (i.e. zero) and semisimple. The limit operator
``S_inf = lim exp(A t)`` is then a bounded idempotent onto ker A: the
orthogonal projector for self-adjoint A, an oblique spectral projector in
general.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, NotSemistableError
from .linalg import (
    EPS,
    _svd_split,
    as_operator,
    default_rank_tol,
    matrix_exponential,
    opnorm,
    real_part,
)

__all__ = [
    "STABLE",
    "SEMISTABLE",
    "NOT_SEMISTABLE",
    "SpectralData",
    "SemistabilityReport",
    "LimitProjector",
    "spectral_data",
    "classify",
    "limit_projector",
    "decay_defect",
]

STABLE = "stable"
SEMISTABLE = "semistable"
NOT_SEMISTABLE = "not_semistable"

# relative symmetry defect below which a generator is treated as self-adjoint
HERMITIAN_RTOL = 1e-10

# eigenvector-basis condition number beyond which the oblique-projector
# construction switches to the kernel-pair fallback
_COND_LIMIT = 1e12


def default_zero_tol(n, norm_a):
    """Threshold under which an eigenvalue's real/imaginary part counts as zero.

    Three orders of magnitude above dense-eigensolver backward error
    (n * eps * norm) and far below any physically meaningful spectral gap at
    desk scale, so the same default serves both rotated test fixtures and
    large spectral surrogates.
    """
    return 1e3 * max(n, 1) * EPS * max(norm_a, EPS)


def is_hermitian(a, rtol=HERMITIAN_RTOL):
    defect = opnorm(a - a.conj().T)
    return defect <= rtol * max(opnorm(a), EPS)


@dataclass(frozen=True)
class SpectralData:
    """Eigenstructure of a generator in canonical slowest-first mode order.

    ``eigenvalues[i]`` corresponds to column i of ``right_eigenvectors``;
    modes are sorted by descending real part (kernel modes first), then by
    ascending imaginary magnitude, so that conjugate pairs are adjacent and
    mode indices are stable across runs.
    """

    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    kernel_basis: np.ndarray
    zero_eig_algebraic_multiplicity: int
    zero_eig_geometric_multiplicity: int
    zero_tol: float
    zero_eig_semisimple: bool
    hermitian: bool

    @property
    def n(self):
        return self.right_eigenvectors.shape[0]


@dataclass(frozen=True)
class SemistabilityReport:
    """Classification verdict plus the uniform decay constants.

    ``mu`` is the spectral gap (smallest decay rate of the non-kernel
    modes, ``inf`` when every mode is an equilibrium). ``overshoot_m`` is a
    sampled estimate of the transient amplification sup_t of
    ``norm(exp(A t) - S_inf) * exp(mu t)``; it is an estimate, not a
    certificate, and is None for non-semistable inputs.
    """

    verdict: str
    mu: float
    overshoot_m: float | None
    kernel_dim: int


@dataclass(frozen=True)
class LimitProjector:
    """The limit operator of the semigroup with its certificate defects."""

    s_inf: np.ndarray
    idempotency_defect: float
    annihilation_defect: float


def spectral_data(a, zero_tol=None, rank_tol=None):
    """Compute eigenvalues, eigenvectors and kernel data of a generator.

    Parameters
    ----------
    a : array_like
        Square generator matrix.
    zero_tol : float, optional
        Eigenvalue-component zero threshold; see :func:`default_zero_tol`.
    rank_tol : float, optional
        Singular-value threshold for the kernel basis. Defaults to the
        larger of the standard rank tolerance and ``zero_tol`` so the
        eigenvalue and kernel notions of "zero" stay consistent.
    """
    a = as_operator(a, "generator", square=True)
    n = a.shape[0]
    norm_a = opnorm(a)
    if zero_tol is None:
        zero_tol = default_zero_tol(n, norm_a)
    elif zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")

    hermitian = is_hermitian(a)
    if hermitian:
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
        eigenvalues = w.astype(np.complex128)
        if np.isrealobj(a):
            v = v.real if np.isrealobj(v) else real_part(v, "eigenvectors")
    else:
        eigenvalues, v = np.linalg.eig(a)

    order = np.lexsort(
        (np.arange(n), eigenvalues.imag, np.abs(eigenvalues.imag), -eigenvalues.real)
    )
    eigenvalues = eigenvalues[order]
    v = v[:, order]

    if rank_tol is None:
        rank_tol = max(default_rank_tol((n, n), norm_a), zero_tol)
    _, kernel, decision = _svd_split(a, rank_tol)
    geometric = kernel.shape[1]
    algebraic = int(
        np.sum(
            (np.abs(eigenvalues.real) <= zero_tol)
            & (np.abs(eigenvalues.imag) <= zero_tol)
        )
    )

    # zero is semisimple iff squaring does not deepen the null space; the
    # rank of A^2 is taken relative to norm(A)^2 so that rounding noise in
    # the computed square (~eps * norm^2) cannot masquerade as rank
    if geometric == 0:
        semisimple = True
    else:
        a2 = a @ a
        tol2 = max(n * EPS * norm_a**2, zero_tol**2)
        s2 = np.linalg.svd(a2, compute_uv=False)
        rank_a2 = int(np.sum(s2 > tol2))
        semisimple = rank_a2 == decision.numerical_rank

    return SpectralData(
        eigenvalues=eigenvalues,
        right_eigenvectors=v,
        kernel_basis=kernel,
        zero_eig_algebraic_multiplicity=algebraic,
        zero_eig_geometric_multiplicity=geometric,
        zero_tol=float(zero_tol),
        zero_eig_semisimple=bool(semisimple),
        hermitian=hermitian,
    )


def _verdict(spectral):
    lam = spectral.eigenvalues
    tol = spectral.zero_tol
    if np.any(lam.real > tol):
        return NOT_SEMISTABLE
    if np.all(lam.real < -tol):
        return STABLE
    near_axis = np.abs(lam.real) <= tol
    if np.any(near_axis & (np.abs(lam.imag) > tol)):
        return NOT_SEMISTABLE
    if not spectral.zero_eig_semisimple:
        return NOT_SEMISTABLE
    return SEMISTABLE


def _spectral_gap(spectral):
    decaying = spectral.eigenvalues.real[spectral.eigenvalues.real < -spectral.zero_tol]
    if decaying.size == 0:
        return float("inf")
    return float(-decaying.max())


def classify(a, zero_tol=None):
    """Classify a generator as stable, semistable, or neither.

    The verdict follows the eigenvalue criterion for exponential
    semistability in finite dimensions: all real parts nonpositive, any
    eigenvalue on the axis real and semisimple (semisimplicity decided by
    comparing the numerical ranks of A and A^2, which avoids a fragile
    Jordan computation).

    Returns
    -------
    SemistabilityReport
    """
    spectral = spectral_data(a, zero_tol)
    return _report_from_spectral(as_operator(a, "generator", square=True), spectral)


def _report_from_spectral(a, spectral):
    verdict = _verdict(spectral)
    mu = _spectral_gap(spectral)
    overshoot = None
    if verdict != NOT_SEMISTABLE:
        s_inf = _projector_matrix(a, spectral)
        overshoot = _estimate_overshoot(a, s_inf, mu)
    return SemistabilityReport(
        verdict=verdict,
        mu=mu,
        overshoot_m=overshoot,
        kernel_dim=spectral.zero_eig_geometric_multiplicity,
    )


def _estimate_overshoot(a, s_inf, mu):
    """Sampled sup of norm(exp(At) - S_inf) * exp(mu t) on a log-spaced grid.

    The grid stops at 15/mu: beyond that, exp(mu t) amplifies rounding in
    the decayed propagator rather than measuring a transient.
    """
    if not np.isfinite(mu):
        return 1.0
    times = np.concatenate(([0.0], np.geomspace(0.01 / mu, 15.0 / mu, 25)))
    est = 0.0
    for t in times:
        est = max(est, opnorm(matrix_exponential(a, t) - s_inf) * np.exp(mu * t))
    return max(est, EPS)


def _kernel_pair_projector(a, spectral):
    """Oblique projector onto ker A along range A from right/left kernels.

    Valid whenever the zero eigenvalue is semisimple, including generators
    whose nonzero part is defective (where the eigenvector basis is
    singular and the primary construction is unavailable).
    """
    k = spectral.kernel_basis
    _, l_basis, _ = _svd_split(a.conj().T, max(
        default_rank_tol(a.shape, opnorm(a)), spectral.zero_tol))
    if l_basis.shape[1] != k.shape[1]:
        raise ConditioningError(
            "left and right kernel dimensions disagree (%d vs %d)"
            % (l_basis.shape[1], k.shape[1])
        )
    gram = l_basis.conj().T @ k
    if k.shape[1] and np.linalg.cond(gram) > _COND_LIMIT:
        raise ConditioningError(
            "kernel-pair projector is numerically singular; the zero "
            "eigenvalue may not be semisimple at this tolerance"
        )
    return k @ np.linalg.solve(gram, l_basis.conj().T)


def _projector_quality(a, s):
    norm_s = opnorm(s)
    idem = opnorm(s @ s - s) / max(norm_s, EPS)
    annih = max(opnorm(s @ a), opnorm(a @ s)) / max(opnorm(a) * norm_s, EPS)
    return max(idem, annih)


def _projector_matrix(a, spectral):
    n = spectral.n
    k = spectral.kernel_basis
    if k.shape[1] == 0:
        return np.zeros((n, n)) if np.isrealobj(a) else np.zeros((n, n), complex)
    if spectral.hermitian:
        s = k @ k.conj().T
        return real_part(s, "limit operator") if np.isrealobj(a) else s
    # primary: spectral projector in the eigenvector basis; a nearly
    # defective stable part degrades it quietly, so the measured defects
    # decide whether the kernel-pair construction should take over
    v = spectral.right_eigenvectors
    indicator = (spectral.eigenvalues.real > -spectral.zero_tol).astype(np.float64)
    s = None
    if np.isfinite(np.linalg.cond(v)) and np.linalg.cond(v) <= _COND_LIMIT:
        s = v @ (indicator[:, None] * np.linalg.inv(v))
    if s is None or _projector_quality(a, s) > 1e-11:
        try:
            fallback = _kernel_pair_projector(a, spectral)
        except ConditioningError:
            if s is None:
                raise
        else:
            if s is None or _projector_quality(a, fallback) < _projector_quality(a, s):
                s = fallback
    if np.isrealobj(a):
        s = real_part(s, "limit operator")
    return s


def limit_projector(a, spectral):
    """Construct S_inf = lim exp(A t) with certified defects.

    For self-adjoint A this is the orthogonal projector K K* onto the
    kernel; for general semistable A it is the spectral projector
    V diag(kernel indicator) V^{-1}, with a kernel-pair fallback when the
    eigenvector basis is too ill-conditioned to invert.

    Parameters
    ----------
    a : array_like
        Square generator, previously classified stable or semistable.
    spectral : SpectralData
        Output of :func:`spectral_data` for the same matrix.

    Raises
    ------
    NotSemistableError
        If the spectral data does not support a (semi)stable verdict.
    ConditioningError
        If no numerically trustworthy projector can be formed.
    """
    a = as_operator(a, "generator", square=True)
    if a.shape[0] != spectral.n:
        raise ConditioningError("spectral data does not match the generator size")
    verdict = _verdict(spectral)
    if verdict == NOT_SEMISTABLE:
        raise NotSemistableError(
            "limit operator requires a semistable generator (eigenvalue "
            "criterion failed at zero_tol=%.3e)" % spectral.zero_tol
        )
    s = _projector_matrix(a, spectral)
    norm_s = opnorm(s)
    idem = opnorm(s @ s - s)
    annih = max(opnorm(s @ a), opnorm(a @ s))
    if idem > 1e-8 * norm_s + 1e-30:
        raise ConditioningError(
            "limit operator failed its idempotency certificate "
            "(defect %.3e, norm %.3e)" % (idem, norm_s)
        )
    if annih > 1e-8 * opnorm(a) * norm_s + 1e-30:
        raise ConditioningError(
            "limit operator failed its annihilation certificate "
            "(defect %.3e)" % annih
        )
    return LimitProjector(
        s_inf=s, idempotency_defect=idem, annihilation_defect=annih
    )


def decay_defect(a, s_inf, times):
    """norm(exp(A t) - S_inf) at each sample time.

    Semistability is equivalent to these defects decaying like
    ``L * exp(-mu t)``; tests sample this directly.
    """
    a = as_operator(a, "generator", square=True)
    s = s_inf.s_inf if isinstance(s_inf, LimitProjector) else as_operator(s_inf)
    times = [float(t) for t in times]
    if not times:
        raise ValueError("times must be nonempty")
    if any(t < 0 for t in times):
        raise ValueError("times must be nonnegative")
    return np.array([opnorm(matrix_exponential(a, t) - s) for t in times])
