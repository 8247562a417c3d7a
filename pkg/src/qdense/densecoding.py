"""Dense coding protocols over a shared pure entangled state.

Signals are indexed ``r = m * d + n`` where ``m`` is the cyclic shift and
``n`` the phase of the generalized Pauli operator used to encode them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, NamedTuple, Optional, Sequence

import numpy as np

from . import linalg
from .quantum import (
    EPS_ZERO,
    TOL_NORM,
    TOL_PSD,
    BipartiteState,
    Povm,
    Prior,
    QuantumChannel,
    SchmidtSpectrum,
    ValidationError,
    encoded_states,
    state_from_spectrum,
    validate_channel,
    validate_povm,
)

TOL_ERR = 1e-10
TOL_SEARCH = 1e-9

Kind = Literal["approximate", "unambiguous"]


class Signal(NamedTuple):
    m: int
    n: int

    def index(self, d: int) -> int:
        return self.m * d + self.n

    @classmethod
    def from_index(cls, r: int, d: int) -> "Signal":
        if not 0 <= r < d * d:
            raise ValueError(f"signal index {r} out of range for d={d}")
        return cls(*divmod(r, d))


@dataclass(frozen=True)
class DenseCodingProtocol:
    """Alice's ``d**2`` encodings and Bob's measurement on the joint system."""

    d: int
    encodings: tuple
    measurement: Povm

    def __post_init__(self):
        d = self.d
        object.__setattr__(self, "encodings", tuple(self.encodings))
        if len(self.encodings) != d * d:
            raise ValueError(f"need {d * d} encodings for d={d}, got {len(self.encodings)}")
        for ch in self.encodings:
            if ch.d != d:
                raise ValueError(f"encoding acts on d={ch.d}, expected {d}")
        if self.measurement.dim != d * d:
            raise ValueError(f"measurement must act on dimension {d * d}")
        expected = d * d + 1 if self.measurement.has_inconclusive else d * d
        if len(self.measurement.elements) != expected:
            raise ValueError(
                f"measurement has {len(self.measurement.elements)} elements, expected {expected}"
            )


@dataclass(frozen=True)
class OutcomeMatrix:
    """``p[r, s] = P(s | r)``; the inconclusive column, if any, is last."""

    d: int
    p: np.ndarray
    has_inconclusive: bool = False

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        n = self.d * self.d
        cols = n + 1 if self.has_inconclusive else n
        if p.shape != (n, cols):
            raise ValueError(f"outcome matrix must have shape {(n, cols)}, got {p.shape}")
        if np.any(p < -TOL_PSD) or np.any(p > 1 + TOL_PSD):
            raise ValueError("conditional probabilities outside [0, 1]")
        rows = p.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > TOL_NORM:
            raise ValueError(f"rows do not sum to 1 (worst {rows[np.argmax(np.abs(rows - 1))]!r})")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.p).copy()

    @classmethod
    def from_diagonal(cls, d: int, diag: Sequence[float]) -> "OutcomeMatrix":
        """Success on the diagonal with the remainder sent to the inconclusive column."""
        diag = np.asarray(diag, dtype=float)
        n = d * d
        p = np.zeros((n, n + 1))
        p[np.arange(n), np.arange(n)] = diag
        p[:, -1] = 1.0 - diag
        return cls(d, p, has_inconclusive=True)


@dataclass(frozen=True)
class BoundReport:
    kind: str
    bound_value: float
    achieved_value: float
    trials: int = 0
    best_trial: int = -1

    @property
    def gap(self) -> float:
        return self.bound_value - self.achieved_value


@dataclass(frozen=True)
class UnambiguityReport:
    has_inconclusive: bool
    max_off_diagonal: float
    diagonal: np.ndarray
    diagonal_spread: float
    conclusive_probability: float
    error_free: bool
    constant: bool

    @property
    def passed(self) -> bool:
        return self.has_inconclusive and self.error_free and self.constant


@dataclass(frozen=True)
class TriangleReport:
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= -1e-12 * max(1.0, self.rhs)


class MonteCarloResult(NamedTuple):
    estimate: float
    stderr: float
    samples: int


def outcome_matrix(
    proto: DenseCodingProtocol, psi: BipartiteState, *, validate: bool = True
) -> OutcomeMatrix:
    """Conditional outcome probabilities ``P(s|r) = Tr(Pi_s E_r(|psi><psi|))``."""
    if psi.d != proto.d:
        raise ValueError(f"state has d={psi.d}, protocol has d={proto.d}")
    if validate:
        for r, ch in enumerate(proto.encodings):
            rep = validate_channel(ch)
            if not rep.passed:
                raise ValidationError(
                    f"encoding {r} is not trace preserving (residual {rep.residual:.3e})", rep
                )
        rep = validate_povm(proto.measurement)
        if not rep.passed:
            raise ValidationError("invalid measurement: " + "; ".join(rep.problems), rep)

    els = proto.measurement.stacked()
    p = np.empty((proto.d**2, len(els)))
    for r, ch in enumerate(proto.encodings):
        branches = encoded_states(ch, psi)
        # sum_k <b_k| Pi_s |b_k>
        p[r] = np.einsum("ki,sij,kj->s", branches.conj(), els, branches).real
    return OutcomeMatrix(proto.d, p, has_inconclusive=proto.measurement.has_inconclusive)


def success_probability(om: OutcomeMatrix, prior: Prior) -> float:
    if prior.n != om.d**2:
        raise ValueError(f"prior has {prior.n} entries, expected {om.d ** 2}")
    return float(prior.probs @ om.diagonal)


def average_success_probability(om: OutcomeMatrix) -> float:
    """Success probability averaged over priors drawn uniformly from the simplex.

    Each prior coordinate has mean ``1/d**2`` under the flat measure, so the
    average reduces to the mean of the diagonal.
    """
    return float(np.mean(om.diagonal))


def sample_uniform_simplex(n: int, samples: int, seed: int) -> np.ndarray:
    """``samples`` points uniform on the ``n``-simplex (normalized exponentials)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_exponential((samples, n))
    return x / x.sum(axis=1, keepdims=True)


def monte_carlo_average(om: OutcomeMatrix, samples: int, seed: int = 0) -> MonteCarloResult:
    """Monte Carlo estimate of :func:`average_success_probability`."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    diag = om.diagonal
    if np.all(diag == diag[0]):
        # constant integrand on the simplex
        return MonteCarloResult(float(diag[0]), 0.0, samples)
    values = sample_uniform_simplex(diag.size, samples, seed) @ diag
    stderr = float(np.std(values, ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return MonteCarloResult(float(np.mean(values)), stderr, samples)


def approximate_bound(spec: SchmidtSpectrum) -> float:
    """Best average success for approximate dense coding, ``(sum lambda_i)**2 / d``."""
    return float(np.sum(spec.lambdas) ** 2 / spec.d)


def unambiguous_bound(spec: SchmidtSpectrum) -> float:
    """Best constant conclusive probability, ``d * lambda_{d-1}**2``."""
    return float(spec.d * spec.lambdas[-1] ** 2)


def generalized_pauli(d: int, m: int, n: int) -> np.ndarray:
    """Shift-and-phase operator ``sum_k exp(2 pi i k n / d) |k + m mod d><k|``."""
    if d < 1:
        raise ValueError("d must be positive")
    if not (0 <= m < d and 0 <= n < d):
        raise ValueError(f"indices (m, n) = ({m}, {n}) out of range for d={d}")
    k = np.arange(d)
    out = np.zeros((d, d), dtype=complex)
    out[(k + m) % d, k] = np.exp(2j * np.pi * k * n / d)
    return out


def pauli_encodings(d: int) -> tuple:
    return tuple(
        QuantumChannel.unitary(generalized_pauli(d, *Signal.from_index(r, d))) for r in range(d * d)
    )


def _shifted_vectors(d: int, weights: np.ndarray) -> np.ndarray:
    """Rows ``sum_k weights[k] exp(2 pi i k n / d) |k + m mod d>|k>``, ordered by signal."""
    k = np.arange(d)
    vecs = np.zeros((d * d, d * d), dtype=complex)
    for r in range(d * d):
        m, n = Signal.from_index(r, d)
        vecs[r, ((k + m) % d) * d + k] = weights * np.exp(2j * np.pi * k * n / d)
    return vecs


def build_approximate_protocol(d: int) -> DenseCodingProtocol:
    """Generalized Pauli encodings with Bob measuring in the shifted Bell basis."""
    if d < 2:
        raise ValueError("dense coding needs d >= 2")
    vecs = _shifted_vectors(d, np.full(d, 1.0 / np.sqrt(d)))
    elements = tuple(np.outer(v, v.conj()) for v in vecs)
    labels = tuple(f"{m},{n}" for m, n in (Signal.from_index(r, d) for r in range(d * d)))
    return DenseCodingProtocol(d, pauli_encodings(d), Povm(elements, labels=labels))


def unambiguous_vectors(spec: SchmidtSpectrum) -> np.ndarray:
    """Unnormalized vectors ``sum_k exp(2 pi i k n / d) / lambda_k |k + m>|k>``, one per row."""
    if spec.lambdas[-1] <= EPS_ZERO:
        raise ValueError(
            "smallest Schmidt coefficient is zero: the unambiguous bound is 0 and is "
            "attained only by the all-inconclusive protocol (see all_inconclusive_protocol)"
        )
    return _shifted_vectors(spec.d, 1.0 / spec.lambdas)


def build_unambiguous_protocol(spec: SchmidtSpectrum) -> DenseCodingProtocol:
    """Error-free protocol with signal-independent conclusive probability ``d * lambda_min**2``."""
    d = spec.d
    if d < 2:
        raise ValueError("dense coding needs d >= 2")
    vecs = unambiguous_vectors(spec)
    scale = spec.lambdas[-1] ** 2 / d
    elements = [scale * np.outer(v, v.conj()) for v in vecs]
    inconclusive = np.eye(d * d) - np.sum(elements, axis=0)
    labels = tuple(f"{m},{n}" for m, n in (Signal.from_index(r, d) for r in range(d * d)))
    povm = Povm(tuple(elements) + (inconclusive,), has_inconclusive=True, labels=labels + ("?",))
    return DenseCodingProtocol(d, pauli_encodings(d), povm)


def all_inconclusive_protocol(d: int) -> DenseCodingProtocol:
    """Trivial unambiguous protocol that always reports the inconclusive outcome."""
    zero = np.zeros((d * d, d * d))
    povm = Povm((zero,) * (d * d) + (np.eye(d * d),), has_inconclusive=True)
    return DenseCodingProtocol(d, pauli_encodings(d), povm)


def check_unambiguous(om: OutcomeMatrix, tol: float = TOL_ERR) -> UnambiguityReport:
    n = om.d**2
    square = om.p[:, :n]
    diag = np.diagonal(square).copy()
    off = square - np.diag(diag)
    max_off = float(np.max(np.abs(off))) if n > 1 else 0.0
    spread = float(np.max(diag) - np.min(diag))
    return UnambiguityReport(
        has_inconclusive=om.has_inconclusive,
        max_off_diagonal=max_off,
        diagonal=diag,
        diagonal_spread=spread,
        conclusive_probability=float(np.mean(diag)),
        error_free=max_off <= tol,
        constant=spread <= tol,
    )


def post_probability(om: OutcomeMatrix, prior: Prior) -> np.ndarray:
    """Distribution of the decoded signal given a conclusive outcome."""
    if prior.n != om.d**2:
        raise ValueError(f"prior has {prior.n} entries, expected {om.d ** 2}")
    if not om.has_inconclusive:
        raise ValueError("post-probabilities need an outcome matrix with an inconclusive column")
    weighted = prior.probs * om.diagonal
    total = weighted.sum()
    if total <= 0:
        raise ValueError("no conclusive outcomes occur under this prior")
    return weighted / total


def triangle_inequality_check(vectors) -> TriangleReport:
    """Compare ``||sum_k x_k||**2`` with ``(sum_k ||x_k||)**2``."""
    x = np.atleast_2d(np.asarray(vectors, dtype=complex))
    lhs = float(np.sum(np.abs(x.sum(axis=0)) ** 2))
    rhs = float(np.sum(np.linalg.norm(x, axis=1)) ** 2)
    return TriangleReport(lhs=lhs, rhs=rhs)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factorization of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def _near_identity(dim: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    """``exp(i * scale * H)`` for a random Hermitian ``H`` with unit-variance entries."""
    h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(1j * scale * w)) @ v.conj().T


@lru_cache(maxsize=None)
def _fourier_povm(d: int) -> np.ndarray:
    els = build_approximate_protocol(d).measurement.stacked()
    els.setflags(write=False)
    return els


def _random_approximate(d: int, rng: np.random.Generator, trial: int) -> DenseCodingProtocol:
    if trial % 2:
        encodings = tuple(QuantumChannel.unitary(haar_unitary(d, rng)) for _ in range(d * d))
        w = haar_unitary(d * d, rng)
    else:
        eps = rng.uniform(0.0, 0.5)
        encodings = tuple(
            QuantumChannel.unitary(_near_identity(d, eps, rng) @ ch.kraus[0])
            for ch in pauli_encodings(d)
        )
        w = _near_identity(d * d, eps, rng)
    povm = Povm(tuple(w @ _fourier_povm(d) @ w.conj().T))
    return DenseCodingProtocol(d, encodings, povm)


def dual_basis_protocol(d: int, encodings: Sequence[QuantumChannel], psi: BipartiteState):
    """Best equal-weight unambiguous measurement for given unitary encodings.

    With ``Psi`` the matrix whose columns are the encoded states, the elements
    are ``C |psi~_r><psi~_r|`` over the reciprocal basis ``<psi~_r|psi_s> = delta``,
    and ``C = lambda_min(Psi Psi^H)`` is the largest common scaling that keeps
    the inconclusive element positive. Returns ``None`` when the encoded states
    are linearly dependent (only the trivial protocol remains).
    """
    states = np.stack([encoded_states(ch, psi)[0] for ch in encodings], axis=1)
    gram = states @ states.conj().T
    c = float(linalg.eigvalsh(gram)[-1])
    if c <= EPS_ZERO:
        return None
    dual = np.linalg.solve(states.conj().T, np.eye(d * d)).T
    # rows of ``dual`` are the reciprocal vectors
    elements = [c * np.outer(v, v.conj()) for v in dual]
    inconclusive = np.eye(d * d) - np.sum(elements, axis=0)
    inconclusive = 0.5 * (inconclusive + inconclusive.conj().T)
    povm = Povm(tuple(elements) + (inconclusive,), has_inconclusive=True)
    return DenseCodingProtocol(d, tuple(encodings), povm)


def _random_unambiguous(d: int, psi: BipartiteState, rng: np.random.Generator, trial: int):
    if trial % 2:
        encodings = [QuantumChannel.unitary(haar_unitary(d, rng)) for _ in range(d * d)]
    else:
        eps = rng.uniform(0.0, 0.5)
        encodings = [
            QuantumChannel.unitary(_near_identity(d, eps, rng) @ ch.kraus[0])
            for ch in pauli_encodings(d)
        ]
    return dual_basis_protocol(d, encodings, psi)


def random_protocol_search(
    spec: SchmidtSpectrum,
    trials: int,
    seed: int = 0,
    kind: Kind = "approximate",
    *,
    include_construction: bool = True,
) -> BoundReport:
    """Random search for protocols beating the analytic bound.

    Odd trials draw Haar-random unitary encodings; even trials perturb the
    generalized Pauli encodings by random near-identity unitaries, so that the
    neighbourhood of the optimum is probed too. Approximate trials measure in
    the shifted Bell basis rotated by a unitary on the joint system (Haar-random
    or near-identity, matching the encodings). Unambiguous trials pair the
    encodings with the best equal-weight error-free measurement; only trials
    that pass :func:`check_unambiguous` are scored.
    With ``include_construction`` trial 0 is the optimal construction.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    d = spec.d
    psi = state_from_spectrum(spec)
    rng = np.random.default_rng(seed)
    if kind == "approximate":
        bound = approximate_bound(spec)
    elif kind == "unambiguous":
        bound = unambiguous_bound(spec)
    else:
        raise ValueError(f"unknown kind {kind!r}")

    best, best_trial = 0.0, -1
    for t in range(trials):
        if kind == "approximate":
            if t == 0 and include_construction:
                proto = build_approximate_protocol(d)
            else:
                proto = _random_approximate(d, rng, t)
            value = average_success_probability(outcome_matrix(proto, psi, validate=False))
        else:
            if t == 0 and include_construction:
                if spec.lambdas[-1] > EPS_ZERO:
                    proto = build_unambiguous_protocol(spec)
                else:
                    proto = all_inconclusive_protocol(d)
            else:
                proto = _random_unambiguous(d, psi, rng, t)
            if proto is None:
                value = 0.0
            else:
                report = check_unambiguous(outcome_matrix(proto, psi, validate=False), tol=1e-8)
                value = report.conclusive_probability if report.passed else 0.0
        if value > best or best_trial < 0:
            best, best_trial = value, t
    return BoundReport(kind, bound, best, trials=trials, best_trial=best_trial)
