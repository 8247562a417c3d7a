"""Bipartite pure states, Kraus channels and POVMs on ``H_d (x) H_d``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .linalg import TOL_HERM, TOL_RECON

TOL_NORM = 1e-10
TOL_PSD = 1e-9
TOL_POVM = 1e-9
EPS_ZERO = 1e-12


class ValidationError(ValueError):
    """Raised when a channel or measurement fails its validity checks.

    The failing diagnostic report is attached as ``report``.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Schmidt coefficients ``lambda_0 >= ... >= lambda_{d-1} >= 0``, unit 2-norm."""

    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("lambdas must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(lam)):
            raise ValueError("lambdas must be finite")
        if np.any(lam < 0):
            raise ValueError(f"Schmidt coefficients must be nonnegative, got {lam.tolist()}")
        if np.any(np.diff(lam) > 0):
            raise ValueError(f"Schmidt coefficients must be descending, got {lam.tolist()}")
        total = float(np.sum(lam**2))
        if abs(total - 1.0) > TOL_NORM:
            raise ValueError(f"squared Schmidt coefficients sum to {total!r}, not 1")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def d(self) -> int:
        return int(self.lambdas.size)

    @classmethod
    def maximally_entangled(cls, d: int) -> "SchmidtSpectrum":
        if d < 1:
            raise ValueError("d must be positive")
        return cls(np.full(d, 1.0 / np.sqrt(d)))

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "SchmidtSpectrum":
        """Build from squared coefficients ``lambda_i**2``."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("Schmidt weights must be nonnegative")
        return cls(np.sqrt(w))

    @classmethod
    def from_unsorted(cls, values: Sequence[float]) -> "SchmidtSpectrum":
        """Sort descending and renormalize arbitrary nonnegative amplitudes."""
        v = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
        return cls(v / np.linalg.norm(v))


@dataclass(frozen=True)
class BipartiteState:
    """Pure state of two ``d``-level systems; composite index is ``i_A * d + i_B``."""

    d: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = linalg.cvector(self.amplitudes, name="amplitudes")
        if self.d < 1 or amp.size != self.d * self.d:
            raise ValueError(f"expected {self.d * self.d} amplitudes for d={self.d}, got {amp.size}")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > TOL_NORM:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def coefficient_matrix(self) -> np.ndarray:
        """Amplitudes reshaped so that entry ``[i, j]`` multiplies ``|i>|j>``."""
        return self.amplitudes.reshape(self.d, self.d)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class QuantumChannel:
    """Operation on one ``d``-level system given by Kraus operators.

    Trace preservation is *not* enforced here; see :func:`validate_channel`.
    """

    kraus: tuple

    def __post_init__(self):
        ops = [linalg.cmatrix(k, name="Kraus operator") for k in self.kraus]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise ValueError(f"Kraus operators must all be {d}x{d}, got {k.shape}")
            k.setflags(write=False)
        object.__setattr__(self, "kraus", tuple(ops))

    @property
    def d(self) -> int:
        return self.kraus[0].shape[0]

    @classmethod
    def unitary(cls, u) -> "QuantumChannel":
        return cls((u,))


@dataclass(frozen=True)
class Povm:
    """Measurement on a ``dim``-dimensional space.

    When ``has_inconclusive`` is set the last element is the inconclusive
    outcome. Positivity and completeness are checked by :func:`validate_povm`.
    """

    elements: tuple
    has_inconclusive: bool = False
    labels: Optional[tuple] = None

    def __post_init__(self):
        els = [linalg.cmatrix(e, name="POVM element") for e in self.elements]
        if not els:
            raise ValueError("a POVM needs at least one element")
        dim = els[0].shape[0]
        for e in els:
            if e.shape != (dim, dim):
                raise ValueError(f"POVM elements must all be {dim}x{dim}, got {e.shape}")
            e.setflags(write=False)
        object.__setattr__(self, "elements", tuple(els))
        if self.labels is None:
            labels = [str(i) for i in range(len(els))]
            if self.has_inconclusive:
                labels[-1] = "?"
            object.__setattr__(self, "labels", tuple(labels))
        elif len(self.labels) != len(els):
            raise ValueError("labels and elements differ in length")
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def stacked(self) -> np.ndarray:
        return np.stack(self.elements)


@dataclass(frozen=True)
class Prior:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("prior must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("prior probabilities must be finite and nonnegative")
        if abs(float(p.sum()) - 1.0) > TOL_NORM:
            raise ValueError(f"prior sums to {float(p.sum())!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return int(self.probs.size)

    @classmethod
    def uniform(cls, n: int) -> "Prior":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class ChannelReport:
    residual: float
    passed: bool


@dataclass(frozen=True)
class PovmReport:
    min_eigenvalues: np.ndarray
    hermitian_residual: float
    completeness_residual: float
    passed: bool
    problems: list = field(default_factory=list)


def state_from_spectrum(spec: SchmidtSpectrum) -> BipartiteState:
    d = spec.d
    amp = np.zeros(d * d, dtype=complex)
    amp[np.arange(d) * (d + 1)] = spec.lambdas
    return BipartiteState(d, amp)


def schmidt_decompose(psi: BipartiteState):
    """Schmidt form ``psi = sum_i lambda_i |a_i>|b_i>``.

    Returns ``(spectrum, basis_a, basis_b)`` with the local bases as columns.
    Zero coefficients are kept, so the spectrum always has ``psi.d`` entries.
    """
    u, s, v = linalg.svd(psi.coefficient_matrix())
    # coefficient matrix M = U S V^H, so |b_i> carries the conjugated column of V
    lam = np.clip(s, 0.0, None)
    lam = lam / np.linalg.norm(lam)
    return SchmidtSpectrum(lam), u, np.conj(v)


def validate_channel(ch: QuantumChannel, tol: float = TOL_POVM) -> ChannelReport:
    ks = np.stack(ch.kraus)
    total = np.einsum("kji,kjl->il", ks.conj(), ks)
    residual = float(np.max(np.abs(total - np.eye(ch.d))))
    return ChannelReport(residual=residual, passed=residual <= tol)


def validate_povm(m: Povm, tol_psd: float = TOL_PSD, tol_povm: float = TOL_POVM) -> PovmReport:
    els = m.stacked()
    herm = linalg.hermitian_residual(els)
    problems = []
    if herm > TOL_HERM:
        problems.append(f"non-Hermitian element (residual {herm:.3e})")
        mins = np.full(len(els), np.nan)
    else:
        mins = linalg.eigvalsh(els)[:, -1]
        for label, lo in zip(m.labels, mins):
            if lo < -tol_psd:
                problems.append(f"element {label} has negative eigenvalue {lo:.3e}")
    completeness = float(np.max(np.abs(els.sum(axis=0) - np.eye(m.dim))))
    if completeness > tol_povm:
        problems.append(f"elements do not sum to identity (residual {completeness:.3e})")
    return PovmReport(
        min_eigenvalues=mins,
        hermitian_residual=herm,
        completeness_residual=completeness,
        passed=not problems,
        problems=problems,
    )


def encoded_states(ch: QuantumChannel, psi: BipartiteState) -> np.ndarray:
    """Unnormalized branches ``(E_k (x) I)|psi>``, one row per Kraus operator."""
    if ch.d != psi.d:
        raise ValueError(f"channel acts on d={ch.d} but state has d={psi.d}")
    coeff = psi.coefficient_matrix()
    # (E (x) I) acts on the first index of the coefficient matrix
    return np.stack([(k @ coeff).reshape(-1) for k in ch.kraus])


def apply_encoding(ch: QuantumChannel, psi: BipartiteState) -> np.ndarray:
    """Density operator ``sum_k (E_k (x) I)|psi><psi|(E_k^H (x) I)``."""
    branches = encoded_states(ch, psi)
    return branches.T @ branches.conj()
