"""
Single-photon spectral amplitudes, pairwise overlaps and indistinguishability weights.

A photon injected at input port ``s`` is described by a polarization-vector-valued
spectral amplitude ``xi_s(omega)`` normalized to one. Two photons overlap through

    g(a, b) = integral d omega  conj(xi_a(omega)) . xi_b(omega)

which is conjugate-linear in the first argument so that ``g(s, s) = 1`` and the
Gram matrix of a photon set is Hermitian positive semidefinite.

Units: angular frequencies for ``central_frequency`` and ``bandwidth``, the
matching inverse unit for ``emission_time``.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy import integrate

from .errors import InputValidationError, NumericalError

logger = logging.getLogger(__name__)

POLARIZATION_TOLERANCE = 1e-12
QUADRATURE_TOLERANCE = 1e-10
# Half-width of the integration window in units of the bandwidth.
WINDOW_WIDTHS = 10.0

HERMITIAN_TOLERANCE = 1e-10
DIAGONAL_TOLERANCE = 1e-10
PSD_TOLERANCE = 1e-9
MODULUS_TOLERANCE = 1e-10


class SpectrumKind(str, Enum):
    GAUSSIAN_PULSE = "gaussian_pulse"
    DELTA = "delta"


class SpectralAmplitude(BaseModel):
    """
    A photon's complex spectral distribution with polarization.

    ``GAUSSIAN_PULSE`` photons have the normalized amplitude

        xi(omega) = (2 pi dw^2)^(-1/4) exp(-(omega - w0)^2 / (4 dw^2) + i omega t0) * p

    and ``DELTA`` photons are the zero-bandwidth limit of that family.
    """
    model_config = ConfigDict(frozen=True)

    kind: SpectrumKind = SpectrumKind.GAUSSIAN_PULSE
    central_frequency: float
    bandwidth: float = 0.0
    emission_time: float = 0.0
    polarization: Tuple[complex, complex] = (1 + 0j, 0j)

    @field_validator("polarization", mode="before")
    @classmethod
    def _coerce_polarization(cls, value: Any) -> Any:
        # Scenario files carry [re, im, re, im]
        if isinstance(value, (list, tuple)) and len(value) == 4:
            re1, im1, re2, im2 = (float(v) for v in value)
            return (complex(re1, im1), complex(re2, im2))
        return value

    @field_validator("polarization")
    @classmethod
    def _unit_polarization(cls, value: Tuple[complex, complex]) -> Tuple[complex, complex]:
        norm = math.sqrt(abs(value[0]) ** 2 + abs(value[1]) ** 2)
        if abs(norm - 1.0) > POLARIZATION_TOLERANCE:
            raise ValueError(
                f"Polarization must be a unit vector, got norm {norm:.15g}. "
                "Normalize the Jones vector before building the spectrum."
            )
        return value

    @model_validator(mode="after")
    def _positive_bandwidth(self) -> "SpectralAmplitude":
        if self.kind is SpectrumKind.GAUSSIAN_PULSE and not self.bandwidth > 0:
            raise ValueError(f"Gaussian pulses need bandwidth > 0, got {self.bandwidth!r}.")
        if self.kind is SpectrumKind.DELTA and self.bandwidth < 0:
            raise ValueError(f"Bandwidth cannot be negative, got {self.bandwidth!r}.")
        return self

    @property
    def jones(self) -> np.ndarray:
        return np.array(self.polarization, dtype=complex)

    def window(self) -> Tuple[float, float]:
        """Frequency interval holding the amplitude up to a 10-sigma truncation."""
        half = WINDOW_WIDTHS * self.bandwidth
        return self.central_frequency - half, self.central_frequency + half

    def amplitude(self, omega) -> np.ndarray:
        """
        Vector amplitude ``xi(omega)``; the last axis holds the two polarization components.
        """
        if self.kind is not SpectrumKind.GAUSSIAN_PULSE:
            raise InputValidationError(
                f"A {self.kind.value} spectrum has no pointwise amplitude; "
                "use the closed-form overlap instead."
            )
        omega = np.asarray(omega, dtype=float)
        sigma = self.bandwidth
        envelope = (2.0 * math.pi * sigma ** 2) ** -0.25 * np.exp(
            -((omega - self.central_frequency) ** 2) / (4.0 * sigma ** 2) + 1j * omega * self.emission_time
        )
        return envelope[..., np.newaxis] * self.jones

    def norm_squared(self) -> float:
        """Numerical value of the integral of ``|xi(omega)|^2``."""
        if self.kind is SpectrumKind.DELTA:
            return 1.0
        lo, hi = self.window()
        value, _ = _quad(lambda w: float(np.sum(np.abs(self.amplitude(w)) ** 2)), lo, hi)
        return value

    def delayed(self, dt: float) -> "SpectralAmplitude":
        """Copy emitted ``dt`` later."""
        return self.model_copy(update={"emission_time": self.emission_time + dt})


def overlap(a: SpectralAmplitude, b: SpectralAmplitude, method: str = "auto") -> complex:
    """
    Two-photon indistinguishability factor ``g(a, b)``.

    ``method="auto"`` uses the closed forms; ``"quadrature"`` integrates the
    vector amplitudes numerically (Gaussian pulses only) as a cross-check.
    """
    _check_normalized(a)
    _check_normalized(b)

    if method == "quadrature":
        return _overlap_quadrature(a, b)
    if method != "auto":
        raise InputValidationError(f"Unknown overlap method {method!r}; use 'auto' or 'quadrature'.")

    gaussian = SpectrumKind.GAUSSIAN_PULSE
    if a.kind is gaussian and b.kind is gaussian:
        return _overlap_gaussian(a, b)
    if a.kind is SpectrumKind.DELTA and b.kind is SpectrumKind.DELTA:
        return _overlap_delta(a, b)
    # Zero-bandwidth limit of the Gaussian closed form: the prefactor vanishes.
    return 0j


def gram_matrix(spectra: Sequence[SpectralAmplitude], method: str = "auto") -> "GramMatrix":
    """
    Pairwise overlaps of a photon set.
    """
    spectra = list(spectra)
    n = len(spectra)
    if n < 1:
        raise InputValidationError("A Gram matrix needs at least one photon.")

    entries = np.empty((n, n), dtype=complex)
    for s in range(n):
        for t in range(s, n):
            value = overlap(spectra[s], spectra[t], method=method)
            entries[s, t] = value
            entries[t, s] = np.conj(value)
    return GramMatrix.from_entries(entries)


def indistinguishability_weight(G: "GramMatrix", rho: Sequence[int]) -> complex:
    """
    ``f_rho = prod_s g(s, rho(s))``.
    """
    rho = check_permutation(rho, G.dim)
    weight = 1 + 0j
    for s, target in enumerate(rho):
        weight *= G.entries[s, target]
    return complex(weight)


def dip_visibility(a: SpectralAmplitude, b: SpectralAmplitude) -> float:
    """``|g(a, b)|^2``, the quantity the two-photon dip is made of."""
    return abs(overlap(a, b)) ** 2


@dataclass(frozen=True)
class GramMatrix:
    """N x N Hermitian positive semidefinite matrix of pairwise overlaps."""
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def from_entries(cls, entries: Iterable, validate: bool = True) -> "GramMatrix":
        array = np.array(entries, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] < 1:
            raise InputValidationError(f"Gram matrix must be square and non-empty, got shape {array.shape}.")
        array.setflags(write=False)
        gram = cls(array)
        if validate:
            gram.validate()
        return gram

    @classmethod
    def identity(cls, n: int) -> "GramMatrix":
        """Fully distinguishable photons."""
        return cls.from_entries(np.eye(n, dtype=complex), validate=False)

    @classmethod
    def ones(cls, n: int) -> "GramMatrix":
        """Fully indistinguishable photons."""
        return cls.from_entries(np.ones((n, n), dtype=complex), validate=False)

    @classmethod
    def block(cls, n: int, group: Iterable[int]) -> "GramMatrix":
        """Photons at positions ``group`` identical to each other, the rest distinguishable from all."""
        entries = np.eye(n, dtype=complex)
        group = sorted(set(group))
        for s in group:
            for t in group:
                entries[s, t] = 1.0
        return cls.from_entries(entries, validate=False)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def violations(self) -> List[str]:
        """Human-readable list of broken invariants, empty when the matrix is a valid Gram matrix."""
        problems = []
        g = self.entries
        hermitian = float(np.max(np.abs(g - g.conj().T)))
        if hermitian > HERMITIAN_TOLERANCE:
            problems.append(f"not Hermitian (max |G - G^H| = {hermitian:.3e})")
        diagonal = float(np.max(np.abs(np.diag(g) - 1.0)))
        if diagonal > DIAGONAL_TOLERANCE:
            problems.append(f"diagonal is not 1 (max deviation {diagonal:.3e})")
        modulus = float(np.max(np.abs(g)))
        if modulus > 1.0 + MODULUS_TOLERANCE:
            problems.append(f"entry modulus {modulus:.15g} exceeds 1")
        if hermitian <= HERMITIAN_TOLERANCE:
            smallest = self.min_eigenvalue()
            if smallest < -PSD_TOLERANCE:
                problems.append(f"not positive semidefinite (eigenvalue {smallest:.6e})")
        return problems

    def validate(self):
        problems = self.violations()
        if problems:
            raise InputValidationError("Invalid Gram matrix: " + "; ".join(problems) + ".")


def _overlap_gaussian(a: SpectralAmplitude, b: SpectralAmplitude) -> complex:
    polarization = complex(np.vdot(a.jones, b.jones))
    if polarization == 0:
        return 0j
    va, vb = a.bandwidth ** 2, b.bandwidth ** 2
    total = va + vb
    tau = b.emission_time - a.emission_time
    detuning = a.central_frequency - b.central_frequency
    # Centre of the product envelope; its phase is the mean carrier seen by the delay.
    centre = (a.central_frequency * vb + b.central_frequency * va) / total
    prefactor = math.sqrt(2.0 * a.bandwidth * b.bandwidth / total)
    exponent = complex(-(detuning ** 2) / (4.0 * total) - tau ** 2 * va * vb / total, tau * centre)
    return polarization * prefactor * complex(np.exp(exponent))


def _overlap_delta(a: SpectralAmplitude, b: SpectralAmplitude) -> complex:
    if a.central_frequency != b.central_frequency:
        return 0j
    polarization = complex(np.vdot(a.jones, b.jones))
    tau = b.emission_time - a.emission_time
    return polarization * complex(np.exp(1j * a.central_frequency * tau))


def _overlap_quadrature(a: SpectralAmplitude, b: SpectralAmplitude) -> complex:
    if a.kind is not SpectrumKind.GAUSSIAN_PULSE or b.kind is not SpectrumKind.GAUSSIAN_PULSE:
        raise InputValidationError("Quadrature overlaps need two spectra with pointwise amplitudes.")
    lo = min(a.window()[0], b.window()[0])
    hi = max(a.window()[1], b.window()[1])

    def integrand(omega: float) -> complex:
        return complex(np.vdot(a.amplitude(omega), b.amplitude(omega)))

    real, _ = _quad(lambda w: integrand(w).real, lo, hi)
    imag, _ = _quad(lambda w: integrand(w).imag, lo, hi)
    logger.debug("quadrature overlap on [%g, %g]: %r", lo, hi, complex(real, imag))
    return complex(real, imag)


def _quad(func, lo: float, hi: float) -> Tuple[float, float]:
    result = integrate.quad(func, lo, hi, epsabs=QUADRATURE_TOLERANCE, epsrel=0.0, limit=500, full_output=1)
    if len(result) > 3:
        value, abserr, info, message = result[:4]
        raise NumericalError(
            f"Overlap quadrature on [{lo:g}, {hi:g}] did not converge: {message} "
            f"(estimate {value!r}, abserr {abserr:.3e}, {info.get('last')} subintervals).",
            abserr=abserr,
            intervals=info.get("last"),
        )
    value, abserr = result[0], result[1]
    return float(value), float(abserr)


def _check_normalized(spectrum: SpectralAmplitude):
    norm = float(np.linalg.norm(spectrum.jones))
    if abs(norm - 1.0) > POLARIZATION_TOLERANCE:
        raise InputValidationError(f"Spectrum is not normalized (polarization norm {norm:.15g}).")
    if spectrum.kind is SpectrumKind.GAUSSIAN_PULSE and not spectrum.bandwidth > 0:
        raise InputValidationError("Spectrum is not normalized (Gaussian pulse with zero bandwidth).")


def check_permutation(rho: Sequence[int], n: int) -> Tuple[int, ...]:
    """Normalizes ``rho`` to a tuple of ints, raising unless it permutes ``0..n-1``."""
    rho = tuple(int(r) for r in rho)
    if len(rho) != n or sorted(rho) != list(range(n)):
        raise InputValidationError(f"Expected a permutation of 0..{n - 1}, got {rho}.")
    return rho
