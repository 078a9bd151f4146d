"""
Interferometer unitaries, port configurations and the matrices built from them.

Rows of ``U`` are output ports, columns are input ports: ``U[d, s]`` is the
amplitude for a photon entering at ``s`` to leave at ``d``.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np
from opentelemetry import trace
from scipy import linalg

from .decorators import traced
from .errors import InputValidationError
from .spectra import check_permutation

GENERATION_TOLERANCE = 1e-10
INGESTION_TOLERANCE = 1e-8
SEED_MASK = 2 ** 64 - 1


def make_rng(seed: int) -> np.random.Generator:
    """
    Seeded generator shared by every random routine.

    Philox is a counter-based 64-bit generator, so a seed fixes the stream
    independently of the platform. Signed seeds are taken modulo 2^64, so
    ``-1`` and ``2**64 - 1`` name the same stream.
    """
    return np.random.Generator(np.random.Philox(int(seed) & SEED_MASK))


@dataclass(frozen=True)
class InterferometerMatrix:
    """M x M unitary describing the interferometer."""
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def from_entries(cls, entries: Iterable, tolerance: float = INGESTION_TOLERANCE,
                     check: bool = True) -> "InterferometerMatrix":
        """
        Wraps an explicit matrix. Hand-entered matrices are checked at a looser tolerance
        than generated ones; ``check=False`` defers the check to ``validate``.
        """
        array = np.array(entries, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] < 1:
            raise InputValidationError(f"Interferometer matrix must be square and non-empty, got shape {array.shape}.")
        array.setflags(write=False)
        matrix = cls(array)
        if check:
            matrix.validate(tolerance)
        return matrix

    def unitarity_error(self) -> float:
        """``max |(U U^H - I)_ij|``."""
        u = self.entries
        return float(np.max(np.abs(u @ u.conj().T - np.eye(self.dim))))

    def validate(self, tolerance: float = INGESTION_TOLERANCE):
        error = self.unitarity_error()
        if error >= tolerance:
            raise InputValidationError(
                f"Interferometer matrix is not unitary: max |U U^H - I| = {error:.3e} "
                f"exceeds {tolerance:.0e}."
            )


@dataclass(frozen=True)
class PortConfiguration:
    """
    Occupied input ports ``S`` (in listed order) and an output sample ``D``
    given as an occupation vector over all M ports.
    """
    input_ports: Tuple[int, ...]
    output_sample: Tuple[int, ...]

    def __post_init__(self):
        ports = tuple(int(p) for p in self.input_ports)
        occupation = tuple(int(n) for n in self.output_sample)
        object.__setattr__(self, "input_ports", ports)
        object.__setattr__(self, "output_sample", occupation)
        if len(set(ports)) != len(ports):
            raise InputValidationError(f"Input ports must be distinct, got {ports}.")
        if any(n < 0 for n in occupation):
            raise InputValidationError(f"Occupations must be non-negative, got {occupation}.")
        if sum(occupation) != len(ports):
            raise InputValidationError(
                f"Output sample holds {sum(occupation)} photons but {len(ports)} were injected."
            )

    @classmethod
    def from_ports(cls, input_ports: Sequence[int], output_ports: Sequence[int], m: int) -> "PortConfiguration":
        """Builds the occupation vector from a list of (possibly repeated) output ports."""
        occupation = [0] * m
        for d in output_ports:
            if not 0 <= d < m:
                raise InputValidationError(f"Output port {d} is out of range for {m} ports.")
            occupation[d] += 1
        return cls(tuple(input_ports), tuple(occupation))

    @property
    def n(self) -> int:
        return len(self.input_ports)

    @property
    def m(self) -> int:
        return len(self.output_sample)

    def output_ports(self) -> Tuple[int, ...]:
        """Output ports in ascending order, repeated by occupation."""
        return tuple(d for d, count in enumerate(self.output_sample) for _ in range(count))

    def check_against(self, m: int):
        if self.m != m:
            raise InputValidationError(f"Output sample covers {self.m} ports, interferometer has {m}.")
        for s in self.input_ports:
            if not 0 <= s < m:
                raise InputValidationError(f"Input port {s} is out of range for {m} ports.")


@traced
def haar_random(M: int, seed: int) -> InterferometerMatrix:
    """
    Haar-distributed M x M unitary: QR of a complex Ginibre matrix with the
    phases of R's diagonal moved into Q.
    """
    if M < 1:
        raise InputValidationError(f"Interferometer needs at least one port, got M = {M}.")
    trace.get_current_span().set_attribute("unitary.m", M)
    rng = make_rng(seed)
    z = (rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))) / math.sqrt(2.0)
    q, r = linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    q.setflags(write=False)
    return InterferometerMatrix(q)


def balanced_beam_splitter() -> InterferometerMatrix:
    """``(1/sqrt 2) [[1, i], [i, 1]]``."""
    entries = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=complex) / math.sqrt(2.0)
    entries.setflags(write=False)
    return InterferometerMatrix(entries)


def submatrix(U: InterferometerMatrix, cfg: PortConfiguration) -> np.ndarray:
    """
    ``U^(D,S)``: columns from ``S`` in listed order, rows from ``D`` with
    repetition, ascending port index with repeats adjacent.
    """
    cfg.check_against(U.dim)
    rows = np.array(cfg.output_ports(), dtype=np.intp)
    cols = np.array(cfg.input_ports, dtype=np.intp)
    return U.entries[np.ix_(rows, cols)]


def interference_matrix(U_sub: np.ndarray, rho: Sequence[int]) -> np.ndarray:
    """
    ``A_rho[d, s] = conj(U_sub[d, s]) * U_sub[d, rho(s)]``.
    """
    U_sub = np.asarray(U_sub, dtype=complex)
    if U_sub.ndim != 2 or U_sub.shape[0] != U_sub.shape[1]:
        raise InputValidationError(f"Interference matrices need a square submatrix, got shape {U_sub.shape}.")
    rho = check_permutation(rho, U_sub.shape[0])
    return U_sub.conj() * U_sub[:, list(rho)]
