"""
Detection probabilities for N partially distinguishable photons.

The general path evaluates

    raw(D; S) = sum over rho in S_N of  f_rho * perm A_rho^(D,S)

and normalizes by ``prod_d n_d!`` so that the probabilities of all output
multisets add up to one. Three limiting cases of the Gram matrix have cheaper
closed forms: identity (no interference), all-ones (one permanent) and a
block of mutually identical photons among distinguishable ones.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Collection, Iterator, Optional, Sequence, Tuple

import numpy as np
from opentelemetry import trace

from .decorators import traced
from .errors import InfeasibleError, InputValidationError
from .permanent import permanent_ryser
from .spectra import GramMatrix, indistinguishability_weight
from .unitary import InterferometerMatrix, PortConfiguration, interference_matrix, submatrix

logger = logging.getLogger(__name__)

GENERAL_LIMIT = 10


class Path(str, Enum):
    GENERAL = "general"
    FULLY_DISTINGUISHABLE = "fully_distinguishable"
    FULLY_INDISTINGUISHABLE = "fully_indistinguishable"
    MIXED_GROUPS = "mixed_groups"


@dataclass(frozen=True)
class DetectionProbability:
    value: float
    raw_rate: float
    imaginary_residual: float
    path: Path


def collision_factor(occupation: Sequence[int]) -> int:
    """``prod_d n_d!``, the number of row orderings that give the same sample."""
    factor = 1
    for count in occupation:
        factor *= math.factorial(count)
    return factor


@traced
def probability_general(U: InterferometerMatrix, cfg: PortConfiguration, G: GramMatrix,
                        diagnostics: bool = True) -> DetectionProbability:
    """
    Gram-weighted permanent sum for an arbitrary Gram matrix.

    Permutations are visited in lexicographic order and only ``rho <= rho^-1`` is
    evaluated: ``f_{rho^-1} perm A_{rho^-1}`` is the complex conjugate of the
    ``rho`` term, so an unequal pair contributes ``2 Re(f_rho perm A_rho)``. With
    ``diagnostics`` the partner is evaluated as well and the imaginary part of
    the unpaired sum is reported.
    """
    n = cfg.n
    if G.dim != n:
        raise InputValidationError(f"Gram matrix is {G.dim}x{G.dim} but {n} photons were injected.")
    G.validate()
    if n > GENERAL_LIMIT:
        raise InfeasibleError(
            f"General path refused for N = {n} photons (limit {GENERAL_LIMIT}); "
            "use a limiting-case Gram matrix",
            cost_estimate=math.factorial(n) * 2 ** n * n,
            limit=GENERAL_LIMIT,
        )
    u_sub = submatrix(U, cfg)

    raw = 0.0
    unpaired = 0j
    evaluated = 0
    for rho in itertools.permutations(range(n)):
        inverse = _inverse(rho)
        if rho > inverse:
            continue
        weight = indistinguishability_weight(G, rho)
        if weight == 0:
            continue
        term = weight * permanent_ryser(interference_matrix(u_sub, rho))
        evaluated += 1
        if rho == inverse:
            raw += term.real
            unpaired += term
        else:
            raw += 2.0 * term.real
            if diagnostics:
                unpaired += term + indistinguishability_weight(G, inverse) * permanent_ryser(
                    interference_matrix(u_sub, inverse)
                )
            else:
                unpaired += 2.0 * term.real
    trace.get_current_span().set_attribute("probability.permanents", evaluated)
    logger.debug("general path evaluated %d of %d permutation terms", evaluated, math.factorial(n))

    return DetectionProbability(
        value=raw / collision_factor(cfg.output_sample),
        raw_rate=raw,
        imaginary_residual=abs(unpaired.imag),
        path=Path.GENERAL,
    )


def probability_distinguishable(U: InterferometerMatrix, cfg: PortConfiguration) -> DetectionProbability:
    """
    Fully distinguishable photons: the permanent of the non-negative matrix ``|U_sub|^2``.
    """
    u_sub = submatrix(U, cfg)
    raw = permanent_ryser(np.abs(u_sub) ** 2).real
    return DetectionProbability(raw / collision_factor(cfg.output_sample), raw, 0.0, Path.FULLY_DISTINGUISHABLE)


def probability_identical(U: InterferometerMatrix, cfg: PortConfiguration) -> DetectionProbability:
    """
    Fully indistinguishable photons: ``|perm U_sub|^2``.
    """
    u_sub = submatrix(U, cfg)
    raw = abs(permanent_ryser(u_sub)) ** 2
    return DetectionProbability(raw / collision_factor(cfg.output_sample), raw, 0.0, Path.FULLY_INDISTINGUISHABLE)


def probability_mixed_groups(U: InterferometerMatrix, cfg: PortConfiguration,
                             indistinguishable_subset: Collection[int]) -> DetectionProbability:
    """
    Photons entering at the ports ``indistinguishable_subset`` are identical to each
    other, all others are distinguishable from everything.

    Sums over the sub-multisets ``Theta`` of the sample with ``|Phi|`` photons:
    ``|perm U^(Theta,Phi)|^2 * perm |U^(D\\Theta, S\\Phi)|^2``, each weighted by
    ``prod_d C(n_d, theta_d)``, the number of row selections of ``U_sub`` that
    produce the same ``Theta`` (1 for collision-free samples).
    """
    phi = set(int(p) for p in indistinguishable_subset)
    ports = cfg.input_ports
    if not phi <= set(ports):
        raise InputValidationError(
            f"Indistinguishable ports {sorted(phi)} are not all occupied inputs {list(ports)}."
        )
    cfg.check_against(U.dim)
    group = [s for s in ports if s in phi]
    rest = [s for s in ports if s not in phi]
    occupation = cfg.output_sample

    raw = 0.0
    for theta in _sub_occupations(occupation, len(group)):
        multiplicity = 1
        for total, chosen in zip(occupation, theta):
            multiplicity *= math.comb(total, chosen)
        remaining = tuple(t - c for t, c in zip(occupation, theta))
        coherent = abs(permanent_ryser(_block(U, theta, group))) ** 2
        incoherent = permanent_ryser(np.abs(_block(U, remaining, rest)) ** 2).real
        raw += multiplicity * coherent * incoherent

    return DetectionProbability(raw / collision_factor(occupation), raw, 0.0, Path.MIXED_GROUPS)


def two_photon_probability(U: InterferometerMatrix, cfg: PortConfiguration, g: complex) -> DetectionProbability:
    """
    Explicit two-photon expansion

        |U_ya U_zb|^2 + |U_yb U_za|^2 + |g|^2 2 Re(conj(U_ya U_zb) U_yb U_za)

    for inputs ``a, b`` and outputs ``y <= z``.
    """
    if cfg.n != 2:
        raise InputValidationError(f"The two-photon expansion needs exactly 2 photons, got {cfg.n}.")
    u = submatrix(U, cfg)
    direct = u[0, 0] * u[1, 1]
    exchanged = u[0, 1] * u[1, 0]
    raw = abs(direct) ** 2 + abs(exchanged) ** 2 + abs(g) ** 2 * 2.0 * (np.conj(direct) * exchanged).real
    raw = float(raw)
    return DetectionProbability(raw / collision_factor(cfg.output_sample), raw, 0.0, Path.GENERAL)


def classify_gram(G: GramMatrix) -> Tuple[Path, Tuple[int, ...]]:
    """
    Recognizes the limiting cases exactly (no tolerance).

    Returns the path and, for ``MIXED_GROUPS``, the photon positions of the
    identical group.
    """
    g = G.entries
    n = G.dim
    if np.array_equal(g, np.eye(n)):
        return Path.FULLY_DISTINGUISHABLE, ()
    if np.array_equal(g, np.ones((n, n))):
        return Path.FULLY_INDISTINGUISHABLE, tuple(range(n))
    if not np.all((g == 0) | (g == 1)):
        return Path.GENERAL, ()
    off_diagonal = (g == 1) & ~np.eye(n, dtype=bool)
    group = tuple(int(s) for s in np.flatnonzero(off_diagonal.any(axis=1)))
    if np.array_equal(g, GramMatrix.block(n, group).entries):
        return Path.MIXED_GROUPS, group
    return Path.GENERAL, ()


def probability(U: InterferometerMatrix, cfg: PortConfiguration, G: GramMatrix,
                path: Optional[Path] = None) -> DetectionProbability:
    """
    Detection probability on the cheapest path the Gram matrix allows.
    """
    detected, group = classify_gram(G)
    path = path or detected
    if path is Path.FULLY_DISTINGUISHABLE:
        return probability_distinguishable(U, cfg)
    if path is Path.FULLY_INDISTINGUISHABLE:
        return probability_identical(U, cfg)
    if path is Path.MIXED_GROUPS:
        return probability_mixed_groups(U, cfg, [cfg.input_ports[s] for s in group])
    return probability_general(U, cfg, G)


def _inverse(rho: Tuple[int, ...]) -> Tuple[int, ...]:
    inverse = [0] * len(rho)
    for s, target in enumerate(rho):
        inverse[target] = s
    return tuple(inverse)


def _block(U: InterferometerMatrix, occupation: Sequence[int], columns: Sequence[int]) -> np.ndarray:
    rows = [d for d, count in enumerate(occupation) for _ in range(count)]
    return U.entries[np.ix_(np.array(rows, dtype=np.intp), np.array(columns, dtype=np.intp))]


def _sub_occupations(occupation: Sequence[int], size: int) -> Iterator[Tuple[int, ...]]:
    """Distinct sub-multisets of ``occupation`` holding ``size`` photons."""
    if not occupation:
        if size == 0:
            yield ()
        return
    head, tail = occupation[0], occupation[1:]
    for take in range(min(head, size) + 1):
        for rest in _sub_occupations(tail, size - take):
            yield (take,) + rest
