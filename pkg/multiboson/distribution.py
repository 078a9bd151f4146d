"""
Full output distributions: enumeration, assembly, exact sampling and the
first-quantized Fock-space oracle used to verify them.

Samples are occupation vectors over the M output ports, listed in colex order
(last port varies slowest), which is also the serialization order.
"""

import csv
import io
import json
import logging
import math
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple

import numpy as np
from opentelemetry import trace

from .client import get_config
from .decorators import traced
from .errors import InfeasibleError, InputValidationError, ScenarioError
from .probability import classify_gram, probability
from .spectra import PSD_TOLERANCE, GramMatrix
from .unitary import InterferometerMatrix, PortConfiguration, make_rng

logger = logging.getLogger(__name__)

Occupation = Tuple[int, ...]

TOTAL_TOLERANCE = 1e-8
SAMPLE_LIMIT = 2_000_000
ORACLE_PHOTONS = 4
ORACLE_PORTS = 6
RANK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class OutputDistribution:
    """Probability of every output multiset, in colex order."""
    m: int
    n: int
    entries: Tuple[Tuple[Occupation, float], ...]

    @property
    def total(self) -> float:
        return float(math.fsum(p for _, p in self.entries))

    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries], dtype=float)

    def occupations(self) -> List[Occupation]:
        return [occupation for occupation, _ in self.entries]

    def probability_of(self, occupation: Sequence[int]) -> float:
        key = tuple(int(c) for c in occupation)
        for candidate, p in self.entries:
            if candidate == key:
                return p
        raise InputValidationError(f"{key} is not an output sample of {self.n} photons in {self.m} ports.")

    def total_variation(self, other: "OutputDistribution") -> float:
        """Total-variation distance, matching samples by occupation."""
        mine = dict(self.entries)
        theirs = dict(other.entries)
        keys = set(mine) | set(theirs)
        return 0.5 * math.fsum(abs(mine.get(k, 0.0) - theirs.get(k, 0.0)) for k in keys)

    def to_csv(self, stream: TextIO):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow([f"n{d}" for d in range(self.m)] + ["probability"])
        for occupation, p in self.entries:
            writer.writerow(list(occupation) + [repr(float(p))])

    @classmethod
    def from_csv(cls, stream: TextIO) -> "OutputDistribution":
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise ScenarioError("Distribution CSV is empty.") from None
        m = len(header) - 1
        entries = []
        try:
            for row in reader:
                entries.append((tuple(int(c) for c in row[:m]), float(row[m])))
        except (ValueError, IndexError) as e:
            raise ScenarioError(f"Malformed distribution CSV row: {e}") from e
        n = sum(entries[0][0]) if entries else 0
        return cls(m=m, n=n, entries=tuple(entries))

    def to_json(self) -> str:
        return json.dumps({
            "m": self.m,
            "n": self.n,
            "total": self.total,
            "entries": [{"occupation": list(o), "probability": p} for o, p in self.entries],
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "OutputDistribution":
        try:
            data = json.loads(text)
            entries = tuple(
                (tuple(int(c) for c in item["occupation"]), float(item["probability"]))
                for item in data["entries"]
            )
            return cls(m=int(data["m"]), n=int(data["n"]), entries=entries)
        except (ValueError, KeyError, TypeError) as e:
            raise ScenarioError(f"Malformed distribution JSON: {e}") from e

    def dumps(self, fmt: str = "csv") -> str:
        if fmt == "json":
            return self.to_json() + "\n"
        buffer = io.StringIO()
        self.to_csv(buffer)
        return buffer.getvalue()


def enumerate_samples(m: int, n: int) -> List[Occupation]:
    """
    All weak compositions of n into m parts, in colex order.
    """
    if m < 1 or n < 0:
        raise InputValidationError(f"Need m >= 1 and n >= 0, got m = {m}, n = {n}.")
    return list(iter_samples(m, n))


def iter_samples(m: int, n: int) -> Iterator[Occupation]:
    """Lazy colex enumeration: the last port varies slowest."""
    if m == 1:
        yield (n,)
        return
    for last in range(n + 1):
        for prefix in iter_samples(m - 1, n - last):
            yield prefix + (last,)


@traced
def build_distribution(U: InterferometerMatrix, input_ports: Sequence[int], G: GramMatrix,
                       workers: Optional[int] = None) -> OutputDistribution:
    """
    Probability of every output sample, on the fast path the Gram matrix allows.
    """
    input_ports = tuple(int(s) for s in input_ports)
    m, n = U.dim, len(input_ports)
    if G.dim != n:
        raise InputValidationError(f"Gram matrix is {G.dim}x{G.dim} but {n} photons were injected.")
    G.validate()
    count = math.comb(m + n - 1, n)
    if count > SAMPLE_LIMIT:
        raise InfeasibleError(
            f"{count} output samples for N = {n} photons in M = {m} ports exceed the table limit {SAMPLE_LIMIT}",
            cost_estimate=count,
            limit=SAMPLE_LIMIT,
        )

    path, _ = classify_gram(G)
    span = trace.get_current_span()
    span.set_attribute("distribution.samples", count)
    span.set_attribute("probability.path", path.value)
    logger.debug("building %d-sample distribution on the %s path", count, path.value)

    samples = enumerate_samples(m, n)

    def evaluate(occupation: Occupation) -> float:
        return probability(U, PortConfiguration(input_ports, occupation), G, path=path).value

    pool_size = get_config().workers(workers)
    if pool_size > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=pool_size) as pool:
            values = list(pool.map(evaluate, samples))
    else:
        values = [evaluate(occupation) for occupation in samples]

    dist = OutputDistribution(m=m, n=n, entries=tuple(zip(samples, values)))
    if abs(dist.total - 1.0) >= TOTAL_TOLERANCE:
        logger.warning("distribution total %.12f deviates from 1 by more than %.0e", dist.total, TOTAL_TOLERANCE)
    return dist


@traced
def sample(dist: OutputDistribution, count: int, seed: int) -> List[Occupation]:
    """
    Independent draws by inverse CDF over the clamped, renormalized table.
    """
    if count < 0:
        raise InputValidationError(f"Sample count must be non-negative, got {count}.")
    if count == 0:
        return []
    weights = np.clip(dist.probabilities(), 0.0, None)
    if not weights.sum() > 0:
        raise InputValidationError("Cannot sample from a distribution with no positive probability.")
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    draws = make_rng(seed).random(count)
    indices = np.minimum(np.searchsorted(cdf, draws, side="right"), len(cdf) - 1)
    occupations = dist.occupations()
    return [occupations[i] for i in indices]


def empirical_distribution(samples: Iterable[Sequence[int]], m: int, n: int) -> OutputDistribution:
    """Relative frequencies of drawn samples laid out over the full colex table."""
    counts = Counter(tuple(int(c) for c in s) for s in samples)
    total = sum(counts.values())
    entries = tuple((o, counts.get(o, 0) / total if total else 0.0) for o in enumerate_samples(m, n))
    return OutputDistribution(m=m, n=n, entries=entries)


@traced
def fock_oracle(U: InterferometerMatrix, input_ports: Sequence[int], G: GramMatrix) -> OutputDistribution:
    """
    Independent ground truth by explicit second-quantized evolution.

    The Gram matrix is factorized as ``G = C C^H`` through its eigendecomposition,
    so photon ``s`` carries an internal state ``c_s`` of dimension ``r = rank G``.
    The product of creation operators ``prod_s sum_{d,k} U[d, s] c_s[k] a^+_{d,k}``
    is expanded over the ``M r`` joint modes; a joint occupation has probability
    ``|coefficient|^2 prod n_{d,k}!`` and the output distribution is its marginal
    over the internal modes.
    """
    input_ports = tuple(int(s) for s in input_ports)
    m, n = U.dim, len(input_ports)
    if G.dim != n:
        raise InputValidationError(f"Gram matrix is {G.dim}x{G.dim} but {n} photons were injected.")
    G.validate()
    for s in input_ports:
        if not 0 <= s < m:
            raise InputValidationError(f"Input port {s} is out of range for {m} ports.")

    eigenvalues, eigenvectors = np.linalg.eigh(G.entries)
    eigenvalues = np.where((eigenvalues < 0) & (eigenvalues >= -PSD_TOLERANCE), 0.0, eigenvalues)
    kept = eigenvalues > RANK_TOLERANCE
    rank = int(np.count_nonzero(kept))
    if n < 1 or n > ORACLE_PHOTONS or m > ORACLE_PORTS:
        raise InfeasibleError(
            f"Fock oracle is limited to 1 <= N <= {ORACLE_PHOTONS} and M <= {ORACLE_PORTS}, got N = {n}, M = {m}",
            cost_estimate=(m * max(rank, 1)) ** n,
            limit=ORACLE_PHOTONS,
        )
    # internal[s, k] such that sum_k conj(internal[s, k]) internal[t, k] = G[s, t]
    internal = np.conj(eigenvectors[:, kept]) * np.sqrt(eigenvalues[kept])

    state: Dict[Tuple[int, ...], complex] = {(): 1 + 0j}
    for s, port in enumerate(input_ports):
        expanded: Dict[Tuple[int, ...], complex] = defaultdict(complex)
        for modes, amplitude in state.items():
            for d in range(m):
                u = U.entries[d, port]
                if u == 0:
                    continue
                for k in range(rank):
                    key = tuple(sorted(modes + (d * rank + k,)))
                    expanded[key] += amplitude * u * internal[s, k]
        state = expanded

    marginal: Dict[Occupation, float] = defaultdict(float)
    for modes, amplitude in state.items():
        weight = 1
        for multiplicity in Counter(modes).values():
            weight *= math.factorial(multiplicity)
        external = [0] * m
        for mode in modes:
            external[mode // rank] += 1
        marginal[tuple(external)] += abs(amplitude) ** 2 * weight

    entries = tuple((o, float(marginal.get(o, 0.0))) for o in enumerate_samples(m, n))
    return OutputDistribution(m=m, n=n, entries=entries)
