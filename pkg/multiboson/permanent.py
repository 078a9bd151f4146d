"""
Exact permanents of complex square matrices.

``permanent_naive`` sums over all permutations and serves as the oracle.
``permanent_ryser`` is the production kernel: Ryser's inclusion-exclusion
formula walked in Gray-code order, so consecutive column subsets differ by a
single column and the row sums are updated with one add or subtract per step.
``permanent_glynn`` evaluates Glynn's formula the same way.

The kernels are compiled with numba. Ryser's subset range can be split into
contiguous Gray-code blocks evaluated on worker threads; every block seeds its
row sums directly from its first subset, and the block totals are added in
block order, so a fixed worker count gives a bit-stable result.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numba
import numpy as np
from opentelemetry import trace

from .client import get_config
from .decorators import traced
from .errors import InfeasibleError, InputValidationError

logger = logging.getLogger(__name__)

NAIVE_LIMIT = 12
RYSER_LIMIT = 30
# Below this size the thread pool costs more than it saves.
PARALLEL_THRESHOLD = 16
COMPENSATED_FROM = 20
CONDITION_RATIO = 1e-12


class Algorithm(str, Enum):
    NAIVE = "naive"
    RYSER_GRAY = "ryser"
    GLYNN_GRAY = "glynn"


@dataclass(frozen=True)
class PermanentResult:
    value: complex
    algorithm: Algorithm
    n: int
    seconds: float = 0.0
    ill_conditioned: bool = False


@numba.njit(cache=True, nogil=True)
def _naive_kernel(a):
    # Heap's algorithm: every step swaps one pair of columns.
    n = a.shape[0]
    perm = np.arange(n)
    counters = np.zeros(n, dtype=np.int64)
    total = 0j
    prod = 1 + 0j
    for i in range(n):
        prod *= a[i, perm[i]]
    total += prod
    i = 1
    while i < n:
        if counters[i] < i:
            if i % 2 == 0:
                j = 0
            else:
                j = counters[i]
            tmp = perm[j]
            perm[j] = perm[i]
            perm[i] = tmp
            prod = 1 + 0j
            for k in range(n):
                prod *= a[k, perm[k]]
            total += prod
            counters[i] += 1
            i = 1
        else:
            counters[i] = 0
            i += 1
    return total


@numba.njit(cache=True, nogil=True)
def _ryser_block(a, start, stop, compensated):
    n = a.shape[0]
    rowsum = np.zeros(n, dtype=np.complex128)
    gray = start ^ (start >> 1)
    bits = 0
    for j in range(n):
        if (gray >> j) & 1:
            bits += 1
            for i in range(n):
                rowsum[i] += a[i, j]

    total = 0j
    carry = 0j
    k = start
    while k < stop:
        prod = 1 + 0j
        for i in range(n):
            prod *= rowsum[i]
        if bits & 1:
            prod = -prod
        if compensated:
            y = prod - carry
            t = total + y
            carry = (t - total) - y
            total = t
        else:
            total += prod

        k += 1
        if k >= stop:
            break
        # the column entering or leaving is the lowest set bit of k
        j = 0
        t_k = k
        while (t_k & 1) == 0:
            t_k >>= 1
            j += 1
        if ((k ^ (k >> 1)) >> j) & 1:
            bits += 1
            for i in range(n):
                rowsum[i] += a[i, j]
        else:
            bits -= 1
            for i in range(n):
                rowsum[i] -= a[i, j]
    return total


@numba.njit(cache=True, nogil=True)
def _glynn_kernel(a, compensated):
    n = a.shape[0]
    colsum = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            colsum[j] += a[i, j]
    delta = np.ones(n, dtype=np.int64)
    sign = 1
    total = 0j
    carry = 0j
    steps = 1 << (n - 1)
    for k in range(steps):
        if k > 0:
            # flip delta of row 1 + lowest set bit of k
            j = 0
            t_k = k
            while (t_k & 1) == 0:
                t_k >>= 1
                j += 1
            row = j + 1
            if delta[row] == 1:
                for c in range(n):
                    colsum[c] -= 2.0 * a[row, c]
            else:
                for c in range(n):
                    colsum[c] += 2.0 * a[row, c]
            delta[row] = -delta[row]
            sign = -sign
        prod = 1 + 0j
        for c in range(n):
            prod *= colsum[c]
        if sign < 0:
            prod = -prod
        if compensated:
            y = prod - carry
            t = total + y
            carry = (t - total) - y
            total = t
        else:
            total += prod
    return total / steps


def permanent_naive(A) -> complex:
    """
    Textbook permanent: sum over all permutations of the diagonal products.
    """
    a = _as_square(A)
    n = a.shape[0]
    if n > NAIVE_LIMIT:
        raise InfeasibleError(
            f"Naive permanent is an oracle for n <= {NAIVE_LIMIT}, got n = {n}",
            cost_estimate=math.factorial(n) * n,
            limit=NAIVE_LIMIT,
        )
    if n == 0:
        return 1 + 0j
    return complex(_naive_kernel(a))


def permanent_ryser(A, workers: Optional[int] = None) -> complex:
    """
    Ryser permanent in Gray-code order, O(2^n n).

    ``workers`` caps the number of Gray-code blocks evaluated in parallel; it is
    itself capped by ``MULTIBOSON_THREADS``.
    """
    a = _as_square(A)
    n = a.shape[0]
    _guard_exponential(n, "Ryser")
    if n == 0:
        return 1 + 0j
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])

    compensated = n >= COMPENSATED_FROM
    size = 1 << n
    count = get_config().workers(workers) if n >= PARALLEL_THRESHOLD else 1
    if count <= 1:
        total = _ryser_block(a, 0, size, compensated)
    else:
        bounds = [size * b // count for b in range(count + 1)]
        with ThreadPoolExecutor(max_workers=count) as pool:
            partials = list(pool.map(
                lambda b: _ryser_block(a, bounds[b], bounds[b + 1], compensated),
                range(count),
            ))
        total = 0j
        for partial in partials:
            total += partial
    if n % 2:
        total = -total
    return complex(total)


def permanent_glynn(A) -> complex:
    """
    Glynn permanent in Gray-code order, O(2^(n-1) n).
    """
    a = _as_square(A)
    n = a.shape[0]
    _guard_exponential(n, "Glynn")
    if n == 0:
        return 1 + 0j
    return complex(_glynn_kernel(a, n >= COMPENSATED_FROM))


_KERNELS = {
    Algorithm.NAIVE: lambda a, workers: permanent_naive(a),
    Algorithm.RYSER_GRAY: permanent_ryser,
    Algorithm.GLYNN_GRAY: lambda a, workers: permanent_glynn(a),
}


@traced(name="permanent")
def permanent(A, algorithm: str = "ryser", workers: Optional[int] = None) -> PermanentResult:
    """
    Computes a permanent with the chosen kernel and reports timing and conditioning.

    A warning is logged when the result is tiny compared to the scale set by the
    largest row sum, where cancellation may have eaten the significant digits.
    """
    a = _as_square(A)
    n = a.shape[0]
    try:
        algorithm = Algorithm(algorithm)
    except ValueError:
        raise InputValidationError(
            f"Unknown permanent algorithm {algorithm!r}; choose one of "
            + ", ".join(repr(a.value) for a in Algorithm) + "."
        ) from None
    span = trace.get_current_span()
    span.set_attribute("permanent.n", n)
    span.set_attribute("permanent.algorithm", algorithm.value)

    started = time.perf_counter()
    value = _KERNELS[algorithm](a, workers)
    seconds = time.perf_counter() - started

    ill = _ill_conditioned(a, value)
    if ill:
        logger.warning(
            "permanent of a %dx%d matrix is %.3e, below %.0e of the row-sum scale; "
            "relative accuracy is not guaranteed", n, n, abs(value), CONDITION_RATIO,
        )
    return PermanentResult(value=value, algorithm=algorithm, n=n, seconds=seconds, ill_conditioned=ill)


def _ill_conditioned(a: np.ndarray, value: complex) -> bool:
    n = a.shape[0]
    if n == 0:
        return False
    scale = float(np.max(np.sum(np.abs(a), axis=1))) ** n
    return abs(value) < CONDITION_RATIO * scale


def _guard_exponential(n: int, name: str):
    if n > RYSER_LIMIT:
        raise InfeasibleError(
            f"{name} permanent refused for n = {n} (limit {RYSER_LIMIT})",
            cost_estimate=2 ** n * n,
            limit=RYSER_LIMIT,
        )


def _as_square(A) -> np.ndarray:
    a = np.ascontiguousarray(A, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputValidationError(f"Permanents need a square matrix, got shape {a.shape}.")
    return a
