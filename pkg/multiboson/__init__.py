from typing import Optional

from .client import Multiboson
from .decorators import traced
from .distribution import OutputDistribution, build_distribution, enumerate_samples, fock_oracle, sample
from .permanent import permanent, permanent_glynn, permanent_naive, permanent_ryser
from .probability import (
    DetectionProbability,
    probability,
    probability_distinguishable,
    probability_general,
    probability_identical,
    probability_mixed_groups,
)
from .spectra import GramMatrix, SpectralAmplitude, SpectrumKind, gram_matrix, indistinguishability_weight, overlap
from .unitary import (
    InterferometerMatrix,
    PortConfiguration,
    balanced_beam_splitter,
    haar_random,
    interference_matrix,
    submatrix,
)


def init(threads: Optional[int] = None, otlp_endpoint: Optional[str] = None, console: bool = False) -> Multiboson:
    """
    Initialize the multiboson engine.

    Args:
        threads: Worker-thread cap. If not provided, reads MULTIBOSON_THREADS, then uses the CPU count.
        otlp_endpoint: Optional OTLP/HTTP collector base URL for spans. If not provided, reads
            MULTIBOSON_OTLP_ENDPOINT.
        console: Print finished spans to stderr.

    Returns:
        The initialized engine client instance.
    """
    return Multiboson.initialize(threads=threads, otlp_endpoint=otlp_endpoint, console=console)


__all__ = [
    "init",
    "Multiboson",
    "traced",
    "SpectralAmplitude",
    "SpectrumKind",
    "GramMatrix",
    "overlap",
    "gram_matrix",
    "indistinguishability_weight",
    "InterferometerMatrix",
    "PortConfiguration",
    "haar_random",
    "balanced_beam_splitter",
    "submatrix",
    "interference_matrix",
    "permanent",
    "permanent_naive",
    "permanent_ryser",
    "permanent_glynn",
    "DetectionProbability",
    "probability",
    "probability_general",
    "probability_distinguishable",
    "probability_identical",
    "probability_mixed_groups",
    "OutputDistribution",
    "enumerate_samples",
    "build_distribution",
    "sample",
    "fock_oracle",
]
