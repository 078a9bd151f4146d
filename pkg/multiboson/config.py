import os
from typing import Optional


class Config:
    """
    Configuration settings for the multiboson engine.
    Handles the worker-thread cap and the optional trace collector endpoint.
    """
    def __init__(self, threads: Optional[int] = None, otlp_endpoint: Optional[str] = None):
        # Explicit argument first, then the environment, then the machine size.
        if threads is None:
            raw = os.environ.get("MULTIBOSON_THREADS")
            threads = _parse_threads(raw) if raw else (os.cpu_count() or 1)
        self.threads = threads
        self.otlp_endpoint = otlp_endpoint or os.environ.get("MULTIBOSON_OTLP_ENDPOINT")

    def validate(self):
        """
        Checks that the configuration is usable.
        Raises a ValueError if the thread cap is not a positive integer.
        """
        if isinstance(self.threads, bool) or not isinstance(self.threads, int) or self.threads < 1:
            raise ValueError(
                f"Worker thread cap must be a positive integer, got {self.threads!r}. "
                "Pass `Config(threads=...)` or set the `MULTIBOSON_THREADS` environment variable."
            )

    def workers(self, requested: Optional[int] = None) -> int:
        """
        Effective worker count for a parallel section, never above the cap.
        """
        if requested is None:
            return self.threads
        return max(1, min(int(requested), self.threads))


def _parse_threads(raw: str):
    try:
        return int(raw)
    except ValueError:
        # validate() reports it with the full message
        return raw
