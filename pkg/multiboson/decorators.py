import functools
import inspect
from typing import Any, Callable, Optional

import numpy as np
from opentelemetry import trace as otel_trace
from opentelemetry.trace import Status, StatusCode

_SCALARS = (bool, int, float, str)


def traced(func: Optional[Callable] = None, *, name: Optional[str] = None) -> Callable:
    """
    Decorator to track the execution of a numeric operation as an OTel Span.

    Scalar arguments are recorded as ``input.<param>`` attributes, arrays by
    their shape only. Usable bare (``@traced``) or with a span name
    (``@traced(name="permanent")``).
    """
    def decorate(fn: Callable) -> Callable:
        signature = inspect.signature(fn)
        span_name = name or fn.__name__

        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            # Get the tracer at runtime, so it uses the configured provider
            tracer = otel_trace.get_tracer("multiboson")

            with tracer.start_as_current_span(span_name) as span:
                span.set_attribute("code.function", fn.__name__)
                try:
                    bound = signature.bind_partial(*args, **kwargs)
                except TypeError:
                    bound = None
                if bound is not None:
                    for key, value in bound.arguments.items():
                        _record(span, f"input.{key}", value)

                try:
                    result = fn(*args, **kwargs)
                    span.set_status(Status(StatusCode.OK))
                    return result

                except Exception as e:
                    span.record_exception(e)
                    span.set_status(Status(StatusCode.ERROR, str(e)))
                    raise

        return wrapper

    if func is not None:
        return decorate(func)
    return decorate


def _record(span: Any, key: str, value: Any):
    if isinstance(value, _SCALARS):
        span.set_attribute(key, value)
    elif isinstance(value, np.ndarray):
        span.set_attribute(f"{key}.shape", str(value.shape))
    elif hasattr(value, "dim"):
        # matrix-carrying domain types
        span.set_attribute(f"{key}.dim", int(value.dim))
