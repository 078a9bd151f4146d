import sys
from typing import Optional

from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter, SimpleSpanProcessor
from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter
from opentelemetry.sdk.resources import Resource

from .config import Config


class Multiboson:
    """
    The engine client.
    Holds the validated configuration and owns the OpenTelemetry setup.
    """
    _instance: Optional['Multiboson'] = None

    def __init__(self, config: Config, console: bool = False):
        self.config = config
        self.tracer_provider: Optional[TracerProvider] = None

        if not (config.otlp_endpoint or console):
            # No sink requested: spans stay no-ops under the API's default provider.
            return

        # 1. Resource (metadata about who is sending data)
        resource = Resource.create(attributes={
            "service.name": "multiboson",
        })

        # 2. Tracer provider
        self.tracer_provider = TracerProvider(resource=resource)

        # 3. Exporters: OTLP/HTTP to <endpoint>/v1/traces, console spans go to stderr
        # so that data written to stdout stays byte-identical across runs.
        if config.otlp_endpoint:
            exporter = OTLPSpanExporter(endpoint=f"{config.otlp_endpoint.rstrip('/')}/v1/traces")
            self.tracer_provider.add_span_processor(BatchSpanProcessor(exporter))
        if console:
            self.tracer_provider.add_span_processor(
                SimpleSpanProcessor(ConsoleSpanExporter(out=sys.stderr))
            )

        # 4. Register as global tracer provider
        trace.set_tracer_provider(self.tracer_provider)

    @classmethod
    def initialize(
        cls,
        threads: Optional[int] = None,
        otlp_endpoint: Optional[str] = None,
        console: bool = False,
    ) -> 'Multiboson':
        """
        Initializes the global engine client.
        """
        config = Config(threads=threads, otlp_endpoint=otlp_endpoint)
        config.validate()

        cls._instance = cls(config, console=console)
        return cls._instance

    @classmethod
    def get_instance(cls) -> 'Multiboson':
        """
        Returns the global engine client instance.
        """
        if cls._instance is None:
            raise RuntimeError(
                "multiboson is not initialized. "
                "Please call `multiboson.init()` first."
            )
        return cls._instance

    def shutdown(self):
        """
        Flushes remaining spans and shuts down the provider.
        """
        if self.tracer_provider:
            self.tracer_provider.shutdown()


def get_config() -> Config:
    """
    Configuration of the initialized client, or a fresh environment-driven one.
    """
    if Multiboson._instance is not None:
        return Multiboson._instance.config
    config = Config()
    config.validate()
    return config
