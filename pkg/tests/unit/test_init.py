import unittest
import os
from unittest.mock import patch

from multiboson import init, Multiboson
from multiboson.client import get_config
from multiboson.config import Config

class TestMultibosonInit(unittest.TestCase):

    def setUp(self):
        # Reset the singleton before each test to ensure isolation
        Multiboson._instance = None
        self.env = patch.dict(os.environ, {}, clear=False)
        self.env.start()
        os.environ.pop("MULTIBOSON_THREADS", None)
        os.environ.pop("MULTIBOSON_OTLP_ENDPOINT", None)

    def tearDown(self):
        self.env.stop()
        Multiboson._instance = None

    def test_init_with_threads(self):
        """Test that init works with an explicit thread cap."""
        client = init(threads=3)
        self.assertIsNotNone(client)
        self.assertEqual(client.config.threads, 3)
        # No sink configured: nothing to export to
        self.assertIsNone(client.tracer_provider)

    def test_threads_from_environment(self):
        """Test that the thread cap falls back to MULTIBOSON_THREADS."""
        os.environ["MULTIBOSON_THREADS"] = "2"
        client = init()
        self.assertEqual(client.config.threads, 2)
        self.assertEqual(client.config.workers(8), 2)
        self.assertEqual(client.config.workers(1), 1)
        self.assertEqual(client.config.workers(), 2)

    def test_invalid_threads_raise_error(self):
        """Test that init raises ValueError for an unusable thread cap."""
        os.environ["MULTIBOSON_THREADS"] = "many"
        with self.assertRaises(ValueError):
            init()
        with self.assertRaises(ValueError):
            init(threads=0)

    def test_singleton_pattern(self):
        """Test that get_instance returns the initialized client."""
        client1 = init(threads=1)
        client2 = Multiboson.get_instance()
        self.assertIs(client1, client2)
        self.assertIs(get_config(), client1.config)

    def test_get_instance_before_init(self):
        """Test that the engine asks for init() when used uninitialized."""
        with self.assertRaises(RuntimeError):
            Multiboson.get_instance()
        # Library calls still get a usable configuration
        self.assertGreaterEqual(get_config().threads, 1)

    def test_otlp_endpoint_from_environment(self):
        """Test that the collector endpoint is read from the environment."""
        os.environ["MULTIBOSON_OTLP_ENDPOINT"] = "http://collector:4318"
        config = Config()
        self.assertEqual(config.otlp_endpoint, "http://collector:4318")

if __name__ == "__main__":
    unittest.main()
