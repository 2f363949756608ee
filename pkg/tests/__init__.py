# flake8: noqa
from .tests_bench_utils import BenchUtilsTests
from .tests_engines import EngineTests
from .tests_formats import FormatsTests
from .tests_geometry import GeometryTests
from .tests_runner import FullBenchmarkTests, RunnerTests
from .tests_voronoi import VoronoiTests
