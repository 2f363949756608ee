from typing import Dict

from _bench_utils import BenchConfig

# Define your custom suites here. A custom suite replaces a default suite
# of the same name.

suites: Dict[str, BenchConfig] = {
    # "hexagons": BenchConfig(edge_counts=[6], batch_size=100_000, repetitions=20),
}
