# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0

# --------------------------------------------------------------------
# This file defines the default benchmark suites.
# To customise your own instance, do not modify this file.
# Add your suites to _suites_custom.py instead.
# --------------------------------------------------------------------

from typing import Dict

from _bench_utils import BenchConfig, default_edge_counts

default_suite = "full"

suites: Dict[str, BenchConfig] = {
    # 1e6 points per batch over 3 to 15 edges
    "full": BenchConfig(),
    "quick": BenchConfig(batch_size=10_000, repetitions=3),
    "smoke": BenchConfig(edge_counts=[3, 7, 15], batch_size=1_000, repetitions=2),
    # scaling check with every worker thread busy
    "threads": BenchConfig(
        edge_counts=list(default_edge_counts), batch_size=1_000_000, repetitions=5, threads=4
    ),
}
