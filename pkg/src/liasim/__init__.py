"""Causally consistent auction clearing in heterogeneous-delay networks.

Slack-discounted single-item clearing with critical-value payments, the
waiting-based baselines it is measured against, synthetic LEO / backbone /
deep-space topologies, and a seeded Monte Carlo harness.
"""

from .auction import (Bid, ClearingHorizon, DiscountParams, ErrorModel,
                      SlackProfile, apply_error_model, choose_horizon,
                      compute_slacks, discount)
from .mechanisms import (Outcome, batch_vcg, critical_value,
                         endogenous_slack_demo, fast_vcg, holdback,
                         lia_k_items, lia_single, sync_vcg, utility)
from .metrics import (LaiCurve, bootstrap_ci, clearing_latency,
                      effective_welfare, lai_curve, lai_index, welfare_ratios)
from .topology import (DelayMap, Link, Node, Topology, distances_to_horizon,
                       earliest_arrival, generate, generate_dsn,
                       generate_internet, generate_starlink)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
