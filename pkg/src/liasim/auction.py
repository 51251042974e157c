"""Bids, clearing horizons, horizon slacks, exponential discounting, and
slack-estimation error models.

A bid's horizon slack is the margin by which it beats the clearing horizon:
``slack = horizon_time - (emission + delay_to_horizon)``.  A bid is causally
feasible iff its true slack is nonnegative.  Estimation error enters as an
additive per-bid term ``eta``; feasibility is always judged on the true
slack, while mechanisms score on the estimated one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .topology import DelayMap, Topology, distances_to_horizon

ERROR_NONE = "none"
ERROR_IID = "iid"
ERROR_CLOCK_BIAS = "clock_bias"
ERROR_DISTANCE = "distance"
ERROR_SUBNET = "subnet"

ERROR_MODELS = (ERROR_NONE, ERROR_IID, ERROR_CLOCK_BIAS, ERROR_DISTANCE, ERROR_SUBNET)


@dataclass(frozen=True)
class Bid:
    bidder: int
    true_value: float
    reported_value: float
    node: int
    emission: float  # ms

    def __post_init__(self):
        if self.true_value < 0 or self.reported_value < 0:
            raise ValueError("bid values must be nonnegative")
        if self.emission < 0:
            raise ValueError("emission time must be nonnegative")


@dataclass(frozen=True)
class ClearingHorizon:
    node: int
    time: float  # ms

    def __post_init__(self):
        if self.time < 0:
            raise ValueError("horizon time must be nonnegative")


@dataclass(frozen=True)
class DiscountParams:
    """Discount rate in inverse milliseconds."""

    lambda_per_ms: float

    def __post_init__(self):
        if not math.isfinite(self.lambda_per_ms) or self.lambda_per_ms < 0:
            raise ValueError("lambda must be finite and nonnegative")

    @staticmethod
    def from_per_second(lambda_per_s: float) -> "DiscountParams":
        return DiscountParams(lambda_per_s / 1000.0)

    @property
    def lambda_per_s(self) -> float:
        return self.lambda_per_ms * 1000.0


@dataclass(frozen=True)
class ErrorModel:
    variant: str = ERROR_NONE
    epsilon_ms: float = 0.0

    def __post_init__(self):
        if self.variant not in ERROR_MODELS:
            raise ValueError(f"unknown error model {self.variant!r}")
        if self.epsilon_ms < 0:
            raise ValueError("epsilon must be nonnegative")


NO_ERROR = ErrorModel()


@dataclass(frozen=True)
class SlackProfile:
    """Per-bid true/estimated horizon slack plus spread aggregates.

    ``true_slack`` and ``eta`` are kept separate so that scores and payments
    can be formed from slack and error differences; a common clock bias then
    cancels exactly, in floating point and not merely in algebra.
    """

    true_slack: np.ndarray  # ms; -inf for bids at unreachable nodes
    eta: np.ndarray  # ms; estimation error, est_slack - true_slack
    horizon_time: float  # ms; arrival_i = horizon_time - true_slack_i

    def __post_init__(self):
        self.true_slack.setflags(write=False)
        self.eta.setflags(write=False)

    def __len__(self) -> int:
        return len(self.true_slack)

    @property
    def est_slack(self) -> np.ndarray:
        return self.true_slack + self.eta

    @property
    def feasible(self) -> np.ndarray:
        return self.true_slack >= 0.0

    @property
    def delta_spread(self) -> float:
        """Latency dispersion: max - min true slack over feasible bids."""
        feas = self.true_slack[self.feasible]
        if len(feas) < 2:
            return 0.0
        return float(feas.max() - feas.min())

    @property
    def error_spread(self) -> float:
        """Max - min estimation error over feasible bids (drives the noisy
        welfare bound)."""
        feas = self.eta[self.feasible]
        if len(feas) < 2:
            return 0.0
        return float(feas.max() - feas.min())

    def with_eta(self, eta: np.ndarray) -> "SlackProfile":
        return replace(self, eta=np.asarray(eta, dtype=float))

    def shifted(self, index: int, advance_ms: float) -> "SlackProfile":
        """Counterfactual profile where one bid's arrival is advanced."""
        slack = self.true_slack.copy()
        slack[index] += advance_ms
        return replace(self, true_slack=slack)


def compute_slacks(bids, horizon: ClearingHorizon, delay_map: DelayMap) -> SlackProfile:
    """True horizon slack for every bid; unreachable nodes get slack -inf."""
    if delay_map.horizon_node != horizon.node:
        raise ValueError("delay map was built for a different clearing site")
    nodes = np.array([b.node for b in bids], dtype=int)
    emission = np.array([b.emission for b in bids], dtype=float)
    dist = delay_map.dist[nodes]
    slack = horizon.time - (emission + dist)
    slack = np.where(np.isnan(slack), -np.inf, slack)  # inf dist -> -inf slack
    return SlackProfile(true_slack=slack, eta=np.zeros(len(bids)),
                        horizon_time=horizon.time)


def arrivals(bids, delay_map: DelayMap) -> np.ndarray:
    """Earliest arrival time at the clearing site for every bid."""
    nodes = np.array([b.node for b in bids], dtype=int)
    emission = np.array([b.emission for b in bids], dtype=float)
    return emission + delay_map.dist[nodes]


def apply_error_model(profile: SlackProfile, bids, topology: Topology,
                      delay_map: DelayMap, model: ErrorModel,
                      rng_seed) -> SlackProfile:
    """Attach estimation errors to a noiseless slack profile.

    iid: independent Unif[-eps, eps] per bid.  clock_bias: one shared draw.
    distance: -eps * delay/max_delay (far bidders estimated pessimistically).
    subnet: one shared draw per topology region.
    """
    n = len(profile)
    eps = model.epsilon_ms
    if model.variant == ERROR_NONE or eps == 0.0:
        return profile.with_eta(np.zeros(n))
    rng = np.random.default_rng(rng_seed)
    if model.variant == ERROR_IID:
        eta = rng.uniform(-eps, eps, size=n)
    elif model.variant == ERROR_CLOCK_BIAS:
        eta = np.full(n, rng.uniform(-eps, eps))
    elif model.variant == ERROR_DISTANCE:
        nodes = np.array([b.node for b in bids], dtype=int)
        dist = delay_map.dist[nodes]
        finite = np.isfinite(dist)
        scale = dist[finite].max() if finite.any() else 1.0
        eta = np.where(finite, -eps * dist / max(scale, 1e-300), 0.0)
    elif model.variant == ERROR_SUBNET:
        region_eta = rng.uniform(-eps, eps, size=topology.region_count)
        nodes = np.array([b.node for b in bids], dtype=int)
        eta = region_eta[topology.regions[nodes]]
    else:  # pragma: no cover
        raise AssertionError(model.variant)
    return profile.with_eta(eta)


def discount(value: float, slack_ms: float, params: DiscountParams) -> float:
    """Exponential slack discount: value * exp(-lambda * slack)."""
    if value < 0:
        raise ValueError("value must be nonnegative")
    return value * math.exp(-params.lambda_per_ms * slack_ms)


@dataclass(frozen=True)
class HorizonCalibration:
    time: float  # ms past the emission-window start
    achieved_fraction: float  # feasible fraction on the pilot set
    pilot_arrivals: int


def choose_horizon(topology: Topology, n: int, emission_window: float,
                   target_feasible: float, pilot_seed,
                   pilot_instances: int = 200, horizon_node: int = 0) -> float:
    """Clearing time calibrated so ~target_feasible of bids arrive in time.

    Samples pilot instances (bidders placed uniformly on non-clearing nodes,
    emissions uniform over the window) and fixes the horizon at the empirical
    target quantile of pooled arrival times.
    """
    return calibrate_horizon(topology, n, emission_window, target_feasible,
                             pilot_seed, pilot_instances, horizon_node).time


def calibrate_horizon(topology: Topology, n: int, emission_window: float,
                      target_feasible: float, pilot_seed,
                      pilot_instances: int = 200,
                      horizon_node: int = 0) -> HorizonCalibration:
    if not 0 < target_feasible <= 1:
        raise ValueError("target_feasible must lie in (0, 1]")
    if pilot_instances < 1:
        raise ValueError("need at least one pilot instance")
    rng = np.random.default_rng(pilot_seed)
    dist = distances_to_horizon(topology, horizon_node).dist
    candidates = np.setdiff1d(np.arange(len(topology)), [horizon_node])
    m = pilot_instances * n
    nodes = rng.choice(candidates, size=m)
    emissions = rng.uniform(0.0, emission_window, size=m)
    arr = emissions + dist[nodes]
    arr = arr[np.isfinite(arr)]
    if target_feasible >= 1.0:
        tau = float(arr.max())
    else:
        tau = float(np.quantile(arr, target_feasible))
    achieved = float(np.mean(arr <= tau))
    return HorizonCalibration(time=tau, achieved_fraction=achieved,
                              pilot_arrivals=len(arr))
