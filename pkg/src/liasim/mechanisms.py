"""Slack-discounted single-item clearing, its K-identical-items extension,
and the waiting-based baselines.

All discounted-bid comparisons run in log space (``ln value - lambda *
est_slack``).  Deep-space slacks reach millions of milliseconds, where
``exp(-lambda * slack)`` underflows to exactly 0.0 and a linear-space argmax
would collapse into meaningless ties.  Payments are exponentials of slack
*differences*, so a common estimation bias cancels bit-for-bit and the
lambda=0 payment reduces to the plain second price.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .auction import Bid, ClearingHorizon, DiscountParams, SlackProfile

MECH_LIA = "lia"
MECH_LIA_K = "lia_k"
MECH_SYNC = "sync_vcg"
MECH_FAST = "fast_vcg"
MECH_BATCH = "batch_vcg"
MECH_HOLDBACK = "holdback"

FAST_TIE_MS = 1e-9


@dataclass(frozen=True)
class Outcome:
    mechanism: str
    winners: tuple[int, ...]  # bidder ids
    payments: tuple[float, ...]  # aligned with winners
    decision_time: float  # ms, simulated clock
    compute_time: float  # ms, measured wall clock of winner determination

    @property
    def cleared(self) -> bool:
        return len(self.winners) > 0

    def payment_of(self, bidder: int) -> float:
        for w, p in zip(self.winners, self.payments):
            if w == bidder:
                return p
        return 0.0

    def to_dict(self) -> dict:
        return {"mechanism": self.mechanism, "winners": list(self.winners),
                "payments": list(self.payments),
                "decision_time_ms": self.decision_time,
                "compute_time_ms": self.compute_time}


def _as_arrays(bids) -> tuple[np.ndarray, np.ndarray]:
    ids = np.array([b.bidder for b in bids], dtype=int)
    reported = np.array([b.reported_value for b in bids], dtype=float)
    return ids, reported


def _scores(reported: np.ndarray, profile: SlackProfile,
            lam: float) -> np.ndarray:
    # base and bias terms rounded separately: a shared eta shifts every
    # score by the same float and cannot reorder them
    with np.errstate(divide="ignore"):
        base = np.log(reported) - lam * profile.true_slack
    return base - lam * profile.eta


def _rank(scores: np.ndarray, ids: np.ndarray,
          subset: np.ndarray) -> np.ndarray:
    """Indices of ``subset`` ordered by score desc, lowest bidder id on ties."""
    order = np.lexsort((ids[subset], -scores[subset]))
    return subset[order]


def _price(reported: np.ndarray, profile: SlackProfile, lam: float,
           winner: int, rival: int) -> float:
    """Winner's charge when ``rival`` sets the threshold.

    reported[rival] * exp(lam * (slack diff + eta diff)); exp(0) = 1 keeps
    the lambda=0 case bit-identical to a second-price charge.
    """
    gap = ((profile.true_slack[winner] - profile.true_slack[rival])
           + (profile.eta[winner] - profile.eta[rival]))
    price = reported[rival] * math.exp(lam * gap)
    return min(price, reported[winner])  # IR guard against roundoff


def _no_clear(mechanism: str, profile: SlackProfile, started: int) -> Outcome:
    elapsed = (time.perf_counter_ns() - started) / 1e6
    return Outcome(mechanism, (), (), decision_time=profile.horizon_time,
                   compute_time=elapsed)


def lia_single(bids, profile: SlackProfile, params: DiscountParams) -> Outcome:
    """Single-item slack-discounted clearing with critical-value payment.

    Winner maximizes reported_value * exp(-lambda * est_slack) over feasible
    bids (lowest bidder id on ties); the charge is the runner-up discounted
    bid re-inflated by the winner's own discount.  Clears at the last
    feasible arrival.
    """
    ids, reported = _as_arrays(bids)
    lam = params.lambda_per_ms
    started = time.perf_counter_ns()
    feas = np.flatnonzero(profile.feasible)
    if len(feas) == 0:
        return _no_clear(MECH_LIA, profile, started)
    scores = _scores(reported, profile, lam)
    ranked = _rank(scores, ids, feas)
    winner = int(ranked[0])
    price = _price(reported, profile, lam, winner, int(ranked[1])) if len(ranked) > 1 else 0.0
    elapsed = (time.perf_counter_ns() - started) / 1e6
    decision = profile.horizon_time - float(profile.true_slack[feas].min())
    return Outcome(MECH_LIA, (int(ids[winner]),), (price,),
                   decision_time=decision, compute_time=elapsed)


def lia_k_items(bids, profile: SlackProfile, params: DiscountParams,
                k: int) -> Outcome:
    """Top-K discounted bids win; each pays the (K+1)-th discounted bid
    re-inflated by its own discount (0 when fewer than K+1 feasible bids)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ids, reported = _as_arrays(bids)
    lam = params.lambda_per_ms
    started = time.perf_counter_ns()
    feas = np.flatnonzero(profile.feasible)
    if len(feas) == 0:
        return _no_clear(MECH_LIA_K, profile, started)
    scores = _scores(reported, profile, lam)
    ranked = _rank(scores, ids, feas)
    winners = [int(i) for i in ranked[:k]]
    rival = int(ranked[k]) if len(ranked) > k else -1
    payments = tuple(
        _price(reported, profile, lam, w, rival) if rival >= 0 else 0.0
        for w in winners)
    elapsed = (time.perf_counter_ns() - started) / 1e6
    decision = profile.horizon_time - float(profile.true_slack[feas].min())
    return Outcome(MECH_LIA_K, tuple(int(ids[w]) for w in winners), payments,
                   decision_time=decision, compute_time=elapsed)


def critical_value(i: int, bids, profile: SlackProfile,
                   params: DiscountParams) -> float:
    """Lowest report with which bid index ``i`` still wins lia_single
    (given the id tie-break): max over rivals of their discounted bid
    re-inflated by i's discount."""
    if not profile.feasible[i]:
        raise ValueError(f"bid {i} is not feasible")
    _, reported = _as_arrays(bids)
    lam = params.lambda_per_ms
    feas = np.flatnonzero(profile.feasible)
    rivals = feas[feas != i]
    if len(rivals) == 0:
        return 0.0
    gaps = ((profile.true_slack[i] - profile.true_slack[rivals])
            + (profile.eta[i] - profile.eta[rivals]))
    return float(np.max(reported[rivals] * np.exp(lam * gaps)))


def sync_vcg(bids, profile: SlackProfile, horizon: ClearingHorizon) -> Outcome:
    """Second-price clearing on raw values after waiting to the horizon."""
    ids, reported = _as_arrays(bids)
    started = time.perf_counter_ns()
    feas = np.flatnonzero(profile.feasible)
    if len(feas) == 0:
        return _no_clear(MECH_SYNC, profile, started)
    ranked = _rank(reported, ids, feas)
    winner = int(ranked[0])
    price = float(reported[int(ranked[1])]) if len(ranked) > 1 else 0.0
    elapsed = (time.perf_counter_ns() - started) / 1e6
    return Outcome(MECH_SYNC, (int(ids[winner]),), (price,),
                   decision_time=horizon.time, compute_time=elapsed)


def holdback(bids, profile: SlackProfile, horizon: ClearingHorizon) -> Outcome:
    """Delay-equalization baseline: early arrivals are held until the
    horizon, which makes allocation and payment identical to sync_vcg."""
    inner = sync_vcg(bids, profile, horizon)
    return Outcome(MECH_HOLDBACK, inner.winners, inner.payments,
                   decision_time=horizon.time, compute_time=inner.compute_time)


def fast_vcg(bids, profile: SlackProfile, arrivals: np.ndarray) -> Outcome:
    """Clearing on arrival: the earliest feasible bid takes the item.

    Arrivals tied within 1e-9 ms form one infinitesimal batch cleared by
    second price; otherwise the winner pays nothing (nobody else has
    arrived yet).
    """
    ids, reported = _as_arrays(bids)
    arrivals = np.asarray(arrivals, dtype=float)
    started = time.perf_counter_ns()
    feas = np.flatnonzero(profile.feasible)
    if len(feas) == 0:
        return _no_clear(MECH_FAST, profile, started)
    first = float(arrivals[feas].min())
    batch = feas[arrivals[feas] <= first + FAST_TIE_MS]
    ranked = _rank(reported, ids, batch)
    winner = int(ranked[0])
    price = float(reported[int(ranked[1])]) if len(ranked) > 1 else 0.0
    elapsed = (time.perf_counter_ns() - started) / 1e6
    return Outcome(MECH_FAST, (int(ids[winner]),), (price,),
                   decision_time=float(arrivals[winner]), compute_time=elapsed)


def batch_vcg(bids, profile: SlackProfile, arrivals: np.ndarray,
              horizon: ClearingHorizon, batch_ms: float) -> Outcome:
    """Fixed-interval batch clearing.

    Collection opens at the first arrival; the batch containing it clears at
    its right boundary (never past the horizon, where every feasible bid has
    arrived anyway) by second price among the bids collected so far.
    """
    if batch_ms <= 0:
        raise ValueError("batch interval must be positive")
    ids, reported = _as_arrays(bids)
    arrivals = np.asarray(arrivals, dtype=float)
    started = time.perf_counter_ns()
    feas = np.flatnonzero(profile.feasible)
    if len(feas) == 0:
        return _no_clear(MECH_BATCH, profile, started)
    opens = float(arrivals[feas].min())
    boundary = min(opens + batch_ms, horizon.time)
    batch = feas[arrivals[feas] <= boundary]
    ranked = _rank(reported, ids, batch)
    winner = int(ranked[0])
    price = float(reported[int(ranked[1])]) if len(ranked) > 1 else 0.0
    elapsed = (time.perf_counter_ns() - started) / 1e6
    return Outcome(MECH_BATCH, (int(ids[winner]),), (price,),
                   decision_time=boundary, compute_time=elapsed)


def utility(bidder: int, outcome: Outcome, true_value: float) -> float:
    """Quasilinear payoff: value minus charge when allocated, else zero."""
    if bidder in outcome.winners:
        return true_value - outcome.payment_of(bidder)
    return 0.0


@dataclass(frozen=True)
class EndogenousSlackReport:
    """Evidence that a bidder who controls their own slack input gains by
    shrinking it, even with the value report held fixed."""

    rival_value: float
    utility_at_slack: float
    utility_at_reduced_slack: float


def endogenous_slack_demo(theta: float, slack: float, reduced_slack: float,
                          params: DiscountParams) -> EndogenousSlackReport:
    """Two-bidder construction where moving from ``slack`` down to
    ``reduced_slack`` flips a loss into a strictly profitable win.

    The rival's value is the midpoint of (theta*exp(-lam*slack),
    theta*exp(-lam*reduced_slack)); the rival sits at slack zero.
    """
    if not 0 <= reduced_slack < slack:
        raise ValueError("need 0 <= reduced_slack < slack")
    lam = params.lambda_per_ms
    lo = theta * math.exp(-lam * slack)
    hi = theta * math.exp(-lam * reduced_slack)
    rival_value = (lo + hi) / 2.0
    if not lo < rival_value < hi:
        raise ValueError("slack gap too small to separate discounted bids")

    horizon_time = 10.0 * max(slack, 1.0)

    def run(own_slack: float) -> float:
        bids = [Bid(1, theta, theta, node=0, emission=0.0),
                Bid(2, rival_value, rival_value, node=0, emission=0.0)]
        profile = SlackProfile(
            true_slack=np.array([own_slack, 0.0]),
            eta=np.zeros(2), horizon_time=horizon_time)
        outcome = lia_single(bids, profile, params)
        return utility(1, outcome, theta)

    return EndogenousSlackReport(
        rival_value=rival_value,
        utility_at_slack=run(slack),
        utility_at_reduced_slack=run(reduced_slack))
