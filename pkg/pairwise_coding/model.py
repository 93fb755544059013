"""
Source and channel model for a sensor field reporting to one sink.

Sensors sit in the unit square, their samples are jointly Gaussian with
covariance K_ij = sigma2 * exp(-c * d_ij), and each sensor reaches the sink
over an orthogonal AWGN link whose gain is the inverse squared sink distance.
All entropies and capacities are in bits.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import (
    DEFAULT_SINK,
    DEFAULT_VARIANCE,
    GENERATOR_NAME,
    GENERATOR_VERSION,
    POWER_SLACK,
    SEED_MASK,
    THRESHOLD_SLACK,
)
from .exceptions import DegenerateCorrelationError, InvalidArgumentError

logger = logging.getLogger(__name__)

LOG2_2PIE = math.log2(2 * math.pi * math.e)
LN2 = math.log(2.0)


# ============================================================================
# Network instance
# ============================================================================

class NetworkInstance(BaseModel):
    """Sensor geometry, correlation parameter and channel gains."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    node_count: int = Field(alias='n', ge=1)
    correlation_param: float = Field(alias='c', gt=0)
    variance: float = Field(default=DEFAULT_VARIANCE, alias='sigma2', gt=0)
    seed: int = Field(default=0, ge=0, le=SEED_MASK)
    positions: Tuple[Tuple[float, float], ...]
    sink_position: Tuple[float, float] = Field(default=DEFAULT_SINK, alias='sink')
    channel_gains: Tuple[float, ...] = Field(alias='gains')
    sink_retries: int = Field(default=0, ge=0, exclude=True)

    @model_validator(mode='after')
    def _check_shapes(self):
        if len(self.positions) != self.node_count:
            raise ValueError(f"expected {self.node_count} positions, got {len(self.positions)}")
        if len(self.channel_gains) != self.node_count:
            raise ValueError(f"expected {self.node_count} gains, got {len(self.channel_gains)}")
        for x, y in self.positions:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError(f"position ({x}, {y}) lies outside the unit square")
        if any(not g > 0 for g in self.channel_gains):
            raise ValueError("channel gains must be positive")
        return self

    def position_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)

    def distance_matrix(self) -> np.ndarray:
        pts = self.position_array()
        return np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)

    def to_json(self, indent: Optional[int] = None) -> str:
        return self.model_dump_json(by_alias=True, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> 'NetworkInstance':
        return cls.model_validate_json(text)


def derive_seed(master_seed: int, index: int) -> int:
    """Per-instance seed for replication `index` of a sweep."""
    return (master_seed ^ index) & SEED_MASK


def generate_network(
    n: int,
    c: float,
    seed: int,
    sink: Sequence[float] = DEFAULT_SINK,
    variance: float = DEFAULT_VARIANCE,
) -> NetworkInstance:
    """
    Draw n sensor positions uniformly in [0,1]^2 from a seeded PCG64 stream.
    Gains are 1 / d(i, sink)^2; a sensor landing on the sink is redrawn.
    """
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 sensors, got n={n}")
    if not c > 0:
        raise InvalidArgumentError(f"correlation parameter must be positive, got c={c}")
    if not 0 <= seed <= SEED_MASK:
        raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")

    rng = np.random.Generator(np.random.PCG64(seed))
    positions = rng.random((n, 2))
    sink_arr = np.asarray(sink, dtype=float)

    retries = 0
    for i in range(n):
        while not np.any(positions[i] != sink_arr):
            positions[i] = rng.random(2)
            retries += 1
    if retries:
        logger.info(f"Redrew {retries} sensor coordinate(s) coinciding with the sink (seed={seed})")

    sq_dist = np.sum((positions - sink_arr) ** 2, axis=1)
    gains = 1.0 / sq_dist

    return NetworkInstance(
        n=n,
        c=float(c),
        sigma2=float(variance),
        seed=seed,
        positions=tuple((float(x), float(y)) for x, y in positions),
        sink=(float(sink_arr[0]), float(sink_arr[1])),
        gains=tuple(float(g) for g in gains),
        sink_retries=retries,
    )


def generator_description() -> str:
    return f"{GENERATOR_NAME}/v{GENERATOR_VERSION}"


# ============================================================================
# Entropy oracle
# ============================================================================

@dataclass(frozen=True)
class PairwiseEntropies:
    H_i: float
    H_j: float
    H_i_given_j: float
    H_j_given_i: float
    H_ij: float


class EntropyOracle:
    """Differential entropies (bits) of jointly Gaussian sources."""

    def __init__(self, covariance):
        K = np.array(covariance, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
            raise InvalidArgumentError(f"covariance must be a nonempty square matrix, got shape {K.shape}")
        if not np.allclose(K, K.T, rtol=0.0, atol=1e-12):
            raise InvalidArgumentError("covariance must be symmetric")
        if np.any(np.diag(K) <= 0):
            raise InvalidArgumentError("variances must be positive")
        min_eig = float(np.linalg.eigvalsh(K).min())
        if min_eig <= 1e-12 * float(np.diag(K).max()):
            raise DegenerateCorrelationError(f"covariance is not positive definite (smallest eigenvalue {min_eig:.6g})")
        K.setflags(write=False)
        self.covariance = K

    @classmethod
    def from_instance(cls, instance: NetworkInstance) -> 'EntropyOracle':
        K = instance.variance * np.exp(-instance.correlation_param * instance.distance_matrix())
        np.fill_diagonal(K, instance.variance)
        return cls(K)

    @property
    def n(self) -> int:
        return self.covariance.shape[0]

    def _check_node(self, i: int):
        if not 0 <= i < self.n:
            raise InvalidArgumentError(f"node {i} out of range for {self.n} sources")

    @cached_property
    def h1(self) -> float:
        return 0.5 * (LOG2_2PIE + math.log2(self.covariance[0, 0]))

    def marginal_entropy(self, i: int) -> float:
        self._check_node(i)
        return 0.5 * (LOG2_2PIE + math.log2(self.covariance[i, i]))

    def correlation(self, i: int, j: int) -> float:
        K = self.covariance
        return float(K[i, j] / math.sqrt(K[i, i] * K[j, j]))

    def conditional_entropy(self, i: int, j: int) -> float:
        """H(X_i | X_j)."""
        self._check_node(i)
        self._check_node(j)
        if i == j:
            raise InvalidArgumentError("conditional entropy needs two distinct sources")
        rho = self.correlation(i, j)
        if abs(rho) >= 1.0:
            raise DegenerateCorrelationError(f"sources {i} and {j} have |rho| = {abs(rho)}")
        return 0.5 * (LOG2_2PIE + math.log2(self.covariance[i, i] * (1.0 - rho * rho)))

    def joint_entropy(self, i: int, j: int) -> float:
        return self.marginal_entropy(j) + self.conditional_entropy(i, j)

    def pairwise_entropies(self, i: int, j: int) -> PairwiseEntropies:
        h_i_given_j = self.conditional_entropy(i, j)
        h_j = self.marginal_entropy(j)
        return PairwiseEntropies(
            H_i=self.marginal_entropy(i),
            H_j=h_j,
            H_i_given_j=h_i_given_j,
            H_j_given_i=self.conditional_entropy(j, i),
            H_ij=h_j + h_i_given_j,
        )

    @cached_property
    def marginals(self) -> np.ndarray:
        values = np.array([self.marginal_entropy(i) for i in range(self.n)])
        values.setflags(write=False)
        return values

    @cached_property
    def conditionals(self) -> np.ndarray:
        """conditionals[i, j] = H(X_i | X_j); the diagonal holds the marginals."""
        table = np.empty((self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                table[i, j] = self.marginals[i] if i == j else self.conditional_entropy(i, j)
        table.setflags(write=False)
        return table

    def _logdet(self, idx: Sequence[int]) -> float:
        if len(idx) == 0:
            return 0.0
        sub = self.covariance[np.ix_(idx, idx)]
        sign, logdet = np.linalg.slogdet(sub)
        if sign <= 0:
            raise DegenerateCorrelationError(f"covariance restricted to {list(idx)} is singular")
        return float(logdet)

    def subset_conditional_entropy(self, subset: Iterable[int]) -> float:
        """H(X_S | X_{S^c}) from two log-determinants."""
        S = sorted(set(subset))
        if not S:
            raise InvalidArgumentError("subset must be nonempty")
        for i in S:
            self._check_node(i)
        rest = [k for k in range(self.n) if k not in S]
        full = self._logdet(list(range(self.n)))
        return 0.5 * (len(S) * LOG2_2PIE + (full - self._logdet(rest)) / LN2)

    def joint_entropy_all(self) -> float:
        return self.subset_conditional_entropy(range(self.n))

    def in_pair_region(self, i: int, j: int, rate_i: float, rate_j: float,
                       slack: float = THRESHOLD_SLACK) -> bool:
        """Closed Slepian-Wolf region SW_ij membership."""
        return (
            rate_i >= self.conditional_entropy(i, j) - slack
            and rate_j >= self.conditional_entropy(j, i) - slack
            and rate_i + rate_j >= self.joint_entropy(i, j) - slack
        )


# ============================================================================
# Channel model
# ============================================================================

@dataclass(frozen=True)
class ChannelModel:
    """Orthogonal AWGN links with unit noise power and a per-node power cap."""
    gains: Tuple[float, ...]
    peak_power: float = math.inf
    clamp_rates_at_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'gains', tuple(float(g) for g in self.gains))
        if any(not g > 0 for g in self.gains):
            raise InvalidArgumentError("channel gains must be positive")
        if not self.peak_power > 0:
            raise InvalidArgumentError(f"peak power must be positive, got {self.peak_power}")

    @classmethod
    def from_instance(cls, instance: NetworkInstance, peak_power: float = math.inf,
                      clamp_rates_at_zero: bool = False) -> 'ChannelModel':
        return cls(instance.channel_gains, peak_power, clamp_rates_at_zero)

    @property
    def n(self) -> int:
        return len(self.gains)

    def capacity(self, i: int, power: float) -> float:
        """C_i(P) = log2(1 + gamma_i P)."""
        return math.log1p(self.gains[i] * power) / LN2

    def power_for_rate(self, i: int, rate: float) -> float:
        """Q_i(R) = (2^R - 1) / gamma_i, the inverse of capacity."""
        if rate < 0:
            raise InvalidArgumentError(f"rate must be nonnegative, got {rate}")
        return math.expm1(rate * LN2) / self.gains[i]

    def effective_rate(self, rate: float) -> float:
        return max(rate, 0.0) if self.clamp_rates_at_zero else rate

    def transmit_power(self, i: int, rate: float) -> float:
        """Power spent by node i at `rate`; negative rates give negative surrogates unless clamped."""
        rate = self.effective_rate(rate)
        if rate < 0:
            return math.expm1(rate * LN2) / self.gains[i]
        return self.power_for_rate(i, rate)

    def rate_cap(self, i: int) -> float:
        return self.capacity(i, self.peak_power)

    def within_peak(self, power: float) -> bool:
        return power <= self.peak_power + POWER_SLACK
