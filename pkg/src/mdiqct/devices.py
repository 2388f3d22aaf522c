"""Physical-layer models: fiber loss, detectors, sources, and the sampled BSM.

The measurement station is modeled as four gated single-photon detectors
behind a beam splitter.  A genuine two-photon coincidence performs the ideal
Bell projection; when one or both photons are missing, dark counts can fake a
coincidence.  The sampler decomposes each round into explicit event cases so
that Monte Carlo runs reproduce the closed-form honest-abort probability
term by term.

Dark-count-assisted coincidences are handled at the event level rather than
per detector: a faked outcome is uniform over {Ψ⁺, Ψ⁻} and independent of the
prepared labels, which makes the probability of landing in a verification
zero cell exactly 1/4 for uniformly chosen labels.  The (1−d)² probability
that the two uninvolved detectors stay quiet is omitted, matching the
closed form used by the analysis module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ParameterError
from .qmath import BsmOutcome, PureState, bell_projection_probs

DEFAULT_LOSS_COEFF_DB_PER_KM = 0.2


def transmittance(length_km: float, loss_coeff_db_per_km: float = DEFAULT_LOSS_COEFF_DB_PER_KM) -> float:
    """Survival probability of a photon over a fiber of the given length.

    t = 10^(−coeff·L/10); at the default 0.2 dB/km this is 10^(−0.02 L).
    """
    if length_km < 0.0:
        raise ParameterError(f"fiber length must be >= 0, got {length_km}")
    if loss_coeff_db_per_km <= 0.0:
        raise ParameterError(f"loss coefficient must be > 0, got {loss_coeff_db_per_km}")
    return 10.0 ** (-(loss_coeff_db_per_km / 10.0) * length_km)


@dataclass(frozen=True)
class ChannelParams:
    """Fiber lengths (km) from each party to the measurement station."""

    l_a: float = 0.0
    l_b: float = 0.0
    loss_coeff: float = DEFAULT_LOSS_COEFF_DB_PER_KM

    def __post_init__(self) -> None:
        if self.l_a < 0.0 or self.l_b < 0.0:
            raise ParameterError(f"fiber lengths must be >= 0, got {self.l_a}, {self.l_b}")
        if self.loss_coeff <= 0.0:
            raise ParameterError(f"loss coefficient must be > 0, got {self.loss_coeff}")

    @property
    def t_a(self) -> float:
        return transmittance(self.l_a, self.loss_coeff)

    @property
    def t_b(self) -> float:
        return transmittance(self.l_b, self.loss_coeff)


@dataclass(frozen=True)
class DetectorParams:
    """Detection efficiency and per-gate dark count probability.

    ``dark`` is a per-detector per-gate probability, not a rate: the protocol
    is round based and every quantity here is per round.
    """

    eta: float = 1.0
    dark: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.eta <= 1.0):
            raise ParameterError(f"detector efficiency must lie in [0, 1], got {self.eta}")
        if not (0.0 <= self.dark < 1.0):
            raise ParameterError(f"dark count probability must lie in [0, 1), got {self.dark}")


IDEAL_CHANNEL = ChannelParams(0.0, 0.0)
IDEAL_DETECTOR = DetectorParams(eta=1.0, dark=0.0)


class SourceKind(Enum):
    SINGLE_PHOTON = "single-photon"
    WEAK_COHERENT = "weak-coherent"


@dataclass(frozen=True)
class SourceModel:
    """Photon-number statistics of a party's source."""

    kind: SourceKind = SourceKind.SINGLE_PHOTON
    mu: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind is SourceKind.WEAK_COHERENT:
            if self.mu is None or self.mu <= 0.0:
                raise ParameterError(f"weak-coherent source needs mean photon number > 0, got {self.mu}")
        elif self.mu is not None:
            raise ParameterError("single-photon source takes no mean photon number")


def single_photon_source() -> SourceModel:
    return SourceModel(SourceKind.SINGLE_PHOTON)


def weak_coherent_source(mu: float) -> SourceModel:
    return SourceModel(SourceKind.WEAK_COHERENT, mu=mu)


def sample_photon_number(source: SourceModel, rng: np.random.Generator) -> int:
    """Photon count of one emission: always 1, or Poissonian with mean mu."""
    if source.kind is SourceKind.SINGLE_PHOTON:
        return 1
    return int(rng.poisson(source.mu))


# ---------------------------------------------------------------------------
# BSM sampling
# ---------------------------------------------------------------------------

class EventCause(Enum):
    """What produced the round's output, for diagnostics and case accounting."""

    BOTH_PHOTONS = "both-photons"
    PHOTON_DARK = "photon+dark"
    DARK_DARK = "dark+dark"
    FAILURE = "failure"


@dataclass(frozen=True)
class BsmSample:
    outcome: BsmOutcome
    cause: EventCause

    def __post_init__(self) -> None:
        success = self.outcome is not BsmOutcome.FAILURE
        if (self.cause is EventCause.FAILURE) == success:
            raise ParameterError(f"inconsistent sample: {self.outcome} with cause {self.cause}")


def sample_bsm_ideal(state_a: PureState, state_b: PureState, rng: np.random.Generator) -> BsmOutcome:
    """One lossless, noiseless, unit-efficiency Bell measurement."""
    p_plus, p_minus = bell_projection_probs(state_a, state_b)
    u = rng.random()
    if u < p_plus:
        return BsmOutcome.PSI_PLUS
    if u < p_plus + p_minus:
        return BsmOutcome.PSI_MINUS
    return BsmOutcome.FAILURE


def sample_bsm_noisy(
    state_a: PureState,
    state_b: PureState,
    channel: ChannelParams,
    detector: DetectorParams,
    rng: np.random.Generator,
    *,
    extended: bool = False,
    present_a: bool = True,
    present_b: bool = True,
) -> BsmSample:
    """One round of the lossy, dark-count-afflicted Bell measurement.

    Event cases, sampled in order:

    * both photons transmitted and detected: the ideal projection decides
      the outcome (cause ``both-photons`` on success);
    * exactly one photon detected while the partner photon was lost in the
      fiber: a dark count completes a coincidence with probability d per
      Bell outcome (cause ``photon+dark``);
    * no photon detected: two dark counts fake a coincidence with
      probability 2d² per Bell outcome (cause ``dark-dark``);
    * anything else is a failure click and the round restarts.

    The default model deliberately gives no dark-count completion to a
    detected photon whose partner arrived but went undetected; pass
    ``extended=True`` to enable that physically present case as well.
    ``present_a``/``present_b`` mark whether the corresponding pulse carried
    any photon at all (used by the weak-coherent flow).
    """
    d = detector.dark
    arr_a = present_a and rng.random() < channel.t_a
    det_a = arr_a and rng.random() < detector.eta
    arr_b = present_b and rng.random() < channel.t_b
    det_b = arr_b and rng.random() < detector.eta

    if det_a and det_b:
        outcome = sample_bsm_ideal(state_a, state_b, rng)
        if outcome is BsmOutcome.FAILURE:
            return BsmSample(outcome, EventCause.FAILURE)
        return BsmSample(outcome, EventCause.BOTH_PHOTONS)

    if det_a or det_b:
        partner_lost = (det_a and not arr_b) or (det_b and not arr_a)
        if partner_lost or extended:
            u = rng.random()
            if u < d:
                return BsmSample(BsmOutcome.PSI_PLUS, EventCause.PHOTON_DARK)
            if u < 2.0 * d:
                return BsmSample(BsmOutcome.PSI_MINUS, EventCause.PHOTON_DARK)
        return BsmSample(BsmOutcome.FAILURE, EventCause.FAILURE)

    u = rng.random()
    if u < 2.0 * d * d:
        return BsmSample(BsmOutcome.PSI_PLUS, EventCause.DARK_DARK)
    if u < 4.0 * d * d:
        return BsmSample(BsmOutcome.PSI_MINUS, EventCause.DARK_DARK)
    return BsmSample(BsmOutcome.FAILURE, EventCause.FAILURE)


# Integer codes for the vectorized sampler.
OUTCOME_FAILURE, OUTCOME_PSI_PLUS, OUTCOME_PSI_MINUS = 0, 1, 2
CAUSE_FAILURE, CAUSE_BOTH, CAUSE_PHOTON_DARK, CAUSE_DARK_DARK = 0, 1, 2, 3

_OUTCOME_BY_CODE = {
    OUTCOME_FAILURE: BsmOutcome.FAILURE,
    OUTCOME_PSI_PLUS: BsmOutcome.PSI_PLUS,
    OUTCOME_PSI_MINUS: BsmOutcome.PSI_MINUS,
}


def outcome_from_code(code: int) -> BsmOutcome:
    return _OUTCOME_BY_CODE[int(code)]


def sample_bsm_noisy_batch(
    p_plus: np.ndarray,
    p_minus: np.ndarray,
    channel: ChannelParams,
    detector: DetectorParams,
    rng: np.random.Generator,
    *,
    extended: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized version of :func:`sample_bsm_noisy` for many independent rounds.

    ``p_plus``/``p_minus`` give the per-round ideal projection probabilities
    for whatever states each round carries.  Returns int8 arrays of outcome
    and cause codes.  The event-case logic is the same as in the scalar
    sampler; the two are cross-checked statistically in the test suite.
    """
    p_plus = np.asarray(p_plus, dtype=float)
    p_minus = np.asarray(p_minus, dtype=float)
    if p_plus.shape != p_minus.shape:
        raise ParameterError("probability arrays must have matching shapes")
    n = p_plus.shape[0]
    d = detector.dark

    arr_a = rng.random(n) < channel.t_a
    det_a = arr_a & (rng.random(n) < detector.eta)
    arr_b = rng.random(n) < channel.t_b
    det_b = arr_b & (rng.random(n) < detector.eta)
    u = rng.random(n)

    outcome = np.zeros(n, dtype=np.int8)
    cause = np.zeros(n, dtype=np.int8)

    both = det_a & det_b
    outcome[both & (u < p_plus)] = OUTCOME_PSI_PLUS
    outcome[both & (u >= p_plus) & (u < p_plus + p_minus)] = OUTCOME_PSI_MINUS
    cause[both & (outcome != OUTCOME_FAILURE)] = CAUSE_BOTH

    one = det_a ^ det_b
    if extended:
        eligible = one
    else:
        eligible = (det_a & ~arr_b) | (det_b & ~arr_a)
    outcome[eligible & (u < d)] = OUTCOME_PSI_PLUS
    outcome[eligible & (u >= d) & (u < 2.0 * d)] = OUTCOME_PSI_MINUS
    cause[eligible & (outcome != OUTCOME_FAILURE)] = CAUSE_PHOTON_DARK

    none = ~det_a & ~det_b
    outcome[none & (u < 2.0 * d * d)] = OUTCOME_PSI_PLUS
    outcome[none & (u >= 2.0 * d * d) & (u < 4.0 * d * d)] = OUTCOME_PSI_MINUS
    cause[none & (outcome != OUTCOME_FAILURE)] = CAUSE_DARK_DARK

    return outcome, cause


def poisson_tail_at_least_two(mu: float) -> float:
    """P(n ≥ 2) for a Poissonian source: 1 − e^(−mu)(1 + mu)."""
    if mu <= 0.0:
        raise ParameterError(f"mean photon number must be > 0, got {mu}")
    return float(1.0 - math.exp(-mu) * (1.0 + mu))
