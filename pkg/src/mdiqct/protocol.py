"""The coin-tossing protocol state machine.

One run of the main (measurement-device-independent) flow:

1. A picks a uniform label (α, a) and sends the matching polarization state.
2. B picks his own uniform label (β, b), sends his state, and the black box
   projects the pair onto a Bell state.  On a failure click the parties
   restart from step 1 with fresh randomness.
3. B sends A a uniform random bit b′.
4. A reveals her label.
5. B accepts unless the (outcome, revealed, own-label) triple sits on a
   zero cell of the verification table; on accept the coin is x = a ⊕ b′.

The black box interface receives only quantum states and emits only an
outcome: B's classical label never flows into it.  Strategies observe the
run through a phase-gated view, so reading b′ before step 3 has fixed it
raises instead of leaking.

Also provided: the fixed-pulse-count variant for weak-coherent sources, and
a deliberately simplified non-MDI baseline flow (B measures in a random
basis himself) used to demonstrate the detector-control attack that the
MDI design removes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import devices
from .devices import (
    BsmSample,
    ChannelParams,
    DetectorParams,
    SourceKind,
    SourceModel,
    sample_photon_number,
    single_photon_source,
)
from .errors import ConfigurationError, ExhaustionError, ParameterError, PhaseOrderError
from .qmath import (
    BsmOutcome,
    PureState,
    StateLabel,
    state_for_label,
    validate_y,
)

DEFAULT_MAX_ROUNDS = 1_000_000


class Mode(Enum):
    MDI = "mdi"
    MDI_WEAK_COHERENT = "mdi-weak-coherent"
    BASELINE = "baseline"


class Verdict(Enum):
    ACCEPT = "accept"
    ABORT = "abort"


def is_zero_cell(outcome: BsmOutcome, label_a: StateLabel, label_b: StateLabel) -> bool:
    """Whether the verification table assigns probability exactly 0.

    The zero set is the same for every admissible y: the bits must match,
    and the bases match exactly for a Ψ⁻ outcome and differ for Ψ⁺.
    """
    if outcome is BsmOutcome.FAILURE:
        raise ParameterError("verification is only defined for Bell outcomes")
    same_basis = label_a.basis == label_b.basis
    return label_a.bit == label_b.bit and same_basis == (outcome is BsmOutcome.PSI_MINUS)


def verify(outcome: BsmOutcome, revealed: StateLabel, bob: StateLabel, y: float) -> Verdict:
    """B's step-5 check: abort iff the revealed combination is impossible."""
    validate_y(y)
    return Verdict.ABORT if is_zero_cell(outcome, revealed, bob) else Verdict.ACCEPT


# ---------------------------------------------------------------------------
# Run records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transcript:
    """Full record of one protocol execution."""

    rounds: int
    outcome: Optional[BsmOutcome]
    bob_label: Optional[StateLabel]
    bob_random_bit: Optional[int]
    revealed_label: Optional[StateLabel]
    verdict: Verdict
    coin: Optional[int]
    cause: Optional[str] = None
    pulse_index: Optional[int] = None
    multiphoton_slots: tuple[int, ...] = ()
    adversary_success: Optional[bool] = None

    def __post_init__(self) -> None:
        if (self.coin is not None) != (self.verdict is Verdict.ACCEPT):
            raise ParameterError("coin must be present exactly on accepting transcripts")
        if self.coin is not None:
            if self.revealed_label is None or self.bob_random_bit is None:
                raise ParameterError("accepting transcript is missing reveal or b'")
            if self.coin != (self.revealed_label.bit ^ self.bob_random_bit):
                raise ParameterError("coin must equal revealed bit XOR b'")
        if self.outcome is BsmOutcome.FAILURE:
            raise ParameterError("a completed run cannot record a failure outcome")


def transcript_to_record(t: Transcript) -> dict:
    """Flat dict with stable field names for the line-delimited record stream."""
    return {
        "rounds": t.rounds,
        "outcome": t.outcome.value if t.outcome is not None else None,
        "bob_basis": t.bob_label.basis if t.bob_label is not None else None,
        "bob_bit": t.bob_label.bit if t.bob_label is not None else None,
        "b_prime": t.bob_random_bit,
        "revealed_basis": t.revealed_label.basis if t.revealed_label is not None else None,
        "revealed_bit": t.revealed_label.bit if t.revealed_label is not None else None,
        "verdict": t.verdict.value,
        "coin": t.coin,
        "cause": t.cause,
        "pulse_index": t.pulse_index,
        "multiphoton_slots": list(t.multiphoton_slots),
        "adversary_success": t.adversary_success,
    }


def transcript_json_line(t: Transcript) -> str:
    return json.dumps(transcript_to_record(t), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides the random generator."""

    y: float = 0.9
    channel: ChannelParams = field(default_factory=ChannelParams)
    detector: DetectorParams = field(default_factory=DetectorParams)
    source_a: SourceModel = field(default_factory=single_photon_source)
    source_b: SourceModel = field(default_factory=single_photon_source)
    max_rounds: int = DEFAULT_MAX_ROUNDS
    mode: Mode = Mode.MDI
    k_pulses: Optional[int] = None
    extended_dark_model: bool = False

    def __post_init__(self) -> None:
        validate_y(self.y)
        if self.max_rounds < 1:
            raise ParameterError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if self.mode is Mode.MDI_WEAK_COHERENT:
            if self.k_pulses is None or self.k_pulses < 1:
                raise ParameterError("weak-coherent mode needs a pulse count K >= 1")
            if (
                self.source_a.kind is not SourceKind.WEAK_COHERENT
                or self.source_b.kind is not SourceKind.WEAK_COHERENT
            ):
                raise ParameterError("weak-coherent mode needs weak-coherent sources")
        elif self.k_pulses is not None:
            raise ParameterError("pulse count K only applies to weak-coherent mode")
        if self.mode is Mode.BASELINE and self.source_a.kind is not SourceKind.SINGLE_PHOTON:
            raise ParameterError("the baseline flow is defined for single-photon sources")

    @property
    def is_ideal(self) -> bool:
        """Lossless channel, unit-efficiency detectors, no dark counts."""
        return (
            self.channel.l_a == 0.0
            and self.channel.l_b == 0.0
            and self.detector.eta == 1.0
            and self.detector.dark == 0.0
        )


def ideal_config(y: float = 0.9, mode: Mode = Mode.MDI, max_rounds: int = DEFAULT_MAX_ROUNDS) -> RunConfig:
    """Perfect channel and detectors; the regime of the cheating analyses."""
    return RunConfig(
        y=y,
        channel=devices.IDEAL_CHANNEL,
        detector=devices.IDEAL_DETECTOR,
        max_rounds=max_rounds,
        mode=mode,
    )


# ---------------------------------------------------------------------------
# Phase-gated view for strategies
# ---------------------------------------------------------------------------

_UNSET = object()


class RunView:
    """What an adversary may observe, released phase by phase.

    Attribute access before the protocol has fixed the value raises
    :class:`PhaseOrderError`; a strategy structurally cannot condition its
    early moves on later messages.
    """

    __slots__ = ("_outcome", "_b_prime", "_box_message", "_detection_record")

    def __init__(self) -> None:
        self._outcome = _UNSET
        self._b_prime = _UNSET
        self._box_message = _UNSET
        self._detection_record = _UNSET

    @staticmethod
    def _get(value, name: str):
        if value is _UNSET:
            raise PhaseOrderError(f"{name} is not available in this protocol phase")
        return value

    @property
    def announced_outcome(self) -> BsmOutcome:
        return self._get(self._outcome, "announced_outcome")

    @property
    def b_prime(self) -> int:
        return self._get(self._b_prime, "b_prime")

    @property
    def box_message(self):
        """Classical side information smuggled out of a colluding black box."""
        return self._get(self._box_message, "box_message")

    @property
    def detection_record(self):
        """Basis/outcome pair leaked by a controlled detector (baseline only)."""
        return self._get(self._detection_record, "detection_record")


BlackBox = Callable[[PureState, PureState, np.random.Generator], BsmSample]


def _honest_box(config: RunConfig) -> BlackBox:
    def box(state_a: PureState, state_b: PureState, rng: np.random.Generator) -> BsmSample:
        return devices.sample_bsm_noisy(
            state_a,
            state_b,
            config.channel,
            config.detector,
            rng,
            extended=config.extended_dark_model,
        )

    return box


def _uniform_label(rng: np.random.Generator) -> StateLabel:
    return StateLabel(basis=int(rng.integers(2)), bit=int(rng.integers(2)))


# ---------------------------------------------------------------------------
# Honest runs
# ---------------------------------------------------------------------------

def run_honest(
    config: RunConfig,
    rng: np.random.Generator,
    box: Optional[BlackBox] = None,
) -> Transcript:
    """One honest execution of the main flow.

    Party randomness (labels, b′) and device noise come from separate child
    streams of ``rng`` so that device-model changes do not shift the
    parties' choices under a fixed seed.
    """
    if config.mode is not Mode.MDI:
        raise ConfigurationError(f"run_honest requires mdi mode, got {config.mode.value}")
    party_rng, device_rng = rng.spawn(2)
    box = box or _honest_box(config)

    sample: Optional[BsmSample] = None
    alice = bob = None
    rounds = 0
    for rounds in range(1, config.max_rounds + 1):
        alice = _uniform_label(party_rng)
        bob = _uniform_label(party_rng)
        candidate = box(
            state_for_label(alice, config.y),
            state_for_label(bob, config.y),
            device_rng,
        )
        if candidate.outcome is not BsmOutcome.FAILURE:
            sample = candidate
            break
    if sample is None:
        raise ExhaustionError(f"no successful projection within {config.max_rounds} rounds")

    b_prime = int(party_rng.integers(2))
    revealed = alice  # honest A reveals her true label
    verdict = verify(sample.outcome, revealed, bob, config.y)
    coin = (revealed.bit ^ b_prime) if verdict is Verdict.ACCEPT else None
    return Transcript(
        rounds=rounds,
        outcome=sample.outcome,
        bob_label=bob,
        bob_random_bit=b_prime,
        revealed_label=revealed,
        verdict=verdict,
        coin=coin,
        cause=sample.cause.value,
    )


def run_weak_coherent(config: RunConfig, rng: np.random.Generator) -> Transcript:
    """The fixed-pulse-count variant for weak-coherent sources.

    Both parties emit K pulse slots with fresh labels per slot; the first
    slot with a successful projection (index j) carries the labels used in
    the remaining steps.  If every slot fails the run aborts, so this
    variant is not loss tolerant.  Multi-photon emissions are treated as
    "photon present" (no multi-photon interference model) and their slot
    indices are flagged on the transcript.
    """
    if config.mode is not Mode.MDI_WEAK_COHERENT:
        raise ConfigurationError(f"run_weak_coherent requires weak-coherent mode, got {config.mode.value}")
    party_rng, device_rng = rng.spawn(2)
    k = int(config.k_pulses)

    multiphoton: list[int] = []
    first: Optional[tuple[int, BsmSample, StateLabel, StateLabel]] = None
    for slot in range(1, k + 1):
        alice = _uniform_label(party_rng)
        bob = _uniform_label(party_rng)
        n_a = sample_photon_number(config.source_a, device_rng)
        n_b = sample_photon_number(config.source_b, device_rng)
        if n_a >= 2 or n_b >= 2:
            multiphoton.append(slot)
        candidate = devices.sample_bsm_noisy(
            state_for_label(alice, config.y),
            state_for_label(bob, config.y),
            config.channel,
            config.detector,
            device_rng,
            extended=config.extended_dark_model,
            present_a=n_a >= 1,
            present_b=n_b >= 1,
        )
        if first is None and candidate.outcome is not BsmOutcome.FAILURE:
            first = (slot, candidate, alice, bob)

    if first is None:
        return Transcript(
            rounds=k,
            outcome=None,
            bob_label=None,
            bob_random_bit=None,
            revealed_label=None,
            verdict=Verdict.ABORT,
            coin=None,
            cause="no-bsm-success",
            multiphoton_slots=tuple(multiphoton),
        )

    slot, sample, alice, bob = first
    b_prime = int(party_rng.integers(2))
    verdict = verify(sample.outcome, alice, bob, config.y)
    coin = (alice.bit ^ b_prime) if verdict is Verdict.ACCEPT else None
    return Transcript(
        rounds=slot,
        outcome=sample.outcome,
        bob_label=bob,
        bob_random_bit=b_prime,
        revealed_label=alice,
        verdict=verdict,
        coin=coin,
        cause=sample.cause.value,
        pulse_index=slot,
        multiphoton_slots=tuple(multiphoton),
    )


# ---------------------------------------------------------------------------
# Baseline (non-MDI) flow
# ---------------------------------------------------------------------------

def _measure_in_basis(state: PureState, basis: int, y: float, rng: np.random.Generator) -> int:
    """Projective measurement in one preparation basis; returns the bit."""
    p0 = abs(state.overlap(state_for_label(StateLabel(basis, 0), y))) ** 2
    return 0 if rng.random() < p0 else 1


def run_baseline(
    config: RunConfig,
    strategy=None,
    rng: Optional[np.random.Generator] = None,
) -> Transcript:
    """Simplified direct-measurement flow used to stage detector attacks.

    A sends her state straight to B, who measures in a uniformly random
    preparation basis (resending on detection failure).  After the reveal,
    B aborts iff he measured in A's basis and recorded the orthogonal bit.
    This check is a deliberate simplification: it is just strong enough to
    show that a detector-controlling A evades it completely while the MDI
    flow gives her no such handle.
    """
    if rng is None:
        raise ParameterError("run_baseline requires a random generator")
    if config.mode is not Mode.BASELINE:
        raise ConfigurationError(f"run_baseline requires baseline mode, got {config.mode.value}")
    if strategy is not None:
        return _dispatch_baseline_adversary(config, strategy, rng)
    party_rng, device_rng = rng.spawn(2)

    detect_prob = config.channel.t_a * config.detector.eta
    alice = bob_basis = recorded = None
    rounds = 0
    for rounds in range(1, config.max_rounds + 1):
        alice = _uniform_label(party_rng)
        bob_basis = int(party_rng.integers(2))
        if device_rng.random() < detect_prob:
            recorded = _measure_in_basis(
                state_for_label(alice, config.y), bob_basis, config.y, device_rng
            )
            break
    if recorded is None:
        raise ExhaustionError(f"no detection within {config.max_rounds} rounds")

    b_prime = int(party_rng.integers(2))
    revealed = alice
    caught = bob_basis == revealed.basis and recorded != revealed.bit
    verdict = Verdict.ABORT if caught else Verdict.ACCEPT
    coin = (revealed.bit ^ b_prime) if verdict is Verdict.ACCEPT else None
    return Transcript(
        rounds=rounds,
        outcome=None,
        bob_label=StateLabel(bob_basis, recorded),
        bob_random_bit=b_prime,
        revealed_label=revealed,
        verdict=verdict,
        coin=coin,
        cause="baseline-detection",
    )


# ---------------------------------------------------------------------------
# Adversarial runs
# ---------------------------------------------------------------------------

def run_with_adversary(config: RunConfig, strategy, rng: np.random.Generator) -> Transcript:
    """Run the protocol with one party's messages produced by a strategy.

    The honest counterpart follows the normal flow.  The strategy object
    declares its role and the modes it applies to; a mismatch (for example
    attaching the detector-control attack to the MDI flow, which exposes no
    detection-control channel) is a configuration error.
    """
    from . import adversaries  # local import to avoid a module cycle

    if config.mode not in strategy.supported_modes:
        raise ConfigurationError(
            f"strategy {strategy.name!r} does not apply to mode {config.mode.value!r}"
        )
    if isinstance(strategy, adversaries.HonestStrategy):
        if config.mode is Mode.BASELINE:
            return run_baseline(config, None, rng)
        return run_honest(config, rng)
    if config.mode is Mode.BASELINE:
        return _dispatch_baseline_adversary(config, strategy, rng)
    if isinstance(strategy, adversaries.BobOptimalDiscrimination):
        return _run_mdi_dishonest_bob(config, strategy, rng)
    if isinstance(strategy, adversaries.ColludingBoxIndividual):
        return _run_mdi_colluding_box(config, strategy, rng)
    if isinstance(strategy, adversaries.CoherentStateAlice):
        return _run_mdi_coherent_alice(config, strategy, rng)
    raise ConfigurationError(f"no mdi driver for strategy {strategy.name!r}")


def _require_ideal(config: RunConfig, strategy) -> None:
    # The cheating analyses grant the dishonest party perfect devices.
    if not config.is_ideal:
        raise ConfigurationError(
            f"strategy {strategy.name!r} is analyzed for ideal devices; "
            "use a lossless, noiseless RunConfig"
        )


def _run_mdi_dishonest_bob(config: RunConfig, strategy, rng: np.random.Generator) -> Transcript:
    """Dishonest B measures A's photon directly and steers b′."""
    _require_ideal(config, strategy)
    party_rng, device_rng = rng.spawn(2)
    view = RunView()

    alice = _uniform_label(party_rng)
    alice_state = state_for_label(alice, config.y)
    # B runs his own lab: he skips the joint projection and claims a success.
    view._outcome = BsmOutcome.PSI_PLUS
    b_prime, guessed_bit = strategy.choose_b_prime(view, alice_state, device_rng)
    view._b_prime = b_prime

    revealed = alice
    coin = revealed.bit ^ b_prime
    return Transcript(
        rounds=1,
        outcome=BsmOutcome.PSI_PLUS,
        bob_label=None,
        bob_random_bit=b_prime,
        revealed_label=revealed,
        verdict=Verdict.ACCEPT,  # the verifier is the cheater; he never aborts
        coin=coin,
        cause="med-correct" if guessed_bit == alice.bit else "med-wrong",
        adversary_success=coin == strategy.target_coin,
    )


def _run_mdi_colluding_box(config: RunConfig, strategy, rng: np.random.Generator) -> Transcript:
    """A ships a rigged box; it reads B's photon and fakes an outcome."""
    _require_ideal(config, strategy)
    party_rng, device_rng = rng.spawn(2)
    view = RunView()

    bob = _uniform_label(party_rng)
    bob_state = state_for_label(bob, config.y)
    outcome, guessed_label = strategy.box_process(view, bob_state, device_rng)
    view._outcome = outcome
    view._box_message = guessed_label

    b_prime = int(party_rng.integers(2))
    view._b_prime = b_prime
    revealed = strategy.reveal(view, device_rng)

    verdict = verify(outcome, revealed, bob, config.y)
    coin = (revealed.bit ^ b_prime) if verdict is Verdict.ACCEPT else None
    return Transcript(
        rounds=1,
        outcome=outcome,
        bob_label=bob,
        bob_random_bit=b_prime,
        revealed_label=revealed,
        verdict=verdict,
        coin=coin,
        cause="med-correct" if guessed_label == bob else "med-wrong",
        adversary_success=verdict is Verdict.ACCEPT and coin == strategy.target_coin,
    )


def _run_mdi_coherent_alice(config: RunConfig, strategy, rng: np.random.Generator) -> Transcript:
    """A submits an uncommitted superposition but lets the box project honestly."""
    _require_ideal(config, strategy)
    party_rng, device_rng = rng.spawn(2)
    view = RunView()

    outcome = BsmOutcome.FAILURE
    bob = None
    rounds = 0
    for rounds in range(1, config.max_rounds + 1):
        bob = _uniform_label(party_rng)
        sent = strategy.prepare(view, device_rng)
        outcome = devices.sample_bsm_ideal(sent, state_for_label(bob, config.y), device_rng)
        if outcome is not BsmOutcome.FAILURE:
            break
    if outcome is BsmOutcome.FAILURE:
        raise ExhaustionError(f"no successful projection within {config.max_rounds} rounds")
    view._outcome = outcome

    b_prime = int(party_rng.integers(2))
    view._b_prime = b_prime
    revealed = strategy.reveal(view, device_rng)

    verdict = verify(outcome, revealed, bob, config.y)
    coin = (revealed.bit ^ b_prime) if verdict is Verdict.ACCEPT else None
    return Transcript(
        rounds=rounds,
        outcome=outcome,
        bob_label=bob,
        bob_random_bit=b_prime,
        revealed_label=revealed,
        verdict=verdict,
        coin=coin,
        cause=None,
        adversary_success=verdict is Verdict.ACCEPT and coin == strategy.target_coin,
    )


def _dispatch_baseline_adversary(config: RunConfig, strategy, rng: np.random.Generator) -> Transcript:
    from . import adversaries

    if config.mode not in strategy.supported_modes:
        raise ConfigurationError(
            f"strategy {strategy.name!r} does not apply to mode {config.mode.value!r}"
        )
    if isinstance(strategy, adversaries.HonestStrategy):
        return run_baseline(config, None, rng)
    if isinstance(strategy, adversaries.DetectorControlAlice):
        return _run_baseline_blinding(config, strategy, rng)
    if isinstance(strategy, adversaries.BobOptimalDiscrimination):
        return _run_baseline_dishonest_bob(config, strategy, rng)
    raise ConfigurationError(f"no baseline driver for strategy {strategy.name!r}")


def _run_baseline_blinding(config: RunConfig, strategy, rng: np.random.Generator) -> Transcript:
    """A controls B's detector: every detection succeeds and leaks (β, bit)."""
    party_rng, device_rng = rng.spawn(2)
    view = RunView()

    bob_basis = int(party_rng.integers(2))
    recorded = strategy.control_detection(view, bob_basis, device_rng)
    view._detection_record = (bob_basis, recorded)

    b_prime = int(party_rng.integers(2))
    view._b_prime = b_prime
    revealed = strategy.reveal(view, device_rng)

    caught = bob_basis == revealed.basis and recorded != revealed.bit
    verdict = Verdict.ABORT if caught else Verdict.ACCEPT
    coin = (revealed.bit ^ b_prime) if verdict is Verdict.ACCEPT else None
    return Transcript(
        rounds=1,
        outcome=None,
        bob_label=StateLabel(bob_basis, recorded),
        bob_random_bit=b_prime,
        revealed_label=revealed,
        verdict=verdict,
        coin=coin,
        cause="controlled-detection",
        adversary_success=verdict is Verdict.ACCEPT and coin == strategy.target_coin,
    )


def _run_baseline_dishonest_bob(config: RunConfig, strategy, rng: np.random.Generator) -> Transcript:
    """Dishonest B in the baseline flow: same discrimination attack as in MDI."""
    _require_ideal(config, strategy)
    party_rng, device_rng = rng.spawn(2)
    view = RunView()

    alice = _uniform_label(party_rng)
    alice_state = state_for_label(alice, config.y)
    b_prime, guessed_bit = strategy.choose_b_prime(view, alice_state, device_rng)
    view._b_prime = b_prime

    revealed = alice
    coin = revealed.bit ^ b_prime
    return Transcript(
        rounds=1,
        outcome=None,
        bob_label=None,
        bob_random_bit=b_prime,
        revealed_label=revealed,
        verdict=Verdict.ACCEPT,
        coin=coin,
        cause="med-correct" if guessed_bit == alice.bit else "med-wrong",
        adversary_success=coin == strategy.target_coin,
    )
