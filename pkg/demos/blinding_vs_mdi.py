"""Why the measurement is outsourced to an untrusted box at all.

In the baseline flow the verifier measures incoming photons with his own
detectors.  An adversary who controls those detectors learns the
measurement basis and outcome of every detection event, which is enough
to dictate the coin while never failing verification.  The MDI flow
closes the hole structurally: the box's interface carries quantum states
in and one Bell outcome out, so the same strategy object is rejected at
configuration time.
"""
import numpy as np

from mdiqct import ConfigurationError, Mode, RunConfig, run_baseline, run_with_adversary
from mdiqct.adversaries import alice_blinding_attack
from mdiqct.protocol import Verdict, ideal_config


def main():
    rng = np.random.default_rng(99)
    strategy = alice_blinding_attack(target_coin=0)
    n = 50_000

    wins = aborts = 0
    config = RunConfig(mode=Mode.BASELINE)
    for _ in range(n):
        t = run_baseline(config, strategy, rng)
        wins += t.adversary_success
        aborts += t.verdict is Verdict.ABORT
    print(f"baseline flow, detector-control attack, {n} runs:")
    print(f"  coin forced to target: {wins}/{n}")
    print(f"  caught by verification: {aborts}")

    print("\nattaching the same strategy to the MDI flow:")
    try:
        run_with_adversary(ideal_config(), strategy, rng)
    except ConfigurationError as exc:
        print(f"  rejected: {exc}")


if __name__ == "__main__":
    main()
