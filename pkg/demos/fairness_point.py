"""Where the two parties' best attacks balance: the fair operating point.

Scans the state-family coefficient, shows the two cheating curves crossing
exactly once, and solves for the crossing by bisection.
"""
from mdiqct import cheat_alice_coherent, cheat_bob, solve_fair_y


def main():
    print("cheating probabilities across the admissible coefficient range\n")
    print(f"{'y':>6} {'A (coherent)':>14} {'B (discriminate)':>17} {'edge':>10}")
    for i in range(11):
        y = 0.55 + 0.04 * i
        a = cheat_alice_coherent(y)
        b = cheat_bob(y)
        edge = "A" if a > b else ("B" if b > a else "tie")
        print(f"{y:>6.2f} {a:>14.4f} {b:>17.4f} {edge:>10}")

    point = solve_fair_y(1e-12)
    print(f"\nbisection root: y = {point.y:.12f}")
    print(f"both attacks then succeed with probability {cheat_bob(point.y):.6f},")
    print(f"so the coin's bias over 1/2 is {point.bias:.6f} for either cheater")


if __name__ == "__main__":
    main()
