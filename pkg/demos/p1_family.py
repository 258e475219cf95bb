"""Walk the P^1 family in T*P^1: which twists of the zero section deform?

For each degree d the obstruction cocycle on the standard two-chart cover is
computed directly, then compared against the Lagrangian criterion.
"""

from coiso_quant.obstruction import lagrangian_criterion, obstruction_class
from coiso_quant.scenes import load_bundled


def main():
    print(f"{'d':>3}  {'cocycle':<10} {'obstruction':<12} {'lagrangian':<12} stability")
    for d in range(-3, 4):
        s = load_bundled(f"p1-in-t-star-p1-O({d})")
        obs = obstruction_class(s)
        lag = lagrangian_criterion(s)
        comp = obs.cocycle.components[(0, 1)][0]
        print(f"{d:>3}  {str(comp):<10} {obs.verdict:<12} {lag.verdict:<12} {obs.h1.stability}")
    print("\nOnly d = -1 (the square root of the canonical bundle) survives.")


if __name__ == "__main__":
    main()
