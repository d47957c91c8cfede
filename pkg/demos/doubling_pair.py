"""Walk through the doubling pair: exponents, entropy, the pressure curve and its root.

Both maps expand by exactly 2, so every Lyapunov value is log 2, the
pressure curve is the line (1 - t) log 2 and the root sits at t = 1.
"""

from __future__ import annotations

import math

import numpy as np

from sgpressure import (Scale, SetSample, box_dimension, doubling_pair, lyapunov_profile,
                        pressure_curve, solve_bowen)


def main() -> None:
    sys = doubling_pair()
    Z = SetSample.grid(4096)

    prof = lyapunov_profile(sys, 0.3, range(1, 11))
    print(f"lambda_n(0.3), n = 1..10: {np.round(prof.values, 6).tolist()}")
    print(f"log 2 = {math.log(2):.6f}")

    scale = Scale(delta=0.05)
    curve = pressure_curve(sys, Z, t_grid=np.linspace(0, 2, 5), scale=scale)
    print("\n  t      P(-t log a)   (1 - t) log 2")
    for t, p in zip(curve.t_grid, curve.values):
        print(f"  {t:4.2f}   {p:+.5f}      {(1 - t) * math.log(2):+.5f}")
    print(f"slopes: {np.round(curve.slopes, 4).tolist()}")

    rep = solve_bowen(sys, Z, scale=scale)
    print(f"\nentropy estimate h = {rep.h_hat:.4f}")
    print(f"root t* = {rep.t_star:.4f} (bracket {rep.bracket[0]:.4f} .. {rep.bracket[1]:.4f})")
    print(f"box-count slope of the sample = {box_dimension(Z).slope:.4f}")


if __name__ == "__main__":
    main()
