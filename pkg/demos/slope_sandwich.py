"""The pair 2x, 3x: single-word expansion rates range over [log 2, log 3].

The word-averaged exponent is their mean, (log 2 + log 3) / 2, at every
point.  The pressure curve must fall no faster than -log 3 and no slower
than -log 2, and its root must land between h / log 3 and h / log 2.
"""

from __future__ import annotations

import math

import numpy as np

from sgpressure import Scale, SetSample, heterogeneous_pair, pressure_curve, solve_bowen


def main() -> None:
    sys = heterogeneous_pair()
    Z = SetSample.grid(4096)
    scale = Scale(delta=0.05, N_schedule=tuple(range(1, 11)))
    curve = pressure_curve(sys, Z, t_grid=np.arange(0.0, 1.21, 0.2), scale=scale)
    print(f"sampled exponents: alpha = {curve.alpha_hat:.4f}, beta = {curve.beta_hat:.4f}")
    print(f"allowed slopes:    [{-math.log(3) - 0.02:.4f}, {-math.log(2) + 0.02:.4f}]")
    for t, p in zip(curve.t_grid, curve.values):
        print(f"  t = {t:.1f}   P = {p:+.5f}")
    print(f"slopes: {np.round(curve.slopes, 4).tolist()}")

    rep = solve_bowen(sys, Z, scale=scale)
    print(f"\nh = {rep.h_hat:.4f}, t* = {rep.t_star:.4f}, "
          f"h/log3 = {rep.h_hat / math.log(3):.4f}, h/log2 = {rep.h_hat / math.log(2):.4f}")


if __name__ == "__main__":
    main()
