"""One map, 3x mod 1 on the middle-third Cantor set.

With a single generator the averaged cocycle is an ordinary Birkhoff sum,
and the root of the pressure equation should match log 2 / log 3.  The
root is printed for each delta so the approach to the target is visible.
"""

from __future__ import annotations

import math

from sgpressure import Scale, SetSample, box_dimension, cantor_k1, solve_schedule
from sgpressure.boxdim import ball_sum_crossing


def main() -> None:
    sys = cantor_k1()
    Z = SetSample.cantor(10)
    rep = solve_schedule(sys, Z, [0.2, 0.1, 0.05], scale=Scale(N_schedule=tuple(range(1, 13))))
    for delta, t in sorted(rep.root_profile.items(), reverse=True):
        print(f"delta = {delta:<5}  t* = {t:.5f}")
    box = box_dimension(Z)
    print(f"\nbox-count slope   {box.slope:.5f}")
    print(f"ball-sum crossing {ball_sum_crossing(Z, 3.0**-2, 3.0**-7):.5f}")
    print(f"log 2 / log 3     {math.log(2) / math.log(3):.5f}")


if __name__ == "__main__":
    main()
