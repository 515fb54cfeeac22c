"""
L_p centroid bodies of random polygons
======================================

vol(Gamma_p K) / vol(K) is at least one, with equality on ellipses.
"""

import math

import numpy as np

from affsob.convex_geometry import Ellipsoid, Polygon, bp_check, random_symmetric_polygon

rng = np.random.Generator(np.random.Philox(key=7))
for p in (1.0, 2.0, 3.0):
    ratios = [bp_check(random_symmetric_polygon(rng), p)["ratio"] for _ in range(25)]
    print(f"p={p:g}: min ratio over 25 polygons {min(ratios):.6f}")

square = Polygon([[1, 1], [-1, 1], [-1, -1], [1, -1]])
print("square, p=2:", bp_check(square, 2.0)["ratio"], "expected", math.pi / 3)
print("ellipse, p=2:", bp_check(Ellipsoid([[2.0, 0.5], [0.0, 0.7]]), 2.0)["ratio"])
