"""
Equality at extremals, strictness elsewhere
===========================================

The Sobolev extremal in a skewed frame attains the sharp constant; a
Gaussian in the same frame does not.
"""

import numpy as np

from affsob.functions import gaussian, sobolev_extremal
from affsob.scalar_kernel import Params
from affsob.verifier import verify_sobolev, verify_stronger

n, p, a = 3, 2.0, 1.0
lam, B, x0 = 0.8, np.array([[1.2, 0.4], [-0.3, 0.9]]), [0.2, -0.1]
P = Params(n, p, a)

ext = verify_sobolev(sobolev_extremal(n, p, a, lam, B, x0), P)
print("extremal: lhs", ext.lhs, "rhs", ext.rhs, "ratio", ext.ratio)

g = verify_sobolev(gaussian(n, lam, B, x0), P)
print("gaussian: ratio", g.ratio)

# the affine energy sits below the Euclidean gradient norm
s = verify_stronger(gaussian(n, lam, B, x0), P)
print("E_p =", s.lhs, "<= |grad_x f| =", s.rhs)
