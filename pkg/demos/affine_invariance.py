"""
Invariance under the half-space affine group
============================================

Pull a function back by f(lam t, B x) for random lam > 0 and invertible B
and compare every functional with its transformation law.
"""

from affsob.functions import gaussian
from affsob.scalar_kernel import Params
from affsob.verifier import verify_invariance

rep = verify_invariance(gaussian(2, 1.1, [[0.7]]), Params(2, 1.5, 0.5, 2.0), count=5)
for row in rep.rows:
    print({k: f"{v:.1e}" for k, v in row.items() if k in rep.counted})
print("largest counted residual:", rep.max_residual)
