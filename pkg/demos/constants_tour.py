"""
Sharp constants in two forms
============================

Each affine constant is evaluated twice: once as the product of the
pieces it is built from, once in a simplified closed form.  The two must
agree to rounding.
"""

from affsob import sharp_constants as sc
from affsob.scalar_kernel import Params

P = Params(3, 2.0, 1.0, alpha=1.5)
for name in ("S_cal", "K_cal", "R_cal", "L_cal", "G_cal"):
    v = sc.affine_constant(name, P)
    print(f"{name:6s} defining={v.defining:.15g} simplified={v.simplified:.15g} gap={v.rel_gap:.1e}")

# at p = 2 the norm-dependent constant collapses to the Euclidean one
print("crs(3,2,1) =", sc.crs_constant(3, 2.0, 1.0))
print("bgl(3,1)   =", sc.bgl_constant(3, 1.0))

# p -> 1: the Gagliardo-Nirenberg constants fall onto the Sobolev one
s1 = sc.limit_p_to_1("S_cal", 3, 1.0)
for alpha in (0.5, 2.0):
    name = "G_cal" if alpha > 1 else "N_cal"
    lim = sc.limit_p_to_1(name, 3, 1.0, alpha)
    print(f"{name} limit {lim.value:.10f}  vs  S limit {s1.value:.10f}")
