import numpy as np
import pytest

from affsob import verifier as V
from affsob.functions import gaussian, sobolev_extremal, entropy_extremal, gn_extremal
from affsob.scalar_kernel import Params

B2 = [[1.7]]


def test_sobolev_extremal_gives_equality_in_a_skew_frame():
    P = Params(2, 1.5, 1.0)
    rep = V.verify_sobolev(sobolev_extremal(2, 1.5, 1.0, 0.6, B2, [0.3]), P)
    assert rep.passed and rep.equal_within(5e-3)


def test_gaussian_is_strictly_inside():
    rep = V.verify_sobolev(gaussian(2, 0.8, B2), Params(2, 2.0, 1.0))
    assert rep.passed and rep.ratio > 1 + 1e-3


def test_gn_extremal_equality_below_the_endpoint():
    P = Params(2, 2.0, 1.0, 0.5)
    rep = V.verify_gn(gn_extremal(2, 2.0, 1.0, 0.5, 1.3, B2), P)
    assert rep.equal_within(1e-2)


def test_entropy_extremal_has_zero_deficit():
    rep = V.verify_entropy(entropy_extremal(2, 2.0, 1.0, 0.9, B2), Params(2, 2.0, 1.0))
    assert abs(rep.deficit) < 1e-2


def test_report_serialization_keys():
    rep = V.verify_sobolev(gaussian(2), Params(2, 2.0, 1.0))
    d = rep.to_dict()
    assert set(d) == {"inequality", "params", "digest", "lhs", "rhs", "ratio", "deficit",
                      "err_estimate", "tolerance", "pass", "notes", "extras"}
    assert d["ratio"] == pytest.approx(d["rhs"] / d["lhs"])
    assert d["extras"]["constant"] > 0


def test_injected_constant_fault_is_detected():
    cfg = V.SuiteConfig(ns=(2,), ps=(2.0,), as_=(1.0,), alphas=(0.5,),
                        constant_faults=(("S_cal", 1.01),))
    rep = V.run_suite(cfg)
    bad = [r for r in rep.rows if not r.ok]
    assert rep.failures > 0
    assert any("sobolev_extremal|sobolev" in r.key for r in bad)
    assert all("S_cal" in r.error for r in bad)
    # the fault does not leak out of the run
    assert V.verify_sobolev(sobolev_extremal(2, 2.0, 1.0), Params(2, 2.0, 1.0)).equal_within(5e-3)


def test_clean_suite_passes_and_is_sorted():
    rep = V.run_suite(V.SuiteConfig(ns=(2,), ps=(1.5,), as_=(0.0,), alphas=(0.5,)))
    assert rep.failures == 0
    keys = [r.key for r in rep.rows]
    assert keys == sorted(keys)
    fams = {row["family"] for row in rep.csv_rows()}
    assert "gaussian" in fams and "sobolev_extremal" in fams


def test_battery_skips_the_gn_endpoint():
    # n=2, p=1.5, a=1: alpha_max = 2, where the GN exponent degenerates to 1
    fams = [fam for fam, _, _ in V.battery(2, 1.5, 1.0, alphas=(0.5, 2.0))]
    assert "gn_b_extremal(alpha=0.5)" in fams
    assert not any("alpha=2.0" in fam for fam in fams)


def test_battery_is_reproducible():
    a = V.battery(3, 2.0, 1.0, seed=5)
    b = V.battery(3, 2.0, 1.0, seed=5)
    c = V.battery(3, 2.0, 1.0, seed=6)
    assert [f.digest() for _, f, _ in a] == [f.digest() for _, f, _ in b]
    assert [f.digest() for _, f, _ in a] != [f.digest() for _, f, _ in c]


def test_random_affine_maps_are_well_conditioned():
    rng = np.random.default_rng(0)
    for n in (2, 3, 4):
        lam, B = V.random_gl_plus(n, rng, spread=1.6)
        sv = np.linalg.svd(B, compute_uv=False)
        assert 1 / 1.6 <= lam <= 1.6
        assert sv.min() >= 1 / 1.6 - 1e-12 and sv.max() <= 1.6 + 1e-12


def test_invariance_small_run():
    rep = V.verify_invariance(gaussian(2, 1.0, B2), Params(2, 1.5, 0.5, 2.0), count=3)
    assert rep.passed, rep.to_dict()
    assert len(rep.rows) == 3


def test_p1_mollified_ratio_tends_to_one():
    rep = V.verify_p1_mollified(2, 0.0)
    assert abs(rep.ratio - 1) < 2e-2
