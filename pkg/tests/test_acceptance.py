"""End-to-end acceptance gate.

Every test here checks one headline property of the laboratory on the
production settings (512 bits; golden ratio to level 13, silver ratio to
level 6) and prints a PASS/FAIL line via the ``record`` fixture.  Most
geometric series carry a transient over the first few renormalization
levels, so decay fits are taken on the second half of each series.
"""

import filecmp
import math
import os

import mpmath

from flatcircle.circle import CirclePoint
from flatcircle.cli import main
from flatcircle.crossratio import (CrossRatioQuadruple, chain_audit, cr,
                                   poin)
from flatcircle.dimension import box_dimension, mass_bound_holds
from flatcircle.maps import RigidRotation
from flatcircle.partition import order_check, split_defect, validate_structure
from flatcircle.precision import PrecisionContext
from flatcircle.recurrence import W, verify_matrix_bounds
from flatcircle.rotation import final_bracket
from flatcircle.stats import last_quarter_variation, log_decay_fit

from conftest import SETTINGS

DEGENERATE_ELLS = ("1.5", "2")
NONDEGENERATE_ELLS = ("3", "4")
TARGETS = ("golden", "silver")


def tail_fit(values, ns):
    half = len(ns) // 2
    return log_decay_fit(values[half:], ns[half:])


def taus_of(res):
    s = res.scalings
    return [float(s.tau[n]) for n in s.ns()], list(s.ns())


def test_combinatorial_exactness(lab, record):
    """Partition counts, splitting rule, and circular order are exact."""
    ok = True
    notes = []
    for target in TARGETS:
        res = lab.run("2", target)
        with res.ctx:
            for n, part in res.partitions.items():
                ok &= len(part.long_gaps()) == res.conv.q[n + 1]
                ok &= len(part.short_gaps()) == res.conv.q[n]
            worst = mpmath.mpf(0)
            for n in range(1, res.n_max):
                pn, pn1 = res.partitions[n], res.partitions[n + 1]
                ok &= validate_structure(pn, pn1, res.conv).ok
                worst = max(worst, split_defect(pn, pn1, res.preims,
                                                res.conv))
            ok &= worst == 0
            rho_lo, _ = final_bracket(res.target, SETTINGS[target]["depth"])
            ok &= order_check(res.orbit, rho_lo, count=500)
        notes.append(f"{target}: defect={float(worst):.1e}")
    assert record("combinatorial exactness (splitting + order, 500 iterates)",
                  ok, "; ".join(notes))


def test_degenerate_geometry_decays(lab, record):
    """For ell < 2 + eps the scalings tau_n and alpha_n decay to 0

    exponentially fast (fitted on the second half of the levels)."""
    ok = True
    notes = []
    for ell in DEGENERATE_ELLS:
        for target in TARGETS:
            res = lab.run(ell, target)
            taus, ns = taus_of(res)
            alphas = [float(res.scalings.alpha[n]) for n in ns]
            tf = tail_fit(taus, ns)
            af = tail_fit(alphas, ns)
            good = (tf.slope < -0.1 and tf.r2 > 0.9 and
                    af.slope < -0.1 and af.r2 > 0.9)
            ok &= good
            notes.append(f"l={ell}/{target}: tau slope {tf.slope:+.2f} "
                         f"r2 {tf.r2:.3f}")
    assert record("degenerate regime: tau_n, alpha_n -> 0 exponentially "
                  "(slope < -0.1, r2 > 0.9 on tail)", ok, "; ".join(notes))


def test_nondegenerate_geometry_bounded(lab, record):
    """For ell >= 3 the scalings stay bounded away from zero: the late

    minimum keeps at least half of the early minimum."""
    ok = True
    notes = []
    for ell in NONDEGENERATE_ELLS:
        for target in TARGETS:
            taus, ns = taus_of(lab.run(ell, target))
            half = len(taus) // 2
            early, late = min(taus[:half]), min(taus[half:])
            good = late >= 0.5 * early and min(taus) > 0.1
            ok &= good
            notes.append(f"l={ell}/{target}: early {early:.3f} "
                         f"late {late:.3f}")
    assert record("nondegenerate regime: tau_n bounded below "
                  "(late min >= half of early min, min > 0.1)",
                  ok, "; ".join(notes))


def test_matrix_bounds(record):
    """The transition-matrix norm estimates hold on a dense parameter

    grid, and rho(W) matches its closed form."""
    rho = W.spectral_radius()
    rep = verify_matrix_bounds(3, samples=1000)
    ok = abs(rho - mpmath.mpf("0.8791528696")) < 1e-6 and rep.ok
    assert record("matrix bounds: rho(W) = 0.8791529 +- 1e-6, norm bounds "
                  "hold on 1000-sample grid",
                  ok, f"rho={float(rho):.10f}, u1u2={float(rep.worst_u1u2):.4f}, "
                      f"u2u2={float(rep.worst_u2u2):.4f}")


def test_recursion_residuals(lab, record):
    """At ell = 3 (golden) the nu-recurrence residuals settle down and

    the envelope matrix products contract geometrically."""
    rec = lab.run("3").recurrence
    res_ok = all(mpmath.isfinite(v) for v in rec.residuals.values())
    fit = rec.product_norm_fit
    ok = (res_ok and mpmath.isfinite(rec.k1) and
          rec.residual_variation < 0.2 and
          fit.slope < -0.1 and fit.r2 > 0.99)
    assert record("recurrence at l=3: residuals stable (variation < 20%), "
                  "matrix products contract",
                  ok, f"variation={rec.residual_variation:.3f}, "
                      f"k1={float(rec.k1):.3f}, "
                      f"product slope={fit.slope:+.3f} r2={fit.r2:.4f}")


def test_gap_geometry(lab, record):
    """Max gap lengths decay exponentially at every ell, and the

    gap-to-preimage comparability statistic stabilizes."""
    ok = True
    notes = []
    for ell in DEGENERATE_ELLS + NONDEGENERATE_ELLS:
        for target in TARGETS:
            res = lab.run(ell, target)
            with res.ctx:
                gaps = [float(res.partitions[n].max_gap_length())
                        for n in sorted(res.partitions)]
            fit = tail_fit(gaps, sorted(res.partitions))
            running = [float(v) for v in res.flank_ratio_running_min()]
            var = last_quarter_variation(running)
            good = fit.slope < -0.2 and fit.r2 > 0.9 and var < 0.05
            ok &= good
            if not good or target == "golden":
                notes.append(f"l={ell}/{target}: slope {fit.slope:+.2f} "
                             f"r2 {fit.r2:.3f} flank_ratio-var {var:.3f}")
    assert record("gap geometry: max gaps decay exponentially, flank_ratio "
                  "running min stabilizes", ok, "; ".join(notes))


def cantor_segments(depth: int):
    segs = [(0.0, 1.0)]
    for _ in range(depth):
        segs = [piece for lo, hi in segs
                for piece in ((lo, lo + (hi - lo) / 3),
                              (hi - (hi - lo) / 3, hi))]
    return segs


def test_dimension_estimates(lab, record):
    """Box counting reproduces the middle-thirds dimension, the attractor

    carries a Frostman measure, and the dimension grows with ell."""
    oracle = box_dimension(cantor_segments(8))
    cantor_ok = (abs(oracle.estimate - math.log(2) / math.log(3)) < 0.05 and
                 oracle.fit.r2 > 0.99)
    res3, res2 = lab.run("3"), lab.run("2")
    fr = res3.frostman
    frostman_ok = fr.ok and fr.alpha > 0 and fr.max_mass_ratio <= 1
    mass_ok = mass_bound_holds(res3.tree)
    order_ok = res3.box.estimate > res2.box.estimate
    ok = cantor_ok and frostman_ok and mass_ok and order_ok
    assert record("dimension: Cantor oracle within 0.05, Frostman measure "
                  "at l=3, box(l=3) > box(l=2)",
                  ok, f"cantor={oracle.estimate:.4f}, alpha={fr.alpha:.3f}, "
                      f"box3={res3.box.estimate:.4f} box2={res2.box.estimate:.4f}")


def test_distortion_invariants(small_map, record):
    """Cross ratios are exactly preserved by rotations and drift only

    boundedly along diffeomorphic chains of the flat map."""
    ctx = PrecisionContext(bits=128)

    def pt(x):
        return CirclePoint.make(x, ctx)

    with ctx:
        q = CrossRatioQuadruple(pt("0.1"), pt("0.25"), pt("0.3"), pt("0.45"))
        rot = RigidRotation("0.381966", ctx)
        base_cr, base_poin = cr(q), poin(q)
        worst = mpmath.mpf(0)
        step = q
        for _ in range(50):
            step = step.map_forward(rot)
            worst = max(worst, abs(mpmath.ln(cr(step)) - mpmath.ln(base_cr)))
        one = q.map_forward(rot)
        invariant = (abs(cr(one) - base_cr) < 1e-20 and
                     abs(poin(one) - base_poin) < 1e-20)
        rigid_ok = worst < mpmath.mpf(2) ** -110
    m = small_map
    with m.ctx:
        left = m.flat.right.value + mpmath.mpf("0.02")
        q0 = CrossRatioQuadruple(
            CirclePoint.make(left, m.ctx),
            CirclePoint.make(left + mpmath.mpf("0.005"), m.ctx),
            CirclePoint.make(left + mpmath.mpf("0.010"), m.ctx),
            CirclePoint.make(left + mpmath.mpf("0.015"), m.ctx))
        audit = chain_audit(m, q0, 3)
        chain_ok = (audit.log_ratios[0] == 0 and
                    mpmath.isfinite(audit.max_cumulative))
    ok = rigid_ok and invariant and chain_ok
    assert record("cross-ratio invariants: zero rigid drift (< 2^-110), "
                  "bounded flat-chain drift",
                  ok, f"rigid drift={float(worst):.2e}, "
                      f"chain max={float(audit.max_cumulative):.3f}")


CLI_CONFIG = """
[map]
b = 0.1
[run]
ells = 2
target = golden
target_length = 14
n_max = 6
depth = 9
precision = 128
[output]
dir = {out}
"""


def test_reproducibility(tmp_path, record):
    """Two independent CLI runs of the same experiment produce

    byte-identical artifacts."""
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        cfg = tmp_path / f"exp_{tag}.ini"
        cfg.write_text(CLI_CONFIG.format(out=out))
        assert main(["--config", str(cfg), "run-all"]) == 0
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    ok = names == sorted(os.listdir(outs[1]))
    differing = []
    for name in names:
        if not filecmp.cmp(outs[0] / name, outs[1] / name, shallow=False):
            differing.append(name)
            ok = False
    assert record("reproducibility: independent CLI runs byte-identical",
                  ok, f"{len(names)} files" +
                      (f", differ: {differing}" if differing else ""))
