import pytest

from flatcircle.errors import InvalidParams
from flatcircle.pipeline import default_template, run_pipeline
from flatcircle.rotation import preset


def test_stage_subset_skips_later_work(ctx):
    res = run_pipeline(default_template("2", ctx), preset("golden", 14),
                       6, ctx, depth=9, stages=("partition",))
    assert res.partitions
    assert res.scalings is None
    assert res.recurrence is None
    assert res.box is None


def test_tune_only(ctx):
    res = run_pipeline(default_template("2", ctx), preset("golden", 14),
                       6, ctx, depth=9, stages=())
    assert res.orbit is None
    assert res.params.c != ctx.mpf("0.5")


def test_depth_beyond_target_rejected(ctx):
    with pytest.raises(InvalidParams):
        run_pipeline(default_template("2", ctx), preset("golden", 8),
                     6, ctx, depth=12)


def test_full_run_is_consistent(small_run):
    assert set(small_run.partitions) == set(range(1, small_run.n_max + 1))
    assert len(small_run.flank_ratio_running_min()) == small_run.n_max
    assert small_run.scalings.n_max == small_run.n_max
    assert small_run.box is not None and small_run.frostman is not None


def test_pretuned_params_reused(ctx, small_run):
    res = run_pipeline(default_template("3", ctx), small_run.target,
                       3, ctx, depth=11, stages=(),
                       tuned=small_run.params)
    assert res.params.c == small_run.params.c
