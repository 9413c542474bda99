import numpy as np
import pytest

from mvintact.model import Hyperparams, MultiviewDataset, validate


def _ds(n=5):
    rng = np.random.default_rng(0)
    return MultiviewDataset.from_arrays([rng.normal(size=(n, 3)), rng.normal(size=(n, 2))],
                                        [1, -1, 1, -1, 1][:n])


def test_well_formed_dataset_has_no_violations():
    assert validate(_ds()) == []
    assert validate(_ds(), binary=True) == []


def test_short_view_is_reported_by_index():
    ds = _ds()
    bad = MultiviewDataset(views=(ds.views[0][:-1], ds.views[1]), labels=ds.labels)
    problems = validate(bad)
    assert len(problems) == 1
    assert "view 0" in problems[0]


def test_non_finite_entry_names_matrix_and_position():
    ds = _ds()
    X = ds.views[1].copy()
    X[3, 1] = np.nan
    problems = validate(MultiviewDataset(views=(ds.views[0], X), labels=ds.labels))
    assert len(problems) == 1
    assert "view 1" in problems[0] and "row 3" in problems[0] and "column 1" in problems[0]


def test_binary_mode_rejects_other_labels():
    ds = MultiviewDataset(views=_ds().views, labels=np.array([1, -1, 2, -1, 1]))
    assert validate(ds) == []
    assert len(validate(ds, binary=True)) == 1


def test_validate_is_pure():
    ds = _ds()
    X = ds.views[0].copy()
    X[0, 0] = np.inf
    bad = MultiviewDataset(views=(X, ds.views[1][:2]), labels=ds.labels)
    assert validate(bad) == validate(bad)
    assert len(validate(bad)) == 2


@pytest.mark.parametrize("kw", [dict(c=0), dict(c=-1), dict(d=0), dict(T=0), dict(alpha=-1),
                                dict(gamma=-0.1), dict(init_scale=0), dict(t_inf=0)])
def test_hyperparams_reject_invalid(kw):
    with pytest.raises(ValueError):
        Hyperparams(**kw)


def test_dimension_defaults_to_smallest_view():
    assert Hyperparams().resolved((8, 3, 5)).d == 3
    assert Hyperparams(d=7).resolved((8, 3, 5)).d == 7


def test_one_vs_rest_projection_keeps_features():
    ds = MultiviewDataset.from_arrays([np.eye(4)], [0, 1, 2, 1])
    b = ds.one_vs_rest(1)
    assert b.labels.tolist() == [-1, 1, -1, 1]
    assert b.views[0] is ds.views[0]
    assert ds.labels.tolist() == [0, 1, 2, 1]
