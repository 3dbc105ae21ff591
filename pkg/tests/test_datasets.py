import numpy as np
import pytest

from tlsfit import Dataset, ModelSpec
from tlsfit.datasets import (
    SCENARIOS,
    bundled_dataset_path,
    log_grid,
    read_dataset,
    scenario_dataset,
    simulate,
    write_dataset,
)
from tlsfit.errors import DatasetError, DomainError


def test_write_read_write_is_byte_identical(tmp_path, pillbox):
    data = scenario_dataset("electropolished", pillbox)
    data.meta["note"] = "x=y"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    pre = ["tool=tlsfit test", "seed=5"]
    write_dataset(data, a, preamble=pre)
    back = read_dataset(a)
    assert "seed" not in back.meta and back.meta["note"] == "x=y"
    write_dataset(back, b, preamble=pre)
    assert a.read_bytes() == b.read_bytes()
    np.testing.assert_array_equal(back.q, data.q)


def test_noise_free_matches_model(pillbox):
    spec = ModelSpec.from_name("interacting", SCENARIOS["anodized"]["params"])
    e = log_grid(1e3, 1e6, 7)
    data = simulate(spec, pillbox, e, 0.0)
    from tlsfit.model import model_q

    np.testing.assert_array_equal(data.q, model_q(spec, pillbox, e))


def test_seeded_noise_is_reproducible(pillbox):
    a = scenario_dataset("anodized", pillbox, seed=3)
    b = scenario_dataset("anodized", pillbox, seed=3)
    c = scenario_dataset("anodized", pillbox, seed=4)
    np.testing.assert_array_equal(a.q, b.q)
    assert not np.array_equal(a.q, c.q)


def test_noise_scale(pillbox):
    spec = ModelSpec.from_name("interacting", SCENARIOS["electropolished"]["params"])
    e = np.full(4000, 1e3)
    clean = simulate(spec, pillbox, e, 0.0).q
    noisy = simulate(spec, pillbox, e, 6.26e8, seed=1).q
    assert np.std(noisy - clean, ddof=1) == pytest.approx(6.26e8, rel=0.05, abs=0)


def test_grid_validation():
    with pytest.raises(DomainError):
        log_grid(1e6, 1e3, 10)
    with pytest.raises(DomainError):
        log_grid(1e3, 1e3, 10)


def test_parse_error_location(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("# temperature_K=1.5\ne_acc_V_per_m,q\n1000.0,2e10\n2000.0,oops\n")
    with pytest.raises(DatasetError, match=r":4: column 2 \(q\)"):
        read_dataset(p)


def test_emax_applied_on_read(tmp_path, pillbox):
    p = tmp_path / "d.csv"
    write_dataset(scenario_dataset("electropolished", pillbox), p)
    d = read_dataset(p, e_acc_max=1e4)
    assert d.mask.sum() == np.sum(d.e_acc <= 1e4)


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_bundled_dataset_matches_generator(name, pillbox):
    bundled = read_dataset(bundled_dataset_path(name))
    regenerated = scenario_dataset(name, pillbox)
    np.testing.assert_array_equal(bundled.e_acc, regenerated.e_acc)
    np.testing.assert_array_equal(bundled.q, regenerated.q)
    assert bundled.meta["model"] == "interacting"


def test_dataset_frozen():
    d = Dataset([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        d.q[0] = 5.0
