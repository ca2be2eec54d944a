import numpy as np
import pytest

from conftest import write_rows
from dstls.signal import (
    IndexInterval,
    SampledSignal,
    SignalError,
    add_gaussian_noise,
    derive_seed,
    load_signal_csv,
    save_signal_csv,
)


def test_load_infers_period(tmp_path):
    p = tmp_path / "s.csv"
    write_rows(p, ["t", "v"], [(0, 20), (1, 20), (2, 21)])
    sig = load_signal_csv(p, "v")
    assert sig.period == 1.0
    assert sig.t0 == 0.0
    assert sig.values.tolist() == [20, 20, 21]


def test_load_rejects_uneven_spacing(tmp_path):
    p = tmp_path / "s.csv"
    write_rows(p, ["t", "v"], [(0, 20), (2, 20), (3, 20)])
    with pytest.raises(SignalError, match="uniform"):
        load_signal_csv(p, "v")


def test_load_rejects_single_row(tmp_path):
    p = tmp_path / "s.csv"
    write_rows(p, ["t", "v"], [(0, 20)])
    with pytest.raises(SignalError, match="fewer than 2 rows"):
        load_signal_csv(p, "v")


def test_load_rejects_missing_column(tmp_path):
    p = tmp_path / "s.csv"
    write_rows(p, ["t", "v"], [(0, 20), (1, 21)])
    with pytest.raises(SignalError, match="column"):
        load_signal_csv(p, "i")


def test_small_jitter_in_timestamps_is_tolerated(tmp_path):
    p = tmp_path / "s.csv"
    write_rows(p, ["t", "v"], [(0, 1), (1.0000001, 2), (2, 3)])
    assert load_signal_csv(p, "v").period == pytest.approx(1.0)


def test_save_load_round_trip(tmp_path, rng):
    sig = SampledSignal(3.5, 0.25, rng.normal(size=50))
    p = tmp_path / "s.csv"
    save_signal_csv(p, sig, "v")
    back = load_signal_csv(p, "v")
    np.testing.assert_array_equal(back.values, sig.values)
    assert back.t0 == sig.t0 and back.period == pytest.approx(sig.period, rel=1e-12)


def test_signal_is_immutable():
    sig = SampledSignal(0.0, 1.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        sig.values[0] = 5.0


def test_period_must_be_positive():
    with pytest.raises(SignalError):
        SampledSignal(0.0, 0.0, [1.0])


def test_interval_duration():
    sig = SampledSignal(0.0, 0.5, np.zeros(10))
    assert sig.duration(IndexInterval(2, 8)) == 3.0
    assert IndexInterval(2, 8).length == 6


def test_zero_sigma_is_identity():
    sig = SampledSignal(0.0, 1.0, [1.0, 2.0, 3.0])
    assert add_gaussian_noise(sig, 0.0, 7) is sig


def test_noise_statistics():
    n = 100_000
    sig = SampledSignal(0.0, 1.0, np.zeros(n))
    out = add_gaussian_noise(sig, 0.02, 1).values
    assert abs(out.mean()) <= 3 * 0.02 / np.sqrt(n)
    assert abs(out.std() / 0.02 - 1) < 0.02


def test_noise_is_deterministic_and_preserves_shape():
    sig = SampledSignal(2.0, 0.5, np.arange(20.0))
    a = add_gaussian_noise(sig, 0.1, 42)
    b = add_gaussian_noise(sig, 0.1, 42)
    np.testing.assert_array_equal(a.values, b.values)
    assert (a.t0, a.period, len(a)) == (sig.t0, sig.period, len(sig))


def test_distinct_seeds_give_distinct_noise():
    sig = SampledSignal(0.0, 1.0, np.zeros(100))
    for s in range(10):
        a = add_gaussian_noise(sig, 1.0, 2 * s).values
        b = add_gaussian_noise(sig, 1.0, 2 * s + 1).values
        assert not np.array_equal(a, b)


def test_negative_sigma_rejected():
    with pytest.raises(SignalError):
        add_gaussian_noise(SampledSignal(0.0, 1.0, [0.0]), -1.0, 0)


def test_derived_seeds_depend_on_every_key():
    base = derive_seed(1, 2, 3, 4).generate_state(2).tolist()
    for keys in [(0, 2, 3, 4), (1, 0, 3, 4), (1, 2, 0, 4), (1, 2, 3, 0)]:
        assert derive_seed(*keys).generate_state(2).tolist() != base
