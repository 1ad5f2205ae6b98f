import pytest

from fleetmarket.model import SIGNAL_CATALOG, SignalDefinition, SignalSample


def test_catalog_has_twelve_unique_entries():
    assert len(SIGNAL_CATALOG) == 12
    assert all(key == sig.signal_id for key, sig in SIGNAL_CATALOG.items())


def test_catalog_ids_are_snake_case_tokens():
    for signal_id in SIGNAL_CATALOG:
        assert signal_id == signal_id.lower()
        assert " " not in signal_id


def test_continuous_ranges_ordered():
    for sig in SIGNAL_CATALOG.values():
        lo, hi = sig.valid_range
        assert lo < hi


def test_discrete_signals_enumerate_labels():
    wiper = SIGNAL_CATALOG["wiper_state"]
    assert wiper.is_discrete
    assert wiper.enum_labels is not None and len(wiper.enum_labels) >= 2
    assert wiper.valid_range == (0.0, float(len(wiper.enum_labels) - 1))


def test_bad_signal_id_rejected():
    with pytest.raises(ValueError):
        SignalDefinition("Engine-Speed", "x", "rpm", "continuous", (0.0, 1.0))


def test_inverted_range_rejected():
    with pytest.raises(ValueError):
        SignalDefinition("bad_range", "x", "rpm", "continuous", (5.0, 1.0))


def test_discrete_needs_two_labels():
    with pytest.raises(ValueError):
        SignalDefinition("one_label", "x", "state", "discrete-enum", (0.0, 0.0), ("only",))


def test_sample_position_bounds():
    SignalSample(0, 1.0, (90.0, 180.0))
    with pytest.raises(ValueError):
        SignalSample(0, 1.0, (90.5, 0.0))
    with pytest.raises(ValueError):
        SignalSample(0, 1.0, (0.0, -180.5))


def test_sample_without_position_allowed():
    s = SignalSample(1000, 2.5)
    assert s.position is None
