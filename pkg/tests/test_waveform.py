"""Staircase extraction, validation, and evaluation tests."""

import numpy as np
import pytest

from shmdual.penalty import LevelSet
from shmdual.waveform import (
    ExtractionError,
    StaircaseSignal,
    StaircaseViolation,
    eval_signal,
    extract,
    validate_staircase,
)

U2 = LevelSet.uniform(2)
U3 = LevelSet.uniform(3)


def sample(signal, n_nodes):
    nodes = np.linspace(0.0, np.pi, n_nodes)
    u = eval_signal(signal, nodes[:-1])
    return np.append(u, signal.levels[-1])


class TestSignalType:
    def test_rejects_structural_problems(self):
        with pytest.raises(ValueError):
            StaircaseSignal(levels=(), angles=())
        with pytest.raises(ValueError):
            StaircaseSignal(levels=(0.0, 1.0), angles=())
        with pytest.raises(ValueError):
            StaircaseSignal(levels=(0.0, 1.0), angles=(3.5,))  # beyond pi
        with pytest.raises(ValueError):
            StaircaseSignal(levels=(0.0, 1.0, 0.0), angles=(2.0, 1.0))  # not increasing


class TestEvalSignal:
    def test_constant(self):
        signal = StaircaseSignal(levels=(1.0,), angles=())
        assert eval_signal(signal, 0.0) == 1.0
        assert eval_signal(signal, 3.0) == 1.0

    def test_right_open_convention(self):
        signal = StaircaseSignal(levels=(0.0, 1.0), angles=(np.pi / 2,))
        assert eval_signal(signal, np.pi / 2) == 1.0
        assert eval_signal(signal, np.pi / 2 - 1e-9) == 0.0

    def test_domain(self):
        signal = StaircaseSignal(levels=(1.0,), angles=())
        with pytest.raises(ValueError):
            eval_signal(signal, np.pi)
        with pytest.raises(ValueError):
            eval_signal(signal, -1e-12)


class TestValidate:
    def test_adjacent_steps_pass(self):
        signal = StaircaseSignal(levels=(-1.0, 0.0, 1.0, 0.0), angles=(0.5, 1.5, 2.5))
        assert validate_staircase(signal, U3).ok

    def test_skipped_level_fails_at_index(self):
        signal = StaircaseSignal(levels=(-1.0, 1.0), angles=(1.0,))
        check = validate_staircase(signal, U3)
        assert not check.ok
        assert check.index == 0

    def test_bi_level_always_passes(self):
        signal = StaircaseSignal(levels=(-1.0, 1.0, -1.0), angles=(1.0, 2.0))
        assert validate_staircase(signal, U2).ok

    def test_foreign_level_fails(self):
        signal = StaircaseSignal(levels=(0.25,), angles=())
        check = validate_staircase(signal, U3)
        assert not check.ok and check.index == 0

    def test_repeated_level_fails(self):
        signal = StaircaseSignal(levels=(0.0, 0.0), angles=(1.0,))
        check = validate_staircase(signal, U3)
        assert not check.ok and check.index == 0


class TestExtract:
    def test_constant_zero(self):
        signal = extract(np.zeros(101), U3)
        assert signal.levels == (0.0,)
        assert signal.angles == ()

    def test_single_transition_at_midpoint(self):
        nodes = np.linspace(0.0, np.pi, 101)
        u = np.where(nodes < np.pi / 2, 0.0, 1.0)
        signal = extract(u, U3)
        assert signal.levels == (0.0, 1.0)
        assert abs(signal.angles[0] - np.pi / 2) <= np.pi / 100

    def test_snaps_noisy_samples(self):
        rng = np.random.default_rng(2)
        nodes = np.linspace(0.0, np.pi, 201)
        clean = np.where(nodes < 1.0, -1.0, 0.0)
        noisy = clean + rng.uniform(-0.2, 0.2, clean.size)
        signal = extract(noisy, U3)
        assert signal.levels == (-1.0, 0.0)

    def test_sample_off_grid_raises(self):
        u = np.zeros(51)
        u[10] = 0.6  # farther than half a gap (0.5) from both 0 and 1... not quite
        u[10] = 0.5 + 1e-6  # exactly past the midpoint towards 1 is still fine
        extract(u, U3, min_dwell=0.0)
        with pytest.raises(ExtractionError):
            bad = np.zeros(51)
            bad[3] = 1.7  # 0.7 from the nearest level
            extract(bad, U3)

    def test_roundtrip_at_all_nodes(self):
        rng = np.random.default_rng(7)
        nodes = np.linspace(0.0, np.pi, 400)
        # staircase-valid random walk over cells of ~13 nodes
        vals = U3.as_array()
        idx = 1
        u = np.empty(nodes.size)
        for c in range(0, nodes.size, 13):
            idx = int(np.clip(idx + rng.integers(-1, 2), 0, 2))
            u[c : c + 13] = vals[idx]
        signal = extract(u, U3, min_dwell=0.0)
        back = np.append(eval_signal(signal, nodes[:-1]), signal.levels[-1])
        np.testing.assert_array_equal(back, u)

    def test_idempotent(self):
        nodes = np.linspace(0.0, np.pi, 300)
        u = np.where(nodes < 1.1, 1.0, np.where(nodes < 2.2, 0.0, -1.0))
        first = extract(u, U3, min_dwell=1e-3)
        again = extract(sample(first, 300), U3, min_dwell=1e-3)
        assert first == again

    def test_merge_between_equal_levels_deletes(self):
        nodes = np.linspace(0.0, np.pi, 1001)
        u = np.zeros(nodes.size)
        u[(nodes >= 1.0) & (nodes < 1.004)] = 1.0  # ~1.3 grid cells wide
        signal = extract(u, U3, min_dwell=0.05)
        assert signal.levels == (0.0,)

    def test_merge_between_distinct_levels_raises_on_skip(self):
        nodes = np.linspace(0.0, np.pi, 1001)
        u = np.where(nodes < 1.5, -1.0, 1.0)
        u[(nodes >= 1.5) & (nodes < 1.504)] = 0.0  # short middle dwell
        with pytest.raises(StaircaseViolation) as err:
            extract(u, U3, min_dwell=0.05)
        assert err.value.index == 0

    def test_merge_absorbs_boundary_chatter(self):
        nodes = np.linspace(0.0, np.pi, 1001)
        u = np.where(nodes < 3.0, 0.0, 1.0)  # short trailing 1-dwell
        signal = extract(u, U3, min_dwell=0.2)
        assert signal.levels == (0.0,)
        u = np.where(nodes < 0.002, -1.0, 0.0)  # short leading -1-dwell
        signal = extract(u, U3, min_dwell=0.05)
        assert signal.levels == (0.0,)

    def test_merging_never_increases_switches(self):
        rng = np.random.default_rng(12)
        nodes = np.linspace(0.0, np.pi, 700)
        vals = U3.as_array()
        idx = 1
        u = np.empty(nodes.size)
        c = 0
        while c < nodes.size:
            width = int(rng.integers(1, 40))
            idx = int(np.clip(idx + rng.integers(-1, 2), 0, 2))
            u[c : c + width] = vals[idx]
            c += width
        raw = extract(u, U3, min_dwell=0.0)
        try:
            merged = extract(u, U3, min_dwell=0.08)
        except StaircaseViolation:
            return  # merging may legitimately refuse; covered elsewhere
        assert merged.switch_count <= raw.switch_count
        assert all(a != b for a, b in zip(merged.levels, merged.levels[1:]))
