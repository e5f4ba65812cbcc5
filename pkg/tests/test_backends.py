"""The compiled lane must be a drop-in, bit-identical replacement."""

import numpy as np
import pytest

from ulamadd import backends, process

pytestmark = pytest.mark.skipif(
    "compiled" not in backends.available_backends(),
    reason="compiled kernels not built",
)


def _both(call):
    with backends.use_backend("python"):
        a = call(backends.kernels())
    with backends.use_backend("compiled"):
        b = call(backends.kernels())
    return a, b


def _identical(a, b):
    if isinstance(a, tuple):
        return all(_identical(x, y) for x, y in zip(a, b, strict=True))
    return np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)


class TestManagement:
    def test_python_lane_always_available(self):
        assert "python" in backends.available_backends()

    def test_context_manager_switches_and_restores(self):
        before = backends.active_backend()
        with backends.use_backend("python"):
            assert backends.active_backend() == "python"
        assert backends.active_backend() == before

    def test_rejects_unknown_backend(self):
        with pytest.raises(ValueError):
            with backends.use_backend("fortran"):
                pass

    def test_kernel_surface(self):
        k = backends.kernels()
        for name in (
            "discrete_path",
            "discrete_ensemble_snapshots",
            "second_moment_forward",
            "continuized_path",
            "continuized_ensemble_snapshots",
        ):
            assert callable(getattr(k, name))


class TestBitIdentity:
    def test_discrete_path(self):
        for p, a, b in ((1.0, 1.0, 1.0), (0.3, 1.0, 1.0), (1.0, 2.0, 0.5)):
            got = _both(lambda k: k.discrete_path((1.0, 2.0), p, a, b, 500, 7, 0))
            assert _identical(*got)

    def test_discrete_ensemble_snapshots(self):
        grid = np.array([50, 200, 500], dtype=np.int64)
        for p in (1.0, 0.4):
            got = _both(
                lambda k: k.discrete_ensemble_snapshots(
                    (1.0,), p, 1.0, 1.0, grid, 40, 3, 0
                )
            )
            assert _identical(*got)

    def test_second_moment_forward(self):
        got = _both(lambda k: k.second_moment_forward((1.0, 3.0), 0.6, [10, 1000]))
        assert _identical(*got)

    def test_continuized_path(self):
        unit = (0.0, 1.0, 1.0, 1.0)
        got = _both(
            lambda k: k.continuized_path(
                (0.0,), (1.0,), 0.0, 200.0, 1.0, 1.0, unit, unit, 11, 0
            )
        )
        assert _identical(*got)

    def test_continuized_path_with_random_weights(self):
        rand = (1.0, 0.5, 2.0, 0.3)
        unit = (0.0, 1.0, 1.0, 1.0)
        got = _both(
            lambda k: k.continuized_path(
                (1.0, 2.0), (1.0, 4.0), 2.0, 150.0, 2.0, 1.0, rand, unit, 5, 0
            )
        )
        assert _identical(*got)

    def test_continuized_ensemble_snapshots(self):
        unit = (0.0, 1.0, 1.0, 1.0)
        got = _both(
            lambda k: k.continuized_ensemble_snapshots(
                (0.0,), (1.0,), 0.0, 100.0, 1.0, 1.0, unit, unit,
                [25.0, 100.0], 30, 9, 0
            )
        )
        assert _identical(*got)


class TestHighLevelDispatch:
    def test_simulate_discrete_matches_across_lanes(self):
        with backends.use_backend("python"):
            a = process.simulate_discrete([1.0], 0.7, 300, seed=13)
        with backends.use_backend("compiled"):
            b = process.simulate_discrete([1.0], 0.7, 300, seed=13)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.partial_sums, b.partial_sums)

    def test_simulate_continuized_matches_across_lanes(self):
        spec = process.ContinuizedSpec(alpha=1.5, beta=1.0)
        with backends.use_backend("python"):
            a = process.simulate_continuized(1.0, spec, 80.0, seed=2)
        with backends.use_backend("compiled"):
            b = process.simulate_continuized(1.0, spec, 80.0, seed=2)
        assert np.array_equal(a.jump_times, b.jump_times)
        assert np.array_equal(a.jump_values, b.jump_values)
