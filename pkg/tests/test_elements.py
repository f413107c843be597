import numpy as np
import pytest

from pmono import (
    CapacitorAdmittance,
    DiagonalOperator,
    DimensionError,
    DiodeAdmittance,
    DiodeImpedance,
    Grid,
    InductorImpedance,
    LawError,
    ParallelRCImpedance,
    PeriodicSignal,
    PwlResistor,
    ResistorAdmittance,
    ResistorImpedance,
    SignalBundle,
    diagonal_resolvent,
    forward_eval,
    inner_product,
    offset_resolvent,
)
from pmono.elements import (
    dense_resolvent_matrix,
    resolvent_signal,
    smoothed_diode_admittance,
    smoothed_diode_impedance,
)
from pmono.signal import difference_spectrum

GRID = Grid(200, 1e-4)


def sig(values):
    return PeriodicSignal(GRID, np.broadcast_to(values, (GRID.samples,)).astype(float))


class TestDiodeResolvents:
    def test_impedance_is_relu(self):
        assert np.all(resolvent_signal(DiodeImpedance(), 0.005, sig(-2.0)).values == 0.0)
        assert np.all(resolvent_signal(DiodeImpedance(), 0.005, sig(3.0)).values == 3.0)

    def test_impedance_independent_of_step(self):
        rng = np.random.default_rng(0)
        x = PeriodicSignal(GRID, rng.normal(size=GRID.samples))
        a = resolvent_signal(DiodeImpedance(), 0.005, x).values
        b = resolvent_signal(DiodeImpedance(), 1.0, x).values
        assert np.array_equal(a, b)

    def test_admittance_is_mirrored_relu(self):
        assert np.all(resolvent_signal(DiodeAdmittance(), 0.1, sig(2.0)).values == 0.0)
        assert np.all(resolvent_signal(DiodeAdmittance(), 0.1, sig(-3.0)).values == -3.0)
        assert np.all(resolvent_signal(DiodeAdmittance(), 0.1, sig(0.0)).values == 0.0)

    def test_inverse_pair_consistency(self):
        # for i > 0 the impedance gives v = 0, and the admittance graph at
        # v = 0 admits that current: its resolvent maps 0 + sigma*i back to 0
        i = sig(0.75)
        v = forward_eval(DiodeImpedance(), i)
        assert v is not None and np.all(v.values == 0.0)
        back = resolvent_signal(DiodeAdmittance(), 0.37, sig(0.0 + 0.37 * 0.75))
        assert np.all(back.values == 0.0)


class TestPwl:
    def test_linear_resistor_closed_form(self):
        law = PwlResistor(((-1.0, -1000.0), (1.0, 1000.0)))
        assert law.resolvent(0.005, 6.0) == pytest.approx(1.0, rel=1e-14)

    def test_relu_curve(self):
        law = PwlResistor(((-1.0, 0.0), (0.0, 0.0), (1.0, 1.0)))
        assert law.resolvent(1.0, 4.0) == pytest.approx(2.0)
        assert law.resolvent(1.0, -4.0) == pytest.approx(-4.0)

    def test_matches_ideal_diode(self):
        # the ideal diode impedance graph is itself piecewise linear
        law = PwlResistor(((0.0, -1.0), (0.0, 0.0), (1.0, 0.0)))
        rng = np.random.default_rng(1)
        x = rng.normal(size=500)
        assert np.allclose(law.resolvent(0.2, x), np.maximum(x, 0.0), atol=1e-15)

    def test_rejects_decreasing_curves(self):
        with pytest.raises(LawError):
            PwlResistor(((0.0, 0.0), (1.0, -1.0)))
        with pytest.raises(LawError):
            PwlResistor(((0.0, 0.0), (-1.0, 1.0)))
        with pytest.raises(LawError):
            PwlResistor(((0.0, 0.0), (0.0, 0.0)))
        with pytest.raises(LawError):
            PwlResistor(((0.0, 0.0),))

    def test_forward_detects_multivalued_points(self):
        law = PwlResistor(((0.0, -1.0), (0.0, 0.0), (1.0, 0.0)))
        assert law.forward(np.array([0.0]), GRID) is None  # vertical segment
        assert law.forward(np.array([-0.5]), GRID) is None  # outside the domain
        out = law.forward(np.array([0.5, 2.0]), GRID)
        assert np.allclose(out, [0.0, 0.0])

    def test_forward_extrapolates_end_slopes(self):
        law = PwlResistor(((-1.0, -2.0), (1.0, 2.0)))
        out = law.forward(np.array([-3.0, 3.0]), GRID)
        assert np.allclose(out, [-6.0, 6.0])

    def test_swapped_inverts_the_graph(self):
        law = PwlResistor(((-1.0, -3.0), (2.0, 6.0)))
        inv = law.swapped()
        assert inv.forward(np.array([6.0]), GRID)[0] == pytest.approx(2.0)

    def test_smoothed_diode_curves(self):
        eps = 1e-6
        z = smoothed_diode_impedance(eps)
        assert z.forward(np.array([2.0]), GRID)[0] == pytest.approx(2.0 * eps)
        assert z.forward(np.array([-2.0]), GRID)[0] == pytest.approx(-2.0 / eps)
        y = smoothed_diode_admittance(eps)
        assert y.forward(np.array([-2.0]), GRID)[0] == pytest.approx(-2.0 * eps)
        assert y.forward(np.array([2.0]), GRID)[0] == pytest.approx(2.0 / eps)


class TestParallelRC:
    def test_dc_closed_form_and_dense_oracle(self):
        law = ParallelRCImpedance(1000.0, 10e-6)
        out = resolvent_signal(law, 0.005, sig(1.0))
        assert np.allclose(out.values, 1.0 / 6.0, atol=1e-12)
        dense = dense_resolvent_matrix(law, 0.005, GRID)
        assert np.allclose(dense @ np.ones(GRID.samples), 1.0 / 6.0, atol=1e-9)

    def test_tiny_step_is_identity(self):
        law = ParallelRCImpedance(1000.0, 10e-6)
        rng = np.random.default_rng(4)
        x = rng.normal(size=GRID.samples)
        out = law.resolvent(1e-12, x, GRID)
        assert np.max(np.abs(out - x)) <= 1e-6 * np.max(np.abs(x))

    def test_sinusoid_matches_circulant_eigenvalue(self):
        resistance, capacitance, step = 1000.0, 10e-6, 0.005
        law = ParallelRCImpedance(resistance, capacitance)
        bin_index = 2  # 100 Hz on this grid
        omega = 2 * np.pi * bin_index / (GRID.samples * GRID.dt)
        lam = (1.0 - np.exp(-1j * omega * GRID.dt)) / GRID.dt
        gain = 1.0 / (1.0 + step * resistance / (resistance * capacitance * lam + 1.0))
        t = np.arange(GRID.samples) * GRID.dt
        x = np.exp(1j * omega * t)
        expected = np.real(gain * x)
        out = law.resolvent(step, np.real(x), GRID)
        assert np.allclose(out, expected, atol=1e-9)

    def test_spectral_and_dense_routes_agree(self):
        law = ParallelRCImpedance(470.0, 3.3e-6)
        dense = dense_resolvent_matrix(law, 0.01, GRID)
        rng = np.random.default_rng(8)
        x = rng.normal(size=GRID.samples)
        spectral = law.resolvent(0.01, x, GRID)
        assert np.linalg.norm(spectral - dense @ x) <= 1e-9 * np.linalg.norm(x)


class TestCapacitorInductor:
    @pytest.mark.parametrize(
        "law", [CapacitorAdmittance(10e-6), InductorImpedance(0.05)]
    )
    def test_constant_passes_through(self, law):
        out = resolvent_signal(law, 0.25, sig(2.5))
        assert np.allclose(out.values, 2.5, atol=1e-12)

    @pytest.mark.parametrize("law", [CapacitorAdmittance(0.0), InductorImpedance(0.0)])
    def test_zero_parameter_is_identity(self, law):
        rng = np.random.default_rng(6)
        x = rng.normal(size=GRID.samples)
        assert np.array_equal(law.resolvent(0.8, x, GRID), x)

    def test_sinusoid_gain(self):
        capacitance, step = 4.7e-6, 0.02
        law = CapacitorAdmittance(capacitance)
        lam = difference_spectrum(GRID)[5]
        gain = 1.0 / (1.0 + step * capacitance * lam)
        t = np.arange(GRID.samples) * GRID.dt
        x = np.exp(2j * np.pi * 5 * t / GRID.period)
        out = law.resolvent(step, np.real(x), GRID)
        assert np.allclose(out, np.real(gain * x), atol=1e-10)

    def test_dense_route_agrees(self):
        law = InductorImpedance(0.1)
        dense = dense_resolvent_matrix(law, 0.05, GRID)
        rng = np.random.default_rng(12)
        x = rng.normal(size=GRID.samples)
        assert np.linalg.norm(law.resolvent(0.05, x, GRID) - dense @ x) <= 1e-9 * np.linalg.norm(x)

    def test_forward_of_constant_vanishes(self):
        const = sig(4.2)
        out = forward_eval(CapacitorAdmittance(1e-5), const)
        assert np.allclose(out.values, 0.0, atol=1e-12)


class TestDiagonalOperator:
    def test_channelwise_relu(self):
        op = DiagonalOperator((DiodeImpedance(),), "impedance")
        grid = Grid(4, 1.0)
        z = SignalBundle(grid, np.array([[-1.0, 2.0, -3.0, 4.0]]))
        out = diagonal_resolvent(op, 0.1, z)
        assert np.array_equal(out.values, [[0.0, 2.0, 0.0, 4.0]])

    def test_empty_block(self):
        op = DiagonalOperator((), "admittance")
        grid = Grid(4, 1.0)
        out = diagonal_resolvent(op, 0.1, SignalBundle.empty(grid))
        assert out.channel_count == 0

    def test_mixed_roles_rejected_at_construction(self):
        with pytest.raises(LawError):
            DiagonalOperator((DiodeAdmittance(),), "impedance")
        with pytest.raises(LawError):
            DiagonalOperator((InductorImpedance(0.1),), "admittance")

    def test_per_channel_independence(self):
        op = DiagonalOperator(
            (DiodeImpedance(), DiodeAdmittance()), ("impedance", "admittance")
        )
        grid = Grid(4, 1.0)
        ones = SignalBundle(grid, np.ones((2, 4)))
        out = diagonal_resolvent(op, 0.3, ones)
        assert np.all(out.values[0] == 1.0)
        assert np.all(out.values[1] == 0.0)

    def test_channel_count_mismatch(self):
        op = DiagonalOperator((DiodeImpedance(),), "impedance")
        grid = Grid(4, 1.0)
        with pytest.raises(DimensionError):
            diagonal_resolvent(op, 0.1, SignalBundle(grid, np.ones((2, 4))))


class TestOffsetResolvent:
    def test_zero_offset_matches_plain(self):
        op = DiagonalOperator((ResistorImpedance(210.0),), "impedance")
        rng = np.random.default_rng(13)
        z = SignalBundle(GRID, rng.normal(size=(1, GRID.samples)))
        zero = SignalBundle(GRID, np.zeros((1, GRID.samples)))
        a = offset_resolvent(op, 0.01, z, zero)
        b = diagonal_resolvent(op, 0.01, z)
        assert np.array_equal(a.values, b.values)

    def test_zero_law_shifts_by_step_times_offset(self):
        op = DiagonalOperator((ResistorImpedance(0.0),), "impedance")
        grid = Grid(8, 0.5)
        z = SignalBundle(grid, np.full((1, 8), 2.0))
        offset = SignalBundle(grid, np.full((1, 8), 3.0))
        out = offset_resolvent(op, 0.25, z, offset)
        assert np.allclose(out.values, 2.0 + 0.25 * 3.0)

    def test_resistor_offset_satisfies_shifted_inclusion(self):
        resistance, step, s, b = 50.0, 0.1, 2.0, 3.0
        op = DiagonalOperator((ResistorImpedance(resistance),), "impedance")
        grid = Grid(8, 0.5)
        z = SignalBundle(grid, np.full((1, 8), s))
        offset = SignalBundle(grid, np.full((1, 8), b))
        x = offset_resolvent(op, step, z, offset).values[0, 0]
        assert x == pytest.approx((s + step * b) / (1.0 + step * resistance), rel=1e-14)
        # x solves x + step*(R x - b) = s
        assert x + step * (resistance * x - b) == pytest.approx(s, rel=1e-14)


class TestForwardEval:
    def test_resistor(self):
        out = forward_eval(ResistorImpedance(2.0), sig(3.0))
        assert np.all(out.values == 6.0)

    def test_diode_multivalued_sample(self):
        values = np.ones(GRID.samples)
        values[7] = 0.0
        assert forward_eval(DiodeImpedance(), PeriodicSignal(GRID, values)) is None

    def test_parallel_rc_forward_matches_resolvent_identity(self):
        law = ParallelRCImpedance(820.0, 2.2e-6)
        rng = np.random.default_rng(14)
        x = PeriodicSignal(GRID, rng.normal(size=GRID.samples))
        step = 0.03
        resolved = resolvent_signal(law, step, x)
        recovered = resolved.values + step * forward_eval(law, resolved).values
        assert np.linalg.norm(recovered - x.values) <= 1e-8 * np.linalg.norm(x.values)


def _all_laws(rng):
    return [
        DiodeImpedance(),
        DiodeAdmittance(),
        ResistorImpedance(float(rng.uniform(0, 2000))),
        ResistorAdmittance(float(rng.uniform(0, 2))),
        CapacitorAdmittance(float(rng.uniform(0, 1e-4))),
        InductorImpedance(float(rng.uniform(0, 1))),
        ParallelRCImpedance(float(rng.uniform(0, 2000)), float(rng.uniform(0, 1e-4))),
        PwlResistor(((-1.0, -1.5), (0.0, 0.0), (0.5, 0.5), (2.0, 4.0))),
    ]


def test_firm_nonexpansiveness_every_law():
    # |Jx - Jy|^2 <= <x - y, Jx - Jy> + 1e-9 |x - y|^2
    grid = Grid(32, 1e-3)
    rng = np.random.default_rng(42)
    for trial in range(200):
        step = float(rng.uniform(1e-4, 10.0))
        for law in _all_laws(rng):
            x = rng.normal(size=32) * 10
            y = rng.normal(size=32) * 10
            jx = law.resolvent(step, x, grid)
            jy = law.resolvent(step, y, grid)
            diff = PeriodicSignal(grid, x - y)
            jdiff = PeriodicSignal(grid, jx - jy)
            lhs = inner_product(jdiff, jdiff)
            rhs = inner_product(diff, jdiff) + 1e-9 * inner_product(diff, diff)
            assert lhs <= rhs, f"{type(law).__name__} at step {step}"


def test_monotonicity_single_valued_laws():
    # <u1 - u2, A u1 - A u2> >= -1e-9 |u1 - u2|^2
    grid = Grid(32, 1e-3)
    rng = np.random.default_rng(77)
    laws = [
        ResistorImpedance(37.0),
        ResistorAdmittance(0.02),
        CapacitorAdmittance(5e-5),
        InductorImpedance(0.3),
        ParallelRCImpedance(120.0, 1e-5),
        PwlResistor(((-2.0, -1.0), (0.0, 0.0), (1.0, 3.0))),
    ]
    for _ in range(200):
        for law in laws:
            u1 = PeriodicSignal(grid, rng.normal(size=32))
            u2 = PeriodicSignal(grid, rng.normal(size=32))
            a1 = forward_eval(law, u1)
            a2 = forward_eval(law, u2)
            gap = inner_product(u1 - u2, PeriodicSignal(grid, a1.values - a2.values))
            assert gap >= -1e-9 * inner_product(u1 - u2, u1 - u2)


def test_negative_parameters_rejected():
    with pytest.raises(LawError):
        ResistorImpedance(-1.0)
    with pytest.raises(LawError):
        CapacitorAdmittance(-1e-6)
    with pytest.raises(LawError):
        ParallelRCImpedance(100.0, -1e-6)
