import math

import pytest

from aqmflow import (
    NetworkParams,
    PiConfig,
    PiController,
    RaqConfig,
    RaqController,
    RemConfig,
    RemController,
    make_controller,
)


@pytest.fixture
def params() -> NetworkParams:
    return NetworkParams()


class TestPi:
    def test_zero_error_leaves_p(self):
        ctrl = PiController(PiConfig(), q_ref=500.0, q0=500.0, p0=0.25)
        assert ctrl.update(500.0) == 0.25

    def test_single_step_increment(self):
        # from rest, error of +1000 packets scales by the a gain
        ctrl = PiController(PiConfig(a=1.822e-5, b=1.816e-5), q_ref=500.0, q0=500.0, p0=0.0)
        assert ctrl.update(1500.0) == pytest.approx(0.01822, rel=1e-12)

    def test_clamped_to_unit_interval(self):
        ctrl = PiController(PiConfig(a=1e-2, b=1e-3), q_ref=0.0)
        ctrl.update(1000.0)
        assert ctrl.p == 1.0
        ctrl2 = PiController(PiConfig(a=1e-2, b=1e-3), q_ref=1000.0, q0=1000.0)
        ctrl2.update(0.0)
        assert ctrl2.p == 0.0

    def test_unclamped_mode_tracks_raw_value(self):
        ctrl = PiController(PiConfig(a=1e-2, b=1e-3), q_ref=0.0, clamp=False)
        ctrl.update(1000.0)
        assert ctrl.p == pytest.approx(10.0)

    def test_stationary_only_at_target(self):
        # at a constant queue, the update moves p unless q equals the target
        cfg = PiConfig()
        ctrl = PiController(cfg, q_ref=500.0, q0=600.0, p0=0.5)
        before = ctrl.p
        ctrl.update(600.0)
        assert ctrl.p != before

    def test_hold_between_updates(self):
        ctrl = PiController(PiConfig(), q_ref=500.0, p0=0.3)
        assert ctrl.hold() == 0.3


class TestRem:
    def test_zero_price_zero_probability(self, params):
        ctrl = RemController(RemConfig(), q_ref=500.0, capacity=params.capacity)
        assert ctrl.p == 0.0
        ctrl.update(500.0, params.capacity)
        assert ctrl.p == 0.0

    def test_half_probability_price(self, params):
        cfg = RemConfig()
        price = math.log(2.0) / math.log(cfg.phi)
        ctrl = RemController(cfg, q_ref=500.0, capacity=params.capacity, price0=price)
        assert ctrl.p == pytest.approx(0.5, rel=1e-12)

    def test_price_never_negative(self, params):
        ctrl = RemController(RemConfig(), q_ref=500.0, capacity=params.capacity)
        ctrl.update(0.0, 0.0)  # strongly negative drive
        assert ctrl.price == 0.0
        assert ctrl.p == 0.0

    def test_probability_strictly_below_one(self, params):
        ctrl = RemController(RemConfig(), q_ref=500.0, capacity=params.capacity)
        for _ in range(10000):
            ctrl.update(1125.0, 4.0 * params.capacity)
        assert 0.0 <= ctrl.p < 1.0

    def test_equilibrium_seeding(self, params):
        ctrl = RemController.at_equilibrium(RemConfig(), 500.0, params.capacity, p0=0.2004)
        assert ctrl.p == pytest.approx(0.2004, rel=1e-12)
        ctrl.update(500.0, params.capacity)  # zero drive keeps the price
        assert ctrl.p == pytest.approx(0.2004, rel=1e-12)

    def test_seeding_rejects_unreachable_p(self, params):
        with pytest.raises(ValueError):
            RemController.at_equilibrium(RemConfig(), 500.0, params.capacity, p0=1.0)

    def test_stationarity_condition_couples_queue_and_rate(self, params):
        # a rate surplus can hold the price still only with a queue deficit
        cfg = RemConfig()
        surplus = 900.0  # packets/s
        q = 500.0 - surplus * cfg.T / cfg.alpha
        ctrl = RemController(cfg, q_ref=500.0, capacity=params.capacity, price0=100.0)
        before = ctrl.price
        ctrl.update(q, params.capacity + surplus)
        assert ctrl.price == pytest.approx(before, rel=1e-12)


class TestRaq:
    def test_stationary_at_target_and_capacity(self, params):
        ctrl = RaqController(RaqConfig(), q_ref=500.0, capacity=params.capacity,
                             buffer=params.buffer, e0=0.0, p0=0.33)
        ctrl.update(500.0, params.capacity)
        assert ctrl.p == 0.33

    def test_rate_term_alone(self, params):
        # doubled arrival rate at the target queue moves p by exactly r_kp
        cfg = RaqConfig(r_kp=0.0095)
        ctrl = RaqController(cfg, q_ref=500.0, capacity=params.capacity,
                             buffer=params.buffer, e0=0.0, p0=0.0)
        ctrl.update(500.0, 2.0 * params.capacity)
        assert ctrl.p == pytest.approx(0.0095, rel=1e-12)

    def test_clamped(self, params):
        ctrl = RaqController(RaqConfig(r_kp=10.0), q_ref=500.0, capacity=params.capacity,
                             buffer=params.buffer, e0=0.0)
        ctrl.update(500.0, 10.0 * params.capacity)
        assert ctrl.p == 1.0

    def test_drop_mode_uses_accepted_rate(self, params):
        # with dropping active, the rate seen by the law is (1-p)*lam
        cfg = RaqConfig(q_kp=0.0, q_ki=0.0, r_kp=0.0095)
        ctrl = RaqController(cfg, q_ref=500.0, capacity=params.capacity,
                             buffer=params.buffer, ecn_on=False, e0=0.0, p0=0.5)
        lam = 2.0 * params.capacity  # accepted = lam/2 = capacity
        ctrl.update(500.0, lam)
        assert ctrl.p == 0.5

    def test_equilibrium_seeding(self, params):
        ctrl = RaqController.at_equilibrium(RaqConfig(), 500.0, params.capacity,
                                            params.buffer, True, q0=500.0, p0=0.2)
        ctrl.update(500.0, params.capacity)
        assert ctrl.p == 0.2


class TestConfigValidation:
    def test_nonpositive_period_rejected(self):
        with pytest.raises(ValueError):
            PiConfig(T=0.0)

    def test_negative_gain_rejected(self):
        with pytest.raises(ValueError):
            RaqConfig(q_kp=-1.0)

    def test_phi_must_exceed_one(self):
        with pytest.raises(ValueError):
            RemConfig(phi=1.0)


class TestFactory:
    def test_dispatch(self, params):
        assert isinstance(make_controller(PiConfig(), params), PiController)
        assert isinstance(make_controller(RemConfig(), params), RemController)
        assert isinstance(make_controller(RaqConfig(), params), RaqController)

    def test_determinism(self, params):
        sequence = [(480.0, 5000.0), (520.0, 6000.0), (500.0, 5625.0), (700.0, 7000.0)]
        for cfg in (PiConfig(), RemConfig(), RaqConfig()):
            c1 = make_controller(cfg, params)
            c2 = make_controller(cfg, params)
            out1 = [c1.update(q, lam) for q, lam in sequence]
            out2 = [c2.update(q, lam) for q, lam in sequence]
            assert out1 == out2
