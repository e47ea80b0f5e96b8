import math
from dataclasses import replace

import numpy as np
import pytest

from saginmc.constants import LOAD_MAX, LEO_ALTITUDE_M, SPEED_OF_LIGHT_MPS
from saginmc.sim.channel import (
    LinkKind,
    LinkParams,
    advance_loads,
    aerial_los_probability,
    default_link_params,
    evaluate_links,
    free_space_path_loss_db,
    initial_loads,
    link_capacity,
    link_latency,
    los_probability,
    noise_floor_dbm,
    path_loss_db,
    resolve_link_params,
    snr_db,
    uma_los_probability,
)
from saginmc.sim.geometry import LeoState, MobilityConfig, initial_world


@pytest.fixture
def world(rng):
    return initial_world(MobilityConfig(), rng)


class TestLosProbability:
    def test_bs_inside_breakpoint(self):
        assert uma_los_probability(10.0) == 1.0

    def test_hap_overhead(self):
        assert aerial_los_probability(90.0) >= 0.9999

    def test_leo_below_mask(self, world):
        low = replace(world, leo=LeoState(arc_deg=5.0))
        assert los_probability(LinkKind.LEO, low) == 0.0

    def test_leo_above_mask(self, world):
        high = replace(world, leo=LeoState(arc_deg=60.0))
        assert los_probability(LinkKind.LEO, high) == 1.0

    def test_bs_nonincreasing_in_distance(self):
        values = [uma_los_probability(d) for d in np.linspace(1.0, 2000.0, 500)]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))

    def test_aerial_nondecreasing_in_elevation(self):
        values = [aerial_los_probability(e) for e in np.linspace(0.0, 90.0, 500)]
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))

    def test_bounded(self, world):
        for kind in LinkKind:
            assert 0.0 <= los_probability(kind, world) <= 1.0


class TestPathLoss:
    def test_fspl_anchor(self):
        assert free_space_path_loss_db(100.0, 28e9) == pytest.approx(101.39, abs=0.01)

    def test_bs_los(self):
        assert path_loss_db(LinkKind.BS, 100.0, 28e9, los=True) == pytest.approx(102.39, abs=0.01)

    def test_leo_los(self):
        # 20log10(550e3) + 20log10(27e9) - 147.55 = 175.88, plus the 1 dB LOS excess
        assert path_loss_db(LinkKind.LEO, 550_000.0, 27e9, los=True) == pytest.approx(176.88, abs=0.01)

    def test_nlos_adds_excess(self):
        los = path_loss_db(LinkKind.UAV, 300.0, 26e9, los=True)
        nlos = path_loss_db(LinkKind.UAV, 300.0, 26e9, los=False)
        assert nlos - los == pytest.approx(19.0)

    def test_zero_distance_rejected(self):
        with pytest.raises(ValueError):
            path_loss_db(LinkKind.BS, 0.0, 28e9, los=True)


class TestSnr:
    def test_noise_floor(self):
        assert noise_floor_dbm(100e6, 7.0) == pytest.approx(-87.0, abs=0.01)

    def test_bs_example(self):
        params = default_link_params()[LinkKind.BS]
        loss = path_loss_db(LinkKind.BS, 100.0, 28e9, los=True)
        assert snr_db(params, loss) == pytest.approx(14.61, abs=0.01)

    def test_gains_shift_snr_one_for_one(self):
        base = default_link_params()[LinkKind.HAP]
        boosted = base.model_copy(update={"antenna_gain_tx": 3.0, "antenna_gain_rx": 2.0})
        assert snr_db(boosted, 150.0) - snr_db(base, 150.0) == pytest.approx(5.0)


class TestCapacity:
    def test_unit_bandwidth(self):
        assert link_capacity(1.0, 0.0, 0.0) == pytest.approx(1.0)

    def test_full_load(self):
        assert link_capacity(100e6, 25.0, 1.0) == 0.0

    def test_bs_example(self):
        # Shannon gives 4.9024e8; the rounded 4.924e8 is within half a percent
        capacity = link_capacity(100e6, 14.61, 0.0)
        assert capacity == pytest.approx(4.9024e8, rel=1e-4)
        assert capacity == pytest.approx(4.924e8, rel=5e-3)

    def test_monotone(self):
        snrs = np.linspace(-10.0, 40.0, 50)
        by_snr = [link_capacity(100e6, s, 0.2) for s in snrs]
        assert all(b > a for a, b in zip(by_snr, by_snr[1:]))
        by_load = [link_capacity(100e6, 10.0, load) for load in np.linspace(0.0, 1.0, 50)]
        assert all(b < a for a, b in zip(by_load, by_load[1:]))
        assert link_capacity(200e6, 10.0, 0.2) > link_capacity(100e6, 10.0, 0.2)

    def test_nlos_not_better(self):
        params = default_link_params()[LinkKind.UAV]
        los = link_capacity(params.bandwidth, snr_db(params, path_loss_db(LinkKind.UAV, 250.0, 26e9, True)), 0.3)
        nlos = link_capacity(params.bandwidth, snr_db(params, path_loss_db(LinkKind.UAV, 250.0, 26e9, False)), 0.3)
        assert nlos <= los

    def test_load_out_of_range(self):
        with pytest.raises(ValueError):
            link_capacity(100e6, 10.0, 1.5)


class TestLatency:
    def test_leo_propagation(self):
        assert link_latency(LEO_ALTITUDE_M, math.inf) == pytest.approx(1.834e-3, abs=1e-6)

    def test_service_time(self):
        assert link_latency(0.0, 100e6, packet_bits=12_000) == pytest.approx(0.12e-3)

    def test_packet_doubling(self):
        propagation = 300.0 / SPEED_OF_LIGHT_MPS
        single = link_latency(300.0, 50e6, packet_bits=12_000) - propagation
        double = link_latency(300.0, 50e6, packet_bits=24_000) - propagation
        assert double == pytest.approx(2.0 * single)

    def test_zero_rate_returns_sentinel(self):
        assert link_latency(100.0, 0.0, unavailable_latency=0.1) == 0.1

    def test_tiny_rate_capped_at_sentinel(self):
        assert link_latency(100.0, 1e-300, unavailable_latency=0.1) == 0.1
        assert link_latency(100.0, 1.0, unavailable_latency=0.1) == 0.1

    def test_fast_link_below_sentinel(self):
        assert link_latency(100.0, 100e6, unavailable_latency=0.1) < 0.1

    def test_negative_distance(self):
        with pytest.raises(ValueError):
            link_latency(-1.0, 1e6)


class TestEvaluateLinks:
    def test_fields(self, world, rng):
        loads = initial_loads(rng)
        metrics = evaluate_links(world, default_link_params(), loads, rng)
        assert list(metrics) == list(LinkKind)
        assert metrics[LinkKind.BS].power == 2.0
        assert metrics[LinkKind.LEO].power == 5.0
        for kind, link in metrics.items():
            assert link.load == loads[kind]
            assert link.capacity >= 0.0

    def test_leo_latency_lower_bound(self):
        rng = np.random.default_rng(11)
        cfg = MobilityConfig()
        params = default_link_params()
        for _ in range(200):
            world = initial_world(cfg, rng)
            metrics = evaluate_links(world, params, initial_loads(rng), rng)
            assert metrics[LinkKind.LEO].latency >= 1.834e-3

    def test_deterministic(self, world):
        params = default_link_params()
        loads = {kind: 0.25 for kind in LinkKind}
        first = evaluate_links(world, params, loads, np.random.default_rng(5))
        second = evaluate_links(world, params, loads, np.random.default_rng(5))
        assert first == second


class TestLoads:
    def test_initial_range(self, rng):
        for value in initial_loads(rng).values():
            assert 0.0 <= value <= 0.5

    def test_walk_stays_bounded(self, rng):
        loads = initial_loads(rng)
        for _ in range(5000):
            loads = advance_loads(loads, rng)
            assert all(0.0 <= value <= LOAD_MAX for value in loads.values())


class TestLinkParams:
    def test_override_by_name(self):
        params = resolve_link_params({"bs": {"tx_power": 33.0}})
        assert params[LinkKind.BS].tx_power == 33.0
        assert params[LinkKind.UAV] == default_link_params()[LinkKind.UAV]

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="Unknown link kind"):
            resolve_link_params({"wifi": {"tx_power": 20.0}})

    def test_unknown_field(self):
        with pytest.raises(ValueError):
            resolve_link_params({"hap": {"colour": 1.0}})

    def test_negative_noise_figure_rejected(self):
        with pytest.raises(ValueError):
            LinkParams(bandwidth=1e6, carrier_frequency=1e9, tx_power=0.0, power_cost=1.0, noise_figure=-1.0)
