"""Smoke tests for the compiled twincity extension."""

import math

import pytest

import twincity as tc


def test_device_roundtrip():
    d = tc.make_device(7, tc.TRANSPORT_DOMAIN, 100.0, 1024)
    assert d.battery_pct == 100.0
    assert d.state == tc.DeviceState.Idle
    assert d.last_tx == 0
    with pytest.raises(ValueError):
        tc.make_device(2, tc.SMART_FARM_DOMAIN, 101.0, 512)


def test_time_conversion():
    assert tc.minutes_to_simtime(1440) == tc.MS_PER_DAY
    assert tc.minutes_to_simtime(0.5) == 30_000
    with pytest.raises(ValueError):
        tc.minutes_to_simtime(-1)


def test_percentile_nearest_rank():
    assert tc.percentile([7.0], 95) == 7.0
    assert tc.percentile(list(range(1, 101)), 95) == 95.0
    assert tc.percentile(list(range(1, 21)), 95) == 19.0


def test_rewards_match_formulas():
    assert tc.reward_energy([80.0, 60.5, 10.0]) == pytest.approx(150.5)
    assert tc.reward_timeliness([200.0, 150.0, 190.0], 180.0) == pytest.approx(-30.0)
    assert tc.reward_consecutive([100.0], [110.0], 30.0, 0.3) == pytest.approx(-6.0)
    total = tc.reward_total(150.5, -30.0, -6.0)
    assert total.r_total == pytest.approx(114.5)
    assert total.r_total == total.r_energy + total.r_timeliness + total.r_consecutive


def test_enforce_min_interval():
    assert tc.enforce_min_interval([100.0], [50.0], 30.0) == [130.0]
    assert tc.enforce_min_interval([100.0], [200.0], 30.0) == [200.0]
    # constraint then penalty is always penalty-free
    a = [5.0, 900.0, 1439.0]
    a_prime = tc.enforce_min_interval(a, [0.0, 1200.0, 100.0], 30.0)
    assert tc.reward_consecutive(a, a_prime, 30.0, 0.3) == 0.0


def test_whatif_determinism():
    a = tc.whatif_generate(9, 10, 3)
    b = tc.whatif_generate(9, 10, 3)
    assert len(a) == 10
    assert all(x.batteries == y.batteries for x, y in zip(a, b))
    assert all(0.0 <= v <= 100.0 for s in a for v in s.batteries)


def test_agent_actions_bounded():
    hp = tc.Hyperparams()
    hp.hidden = [8, 8]
    agent = tc.DdpgAgent(3, hp, seed=11)
    state = tc.StateVector([100.0, 50.0, 25.0], [0.0, 600.0, 1200.0])
    action = agent.policy_action(state)
    assert len(action) == 3
    assert all(0.0 <= m <= 1440.0 for m in action)
    # pure function: same state, same action
    assert agent.policy_action(state) == action
    # checkpoint text round-trips bit-exactly
    text = agent.save_text()
    clone = tc.DdpgAgent.load_text(text)
    assert clone.policy_action(state) == action


def test_domain_split():
    assert tc.domain_split("three_service", 600) == [200, 200, 200]
    assert tc.domain_split("three_service", 601) == [201, 200, 200]
    assert tc.domain_split("one_service", 10) == [10]


def test_cli_validate_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"n_publishers": 5}')
    assert tc.run_cli(["--config", str(cfg), "validate-config"]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_publisherz": 5}')
    assert tc.run_cli(["--config", str(bad), "validate-config"]) == 1


def test_tiny_training_run(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        '{"n_publishers": 2, "train": {"episodes": 3, "eval_days": 1},'
        ' "ddpg": {"batch_size": 2, "buffer_capacity": 16, "hidden": [8]},'
        ' "trace": true}'
    )
    out = tmp_path / "run"
    rc = tc.run_cli(
        ["--config", str(cfg), "--seed", "5", "--out-dir", str(out), "train"]
    )
    assert rc == 0
    assert (out / "learning_curve.csv").exists()
    assert (out / "checkpoint.txt").exists()
    assert (out / "trace.log").exists()
    curve = (out / "learning_curve.csv").read_text().strip().splitlines()
    assert len(curve) == 4  # header + 3 episodes
