import numpy as np
import pytest

from gatehouse.door import (
    ActuatorAction,
    ActuatorPower,
    AuditEntry,
    CommandKind,
    DoorCommand,
    DoorController,
    DoorMode,
    DoorState,
    HttpRelayActuator,
    MockActuator,
    handle_command,
    state_payload,
    tick,
)


def open_cmd(t: float, by: str = "alice") -> DoorCommand:
    return DoorCommand(CommandKind.OPEN, issued_by=by, issued_at=t)


def close_cmd(t: float, by: str = "alice") -> DoorCommand:
    return DoorCommand(CommandKind.CLOSE, issued_by=by, issued_at=t)


# ---------------------------------------------------------------- pure machine


def test_open_from_locked():
    state, action, entry = handle_command(DoorState(), open_cmd(5.0), 5.0, 30.0)
    assert state.mode is DoorMode.UNLOCKED
    assert state.opened_at == 5.0 and state.auto_close_at == 35.0
    assert action is ActuatorAction.ENERGIZE
    assert entry.actor == "alice"


def test_close_from_unlocked():
    unlocked, _, _ = handle_command(DoorState(), open_cmd(0.0), 0.0, 30.0)
    state, action, _ = handle_command(unlocked, close_cmd(3.0), 3.0, 30.0)
    assert state == DoorState()
    assert action is ActuatorAction.DE_ENERGIZE


def test_close_on_locked_is_audited_noop():
    state, action, entry = handle_command(DoorState(), close_cmd(1.0), 1.0, 30.0)
    assert state == DoorState()
    assert action is None
    assert entry.action == "close_noop"


def test_open_extends_not_stacks():
    s1, _, _ = handle_command(DoorState(), open_cmd(0.0), 0.0, 10.0)
    s2, action, _ = handle_command(s1, open_cmd(5.0), 5.0, 10.0)
    assert s2.auto_close_at == 15.0 and s2.opened_at == 5.0
    assert action is None  # already energized
    s3, act3 = tick(s2, 12.0)
    assert s3.mode is DoorMode.UNLOCKED and act3 is None
    s4, act4 = tick(s2, 15.0)
    assert s4 == DoorState() and act4 is ActuatorAction.DE_ENERGIZE


def test_tick_deadline_is_inclusive():
    unlocked = DoorState(DoorMode.UNLOCKED, opened_at=0.0, auto_close_at=10.0)
    assert tick(unlocked, 9.0) == (unlocked, None)
    closed, action = tick(unlocked, 10.0)
    assert closed == DoorState() and action is ActuatorAction.DE_ENERGIZE


def test_tick_on_locked_is_noop():
    assert tick(DoorState(), 100.0) == (DoorState(), None)


def test_power_mirrors_mode():
    assert DoorState().actuator is ActuatorPower.DE_ENERGIZED
    unlocked = DoorState(DoorMode.UNLOCKED, opened_at=0.0, auto_close_at=1.0)
    assert unlocked.actuator is ActuatorPower.ENERGIZED


def test_state_validation():
    with pytest.raises(ValueError):
        DoorState(DoorMode.UNLOCKED)
    with pytest.raises(ValueError):
        DoorState(DoorMode.LOCKED, opened_at=1.0)
    with pytest.raises(ValueError):
        DoorCommand(CommandKind.OPEN, issued_by="", issued_at=0.0)


# ---------------------------------------------------------------- controller


def test_controller_drives_relay():
    gw = MockActuator()
    ctl = DoorController(gateway=gw, hold_seconds=30.0)
    ctl.command(open_cmd(0.0), 0.0)
    assert ctl.state.mode is DoorMode.UNLOCKED
    ctl.command(close_cmd(1.0), 1.0)
    assert ctl.state == DoorState()
    assert gw.log == ["on", "off"]


def test_controller_close_on_locked_touches_nothing():
    gw = MockActuator()
    ctl = DoorController(gateway=gw)
    ctl.command(close_cmd(0.0), 0.0)
    assert gw.log == []
    assert ctl.audit[-1].action == "close_noop"


def test_energize_failure_stays_locked():
    ctl = DoorController(gateway=MockActuator(fail_energize=True))
    state = ctl.command(open_cmd(0.0), 0.0)
    assert state == DoorState()
    assert any(e.action == "energize_failed" for e in ctl.audit)


def test_de_energize_failure_never_reports_open():
    ctl = DoorController(gateway=MockActuator(), hold_seconds=10.0)
    ctl.command(open_cmd(0.0), 0.0)
    ctl.gateway.fail_de_energize = True
    state = ctl.command(close_cmd(1.0), 1.0)
    assert state == DoorState()
    state = ctl.command(open_cmd(2.0), 2.0)
    assert state.mode is DoorMode.UNLOCKED
    state = ctl.tick(12.0)
    assert state == DoorState()
    assert sum(1 for e in ctl.audit if e.action == "de_energize_failed") == 2


def test_auto_close_is_audited():
    ctl = DoorController(gateway=MockActuator(), hold_seconds=5.0)
    ctl.command(open_cmd(0.0), 0.0)
    ctl.tick(5.0)
    assert ctl.audit[-1].action == "auto_closed"


# ---------------------------------------------------------------- reference replay


class ReferenceDoor:
    """Brute-force interpreter of the intended semantics, kept deliberately
    separate from the production transition functions."""

    def __init__(self, hold: float):
        self.hold = hold
        self.opened_at = None
        self.deadline = None

    def apply(self, step, t):
        if step == "open":
            self.opened_at = t
            self.deadline = t + self.hold
        elif step == "close":
            self.opened_at = None
            self.deadline = None
        elif step == "tick":
            if self.deadline is not None and t >= self.deadline:
                self.opened_at = None
                self.deadline = None

    def snapshot(self) -> DoorState:
        if self.deadline is None:
            return DoorState()
        return DoorState(DoorMode.UNLOCKED, opened_at=self.opened_at, auto_close_at=self.deadline)


def replay_against_reference(steps: int, seed: int, hold: float = 30.0) -> None:
    rng = np.random.default_rng(seed)
    ctl = DoorController(gateway=MockActuator(), hold_seconds=hold)
    ref = ReferenceDoor(hold)
    now = 0.0
    for _ in range(steps):
        now += float(rng.uniform(0.0, 5.0))
        step = ("open", "close", "tick")[int(rng.integers(0, 3))]
        if step == "open":
            ctl.command(open_cmd(now), now)
        elif step == "close":
            ctl.command(close_cmd(now), now)
        else:
            ctl.tick(now)
        ref.apply(step, now)
        assert ctl.state == ref.snapshot()
        assert (ctl.state.actuator is ActuatorPower.DE_ENERGIZED) == (
            ctl.state.mode is DoorMode.LOCKED
        )


def test_random_replay_matches_reference():
    for seed in (1, 2, 3):
        replay_against_reference(2000, seed)


def test_tick_granularity_does_not_matter():
    rng = np.random.default_rng(99)
    commands = {}
    for t in range(0, 120, 7):
        commands[float(t)] = "open" if rng.integers(0, 2) else "close"

    def run(tick_step: float) -> list[DoorState]:
        ctl = DoorController(gateway=MockActuator(), hold_seconds=13.0)
        observations = []
        instants = sorted(
            {round(k * tick_step, 6) for k in range(int(120 / tick_step) + 1)}
            | set(commands)
        )
        for t in instants:
            ctl.tick(t)  # timer fires before any command at the same instant
            cmd = commands.get(t)
            if cmd == "open":
                ctl.command(open_cmd(t), t)
            elif cmd == "close":
                ctl.command(close_cmd(t), t)
            if abs(t - round(t)) < 1e-9:
                observations.append(ctl.state)
        return observations

    assert run(1.0) == run(0.1)


# ---------------------------------------------------------------- relay client


class FakeResponse:
    def __init__(self, status_code=200, body=None):
        self.status_code = status_code
        self._body = body if body is not None else {"ok": True}

    def json(self):
        return self._body


def test_http_relay_wire_contract(monkeypatch):
    calls = []

    def fake_post(url, json=None, timeout=None):
        calls.append((url, json, timeout))
        return FakeResponse()

    monkeypatch.setattr("gatehouse.door.httpx.post", fake_post)
    relay = HttpRelayActuator("http://relay.local", timeout=1.5)
    assert relay.energize() is True
    assert relay.de_energize() is True
    assert calls == [
        ("http://relay.local/relay", {"state": "on"}, 1.5),
        ("http://relay.local/relay", {"state": "off"}, 1.5),
    ]


def test_http_relay_failure_modes(monkeypatch):
    import httpx as _httpx

    def timeout_post(url, json=None, timeout=None):
        raise _httpx.TimeoutException("no relay")

    monkeypatch.setattr("gatehouse.door.httpx.post", timeout_post)
    assert HttpRelayActuator("http://relay.local").energize() is False

    monkeypatch.setattr(
        "gatehouse.door.httpx.post", lambda url, json=None, timeout=None: FakeResponse(500)
    )
    assert HttpRelayActuator("http://relay.local").energize() is False

    monkeypatch.setattr(
        "gatehouse.door.httpx.post",
        lambda url, json=None, timeout=None: FakeResponse(200, {"ok": False}),
    )
    assert HttpRelayActuator("http://relay.local").de_energize() is False


def test_fail_secure_controller_with_dead_relay(monkeypatch):
    monkeypatch.setattr(
        "gatehouse.door.httpx.post",
        lambda url, json=None, timeout=None: (_ for _ in ()).throw(RuntimeError("down")),
    )
    ctl = DoorController(gateway=HttpRelayActuator("http://relay.local"))
    state = ctl.command(open_cmd(0.0), 0.0)
    assert state == DoorState()


# ---------------------------------------------------------------- wire payload


def test_state_payload_shapes():
    assert state_payload(DoorState()) == {"mode": "locked"}
    unlocked = DoorState(DoorMode.UNLOCKED, opened_at=4.0, auto_close_at=34.0)
    assert state_payload(unlocked) == {
        "mode": "unlocked",
        "opened_at": 4.0,
        "auto_close_at": 34.0,
    }
