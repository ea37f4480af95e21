"""Fail-secure door state machine: the lock holds whenever the solenoid has
no power, so Unlocked exists only while an authorized command keeps it
energized, and a timer always pulls it back."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol

import httpx


class DoorMode(str, Enum):
    LOCKED = "locked"
    UNLOCKED = "unlocked"


class ActuatorPower(str, Enum):
    ENERGIZED = "energized"
    DE_ENERGIZED = "de_energized"


class ActuatorAction(str, Enum):
    ENERGIZE = "energize"
    DE_ENERGIZE = "de_energize"


class CommandKind(str, Enum):
    OPEN = "open"
    CLOSE = "close"


@dataclass(frozen=True)
class DoorState:
    mode: DoorMode = DoorMode.LOCKED
    opened_at: float | None = None
    auto_close_at: float | None = None

    def __post_init__(self) -> None:
        if self.mode is DoorMode.UNLOCKED:
            if self.opened_at is None or self.auto_close_at is None:
                raise ValueError("unlocked state needs opened_at and auto_close_at")
        elif self.opened_at is not None or self.auto_close_at is not None:
            raise ValueError("locked state carries no timer fields")

    @property
    def actuator(self) -> ActuatorPower:
        if self.mode is DoorMode.UNLOCKED:
            return ActuatorPower.ENERGIZED
        return ActuatorPower.DE_ENERGIZED


@dataclass(frozen=True)
class DoorCommand:
    kind: CommandKind
    issued_by: str
    issued_at: float
    correlation: Any = None

    def __post_init__(self) -> None:
        if not self.issued_by:
            raise ValueError("commands must carry an operator identity")


@dataclass(frozen=True)
class AuditEntry:
    at: float
    actor: str
    action: str
    detail: str = ""


def handle_command(
    state: DoorState, cmd: DoorCommand, now: float, hold_seconds: float
) -> tuple[DoorState, ActuatorAction | None, AuditEntry]:
    """Total transition table; an Open on an already-unlocked door restarts
    the hold window rather than stacking it."""
    if cmd.kind is CommandKind.OPEN:
        new = DoorState(
            mode=DoorMode.UNLOCKED, opened_at=now, auto_close_at=now + hold_seconds
        )
        action = None if state.mode is DoorMode.UNLOCKED else ActuatorAction.ENERGIZE
        verb = "extended" if state.mode is DoorMode.UNLOCKED else "opened"
        return new, action, AuditEntry(now, cmd.issued_by, verb, f"auto close at {new.auto_close_at}")
    if state.mode is DoorMode.UNLOCKED:
        return (
            DoorState(),
            ActuatorAction.DE_ENERGIZE,
            AuditEntry(now, cmd.issued_by, "closed"),
        )
    return state, None, AuditEntry(now, cmd.issued_by, "close_noop", "already locked")


def tick(state: DoorState, now: float) -> tuple[DoorState, ActuatorAction | None]:
    if state.mode is DoorMode.UNLOCKED and now >= state.auto_close_at:
        return DoorState(), ActuatorAction.DE_ENERGIZE
    return state, None


class ActuatorGateway(Protocol):
    """Physical relay driver; both calls return True only on an acknowledged
    switch."""

    def energize(self) -> bool: ...

    def de_energize(self) -> bool: ...


@dataclass
class MockActuator:
    fail_energize: bool = False
    fail_de_energize: bool = False
    log: list[str] = field(default_factory=list)

    def energize(self) -> bool:
        self.log.append("on")
        return not self.fail_energize

    def de_energize(self) -> bool:
        self.log.append("off")
        return not self.fail_de_energize


@dataclass
class HttpRelayActuator:
    """Client for a Wi-Fi relay speaking POST /relay {"state":"on"|"off"};
    any transport error or missing ack counts as failure."""

    base_url: str
    timeout: float = 2.0

    def _set(self, value: str) -> bool:
        try:
            resp = httpx.post(
                f"{self.base_url.rstrip('/')}/relay",
                json={"state": value},
                timeout=self.timeout,
            )
            return resp.status_code == 200 and resp.json().get("ok") is True
        except Exception:
            return False

    def energize(self) -> bool:
        return self._set("on")

    def de_energize(self) -> bool:
        return self._set("off")


@dataclass
class DoorController:
    """Single owner of the live door state; commands and ticks must arrive
    from one thread (the service layer serializes them)."""

    gateway: ActuatorGateway
    hold_seconds: float = 30.0
    state: DoorState = field(default_factory=DoorState)
    audit: list[AuditEntry] = field(default_factory=list)

    def command(self, cmd: DoorCommand, now: float) -> DoorState:
        new_state, action, entry = handle_command(self.state, cmd, now, self.hold_seconds)
        if action is ActuatorAction.ENERGIZE:
            if not self.gateway.energize():
                self.audit.append(
                    AuditEntry(now, cmd.issued_by, "energize_failed", "door stays locked")
                )
                self.state = DoorState()
                return self.state
        elif action is ActuatorAction.DE_ENERGIZE:
            if not self.gateway.de_energize():
                # the ack is gone but the model must never report open
                self.audit.append(
                    AuditEntry(now, cmd.issued_by, "de_energize_failed", "treating door as locked")
                )
                self.state = DoorState()
                return self.state
        self.audit.append(entry)
        self.state = new_state
        return self.state

    def tick(self, now: float) -> DoorState:
        new_state, action = tick(self.state, now)
        if action is ActuatorAction.DE_ENERGIZE:
            if not self.gateway.de_energize():
                self.audit.append(
                    AuditEntry(now, "timer", "de_energize_failed", "treating door as locked")
                )
            else:
                self.audit.append(AuditEntry(now, "timer", "auto_closed"))
            self.state = DoorState()
            return self.state
        self.state = new_state
        return self.state


def state_payload(state: DoorState) -> dict:
    """Wire shape for the door endpoint; a locked door is exactly
    {"mode":"locked"}."""
    if state.mode is DoorMode.LOCKED:
        return {"mode": "locked"}
    return {
        "mode": "unlocked",
        "opened_at": state.opened_at,
        "auto_close_at": state.auto_close_at,
    }
