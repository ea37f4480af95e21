"""Alert delivery: per-recipient channel fan-out, a per (user, camera)
rate limit, and file-based mock transports for offline runs."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Protocol, Sequence


class Channel(str, Enum):
    MMS = "mms"
    EMAIL = "email"
    CALL = "call"


class DeliveryStatus(str, Enum):
    DELIVERED = "Delivered"
    FAILED = "Failed"
    RATE_LIMITED = "RateLimited"


@dataclass(frozen=True)
class Recipient:
    user_id: str
    destinations: Mapping[Channel, str]

    def __post_init__(self):
        if not self.user_id:
            raise ValueError("recipient needs a user id")
        if not self.destinations:
            raise ValueError(f"recipient {self.user_id!r} has no channels")


@dataclass(frozen=True)
class NotificationOutcome:
    user_id: str
    channel: Channel
    destination: str
    status: DeliveryStatus


class Transport(Protocol):
    def send(
        self, event_id: int, destination: str, body: str, attachment: str | None
    ) -> None: ...


class OutboxTransport:
    """Writes each message to outbox/<channel>/<event_id>.txt instead of
    talking to a carrier."""

    def __init__(self, channel: Channel, outbox_root: str | Path):
        self.directory = Path(outbox_root) / channel.value
        self.directory.mkdir(parents=True, exist_ok=True)

    def send(
        self, event_id: int, destination: str, body: str, attachment: str | None
    ) -> None:
        text = (
            f"to: {destination}\n"
            f"attachment: {attachment if attachment else '-'}\n"
            f"\n"
            f"{body}\n"
        )
        (self.directory / f"{event_id}.txt").write_text(text, encoding="utf-8")


class RateLimiter:
    """At most one notification per key within the window; the window
    restarts at each allowed send."""

    def __init__(self, window_seconds: float = 60.0):
        if window_seconds <= 0:
            raise ValueError("window must be positive")
        self.window_seconds = float(window_seconds)
        self._last_allowed: dict[tuple[str, str], float] = {}

    def allow(self, user_id: str, camera_id: str, now: float) -> bool:
        key = (user_id, camera_id)
        last = self._last_allowed.get(key)
        if last is not None and now - last < self.window_seconds:
            return False
        self._last_allowed[key] = now
        return True


class Notifier:
    def __init__(
        self,
        transports: Mapping[Channel, Transport],
        recipients: Sequence[Recipient],
        window_seconds: float = 60.0,
    ):
        self.transports = dict(transports)
        self.recipients = list(recipients)
        self.limiter = RateLimiter(window_seconds)

    def notify(
        self,
        event_id: int,
        camera_id: str,
        body: str,
        attachment: str | None,
        now: float,
    ) -> list[NotificationOutcome]:
        outcomes: list[NotificationOutcome] = []
        for recipient in self.recipients:
            allowed = self.limiter.allow(recipient.user_id, camera_id, now)
            for channel in Channel:
                destination = recipient.destinations.get(channel)
                if destination is None:
                    continue
                if not allowed:
                    status = DeliveryStatus.RATE_LIMITED
                else:
                    status = self._deliver(channel, event_id, destination, body, attachment)
                outcomes.append(
                    NotificationOutcome(
                        user_id=recipient.user_id,
                        channel=channel,
                        destination=destination,
                        status=status,
                    )
                )
        return outcomes

    def _deliver(
        self,
        channel: Channel,
        event_id: int,
        destination: str,
        body: str,
        attachment: str | None,
    ) -> DeliveryStatus:
        transport = self.transports.get(channel)
        if transport is None:
            return DeliveryStatus.FAILED
        try:
            transport.send(event_id, destination, body, attachment)
        except Exception:
            return DeliveryStatus.FAILED
        return DeliveryStatus.DELIVERED


def outbox_transports(outbox_root: str | Path) -> dict[Channel, Transport]:
    return {channel: OutboxTransport(channel, outbox_root) for channel in Channel}
