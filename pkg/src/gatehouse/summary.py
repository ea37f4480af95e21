"""Visual summary sentences plus the pluggable attribute classifier
interface and its fingerprint-manifest stub."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Protocol

from .frames import GrayFrame
from .geometry import PatchSet, SizeBand, patch_size_band


class AttributeLabel(str, Enum):
    CELLPHONE = "Cellphone"
    GUN = "Gun"
    EYEGLASS = "Eyeglass"
    EYES_WITHOUT_GLASS = "EyesWithoutGlass"
    BEARD = "Beard"
    NON_BEARD = "NonBeard"
    MUSTACHE = "Mustache"
    NON_MUSTACHE = "NonMustache"
    BALD_HEAD = "BaldHead"
    NON_BALD_HEAD = "NonBaldHead"


COMPLEMENT_PAIRS = (
    (AttributeLabel.BEARD, AttributeLabel.NON_BEARD),
    (AttributeLabel.MUSTACHE, AttributeLabel.NON_MUSTACHE),
    (AttributeLabel.EYEGLASS, AttributeLabel.EYES_WITHOUT_GLASS),
    (AttributeLabel.BALD_HEAD, AttributeLabel.NON_BALD_HEAD),
)

# face-patch routing: which labels each cropped region may contribute
REGION_LABELS: dict[str, frozenset[AttributeLabel]] = {
    "eye": frozenset({AttributeLabel.EYEGLASS, AttributeLabel.EYES_WITHOUT_GLASS}),
    "beard": frozenset({AttributeLabel.BEARD, AttributeLabel.NON_BEARD}),
    "mustache": frozenset({AttributeLabel.MUSTACHE, AttributeLabel.NON_MUSTACHE}),
    "head": frozenset({AttributeLabel.BALD_HEAD, AttributeLabel.NON_BALD_HEAD}),
    "person": frozenset({AttributeLabel.CELLPHONE, AttributeLabel.GUN}),
}

# sentence order and wording for attributes that appear in summaries
_SENTENCE_ATTRIBUTES = (
    (AttributeLabel.BEARD, "beard"),
    (AttributeLabel.MUSTACHE, "mustache"),
    (AttributeLabel.EYEGLASS, "eyeglass"),
    (AttributeLabel.BALD_HEAD, "bald head"),
    (AttributeLabel.GUN, "gun"),
)

POSITIVE_ATTRIBUTES = frozenset(
    {label for label, _ in _SENTENCE_ATTRIBUTES} | {AttributeLabel.CELLPHONE}
)


class VerdictKind(str, Enum):
    KNOWN = "Known"
    UNKNOWN = "Unknown"
    PERSON_NO_FACE = "PersonNoFace"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    subject_id: Any = None
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind is VerdictKind.KNOWN and not self.name:
            raise ValueError("a Known verdict needs the person's name")

    @classmethod
    def known(cls, subject_id: Any, name: str) -> "Verdict":
        return cls(VerdictKind.KNOWN, subject_id=subject_id, name=name)

    @classmethod
    def unknown(cls) -> "Verdict":
        return cls(VerdictKind.UNKNOWN)

    @classmethod
    def person_no_face(cls) -> "Verdict":
        return cls(VerdictKind.PERSON_NO_FACE)


@dataclass(frozen=True)
class VisualSummary:
    verdict: Verdict
    location: str
    positive_attributes: tuple[AttributeLabel, ...]
    sentence: str


class AttributeStageError(RuntimeError):
    pass


class AttributeClassifier(Protocol):
    """Backends label one cropped region at a time; region names the
    routing slot (eye/beard/mustache/head/person)."""

    def classify(self, region: str, image: GrayFrame) -> set[AttributeLabel]: ...


def patch_fingerprint(image: GrayFrame) -> str:
    """Stable content hash of a patch: dimensions prefix plus raw pixels."""
    digest = hashlib.sha256()
    digest.update(f"{image.height}x{image.width}:".encode("ascii"))
    digest.update(image.tobytes())
    return digest.hexdigest()


@dataclass
class ManifestStubClassifier:
    """Deterministic stand-in for the trained attribute models: an explicit
    fingerprint -> labels table."""

    table: Mapping[str, frozenset[AttributeLabel]] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "ManifestStubClassifier":
        table: dict[str, set[AttributeLabel]] = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'fingerprint<TAB>label'")
            fingerprint, label_text = parts
            try:
                label = AttributeLabel(label_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unknown label {label_text!r}") from exc
            table.setdefault(fingerprint, set()).add(label)
        return cls({fp: frozenset(labels) for fp, labels in table.items()})

    def classify(self, region: str, image: GrayFrame) -> set[AttributeLabel]:
        return set(self.table.get(patch_fingerprint(image), frozenset()))


def check_complement_pairs(labels: Iterable[AttributeLabel]) -> None:
    present = set(labels)
    for a, b in COMPLEMENT_PAIRS:
        if a in present and b in present:
            raise AttributeStageError(f"contradictory labels {a.value} and {b.value}")


def classify_attributes(
    patches: PatchSet | None,
    person_crop: GrayFrame | None,
    classifier: AttributeClassifier,
) -> set[AttributeLabel]:
    """Route each usable region through the classifier; patches below the
    Small size band contribute nothing."""
    labels: set[AttributeLabel] = set()
    if patches is not None:
        for region, patch in patches.named().items():
            if patch_size_band(patch.rect) is SizeBand.REJECT:
                continue
            try:
                raw = classifier.classify(region, patch.pixels)
            except AttributeStageError:
                raise
            except Exception as exc:
                raise AttributeStageError(f"classifier failed on {region} patch: {exc}") from exc
            labels |= set(raw) & REGION_LABELS[region]
    if person_crop is not None:
        try:
            raw = classifier.classify("person", person_crop)
        except AttributeStageError:
            raise
        except Exception as exc:
            raise AttributeStageError(f"classifier failed on person crop: {exc}") from exc
        labels |= set(raw) & REGION_LABELS["person"]
    check_complement_pairs(labels)
    return labels


def attribute_phrase_list(attributes: Iterable[AttributeLabel]) -> str:
    present = set(attributes)
    return "/".join(word for label, word in _SENTENCE_ATTRIBUTES if label in present)


def compose_summary(
    verdict: Verdict, location: str, attributes: Iterable[AttributeLabel]
) -> VisualSummary:
    if not location:
        raise ValueError("location label must be non-empty")
    attrs = set(attributes)
    check_complement_pairs(attrs)
    if verdict.kind is VerdictKind.KNOWN:
        sentence = f"{verdict.name} at {location}"
        if AttributeLabel.CELLPHONE in attrs:
            sentence += " talking over the phone"
    elif verdict.kind is VerdictKind.UNKNOWN:
        listed = attribute_phrase_list(attrs)
        if listed:
            sentence = f"An unknown person with {listed} at {location}"
        else:
            sentence = f"An unknown person at {location}"
    else:
        sentence = f"A person (no face visible) at {location}"
    ordered_positive = tuple(
        label
        for label in AttributeLabel
        if label in attrs and label in POSITIVE_ATTRIBUTES
    )
    return VisualSummary(
        verdict=verdict,
        location=location,
        positive_attributes=ordered_positive,
        sentence=sentence,
    )
