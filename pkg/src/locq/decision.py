"""Three-valued answers with certificates.

Every procedure that sits on top of a word problem returns a
``Decision3``: yes / no / unknown(reason).  "unknown" is an honest
admission of a budget or decidability bound, never a silent wrong
answer.  Certificates are plain JSON-able dicts so independent
checkers can validate them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Decision3:
    value: str
    reason: Optional[str] = None
    certificate: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if self.value not in (YES, NO, UNKNOWN):
            raise ValueError(f"bad decision value {self.value!r}")

    @property
    def is_yes(self) -> bool:
        return self.value == YES

    @property
    def is_no(self) -> bool:
        return self.value == NO

    @property
    def is_unknown(self) -> bool:
        return self.value == UNKNOWN

    def as_json(self) -> dict:
        out: dict[str, Any] = {"verdict": self.value}
        if self.reason is not None:
            out["reason"] = self.reason
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


def yes(certificate: Optional[dict] = None, reason: Optional[str] = None) -> Decision3:
    return Decision3(YES, reason, certificate)


def no(certificate: Optional[dict] = None, reason: Optional[str] = None) -> Decision3:
    return Decision3(NO, reason, certificate)


def unknown(reason: str, certificate: Optional[dict] = None) -> Decision3:
    return Decision3(UNKNOWN, reason, certificate)


def all_of(decisions: Iterable[Decision3]) -> Decision3:
    """Conjunction.  The first no wins; otherwise any unknown; else yes."""
    pending: Optional[Decision3] = None
    for d in decisions:
        if d.is_no:
            return d
        if d.is_unknown and pending is None:
            pending = d
    return pending if pending is not None else yes()
