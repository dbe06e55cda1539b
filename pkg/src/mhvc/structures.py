"""Multi-hypothesis prediction structures and their buffer requirements."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class PredictionStructure:
    """How the two temporal hypotheses are drawn from the decoded frame buffer.

    tag          short name used on the CLI and in the bitstream
    n_long       capacity of the long-term FIFO key-frame section
    short_depth  number of recent decoded frames kept in the short-term section
    adaptive     True when the second hypothesis is chosen by RD search and
                 the choice is signaled per frame
    """

    tag: str
    n_long: int
    short_depth: int
    adaptive: bool

    def __post_init__(self):
        if self.n_long not in (1, 2, 3):
            raise ValueError("n_long must be 1, 2 or 3")
        if self.tag == "ls+" and self.n_long < 2:
            raise ValueError("ls+ needs at least 2 long-term slots")
        if self.tag in ("tp", "tp+") and self.short_depth != 3:
            raise ValueError("tp/tp+ need a short-term depth of 3")

    @property
    def candidate_count(self) -> int:
        if self.tag == "ls+":
            return self.n_long
        if self.tag == "tp+":
            return 2
        return 1

    @property
    def signal_bits(self) -> int:
        """Bits spent per P frame to signal the chosen hypothesis."""
        if not self.adaptive:
            return 0
        return max(1, math.ceil(math.log2(self.candidate_count)))


#: Registry in bitstream tag order (the u8 structure id is the list index).
STRUCTURE_ORDER = ("ls", "ls+", "ss", "tp", "tp+", "ll")

STRUCTURES = {
    "ls": PredictionStructure("ls", 1, 1, False),
    "ls+": PredictionStructure("ls+", 2, 1, True),
    "ss": PredictionStructure("ss", 1, 1, False),
    "tp": PredictionStructure("tp", 1, 3, False),
    "tp+": PredictionStructure("tp+", 1, 3, True),
    "ll": PredictionStructure("ll", 2, 1, False),
}


def get_structure(tag: str, n_long: int | None = None) -> PredictionStructure:
    if tag not in STRUCTURES:
        raise ValueError(f"unknown structure {tag!r}; pick one of {', '.join(STRUCTURE_ORDER)}")
    s = STRUCTURES[tag]
    if n_long is not None and n_long != s.n_long:
        s = replace(s, n_long=n_long)
    return s


def structure_id(tag: str) -> int:
    return STRUCTURE_ORDER.index(tag)


def structure_from_id(sid: int, n_long: int) -> PredictionStructure:
    if not 0 <= sid < len(STRUCTURE_ORDER):
        raise ValueError(f"unknown structure id {sid}")
    return get_structure(STRUCTURE_ORDER[sid], n_long)
