"""The four-class signal-transformation pretext task.

Class labels: 1 = time reversal, 2 = amplitude reversal, 3 = both, 4 = the
original window. All three transforms are norm-preserving involutions, and
transforms 1 and 2 commute.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .dsp import Window
from .errors import ContractViolation

TIME_REVERSED = 1
AMPLITUDE_REVERSED = 2
TIME_AMPLITUDE_REVERSED = 3
ORIGINAL = 4

ALL_CLASSES = (TIME_REVERSED, AMPLITUDE_REVERSED, TIME_AMPLITUDE_REVERSED, ORIGINAL)
N_CLASSES = len(ALL_CLASSES)


@dataclass(frozen=True)
class LabeledWindow:
    window: Window
    label: int

    def __post_init__(self):
        if self.label not in ALL_CLASSES:
            raise ContractViolation(f"label must be in {ALL_CLASSES}, got {self.label}")


def time_reverse(w: Window) -> Window:
    return replace(w, values=w.values[::-1].copy())


def amplitude_reverse(w: Window) -> Window:
    return replace(w, values=-w.values)


def time_amplitude_reverse(w: Window) -> Window:
    return replace(w, values=-w.values[::-1])


def build_pretext_dataset(windows: list[Window]) -> list[LabeledWindow]:
    """Emit the four labeled variants of every window, variants adjacent.

    Output order per input window: time reversal (1), amplitude reversal (2),
    both (3), original (4). Class counts are exactly balanced.
    """
    if not windows:
        raise ContractViolation("cannot build a pretext dataset from zero windows")
    out = []
    for w in windows:
        out.append(LabeledWindow(time_reverse(w), TIME_REVERSED))
        out.append(LabeledWindow(amplitude_reverse(w), AMPLITUDE_REVERSED))
        out.append(LabeledWindow(time_amplitude_reverse(w), TIME_AMPLITUDE_REVERSED))
        out.append(LabeledWindow(w, ORIGINAL))
    return out
