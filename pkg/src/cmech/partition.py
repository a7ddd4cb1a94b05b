"""Assignments of length-K histories to effective states."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Partition:
    """Disjoint classes of histories.

    Classes are stored canonically: members sorted, classes ordered by
    their lexicographically smallest member. Two partitions with the same
    blocks therefore compare equal regardless of construction order.
    """

    classes: tuple
    assignment: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        classes = [tuple(sorted(c)) for c in self.classes]
        if any(not c for c in classes):
            raise ValueError("empty class")
        classes.sort(key=lambda c: c[0])
        assignment = {}
        for idx, members in enumerate(classes):
            for h in members:
                if h in assignment:
                    raise ValueError(f"history {h} appears in two classes")
                assignment[h] = idx
        object.__setattr__(self, "classes", tuple(classes))
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def from_labels(cls, histories, labels):
        groups = {}
        for h, lab in zip(histories, labels):
            groups.setdefault(lab, []).append(h)
        return cls(tuple(groups.values()))

    def __len__(self):
        return len(self.classes)

    @property
    def histories(self):
        return sorted(self.assignment)

    def class_of(self, history) -> int:
        return self.assignment[history]

    def refines(self, other: "Partition") -> bool:
        """True when every class here lies inside one class of ``other``."""
        for members in self.classes:
            targets = {other.assignment.get(h) for h in members}
            if len(targets) != 1 or None in targets:
                return False
        return True

    def same_blocks(self, other: "Partition") -> bool:
        return self.classes == other.classes
