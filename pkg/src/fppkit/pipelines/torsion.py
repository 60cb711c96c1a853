"""The 15 nontrivial torsion classes and the group table built from relations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

LABELS = ["D"] + [f"D{i}" for i in range(1, 15)]
BASIS = ("D", "D1", "D2", "D3")


@dataclass(frozen=True)
class TorsionClass:
    label: str
    vector: tuple | None = None   # coordinates in F_2^4 w.r.t. BASIS
    cut: object = None

    @property
    def orbit(self) -> str:
        return class_orbit(self.label)


def class_orbit(label: str) -> str:
    """Representative of the C7-orbit: D, D1 or D8."""
    if label == "D":
        return "D"
    i = int(label[1:])
    return "D1" if 1 <= i <= 7 else "D8"


def translate_index(label: str) -> int:
    """j with label = g7^j applied to the orbit representative."""
    if label == "D":
        return 0
    i = int(label[1:])
    return (i - 1) % 7


def c7_shift(label: str) -> str:
    """Relabel under one more g7 translation."""
    if label == "D":
        return "D"
    i = int(label[1:])
    base = 1 if i <= 7 else 8
    return f"D{base + (i - base + 1) % 7}"


def reconstruct_coordinates(relations) -> dict:
    """F_2^4 coordinates of every class from zero-sum triples.

    D, D1, D2, D3 are the unit vectors; other classes are solved from a
    relation with two already known classes until nothing changes.
    """
    coords = {b: tuple(int(i == k) for i in range(4)) for k, b in enumerate(BASIS)}
    rel = [tuple(r) for r in relations]
    changed = True
    while changed:
        changed = False
        for r in rel:
            unknown = [c for c in r if c not in coords]
            if len(unknown) == 1:
                a, b = (c for c in r if c in coords)
                coords[unknown[0]] = tuple(x ^ y for x, y in zip(coords[a], coords[b]))
                changed = True
    return coords


def zero_sum_triples(coords: dict) -> set:
    out = set()
    for a, b, c in itertools.combinations(sorted(coords, key=LABELS.index), 3):
        if all(x ^ y ^ z == 0 for x, y, z in zip(coords[a], coords[b], coords[c])):
            out.add((a, b, c))
    return out


def check_group_table(relations) -> dict:
    """Consistency of a relation set with (Z/2)^4 on the 15 labels."""
    rel = {tuple(sorted(r, key=LABELS.index)) for r in relations}
    coords = reconstruct_coordinates(rel)
    complete = set(coords) == set(LABELS)
    vecs = list(coords.values())
    distinct = len(set(vecs)) == len(vecs) and all(any(v) for v in vecs)
    consistent = complete and distinct and zero_sum_triples(coords) == rel
    shifted = {tuple(sorted((c7_shift(a) for a in r), key=LABELS.index)) for r in rel}
    return {"coordinates": coords, "complete": complete, "distinct": distinct,
            "consistent": consistent, "c7_closed": shifted == rel,
            "relations": len(rel)}


def expected_relations() -> dict:
    """The relations among D1..D7 and D8 = D + D1 that the table must contain."""
    return {"D4": ("D1", "D2"), "D5": ("D2", "D3"), "D6": ("D1", "D2", "D3"),
            "D7": ("D1", "D3"), "D8": ("D", "D1")}


def verify_expected(coords: dict) -> dict:
    out = {}
    for target, parts in expected_relations().items():
        acc = (0, 0, 0, 0)
        for p in parts:
            acc = tuple(x ^ y for x, y in zip(acc, coords.get(p, (9, 9, 9, 9))))
        out[target] = coords.get(target) == acc
    return out
