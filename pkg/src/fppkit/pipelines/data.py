"""Dataset and fixture loading."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..arith import QuadElt
from ..errors import DatasetMissing, ParseError
from ..poly import Poly, parse_equations
from ..scheme import Scheme

CUBICS_FILE = "cubics84.txt"
FIXTURES_FILE = "fixtures.txt"
OPTIONAL_FILES = ("r3_quadrics21.txt", "x5h_sextics59.txt", "x5hd_sextics56.txt",
                  "fiveh_section_quadrics.txt")


def load_equations(path: Path, nvars: int | None = None) -> list[Poly]:
    path = Path(path)
    if not path.exists():
        raise DatasetMissing(f"{path} not found")
    return parse_equations(path.read_text(), nvars=nvars)


def load_surface(data_dir: str | Path) -> Scheme:
    """The 84 cubics cutting out the surface in P^9 (codimension 7)."""
    path = Path(data_dir) / CUBICS_FILE
    if not path.exists():
        raise DatasetMissing(
            f"{path} is required but not vendored; place the 84-cubic equation file there")
    eqs = load_equations(path, nvars=10)
    if len(eqs) != 84 or any(f.degree() != 3 for f in eqs):
        raise ParseError(f"{path}: expected 84 cubics, got {len(eqs)} equations")
    return Scheme(eqs, "surface", codim=7)


def optional_dataset(data_dir: str | Path, name: str, nvars: int | None = None):
    path = Path(data_dir) / name
    return load_equations(path, nvars) if path.exists() else None


@dataclass
class Fixtures:
    blocks: dict = field(default_factory=dict)

    def equations(self, name: str) -> list[Poly]:
        return self.blocks[name]

    def one(self, name: str) -> Poly:
        (f,) = self.blocks[name]
        return f

    @property
    def cuts(self) -> dict:
        return dict(zip(self.blocks["cut_labels"], self.blocks["cuts"]))

    @property
    def search_triples(self) -> set:
        return {tuple(t) for t in self.blocks["search_triples"]}

    @property
    def c7_fixed_points(self) -> list:
        return self.blocks["c7_fixed_points"]

    @property
    def image_singular_points(self) -> list:
        return self.blocks["image_singular_points"]


def parse_fixtures(text: str) -> Fixtures:
    blocks: dict = {}
    name = kind = None
    buf: list = []

    def flush():
        if name is None:
            return
        body = "\n".join(buf)
        if kind == "equations":
            blocks[name] = parse_equations(body)
        elif kind in ("points", "triples"):
            rows = []
            for ln in buf:
                ln = ln.split("#", 1)[0].strip()
                if ln:
                    vals = [int(t) for t in ln.split()]
                    rows.append(tuple(vals) if kind == "triples" else
                                tuple(QuadElt(v) for v in vals))
            blocks[name] = rows
        elif kind == "labels":
            blocks[name] = [t for ln in buf for t in ln.split("#", 1)[0].split()]
        else:
            raise ParseError(f"unknown fixture block kind {kind!r}")

    for raw in text.splitlines():
        if raw.startswith("@"):
            flush()
            parts = raw[1:].split()
            if len(parts) != 2:
                raise ParseError(f"bad block header {raw!r}")
            name, kind = parts
            buf = []
        elif name is not None:
            buf.append(raw)
    flush()
    return Fixtures(blocks)


def load_fixtures(data_dir: str | Path) -> Fixtures:
    path = Path(data_dir) / FIXTURES_FILE
    if not path.exists():
        raise DatasetMissing(f"{path} not found")
    return parse_fixtures(path.read_text())
