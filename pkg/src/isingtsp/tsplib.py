"""Reading and writing TSPLIB instance and tour files.

Only the coordinate-based symmetric formats needed by the solver are
supported: ``EUC_2D``, ``CEIL_2D`` and ``ATT``.  City ids are 1-based in
the files and 0-based everywhere else in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SUPPORTED_EDGE_WEIGHT_TYPES = ("EUC_2D", "CEIL_2D", "ATT")

_SECTION_KEYWORDS = {
    "NODE_COORD_SECTION",
    "TOUR_SECTION",
    "DISPLAY_DATA_SECTION",
    "EDGE_WEIGHT_SECTION",
    "DEPOT_SECTION",
    "DEMAND_SECTION",
    "FIXED_EDGES_SECTION",
}


class TSPLIBError(ValueError):
    """Base class for malformed TSPLIB input."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class MissingDimensionError(TSPLIBError):
    pass


class UnsupportedEdgeWeightTypeError(TSPLIBError):
    pass


class CoordinateCountError(TSPLIBError):
    pass


class MalformedNumberError(TSPLIBError):
    pass


class TourError(TSPLIBError):
    pass


class DuplicateCityError(TourError):
    pass


class CityIdRangeError(TourError):
    pass


class TourSizeError(TourError):
    pass


@dataclass(frozen=True)
class Instance:
    name: str
    dimension: int
    edge_weight_type: str
    coords: np.ndarray
    comment: str = ""
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.coords.shape != (self.dimension, 2):
            raise CoordinateCountError(
                f"expected {self.dimension} coordinates, got {self.coords.shape[0]}"
            )


def _split_keyword(line: str) -> tuple[str, str]:
    if ":" in line:
        key, value = line.split(":", 1)
        return key.strip().upper(), value.strip()
    parts = line.split(None, 1)
    return parts[0].upper(), (parts[1].strip() if len(parts) > 1 else "")


def _to_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        # some files write integral ids as "1.0"
        try:
            value = float(token)
        except ValueError:
            raise MalformedNumberError(f"not a number: {token!r}", lineno) from None
        if not value.is_integer():
            raise MalformedNumberError(f"not an integer: {token!r}", lineno)
        return int(value)


def _to_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MalformedNumberError(f"not a number: {token!r}", lineno) from None
    if not np.isfinite(value):
        raise MalformedNumberError(f"non-finite coordinate: {token!r}", lineno)
    return value


def parse_instance(text: str) -> Instance:
    """Parse the text of a ``.tsp`` file.

    Unknown keywords are kept in ``Instance.extra`` and otherwise ignored.
    Raises a :class:`TSPLIBError` subclass carrying the offending line
    number on any problem.
    """
    header: dict[str, str] = {}
    header_line: dict[str, int] = {}
    coords_by_id: dict[int, tuple[float, float]] = {}
    section_line = None
    in_coords = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper == "EOF":
            break
        if in_coords:
            head = upper.split()[0].rstrip(":")
            if head in _SECTION_KEYWORDS:
                in_coords = False
            else:
                tokens = line.split()
                if len(tokens) != 3:
                    raise MalformedNumberError(
                        f"expected 'id x y', got {len(tokens)} tokens", lineno
                    )
                city = _to_int(tokens[0], lineno)
                x = _to_float(tokens[1], lineno)
                y = _to_float(tokens[2], lineno)
                if city in coords_by_id:
                    raise CoordinateCountError(f"city id {city} listed twice", lineno)
                coords_by_id[city] = (x, y)
                continue
        key = upper.split()[0].rstrip(":")
        if key in _SECTION_KEYWORDS:
            if key == "NODE_COORD_SECTION":
                in_coords = True
                section_line = lineno
            # other sections are skipped up to the next keyword line
            continue
        key, value = _split_keyword(line)
        header[key] = value
        header_line[key] = lineno

    if "DIMENSION" not in header:
        raise MissingDimensionError("DIMENSION keyword missing")
    dimension = _to_int(header["DIMENSION"], header_line["DIMENSION"])
    if dimension < 1:
        raise MissingDimensionError(
            f"DIMENSION must be positive, got {dimension}", header_line["DIMENSION"]
        )

    ewt = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if ewt not in SUPPORTED_EDGE_WEIGHT_TYPES:
        raise UnsupportedEdgeWeightTypeError(
            f"unsupported EDGE_WEIGHT_TYPE {ewt or '<missing>'!r}; "
            f"supported: {', '.join(SUPPORTED_EDGE_WEIGHT_TYPES)}",
            header_line.get("EDGE_WEIGHT_TYPE"),
        )

    if section_line is None:
        raise CoordinateCountError("NODE_COORD_SECTION missing")
    if len(coords_by_id) != dimension:
        raise CoordinateCountError(
            f"DIMENSION is {dimension} but {len(coords_by_id)} coordinates were read",
            section_line,
        )
    ids = sorted(coords_by_id)
    if ids[0] != 1 or ids[-1] != dimension:
        raise CoordinateCountError(
            f"city ids must be 1..{dimension}, got {ids[0]}..{ids[-1]}", section_line
        )
    coords = np.array([coords_by_id[i] for i in ids], dtype=np.float64)

    known = {"NAME", "DIMENSION", "EDGE_WEIGHT_TYPE", "COMMENT"}
    return Instance(
        name=header.get("NAME", ""),
        dimension=dimension,
        edge_weight_type=ewt,
        coords=coords,
        comment=header.get("COMMENT", ""),
        extra={k: v for k, v in header.items() if k not in known},
    )


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8", errors="replace"))


def validate_tour(order, n: int) -> np.ndarray:
    """Return ``order`` as an int array after checking it is a permutation of 0..n-1."""
    order = np.asarray(order, dtype=np.int64)
    if order.ndim != 1 or len(order) != n:
        raise TourSizeError(f"tour has {order.size} entries, expected {n}")
    if n and (order.min() < 0 or order.max() >= n):
        raise CityIdRangeError(f"city index out of range [0, {n})")
    if len(np.unique(order)) != n:
        raise DuplicateCityError("tour visits a city more than once")
    return order


def parse_tour(text: str, n: int) -> np.ndarray:
    """Parse a ``.tour`` file body and return a 0-based permutation."""
    ids: list[int] = []
    seen: set[int] = set()
    in_section = False
    done = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if not in_section:
            if line.upper().startswith("TOUR_SECTION"):
                in_section = True
            continue
        if line.upper() == "EOF":
            break
        for token in line.split():
            city = _to_int(token, lineno)
            if city == -1:
                done = True
                break
            if city < 1 or city > n:
                raise CityIdRangeError(f"city id {city} outside 1..{n}", lineno)
            if city in seen:
                raise DuplicateCityError(f"city id {city} appears twice", lineno)
            seen.add(city)
            ids.append(city - 1)
        if done:
            break
    if not in_section:
        raise TourError("TOUR_SECTION missing")
    if len(ids) != n:
        raise TourSizeError(f"tour lists {len(ids)} cities, expected {n}")
    return np.array(ids, dtype=np.int64)


def read_tour(path, n: int) -> np.ndarray:
    return parse_tour(Path(path).read_text(encoding="utf-8", errors="replace"), n)


def write_tour(tour, name: str = "", comment: str | None = None) -> str:
    order = validate_tour(tour, len(tour))
    name = name or "UNNAMED"
    lines = [f"NAME : {name}", "TYPE : TOUR"]
    if comment:
        lines.append(f"COMMENT : {comment}")
    lines += [f"DIMENSION : {len(order)}", "TOUR_SECTION"]
    lines += [str(int(c) + 1) for c in order]
    lines += ["-1", "EOF", ""]
    return "\n".join(lines)
