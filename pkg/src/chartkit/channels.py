"""Channel, dataset, distance-matrix and chart value types, plus file I/O.

Channel entries are laid out antenna-major inside subcarrier blocks: entry
``m = s * A + a`` holds antenna ``a`` on subcarrier ``s``.  That is the order
produced by ``np.kron(freq_vector, steering_vector)``.

Binary dataset layout (all little-endian)::

    b"CCH1" | u32 N | u32 A | u32 S | u8 D | f64 frequency_grid[S]
    | per channel: f64 (re, im) * A*S | if D > 0: f64 positions[N][D]
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import (
    DatasetIOError,
    FormatError,
    InvariantError,
    ParseError,
    TruncationError,
)

MAGIC = b"CCH1"
_HEADER = struct.Struct("<4sIIIB")
HEADER_SIZE = _HEADER.size  # 17 bytes
_WRITE_BLOCK_ROWS = 4096


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


def _same_bits(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return a.shape == b.shape and a.dtype == b.dtype and a.tobytes() == b.tobytes()


@dataclass(frozen=True, eq=False)
class ChannelVector:
    """One user's complex channel over ``antenna_count * subcarrier_count`` entries."""

    entries: np.ndarray
    antenna_count: int
    subcarrier_count: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 1:
            raise InvariantError("channel entries must be one-dimensional")
        if self.antenna_count < 1 or self.subcarrier_count < 1:
            raise InvariantError("antenna and subcarrier counts must be positive")
        if entries.size != self.antenna_count * self.subcarrier_count:
            raise InvariantError(
                f"channel has {entries.size} entries, expected "
                f"A*S = {self.antenna_count}*{self.subcarrier_count}"
            )
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def dimension(self) -> int:
        return self.entries.size

    def entry(self, antenna: int, subcarrier: int) -> complex:
        return complex(self.entries[subcarrier * self.antenna_count + antenna])

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, ChannelVector):
            return NotImplemented
        return (
            self.antenna_count == other.antenna_count
            and self.subcarrier_count == other.subcarrier_count
            and _same_bits(self.entries, other.entries)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ChannelDataset:
    """N channels sharing one (A, S) layout, with optional ground-truth positions.

    ``matrix`` is the N x (A*S) complex array of channels, one per row.
    ``metadata`` is descriptive only: it is not stored in the binary format and
    is ignored by equality.
    """

    matrix: np.ndarray
    antenna_count: int
    subcarrier_count: int
    frequency_grid: np.ndarray
    positions: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        A, S = int(self.antenna_count), int(self.subcarrier_count)
        if A < 1 or S < 1:
            raise InvariantError("antenna and subcarrier counts must be positive")
        H = np.asarray(self.matrix, dtype=np.complex128)
        if H.ndim != 2:
            raise InvariantError("channel matrix must be N x M")
        if H.shape[1] != A * S:
            raise InvariantError(
                f"channels have dimension {H.shape[1]}, expected A*S = {A}*{S} = {A * S}"
            )
        if not np.all(np.isfinite(H)):
            raise InvariantError("channel entries must be finite")
        freqs = np.asarray(self.frequency_grid, dtype=np.float64).reshape(-1)
        if freqs.size != S:
            raise InvariantError(f"frequency grid has {freqs.size} entries, expected S = {S}")
        if S > 1 and not np.all(np.diff(freqs) > 0):
            raise InvariantError("frequency grid must be strictly increasing")
        pos = self.positions
        if pos is not None:
            pos = np.asarray(pos, dtype=np.float64)
            if pos.ndim != 2 or pos.shape[0] != H.shape[0]:
                raise InvariantError("positions must be an N x D array with one row per channel")
            if pos.shape[1] not in (2, 3):
                raise InvariantError(f"position dimension must be 2 or 3, got {pos.shape[1]}")
            if not np.all(np.isfinite(pos)):
                raise InvariantError("positions must be finite")
            object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "antenna_count", A)
        object.__setattr__(self, "subcarrier_count", S)
        object.__setattr__(self, "matrix", _frozen(H))
        object.__setattr__(self, "frequency_grid", _frozen(freqs))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self):
        return self.matrix.shape[0]

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @property
    def position_dim(self) -> int:
        return 0 if self.positions is None else self.positions.shape[1]

    def channel(self, i: int) -> ChannelVector:
        return ChannelVector(self.matrix[i], self.antenna_count, self.subcarrier_count)

    @property
    def channels(self) -> tuple:
        return tuple(self.channel(i) for i in range(len(self)))

    @classmethod
    def from_channels(cls, channels: Sequence[ChannelVector], frequency_grid,
                      positions=None, metadata=None) -> "ChannelDataset":
        if not channels:
            raise InvariantError("a dataset needs at least one channel")
        A, S = channels[0].antenna_count, channels[0].subcarrier_count
        for i, ch in enumerate(channels):
            if (ch.antenna_count, ch.subcarrier_count) != (A, S):
                raise InvariantError(f"channel {i} has layout "
                                     f"({ch.antenna_count}, {ch.subcarrier_count}), expected ({A}, {S})")
        H = np.stack([ch.entries for ch in channels])
        return cls(H, A, S, frequency_grid, positions, metadata or {})

    def __eq__(self, other):
        if not isinstance(other, ChannelDataset):
            return NotImplemented
        return (
            self.antenna_count == other.antenna_count
            and self.subcarrier_count == other.subcarrier_count
            and _same_bits(self.matrix, other.matrix)
            and _same_bits(self.frequency_grid, other.frequency_grid)
            and _same_bits(self.positions, other.positions)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric, zero-diagonal, nonnegative N x N matrix of pairwise distances."""

    values: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.values, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise InvariantError("distance matrix must be square")
        if not np.all(np.isfinite(D)):
            raise InvariantError("distance matrix entries must be finite")
        if np.any(D < 0):
            raise InvariantError("distance matrix entries must be nonnegative")
        if np.any(np.diagonal(D) != 0):
            raise InvariantError("distance matrix must have a zero diagonal")
        if not np.array_equal(D, D.T):
            raise InvariantError("distance matrix must be exactly symmetric")
        object.__setattr__(self, "values", _frozen(D))

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, idx):
        return self.values[idx]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def to_csv(self, sink: TextIO) -> None:
        """Row-major full matrix, header ``d0,d1,...``."""
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow([f"d{j}" for j in range(self.size)])
        for row in self.values:
            writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True, eq=False)
class Chart:
    """N points in a D'-dimensional chart; every coordinate finite."""

    points: np.ndarray

    def __post_init__(self):
        Z = np.asarray(self.points, dtype=np.float64)
        if Z.ndim == 1:
            Z = Z[:, None]
        if Z.ndim != 2:
            raise InvariantError("chart points must be an N x D' array")
        if not np.all(np.isfinite(Z)):
            raise InvariantError("chart points must be finite")
        object.__setattr__(self, "points", _frozen(Z))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def is_centered(self, rtol: float = 1e-9) -> bool:
        means = np.abs(self.points.mean(axis=0))
        return bool(np.all(means <= rtol * self.points.std(axis=0) + 1e-300))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)


# ---------------------------------------------------------------- binary I/O


def _write_all(sink: BinaryIO, data, offset: int) -> int:
    view = memoryview(data).cast("B")
    while len(view):
        try:
            n = sink.write(view)
        except OSError as exc:
            raise DatasetIOError(f"write failed at byte offset {offset}: {exc}", offset) from exc
        if n is None:
            n = len(view)
        if n <= 0:
            raise DatasetIOError(f"sink accepted no bytes at offset {offset}", offset)
        offset += n
        view = view[n:]
    return offset


def write_dataset(dataset: ChannelDataset, sink: BinaryIO) -> int:
    """Serialize ``dataset`` to a binary sink and return the number of bytes written."""
    N, A, S, D = len(dataset), dataset.antenna_count, dataset.subcarrier_count, dataset.position_dim
    offset = _write_all(sink, _HEADER.pack(MAGIC, N, A, S, D), 0)
    offset = _write_all(sink, dataset.frequency_grid.astype("<f8").tobytes(), offset)
    for start in range(0, N, _WRITE_BLOCK_ROWS):
        block = dataset.matrix[start:start + _WRITE_BLOCK_ROWS]
        offset = _write_all(sink, block.astype("<c16").tobytes(), offset)
    if D:
        offset = _write_all(sink, dataset.positions.astype("<f8").tobytes(), offset)
    return offset


def _read_exact(source: BinaryIO, n: int) -> bytes:
    chunks, got = [], 0
    while got < n:
        chunk = source.read(n - got)
        if not chunk:
            break
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def read_dataset(source: BinaryIO) -> ChannelDataset:
    """Parse a binary dataset; malformed input raises instead of being repaired."""
    magic = _read_exact(source, 4)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    rest = _read_exact(source, HEADER_SIZE - 4)
    if len(rest) < HEADER_SIZE - 4:
        raise TruncationError("truncated header", HEADER_SIZE, 4 + len(rest))
    _, N, A, S, D = _HEADER.unpack(magic + rest)
    if A < 1 or S < 1 or N < 1:
        raise InvariantError(f"header announces N={N}, A={A}, S={S}; all must be positive")
    if D not in (0, 2, 3):
        raise FormatError(f"position dimension {D} not in {{0, 2, 3}}")
    M = A * S

    raw = _read_exact(source, 8 * S)
    if len(raw) < 8 * S:
        raise TruncationError("truncated frequency grid", 8 * S, len(raw))
    freqs = np.frombuffer(raw, dtype="<f8").astype(np.float64)

    expected = 16 * M * N
    raw = _read_exact(source, expected)
    if len(raw) < expected:
        idx = len(raw) // (16 * M)
        raise TruncationError(
            f"payload truncated in channel {idx}: expected {expected} channel bytes, got {len(raw)}",
            expected, len(raw), channel_index=idx,
        )
    H = np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape(N, M)

    positions = None
    if D:
        expected = 8 * N * D
        raw = _read_exact(source, expected)
        if len(raw) < expected:
            raise TruncationError(
                f"positions truncated: expected {expected} bytes, got {len(raw)}", expected, len(raw))
        positions = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(N, D)
    if source.read(1):
        raise FormatError("trailing bytes after dataset payload")
    return ChannelDataset(H, A, S, freqs, positions)


def save_dataset(dataset: ChannelDataset, path) -> int:
    with open(path, "wb") as fh:
        return write_dataset(dataset, fh)


def load_dataset(path) -> ChannelDataset:
    with open(path, "rb") as fh:
        ds = read_dataset(fh)
    return ds


# ---------------------------------------------------------------- CSV import


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def import_csv(source: TextIO, antenna_count: int, subcarrier_count: int,
               frequency_grid: Optional[Iterable[float]] = None) -> ChannelDataset:
    """Read channels from CSV rows of interleaved (re, im) values.

    Each row holds ``2*A*S`` numbers, optionally followed by 2 or 3 position
    columns.  Blank lines and lines starting with ``#`` are skipped, and a
    leading non-numeric row is taken as a header.  Without ``frequency_grid``
    the subcarrier indices ``0..S-1`` stand in for frequencies.
    """
    A, S = int(antenna_count), int(subcarrier_count)
    if A < 1 or S < 1:
        raise InvariantError("antenna and subcarrier counts must be positive")
    n_chan = 2 * A * S
    rows, width, first = [], None, True
    for lineno, fields in enumerate(csv.reader(source), start=1):
        if not fields or not "".join(fields).strip() or fields[0].lstrip().startswith("#"):
            continue
        if first and not all(_is_number(f) for f in fields):
            first = False
            continue
        first = False
        if width is None:
            width = len(fields)
            if width - n_chan not in (0, 2, 3):
                raise ParseError(
                    f"row {lineno}: {width} fields, expected {n_chan} channel values "
                    f"plus 0, 2 or 3 position columns", lineno)
        elif len(fields) != width:
            raise ParseError(f"row {lineno}: {len(fields)} fields, expected {width}", lineno)
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise ParseError(f"row {lineno}: {exc}", lineno) from exc
    if not rows:
        raise FormatError("no data rows")
    data = np.asarray(rows, dtype=np.float64)
    interleaved = np.ascontiguousarray(data[:, :n_chan])
    H = interleaved.view(np.complex128)
    positions = data[:, n_chan:] if width > n_chan else None
    freqs = (np.arange(S, dtype=np.float64) if frequency_grid is None
             else np.asarray(list(frequency_grid), dtype=np.float64))
    return ChannelDataset(H, A, S, freqs, positions, {"source": "csv"})


def import_csv_file(path, antenna_count: int, subcarrier_count: int, frequency_grid=None):
    with open(Path(path), newline="") as fh:
        return import_csv(fh, antenna_count, subcarrier_count, frequency_grid)
