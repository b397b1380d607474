"""Binary file formats: chip sets (QFDC), ensemble statistics (QSTA), models (QMOD).

Every integer and float is little-endian.  Floats are IEEE-754 binary64.

QFDC  magic "QFDC" | version u32 | kind u8 | n u32 | count u32 | count*N f64
QSTA  magic "QSTA" | version u32 | kind u8 | n u32 | selector | dof_linear u32 |
      dof_quadratic u32 | count u64 | mean (dof f64) | packed lower triangle of
      the covariance, row by row (dof*(dof+1)/2 f64)
QMOD  magic "QMOD" | version u32 | kind u8 | n u32 | selector | lambda f64 |
      pinv_tol f64 | dof u32 | f_hat (dof f64)

``selector`` is a u8 byte length followed by the ASCII subgroup name.  Lattice
kind is 0 for square and 1 for hexagonal.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from qfdsym.degeneracy import degeneracy_matrix
from qfdsym.group import canonical_selector, group_for
from qfdsym.lattice import LatticeKind, LatticeSpec
from qfdsym.stats import EnsembleStats
from qfdsym.train import QfdModel

VERSION = 1
_KIND_CODE = {LatticeKind.SQUARE: 0, LatticeKind.HEXAGONAL: 1}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}
_LATTICE = struct.Struct("<4sIBI")
CHIP_HEADER = struct.Struct("<4sIBII")
_STATS_TAIL = struct.Struct("<IIQ")
_MODEL_TAIL = struct.Struct("<ddI")
F64 = np.dtype("<f8")


class FormatError(ValueError):
    pass


class MagicMismatch(FormatError):
    pass


class TruncatedFile(FormatError):
    pass


class DimensionMismatch(FormatError):
    pass


def _read(buf: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(buf):
        raise TruncatedFile(f"file ends inside {what} (need {offset + size} bytes, have {len(buf)})")
    return buf[offset:offset + size]


def _lattice_header(buf: bytes, magic: bytes) -> tuple[LatticeSpec, int]:
    raw = _read(buf, 0, _LATTICE.size, "header")
    return _check_header(magic, *_LATTICE.unpack(raw)), _LATTICE.size


def _check_header(magic, got, version, kind, n) -> LatticeSpec:
    if got != magic:
        raise MagicMismatch(f"expected magic {magic!r}, found {got!r}")
    if version != VERSION:
        raise FormatError(f"unsupported {magic.decode()} version {version}")
    if kind not in _CODE_KIND:
        raise FormatError(f"unknown lattice kind code {kind}")
    if n < 1:
        raise DimensionMismatch(f"support dimension n={n} must be >= 1")
    return LatticeSpec(_CODE_KIND[kind], n)


def _pack_selector(selector: str) -> bytes:
    raw = selector.encode("ascii")
    if len(raw) > 255:
        raise ValueError("selector name too long")
    return struct.pack("<B", len(raw)) + raw


def _unpack_selector(buf: bytes, offset: int) -> tuple[str, int]:
    (length,) = struct.unpack("<B", _read(buf, offset, 1, "selector length"))
    raw = _read(buf, offset + 1, length, "selector")
    return raw.decode("ascii"), offset + 1 + length


def _floats(buf: bytes, offset: int, count: int, what: str) -> np.ndarray:
    raw = _read(buf, offset, count * 8, what)
    return np.frombuffer(raw, dtype=F64).astype(float)


def _exact_length(buf: bytes, expected: int):
    if len(buf) > expected:
        raise DimensionMismatch(f"{len(buf) - expected} trailing bytes after payload")


# --- chips -----------------------------------------------------------------

def encode_chips(spec: LatticeSpec, chips) -> bytes:
    chips = np.asarray(chips, dtype=float).reshape(-1, spec.N) if np.size(chips) else np.zeros((0, spec.N))
    header = CHIP_HEADER.pack(b"QFDC", VERSION, _KIND_CODE[spec.kind], spec.n, len(chips))
    return header + np.ascontiguousarray(chips, dtype=F64).tobytes()


def decode_chips(buf: bytes) -> tuple[LatticeSpec, np.ndarray]:
    raw = _read(buf, 0, CHIP_HEADER.size, "header")
    magic, version, kind, n, count = CHIP_HEADER.unpack(raw)
    spec = _check_header(b"QFDC", magic, version, kind, n)
    N = spec.N
    chips = _floats(buf, CHIP_HEADER.size, count * N, "chip payload").reshape(count, N)
    _exact_length(buf, CHIP_HEADER.size + count * N * 8)
    return spec, chips


def write_chips(path, spec: LatticeSpec, chips) -> None:
    Path(path).write_bytes(encode_chips(spec, chips))


def read_chips(path) -> tuple[LatticeSpec, np.ndarray]:
    return decode_chips(Path(path).read_bytes())


# --- statistics ------------------------------------------------------------

def encode_stats(stats: EnsembleStats) -> bytes:
    D = stats.degeneracy
    spec = D.lattice
    parts = [
        _LATTICE.pack(b"QSTA", VERSION, _KIND_CODE[spec.kind], spec.n),
        _pack_selector(D.selector),
        _STATS_TAIL.pack(D.dof_linear, D.dof_quadratic, stats.count),
        stats.mean.astype(F64).tobytes(),
    ]
    cov = stats.cov if stats.cov_valid else np.zeros((D.dof, D.dof))
    rows, cols = np.tril_indices(D.dof)
    parts.append(cov[rows, cols].astype(F64).tobytes())
    return b"".join(parts)


def decode_stats(buf: bytes) -> EnsembleStats:
    spec, offset = _lattice_header(buf, b"QSTA")
    selector, offset = _unpack_selector(buf, offset)
    dof_lin, dof_quad, count = _STATS_TAIL.unpack(_read(buf, offset, _STATS_TAIL.size, "DOF counts"))
    offset += _STATS_TAIL.size
    D = degeneracy_matrix(group_for(spec, selector))
    if (D.dof_linear, D.dof_quadratic) != (dof_lin, dof_quad):
        raise DimensionMismatch(
            f"header DOF ({dof_lin}, {dof_quad}) disagree with {spec} {selector} ({D.dof_linear}, {D.dof_quadratic})")
    k = D.dof
    mean = _floats(buf, offset, k, "mean")
    offset += 8 * k
    packed = _floats(buf, offset, k * (k + 1) // 2, "covariance")
    offset += 8 * len(packed)
    _exact_length(buf, offset)
    cov = np.zeros((k, k))
    rows, cols = np.tril_indices(k)
    cov[rows, cols] = packed
    cov[cols, rows] = packed
    scatter = cov * (count - 1) if count >= 2 else np.zeros((k, k))
    return EnsembleStats(D, int(count), mean, scatter)


def write_stats(path, stats: EnsembleStats) -> None:
    Path(path).write_bytes(encode_stats(stats))


def read_stats(path) -> EnsembleStats:
    return decode_stats(Path(path).read_bytes())


# --- models ----------------------------------------------------------------

def encode_model(model: QfdModel) -> bytes:
    spec = model.lattice
    return b"".join([
        _LATTICE.pack(b"QMOD", VERSION, _KIND_CODE[spec.kind], spec.n),
        _pack_selector(model.selector),
        _MODEL_TAIL.pack(model.lam, model.pinv_tol, model.dof),
        np.asarray(model.reduced_coeffs, dtype=F64).tobytes(),
    ])


def decode_model(buf: bytes) -> QfdModel:
    spec, offset = _lattice_header(buf, b"QMOD")
    selector, offset = _unpack_selector(buf, offset)
    lam, pinv_tol, dof = _MODEL_TAIL.unpack(_read(buf, offset, _MODEL_TAIL.size, "model parameters"))
    offset += _MODEL_TAIL.size
    coeffs = _floats(buf, offset, dof, "coefficients")
    _exact_length(buf, offset + 8 * dof)
    selector = canonical_selector(spec, selector)
    model = QfdModel(coeffs, spec, selector, lam, pinv_tol)
    D = model.degeneracy  # validates the DOF count against the rebuilt matrix
    object.__setattr__(model, "fingerprint", D.fingerprint)
    return model


def write_model(path, model: QfdModel) -> None:
    Path(path).write_bytes(encode_model(model))


def read_model(path) -> QfdModel:
    return decode_model(Path(path).read_bytes())
