import struct

import numpy as np
import pytest

from qfdsym import formats
from qfdsym.degeneracy import degeneracy_matrix
from qfdsym.group import full_group, group_for
from qfdsym.lattice import hexagonal, square
from qfdsym.stats import ensemble_stats
from qfdsym.train import train_from_stats


def test_empty_chip_file(tmp_path):
    path = tmp_path / "empty.qfdc"
    formats.write_chips(path, square(3), np.zeros((0, 9)))
    assert path.stat().st_size == 17
    spec, chips = formats.read_chips(path)
    assert spec == square(3) and chips.shape == (0, 9)


def test_chip_file_layout(tmp_path):
    chips = np.arange(12, dtype=float).reshape(3, 4) * 0.1
    path = tmp_path / "c.qfdc"
    formats.write_chips(path, square(2), chips)
    raw = path.read_bytes()
    assert len(raw) == 17 + 3 * 4 * 8 == 113
    assert raw[:4] == b"QFDC"
    assert struct.unpack("<IBII", raw[4:17]) == (1, 0, 2, 3)
    assert struct.unpack("<d", raw[17:25])[0] == chips[0, 0]


def test_chip_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    chips = rng.standard_normal((5, 19)) * 1e300
    chips[0, 0] = -0.0
    chips[1, 1] = np.nextafter(0, 1)
    path = tmp_path / "h.qfdc"
    formats.write_chips(path, hexagonal(3), chips)
    spec, back = formats.read_chips(path)
    assert spec == hexagonal(3)
    assert back.tobytes() == chips.tobytes()


def test_chip_file_errors(tmp_path):
    good = formats.encode_chips(square(2), np.ones((2, 4)))
    with pytest.raises(formats.MagicMismatch):
        formats.decode_chips(b"XXXX" + good[4:])
    with pytest.raises(formats.TruncatedFile):
        formats.decode_chips(good[:-3])
    with pytest.raises(formats.TruncatedFile):
        formats.decode_chips(good[:10])
    with pytest.raises(formats.DimensionMismatch):
        formats.decode_chips(good + b"\0" * 8)
    bad_n = good[:9] + struct.pack("<I", 0) + good[13:]
    with pytest.raises(formats.DimensionMismatch):
        formats.decode_chips(bad_n)
    # errors are distinct types under one base
    assert len({formats.MagicMismatch, formats.TruncatedFile, formats.DimensionMismatch}) == 3


def _stats(spec, selector="full", count=30, seed=0):
    D = degeneracy_matrix(group_for(spec, selector))
    return ensemble_stats(D, np.random.default_rng(seed).standard_normal((count, spec.N)))


@pytest.mark.parametrize("spec, selector", [(square(3), "full"), (hexagonal(2), "rot3"), (square(2), "mirror-y")])
def test_stats_roundtrip(tmp_path, spec, selector):
    st = _stats(spec, selector)
    path = tmp_path / "s.qsta"
    formats.write_stats(path, st)
    back = formats.read_stats(path)
    assert back.count == st.count and back.fingerprint == st.fingerprint
    assert back.mean.tobytes() == st.mean.tobytes()
    assert back.cov.tobytes() == st.cov.tobytes()
    k = st.dof
    assert path.stat().st_size == 13 + 1 + len(selector) + 16 + 8 * k + 8 * k * (k + 1) // 2


def test_stats_header_fields():
    raw = formats.encode_stats(_stats(square(3)))
    assert raw[:4] == b"QSTA"
    assert struct.unpack("<IBI", raw[4:13]) == (1, 0, 3)
    assert raw[13] == 4 and raw[14:18] == b"full"
    assert struct.unpack("<IIQ", raw[18:34]) == (3, 11, 30)


def test_stats_single_chip_roundtrip():
    back = formats.decode_stats(formats.encode_stats(_stats(square(2), count=1)))
    assert back.count == 1 and not back.cov_valid


def test_stats_errors():
    raw = formats.encode_stats(_stats(square(3)))
    with pytest.raises(formats.MagicMismatch):
        formats.decode_stats(b"QMOD" + raw[4:])
    with pytest.raises(formats.TruncatedFile):
        formats.decode_stats(raw[:-1])
    wrong_dof = raw[:18] + struct.pack("<II", 4, 11) + raw[26:]
    with pytest.raises(formats.DimensionMismatch):
        formats.decode_stats(wrong_dof)


def test_model_roundtrip(tmp_path):
    spec = square(3)
    model = train_from_stats(_stats(spec, seed=1, count=60), _stats(spec, seed=2, count=60), lam=0.25,
                             pinv_tol=1e-9)
    path = tmp_path / "m.qmod"
    formats.write_model(path, model)
    back = formats.read_model(path)
    assert back.reduced_coeffs.tobytes() == model.reduced_coeffs.tobytes()
    assert (back.lam, back.pinv_tol, back.selector, back.lattice) == (0.25, 1e-9, "full", spec)
    assert back.fingerprint == model.fingerprint
    raw = path.read_bytes()
    assert raw[:4] == b"QMOD"
    assert len(raw) == 13 + 5 + 20 + 8 * model.dof


def test_model_dof_mismatch():
    spec = square(3)
    model = train_from_stats(_stats(spec, seed=1), _stats(spec, seed=2))
    raw = formats.encode_model(model)
    # claim the coefficients belong to the trivial group
    patched = raw[:13] + b"\x07trivial" + raw[18:]
    with pytest.raises(ValueError):
        formats.decode_model(patched)
