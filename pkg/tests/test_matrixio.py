import numpy as np
import pytest

from jointcdi.codebooks import dft_codebook, rvq_codebook
from jointcdi.matrixio import (export_codebook, format_matrix, parse_matrices, parse_matrix,
                               read_matrix, write_matrix)


def test_format_example():
    assert format_matrix(np.array([[1, 2j]])) == "1 2\n1.0 0.0 0.0 2.0\n"


def test_round_trip_is_exact(rng, tmp_path):
    M = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    np.testing.assert_array_equal(parse_matrix(format_matrix(M)), M)
    write_matrix(tmp_path / "m.txt", M)
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.txt"), M)


def test_several_blocks_and_comments():
    text = "# two\n1 1\n1 0\n\n# second\n2 1\n0 1\n-1 0\n"
    a, b = parse_matrices(text)
    assert a.shape == (1, 1) and b.shape == (2, 1)
    np.testing.assert_array_equal(b[:, 0], [1j, -1])
    with pytest.raises(ValueError, match="exactly one"):
        parse_matrix(text)


@pytest.mark.parametrize("text,fragment", [
    ("2 2\n1 0 0 0\n", "ends early"),
    ("1 2\n1 0 0\n", "line 2: expected 4"),
    ("1 x\n1 0\n", "non-integer"),
    ("1 1\n1 zz\n", "malformed"),
    ("0 1\n", "positive"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ValueError, match=fragment):
        parse_matrix(text)


def test_export_codebook(rng):
    mats = parse_matrices(export_codebook(rvq_codebook(3, 2, rng)))
    assert len(mats) == 4 and all(m.shape == (3, 1) for m in mats)
    mats = parse_matrices(export_codebook(dft_codebook(4, 2)))
    assert len(mats) == 4 and mats[0].shape == (4, 2)
