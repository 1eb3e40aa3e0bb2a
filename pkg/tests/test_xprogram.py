"""
Unit tests for the X-program data model.

Tests cover:
- exact rational actions
- P_s extraction
- special-case classification
- diagonal concatenation
- the X-program file format
"""

import numpy as np
import pytest

from services.iqp.errors import FormatError, ParameterError
from services.iqp.gf2core import BitMatrix, BitVector
from services.iqp.simulator import bias_from_distribution, distribution_fourier, exact_bias
from services.iqp.xprogram import (
    PI_OVER_8,
    Action,
    ConstantActionProgram,
    XProgram,
    classify_special,
    concat_diagonal,
    parse,
    random_program,
    row_sum,
    serialize,
    submatrix_ps,
)


LINE2_ROWS = ["1000", "1100", "0110", "1011", "0101", "0010", "0001"]


def create_test_program(theta: Action = PI_OVER_8) -> ConstantActionProgram:
    return ConstantActionProgram(BitMatrix.from_strings(LINE2_ROWS), theta)


# ============================================================================
# Actions
# ============================================================================

class TestAction:
    """Tests for rational actions."""

    def test_lowest_terms(self):
        theta = Action(2, 16)
        assert (theta.numerator, theta.denominator) == (1, 8)
        assert theta == PI_OVER_8

    def test_parse_and_str(self):
        assert Action.parse("3/4") == Action(3, 4)
        assert Action.parse("1") == Action(1, 1)
        assert str(Action(-1, 8)) == "-1/8"

    def test_bad_denominator(self):
        with pytest.raises(ParameterError):
            Action(1, 0)

    def test_garbage_rejected(self):
        with pytest.raises(FormatError):
            Action.parse("pi/8")

    def test_radians(self):
        assert Action(1, 2).radians == pytest.approx(np.pi / 2)


# ============================================================================
# P_s Extraction
# ============================================================================

class TestSubmatrixPs:
    """Tests for extracting the rows not orthogonal to s."""

    def test_zero_direction(self):
        assert submatrix_ps(create_test_program().P, BitVector.zeros(4)).k == 0

    def test_secret_direction_keeps_everything(self):
        P = create_test_program().P
        assert submatrix_ps(P, BitVector.from_string("1011")) == P

    def test_first_unit_vector(self):
        Ps = submatrix_ps(create_test_program().P, BitVector.from_string("1000"))
        assert Ps.to_strings() == ["1000", "1100", "1011"]

    def test_complement_counts_add_up(self):
        rng = np.random.default_rng(30)
        P = random_program(6, 15, PI_OVER_8, rng).P
        for value in range(1 << 6):
            s = BitVector(value, 6)
            kept = submatrix_ps(P, s).k
            orthogonal = sum(1 for i in range(P.k) if P.row(i).dot(s) == 0)
            assert kept + orthogonal == P.k

    def test_length_checked(self):
        with pytest.raises(ParameterError):
            submatrix_ps(create_test_program().P, BitVector.zeros(3))


# ============================================================================
# Special Cases
# ============================================================================

class TestClassifySpecial:
    """Tests for the exact special-case classification."""

    def test_multiple_of_pi(self):
        assert classify_special(create_test_program(Action(1, 1))).kind == "always_zero"
        assert classify_special(create_test_program(Action(4, 1))).kind == "always_zero"

    def test_odd_multiple_of_half_pi(self):
        result = classify_special(create_test_program(Action(3, 2)))
        assert result.kind == "always_row_sum"
        assert result.outcome.to_string() == "1111"

    def test_clifford(self):
        assert classify_special(create_test_program(Action(3, 4))).kind == "clifford"

    def test_generic(self):
        assert classify_special(create_test_program(PI_OVER_8)).kind == "generic"

    def test_row_permutation_invariance(self):
        prog = create_test_program(Action(1, 2))
        shuffled = ConstantActionProgram(prog.P.permute_rows([6, 5, 4, 3, 2, 1, 0]), prog.theta)
        assert classify_special(shuffled) == classify_special(prog)
        assert row_sum(shuffled.P) == row_sum(prog.P)


# ============================================================================
# Concatenation
# ============================================================================

class TestConcatDiagonal:
    """Tests for block-diagonal concatenation."""

    def test_with_empty_program(self):
        prog = create_test_program()
        empty = ConstantActionProgram(BitMatrix((), 0), PI_OVER_8)
        assert concat_diagonal(prog, empty) == prog

    def test_two_single_rows(self):
        one = ConstantActionProgram(BitMatrix.from_strings(["1"]), PI_OVER_8)
        joined = concat_diagonal(one, one)
        assert joined.P.to_strings() == ["10", "01"]

    def test_bias_of_product_distribution(self):
        prog = create_test_program()
        joined = concat_diagonal(prog, prog)
        s = BitVector.from_string("1011")
        padded = BitVector.from_string("10110000")
        assert exact_bias(joined, padded) == pytest.approx(exact_bias(prog, s), abs=1e-12)
        assert bias_from_distribution(distribution_fourier(joined), padded) == pytest.approx(
            exact_bias(prog, s), abs=1e-10
        )

    def test_mismatched_theta(self):
        with pytest.raises(ParameterError):
            concat_diagonal(create_test_program(), create_test_program(Action(1, 4)))


# ============================================================================
# Ordering and File Format
# ============================================================================

class TestElementOrder:
    """Element order does not change the output distribution."""

    def test_reordering_preserves_distribution(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            prog = random_program(5, 8, Action(1, 3), rng).to_xprogram()
            order = [int(i) for i in rng.permutation(prog.k)]
            a = distribution_fourier(prog)
            b = distribution_fourier(prog.permuted(order))
            assert a.total_variation(b) < 1e-12

    def test_element_length_checked(self):
        with pytest.raises(ParameterError):
            XProgram(3, ((PI_OVER_8, BitVector.from_string("10")),))


class TestProgramFormat:
    """Tests for parse / serialize."""

    def test_serialize_line2(self):
        lines = serialize(create_test_program()).splitlines()
        assert lines[0] == "# theta=1/8"
        assert lines[1:] == LINE2_ROWS

    def test_ragged_row_rejected(self):
        with pytest.raises(FormatError):
            parse("# theta=1/8\n1000\n110\n0110\n")

    def test_missing_theta_rejected(self):
        with pytest.raises(FormatError):
            parse("1000\n0100\n")

    def test_random_roundtrip(self):
        prog = random_program(10, 20, Action(1, 8), np.random.default_rng(32))
        assert parse(serialize(prog)) == prog

    def test_extra_headers_are_written(self):
        text = serialize(create_test_program(), {"q": "7", "seed": "2a"})
        assert text.splitlines()[:3] == ["# theta=1/8", "# q=7", "# seed=2a"]
