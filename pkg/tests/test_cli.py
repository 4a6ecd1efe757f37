"""End-to-end command-line behavior through in-process main() calls."""

import math

import numpy as np
import pytest

from fracsinc import read_dense_matrix, write_dense_matrix
from fracsinc.cli import main, read_vector

SINC_HEADER = "beta,r,k,M,N,error,at_floor"
TOTAL_HEADER = "beta,norm,j,h,k,error,eoc"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestScheme:
    def test_prints_counts_and_pairs(self, capsys):
        code, out, err = run(capsys, "scheme", "--beta", "0.5", "--k", "0.5")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "M=40 N=40"
        assert len(lines) == 82
        for line in lines[1:]:
            node, weight = line.split()
            float(node), float(weight)
        # center node sits at zero with weight k sin(pi beta) / pi
        center = lines[1 + 40].split()
        assert float(center[0]) == 0.0
        assert abs(float(center[1]) - 0.5 / math.pi) <= 1e-15

    @pytest.mark.parametrize(
        "argv",
        [
            ("scheme", "--beta", "2.0", "--k", "0.5"),
            ("scheme", "--beta", "0.5", "--k", "-1.0"),
            ("scheme", "--beta", "0.5"),
            ("scheme", "--beta", "0.5", "--k", "0.5", "--bogus"),
            ("scheme", "--beta", "0.5", "--k", "0.5", "--s-plus", "0.6"),
        ],
    )
    def test_invalid_usage_exits_one(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 1

    def test_help_exits_zero(self, capsys):
        code, out, err = run(capsys, "scheme", "--help")
        assert code == 0


class TestApply:
    def test_dense_matrix_solve(self, capsys, tmp_path):
        matrix = tmp_path / "a.txt"
        vector = tmp_path / "f.txt"
        write_dense_matrix(matrix, np.array([[4.0]]))
        vector.write_text("2.0\n")
        code, out, err = run(
            capsys, "apply", "--beta", "0.5", "--k", "0.15",
            "--matrix", str(matrix), "--vector", str(vector),
        )
        assert code == 0
        values = [float(line) for line in out.splitlines()]
        assert len(values) == 1
        # 4^{-1/2} * 2 = 1
        assert abs(values[0] - 1.0) <= 1e-9

    def test_mesh_solve(self, capsys):
        code, out, err = run(capsys, "apply", "--beta", "0.5", "--k", "0.3", "--cells", "8")
        assert code == 0
        values = [float(line) for line in out.splitlines()]
        assert len(values) == 7
        assert all(v > 0.0 for v in values)
        # the constant-load solution is symmetric about the midpoint
        assert abs(values[0] - values[-1]) <= 1e-12

    def test_out_file_matches_stdout(self, capsys, tmp_path):
        code, out, err = run(capsys, "apply", "--beta", "0.5", "--k", "0.3", "--cells", "8")
        assert code == 0
        target = tmp_path / "u.txt"
        code2 = main(["apply", "--beta", "0.5", "--k", "0.3", "--cells", "8",
                      "--out", str(target)])
        capsys.readouterr()
        assert code2 == 0
        assert target.read_text() == out

    def test_missing_matrix_file_names_path(self, capsys, tmp_path):
        missing = tmp_path / "nope.txt"
        code, out, err = run(
            capsys, "apply", "--beta", "0.5", "--k", "0.3",
            "--matrix", str(missing), "--vector", str(missing),
        )
        assert code == 1
        assert "nope.txt" in err

    def test_bad_vector_file_names_path_and_line(self, capsys, tmp_path):
        matrix = tmp_path / "a.txt"
        vector = tmp_path / "f.txt"
        write_dense_matrix(matrix, np.eye(1))
        vector.write_text("1.0\nabc\n")
        code, out, err = run(
            capsys, "apply", "--beta", "0.5", "--k", "0.3",
            "--matrix", str(matrix), "--vector", str(vector),
        )
        assert code == 1
        assert "f.txt" in err and "line 2" in err

    def test_matrix_and_cells_together_rejected(self, capsys, tmp_path):
        code, out, err = run(
            capsys, "apply", "--beta", "0.5", "--k", "0.3",
            "--matrix", str(tmp_path / "a.txt"), "--cells", "8",
        )
        assert code == 1
        assert "exactly one" in err

    def test_neither_source_rejected(self, capsys):
        code, out, err = run(capsys, "apply", "--beta", "0.5", "--k", "0.3")
        assert code == 1

    def test_matrix_without_vector_rejected(self, capsys, tmp_path):
        matrix = tmp_path / "a.txt"
        write_dense_matrix(matrix, np.eye(2))
        code, out, err = run(
            capsys, "apply", "--beta", "0.5", "--k", "0.3", "--matrix", str(matrix)
        )
        assert code == 1
        assert "--vector" in err

    def test_singular_shift_exits_two(self, capsys, tmp_path):
        matrix = tmp_path / "a.txt"
        vector = tmp_path / "f.txt"
        matrix.write_text("1\n-1.0\n")
        vector.write_text("1.0\n")
        code, out, err = run(
            capsys, "apply", "--beta", "0.5", "--k", "0.3",
            "--matrix", str(matrix), "--vector", str(vector),
        )
        assert code == 2
        assert "error:" in err

    def test_too_few_cells_exits_one(self, capsys):
        code, out, err = run(capsys, "apply", "--beta", "0.5", "--k", "0.3", "--cells", "1")
        assert code == 1


class TestStudies:
    def test_sinc_study_csv_shape(self, capsys):
        code, out, err = run(
            capsys, "sinc-study", "--beta", "0.5", "--r", "0",
            "--k", "0.5,0.4,0.3", "--cells", "16", "--workers", "1",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == SINC_HEADER
        data = [line for line in lines[1:] if not line.startswith("#")]
        comments = [line for line in lines[1:] if line.startswith("#")]
        assert len(data) == 3
        for line in data:
            beta, r, k, m, n, error, at_floor = line.split(",")
            assert m == str(int(m)) and n == str(int(n))
            assert at_floor in ("0", "1")
            float(error)
        assert len(comments) == 1
        assert comments[0].startswith("# slope beta=0.5 r=0.0 c=")

    def test_sinc_study_out_file(self, capsys, tmp_path):
        target = tmp_path / "sweep.csv"
        code = main(["sinc-study", "--beta", "0.5", "--r", "0", "--k", "0.5,0.4,0.3",
                     "--cells", "16", "--workers", "1", "--out", str(target)])
        capsys.readouterr()
        assert code == 0
        assert target.read_text().splitlines()[0] == SINC_HEADER

    def test_total_study_csv_shape(self, capsys):
        code, out, err = run(
            capsys, "total-study", "--beta", "0.5", "--j", "3,4", "--norms", "l2",
            "--series-terms", "2000", "--workers", "1",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == TOTAL_HEADER
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[2] == "3"
        assert first[6] == ""
        second = lines[2].split(",")
        assert second[2] == "4"
        float(second[6])

    def test_bad_norm_exits_one(self, capsys):
        code, out, err = run(capsys, "total-study", "--norms", "sup")
        assert code == 1

    def test_bad_beta_list_exits_one(self, capsys):
        code, out, err = run(capsys, "sinc-study", "--beta", "0.5,oops")
        assert code == 1

    def test_study_help_shows_defaults(self, capsys):
        code, out, err = run(capsys, "sinc-study", "--help")
        assert code == 0
        assert "512" in out


class TestCheck:
    def test_battery_passes(self, capsys):
        code, out, err = run(capsys, "check")
        assert code == 0
        lines = out.splitlines()
        assert lines and all(line.startswith("PASS") for line in lines)


class TestVectorIo:
    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("1.0\n\n2.5\n")
        assert np.array_equal(read_vector(path), [1.0, 2.5])

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "v.txt"
        path.write_text("\n")
        with pytest.raises(ValueError, match="no values"):
            read_vector(path)

    def test_matrix_round_trip(self, tmp_path):
        path = tmp_path / "a.txt"
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        write_dense_matrix(path, a)
        assert np.array_equal(read_dense_matrix(path), a)
