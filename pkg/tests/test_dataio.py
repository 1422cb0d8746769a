"""Tests for the CSV/ARFF loaders and the annotation wire format."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crowdagg import AnnotationSet, DataError
from crowdagg.dataio import (
    load_label_matrix_csv,
    load_mulan_arff,
    read_annotations,
    read_label_names,
    write_annotations,
    write_label_matrix_csv,
)


class TestLabelMatrixCsv:
    def test_basic(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("a,b\n1,0\n")
        descriptor, matrix = load_label_matrix_csv(path)
        assert descriptor.label_names == ["a", "b"]
        np.testing.assert_array_equal(matrix, [[1, 0]])

    def test_non_binary_cell(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataError, match="2:"):
            load_label_matrix_csv(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("a,b\n1,0\n1\n")
        with pytest.raises(DataError, match="3:"):
            load_label_matrix_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_text("")
        with pytest.raises(DataError):
            load_label_matrix_csv(path)

    def test_crlf_and_roundtrip(self, tmp_path):
        path = tmp_path / "labels.csv"
        path.write_bytes(b"a,b\r\n1,0\r\n0,1\r\n")
        _, matrix = load_label_matrix_csv(path)
        np.testing.assert_array_equal(matrix, [[1, 0], [0, 1]])
        out = tmp_path / "round.csv"
        write_label_matrix_csv(out, ["a", "b"], matrix)
        _, back = load_label_matrix_csv(out)
        np.testing.assert_array_equal(back, matrix)

    def test_emotions_scale(self, tmp_path):
        rng = np.random.default_rng(0)
        matrix = rng.integers(0, 2, size=(593, 6)).astype(np.uint8)
        path = tmp_path / "emotions.csv"
        write_label_matrix_csv(path, [f"tag{j}" for j in range(6)], matrix)
        descriptor, loaded = load_label_matrix_csv(path)
        assert (descriptor.num_instances, descriptor.num_labels) == (593, 6)
        np.testing.assert_array_equal(loaded, matrix)


ARFF_HEADER = """% comment line
@relation demo
@attribute a numeric
@attribute b {0,1}
@attribute c numeric
@data
"""


class TestArff:
    def test_dense(self, tmp_path):
        path = tmp_path / "demo.arff"
        path.write_text("@relation t\n@attribute a numeric\n@attribute b {0,1}\n@data\n3.5,1\n")
        _, matrix = load_mulan_arff(path, ["b"])
        np.testing.assert_array_equal(matrix, [[1]])

    def test_sparse_defaults_to_zero(self, tmp_path):
        path = tmp_path / "demo.arff"
        path.write_text("@relation t\n@attribute a numeric\n@attribute b {0,1}\n@data\n{1 1}\n{}\n")
        _, matrix = load_mulan_arff(path, ["b"])
        np.testing.assert_array_equal(matrix, [[1], [0]])

    def test_unknown_label(self, tmp_path):
        path = tmp_path / "demo.arff"
        path.write_text(ARFF_HEADER + "1,1,0\n")
        with pytest.raises(DataError, match="nope"):
            load_mulan_arff(path, ["nope"])

    def test_nominal_outside_binary(self, tmp_path):
        path = tmp_path / "demo.arff"
        path.write_text(ARFF_HEADER + "0,7,0\n")
        with pytest.raises(DataError, match="outside"):
            load_mulan_arff(path, ["b"])

    def test_malformed_rows(self, tmp_path):
        path = tmp_path / "demo.arff"
        path.write_text(ARFF_HEADER + "1,1\n")
        with pytest.raises(DataError, match="expected 3"):
            load_mulan_arff(path, ["b"])
        path.write_text(ARFF_HEADER + "{1 1\n")
        with pytest.raises(DataError, match="unterminated"):
            load_mulan_arff(path, ["b"])

    def test_quoted_names_and_order(self, tmp_path):
        path = tmp_path / "demo.arff"
        path.write_text(
            "@RELATION q\n@ATTRIBUTE 'x y' numeric\n@ATTRIBUTE \"lbl\" {0,1}\n"
            "@DATA\n1.25,0\n0.5,1\n"
        )
        _, matrix = load_mulan_arff(path, ["lbl"])
        np.testing.assert_array_equal(matrix, [[0], [1]])

    def test_dense_sparse_equivalent(self, tmp_path):
        rng = np.random.default_rng(1)
        num_attrs, num_rows = 7, 25
        dense_rows = rng.integers(0, 2, size=(num_rows, num_attrs))
        names = [f"att{j}" for j in range(num_attrs)]
        header = "@relation r\n" + "".join(
            f"@attribute {n} {{0,1}}\n" for n in names
        ) + "@data\n"
        dense = header + "".join(",".join(map(str, row)) + "\n" for row in dense_rows)
        sparse = header + "".join(
            "{" + ", ".join(f"{j} {row[j]}" for j in np.flatnonzero(row)) + "}\n"
            for row in dense_rows
        )
        dense_path = tmp_path / "dense.arff"
        sparse_path = tmp_path / "sparse.arff"
        dense_path.write_text(dense)
        sparse_path.write_text(sparse)
        labels = ["att1", "att4", "att6"]
        _, from_dense = load_mulan_arff(dense_path, labels)
        _, from_sparse = load_mulan_arff(sparse_path, labels)
        np.testing.assert_array_equal(from_dense, from_sparse)
        np.testing.assert_array_equal(from_dense, dense_rows[:, [1, 4, 6]])


class TestLabelNames:
    def test_read(self, tmp_path):
        path = tmp_path / "names.txt"
        path.write_text("alpha\n\nbeta\n")
        assert read_label_names(path) == ["alpha", "beta"]

    def test_empty(self, tmp_path):
        path = tmp_path / "names.txt"
        path.write_text("\n\n")
        with pytest.raises(DataError):
            read_label_names(path)


class TestAnnotationWireFormat:
    def test_basic_row(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("annotator,instance,labels\n0,2,010110\n")
        y = read_annotations(path, num_instances=4, num_annotators=2)
        assert y.num_labels == 6
        record = next(y.records())
        assert record[:2] == (0, 2)
        np.testing.assert_array_equal(record[2], [0, 1, 0, 1, 1, 0])

    def test_duplicate_rows_rejected(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("annotator,instance,labels\n0,2,01\n0,2,11\n")
        with pytest.raises(DataError, match="duplicate"):
            read_annotations(path)

    def test_bad_label_width(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("annotator,instance,labels\n0,0,01\n0,1,011\n")
        with pytest.raises(DataError, match="3:"):
            read_annotations(path)

    def test_out_of_range_ids(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("annotator,instance,labels\n0,5,01\n")
        with pytest.raises(DataError, match="out of range"):
            read_annotations(path, num_instances=3)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "ann.csv"
        path.write_text("0,0,01\n")
        with pytest.raises(DataError, match="header"):
            read_annotations(path)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 31 - 1))
    def test_round_trip_identity(self, tmp_path_factory, seed):
        rng = np.random.default_rng(seed)
        n, c, l = 30, 4, 12
        records = []
        for annotator in range(l):
            for instance in np.flatnonzero(rng.random(n) < 0.5):
                records.append((annotator, int(instance), rng.integers(0, 2, size=c).tolist()))
        y = AnnotationSet.from_records(records, n, c, l)
        path = tmp_path_factory.mktemp("rt") / "ann.csv"
        write_annotations(y, path)
        first = path.read_bytes()
        back = read_annotations(path, num_instances=n, num_annotators=l)
        np.testing.assert_array_equal(back.annotator_ids, y.annotator_ids)
        np.testing.assert_array_equal(back.instance_ids, y.instance_ids)
        np.testing.assert_array_equal(back.labels, y.labels)
        write_annotations(back, path)
        assert path.read_bytes() == first
