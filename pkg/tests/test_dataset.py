import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkmnc.dataset import (
    Attribute,
    AttributeKind,
    Schema,
    apply_normalizer,
    fit_normalizer,
    invert_normalizer,
    load_schema,
    load_table,
    make_table,
    split_folds,
)
from gkmnc.errors import (
    DimensionMismatch,
    EmptyInput,
    KTooLarge,
    MissingColumn,
    SchemaError,
    TypeMismatch,
    UnknownTargetLabel,
)


def write_dataset(tmp_path, rows, header="status,amount,age,account_id,class"):
    data = tmp_path / "data.csv"
    data.write_text("\n".join([header] + rows) + "\n")
    return data


@pytest.fixture
def schema_file(tmp_path):
    path = tmp_path / "data.schema"
    path.write_text(
        "status = nominal\n"
        "amount = numeric\n"
        "age = numeric\n"
        "account_id = identifier\n"
        "class = target\n"
        "positive_label = good\n"
    )
    return path


class TestSchema:
    def test_load_schema(self, schema_file):
        schema = load_schema(schema_file)
        assert schema.positive_label == "good"
        assert schema.target_name == "class"
        assert schema.numeric_names == ("amount", "age")
        assert schema.nominal_indices() == (1,)
        assert schema.attribute_index("account_id") == 4

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError):
            Schema(
                (
                    Attribute("a", AttributeKind.NUMERIC),
                    Attribute("a", AttributeKind.NOMINAL),
                    Attribute("y", AttributeKind.TARGET),
                ),
                positive_label="1",
            )

    def test_exactly_one_target(self):
        with pytest.raises(SchemaError):
            Schema((Attribute("a", AttributeKind.NUMERIC),), positive_label="1")

    def test_needs_numeric_attribute(self):
        with pytest.raises(SchemaError):
            Schema(
                (
                    Attribute("a", AttributeKind.NOMINAL),
                    Attribute("y", AttributeKind.TARGET),
                ),
                positive_label="1",
            )

    def test_unknown_kind_rejected(self, tmp_path):
        bad = tmp_path / "bad.schema"
        bad.write_text("a = numericish\npositive_label = x\n")
        with pytest.raises(SchemaError):
            load_schema(bad)


class TestLoadTable:
    def test_basic_load(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        data = write_dataset(
            tmp_path,
            ["A,10.5,30,id1,good", "B,20.0,40,id2,bad", "A,15.0,25,id3,good"],
        )
        table = load_table(data, schema)
        assert table.n_rows == 3
        assert table.numeric.shape == (3, 2)
        assert table.targets.tolist() == [1, -1, 1]
        assert table.nominal[:, 0].tolist() == ["A", "B", "A"]
        assert table.identifiers[:, 0].tolist() == ["id1", "id2", "id3"]

    def test_empty_file_with_header(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        table = load_table(write_dataset(tmp_path, []), schema)
        assert table.n_rows == 0

    def test_non_numeric_token_names_cell(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        data = write_dataset(tmp_path, ["A,10.5,30,id1,good", "B,oops,40,id2,bad"])
        with pytest.raises(TypeMismatch, match="row 2.*amount.*oops"):
            load_table(data, schema)

    def test_missing_column(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        data = tmp_path / "d.csv"
        data.write_text("status,amount,account_id,class\nA,1.0,id,good\n")
        with pytest.raises(MissingColumn, match="age"):
            load_table(data, schema)

    def test_undeclared_column_rejected(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        data = tmp_path / "d.csv"
        data.write_text("status,amount,age,account_id,class,extra\nA,1,2,id,good,x\n")
        with pytest.raises(SchemaError, match="extra"):
            load_table(data, schema)

    def test_duplicated_header_rejected(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        data = tmp_path / "d.csv"
        data.write_text("status,amount,amount,account_id,class\nA,1,2,id,good\n")
        with pytest.raises(SchemaError, match="duplicated"):
            load_table(data, schema)

    def test_target_column_optional(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        data = tmp_path / "d.csv"
        data.write_text("status,amount,age,account_id\nA,1.0,2.0,id\n")
        table = load_table(data, schema)
        assert table.targets is None

    def test_empty_target_cell(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        data = write_dataset(tmp_path, ["A,1.0,2.0,id,"])
        with pytest.raises(UnknownTargetLabel):
            load_table(data, schema)

    def test_missing_nominal_becomes_question_mark(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        table = load_table(write_dataset(tmp_path, [",1.0,2.0,id,good"]), schema)
        assert table.nominal[0, 0] == "?"

    def test_missing_numeric_rejected(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        with pytest.raises(TypeMismatch):
            load_table(write_dataset(tmp_path, ["A,,2.0,id,good"]), schema)

    def test_any_non_positive_label_maps_to_negative(self, tmp_path, schema_file):
        schema = load_schema(schema_file)
        table = load_table(
            write_dataset(tmp_path, ["A,1,2,i,good", "B,1,2,i,bad", "C,1,2,i,awful"]),
            schema,
        )
        assert table.targets.tolist() == [1, -1, -1]


class TestSplitFolds:
    def make_table(self, schema, n):
        rng = np.random.default_rng(7)
        return make_table(
            schema,
            rng.normal(size=(n, 2)),
            [["A"] for _ in range(n)],
            [1 if i % 3 else -1 for i in range(n)],
            identifiers=[[f"id{i}"] for i in range(n)],
        )

    def test_1000_rows_10_folds(self, credit_schema):
        table = self.make_table(credit_schema, 1000)
        splits = split_folds(table, 10, seed=1)
        assert len(splits) == 10
        for s in splits:
            assert s.train.n_rows == 900
            assert s.validation.n_rows == 100

    def test_leave_one_out(self, credit_schema):
        table = self.make_table(credit_schema, 10)
        splits = split_folds(table, 10, seed=1)
        assert all(s.validation.n_rows == 1 and s.train.n_rows == 9 for s in splits)

    def test_deterministic(self, credit_schema):
        table = self.make_table(credit_schema, 37)
        a = split_folds(table, 5, seed=3)
        b = split_folds(table, 5, seed=3)
        for sa, sb in zip(a, b):
            assert np.array_equal(sa.validation.numeric, sb.validation.numeric)

    def test_partition_exact(self, credit_schema):
        table = self.make_table(credit_schema, 23)
        splits = split_folds(table, 4, seed=0)
        seen = np.concatenate([s.validation.identifiers[:, 0] for s in splits])
        assert sorted(seen.tolist()) == sorted(table.identifiers[:, 0].tolist())
        sizes = sorted(s.validation.n_rows for s in splits)
        assert max(sizes) - min(sizes) <= 1

    def test_k_too_large(self, credit_schema):
        table = self.make_table(credit_schema, 5)
        with pytest.raises(KTooLarge):
            split_folds(table, 6, seed=0)

    def test_row_order_changes_membership_not_sizes(self, credit_schema):
        table = self.make_table(credit_schema, 40)
        perm = np.random.default_rng(1).permutation(40)
        a = split_folds(table, 4, seed=9)
        b = split_folds(table.take(perm), 4, seed=9)
        assert [s.validation.n_rows for s in a] == [s.validation.n_rows for s in b]
        membership_a = [set(s.validation.identifiers[:, 0]) for s in a]
        membership_b = [set(s.validation.identifiers[:, 0]) for s in b]
        assert membership_a != membership_b


class TestNormalizer:
    def test_two_point_column(self):
        params = fit_normalizer(np.array([[0.0], [10.0]]))
        assert params.mean[0] == pytest.approx(5.0)
        assert params.std[0] == pytest.approx(5.0)  # population form
        assert not params.constant[0]

    def test_constant_column_flagged(self):
        params = fit_normalizer(np.array([[3.0], [3.0], [3.0]]))
        assert params.mean[0] == 3.0
        assert params.std[0] == 0.0
        assert params.constant[0]
        assert apply_normalizer(params, np.array([7.0]))[0] == 0.0

    def test_apply_example(self):
        params = fit_normalizer(np.array([[0.0], [10.0]]))
        assert apply_normalizer(params, np.array([10.0]))[0] == pytest.approx(1.0)
        assert apply_normalizer(params, np.array([5.0]))[0] == 0.0

    def test_standardized_is_idempotent(self):
        rng = np.random.default_rng(0)
        x = rng.normal(3.0, 2.5, size=(200, 3))
        z = apply_normalizer(fit_normalizer(x), x)
        again = fit_normalizer(z)
        assert np.all(np.abs(again.mean) < 1e-12)
        assert np.all(np.abs(again.std - 1.0) < 1e-12)

    def test_fit_apply_gives_zero_mean_unit_std(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(-50, 90, size=(321, 4))
        z = apply_normalizer(fit_normalizer(x), x)
        assert np.all(np.abs(z.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(z.std(axis=0) - 1.0) < 1e-9)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            fit_normalizer(np.empty((0, 2)))

    def test_dimension_mismatch(self):
        params = fit_normalizer(np.array([[0.0, 1.0], [1.0, 2.0]]))
        with pytest.raises(DimensionMismatch):
            apply_normalizer(params, np.array([1.0, 2.0, 3.0]))

    @given(
        st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=2,
            max_size=40,
        ).filter(lambda xs: max(xs) > min(xs))
    )
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, values):
        x = np.array(values)[:, None]
        params = fit_normalizer(x)
        back = invert_normalizer(params, apply_normalizer(params, x))
        scale = np.maximum(np.abs(x), 1.0)
        assert np.all(np.abs(back - x) / scale < 1e-10)
