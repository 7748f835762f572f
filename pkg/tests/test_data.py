import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fatigue_uq.data import (
    Dataset,
    DatasetSchema,
    SynthSpec,
    builtin_schema,
    kfold_split,
    load_csv,
    load_schema,
    save_schema,
    scaler_apply,
    scaler_fit,
    synth_generate,
    synth_schema,
    target_log_inverse,
    target_log_transform,
    write_csv,
)
from fatigue_uq.errors import (
    EmptySplitError,
    HeaderMismatchError,
    InvalidKError,
    InvalidSpecError,
    NonPositiveTargetError,
    RowParseError,
    SchemaMismatchError,
)
from fatigue_uq.physics import basquin_fit


def small_schema():
    return DatasetSchema(
        columns=(("stress", "condition"), ("temp", "condition"), ("fatigue_life", "target")),
        stress_column="stress",
        target_column="fatigue_life",
    )


def small_dataset(values=None):
    if values is None:
        values = [[100.0, 20.0, 1e5], [200.0, 25.0, 1e4], [300.0, 30.0, 1e3]]
    return Dataset(schema=small_schema(), values=np.array(values))


class TestSchema:
    def test_duplicate_names_rejected(self):
        with pytest.raises(InvalidSpecError):
            DatasetSchema(
                columns=(("a", "condition"), ("a", "target")),
                stress_column="a",
                target_column="a",
            )

    def test_two_targets_rejected(self):
        with pytest.raises(InvalidSpecError):
            DatasetSchema(
                columns=(("s", "condition"), ("t1", "target"), ("t2", "target")),
                stress_column="s",
                target_column="t1",
            )

    def test_stress_must_be_condition(self):
        with pytest.raises(InvalidSpecError):
            DatasetSchema(
                columns=(("s", "measurement"), ("y", "target")),
                stress_column="s",
                target_column="y",
            )

    def test_builtin_schemas_load(self):
        ti = builtin_schema("titanium")
        assert len(ti.columns) == 24
        assert ti.stress_column == "stress"
        assert ti.target_column == "fatigue_life"
        cs = builtin_schema("carbon_steel")
        assert cs.target_column == "fatigue_life"
        assert "dA" in cs.column_names

    def test_schema_file_round_trip(self, tmp_path):
        schema = small_schema()
        p = tmp_path / "schema.json"
        save_schema(schema, p)
        assert load_schema(p) == schema


class TestDataset:
    def test_immutable(self):
        ds = small_dataset()
        with pytest.raises(ValueError):
            ds.values[0, 0] = 1.0

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidSpecError):
            small_dataset([[1.0, 2.0, float("nan")]])

    def test_feature_and_target_views(self):
        ds = small_dataset()
        assert ds.features().shape == (3, 2)
        assert ds.target().tolist() == [1e5, 1e4, 1e3]
        assert ds.stress().tolist() == [100.0, 200.0, 300.0]


class TestLoadCsv:
    def test_well_formed(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("stress,temp,fatigue_life\n100,20,1e5\n200,25,1e4\n300,30,1e3\n")
        ds = load_csv(p, small_schema())
        assert ds.n_rows == 3
        assert ds.provenance == str(p)

    def test_header_order_insensitive(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("fatigue_life,stress,temp\n1e5,100,20\n")
        ds = load_csv(p, small_schema())
        assert ds.stress().tolist() == [100.0]

    def test_missing_stress_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("temp,fatigue_life\n20,1e5\n")
        with pytest.raises(HeaderMismatchError, match="stress"):
            load_csv(p, small_schema())

    def test_zero_life_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("stress,temp,fatigue_life\n100,20,0\n")
        with pytest.raises(RowParseError, match="must be >= 1"):
            load_csv(p, small_schema())

    def test_bad_cell_reports_row_and_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("stress,temp,fatigue_life\n100,20,1e5\noops,25,1e4\n")
        with pytest.raises(RowParseError, match=r"row 1, column 'stress'"):
            load_csv(p, small_schema())

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv", small_schema())

    def test_holdout_without_target(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("stress,temp\n100,20\n")
        ds = load_csv(p, small_schema())
        assert ds.schema.target_column is None
        with pytest.raises(SchemaMismatchError):
            ds.target()

    def test_write_load_round_trip(self, tmp_path):
        ds = synth_generate(SynthSpec(c=1800.0, m=-0.09, noise_sigma=0.1, n=40, seed=5))
        p = tmp_path / "round.csv"
        write_csv(ds, p)
        back = load_csv(p, ds.schema)
        assert np.array_equal(back.values, ds.values)


class TestScaler:
    def test_unit_interval_on_train(self):
        ds = small_dataset()
        scaled = scaler_apply(scaler_fit(ds), ds)
        feats = scaled.features()
        assert feats.min() == 0.0 and feats.max() == 1.0
        # target untouched
        assert scaled.target().tolist() == ds.target().tolist()

    def test_extrapolation_not_clamped(self):
        train = small_dataset([[10.0, 0.0, 10.0], [20.0, 1.0, 10.0]])
        scaler = scaler_fit(train)
        test = small_dataset([[25.0, 0.5, 10.0]])
        scaled = scaler_apply(scaler, test)
        assert scaled.stress()[0] == pytest.approx(1.5)

    def test_constant_column_flagged_and_zeroed(self):
        train = small_dataset([[100.0, 5.0, 10.0], [200.0, 5.0, 10.0], [300.0, 5.0, 10.0]])
        scaler = scaler_fit(train)
        assert scaler.constant_columns == ("temp",)
        scaled = scaler_apply(scaler, train)
        assert np.all(scaled.column("temp") == 0.0)

    def test_empty_split(self):
        ds = small_dataset().take([])
        with pytest.raises(EmptySplitError):
            scaler_fit(ds)

    def test_schema_mismatch(self):
        other = Dataset(
            schema=DatasetSchema(
                columns=(("stress", "condition"), ("other", "condition"), ("fatigue_life", "target")),
                stress_column="stress",
                target_column="fatigue_life",
            ),
            values=np.array([[1.0, 2.0, 3.0]]),
        )
        with pytest.raises(SchemaMismatchError):
            scaler_apply(scaler_fit(small_dataset()), other)


class TestLogTransform:
    def test_forward(self):
        ds = small_dataset([[1.0, 0.0, 1e6]])
        assert target_log_transform(ds).target()[0] == pytest.approx(6.0, rel=1e-12)

    def test_inverse(self):
        assert target_log_inverse(7.0) == pytest.approx(1e7, rel=1e-12)

    def test_round_trip(self):
        for life in (1.0, 10.0, 12345.0):
            ds = small_dataset([[1.0, 0.0, life]])
            back = target_log_inverse(target_log_transform(ds).target()[0])
            assert back == pytest.approx(life, rel=1e-12)

    def test_nonpositive_rejected(self):
        ds = Dataset(schema=small_schema(), values=np.array([[1.0, 0.0, -3.0]]))
        with pytest.raises(NonPositiveTargetError):
            target_log_transform(ds)


class TestKFold:
    def test_balanced_sizes(self):
        plan = kfold_split(10, 5, seed=0)
        assert sorted(len(a) for a in plan.assignments) == [2, 2, 2, 2, 2]

    def test_benchmark_sizes(self):
        # partition rule: n mod k folds get ceil(n/k) rows
        plan = kfold_split(222, 5, seed=0)
        assert sorted((len(a) for a in plan.assignments), reverse=True) == [45, 45, 44, 44, 44]

    def test_deterministic(self):
        a = kfold_split(37, 4, seed=9)
        b = kfold_split(37, 4, seed=9)
        for x, y in zip(a.assignments, b.assignments):
            assert np.array_equal(x, y)

    def test_invalid_k(self):
        with pytest.raises(InvalidKError):
            kfold_split(5, 1, seed=0)
        with pytest.raises(InvalidKError):
            kfold_split(5, 6, seed=0)

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(min_value=2, max_value=400),
        k=st.integers(min_value=2, max_value=20),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_partition_properties(self, n, k, seed):
        if k > n:
            k = n
        plan = kfold_split(n, k, seed)
        all_idx = np.concatenate(plan.assignments)
        assert len(all_idx) == n
        assert set(all_idx.tolist()) == set(range(n))
        sizes = [len(a) for a in plan.assignments]
        assert max(sizes) - min(sizes) <= 1
        again = kfold_split(n, k, seed)
        assert all(np.array_equal(x, y) for x, y in zip(plan.assignments, again.assignments))

    def test_train_test_disjoint_cover(self):
        plan = kfold_split(23, 4, seed=2)
        for fold in range(4):
            train, test = plan.train_test(fold)
            assert set(train) | set(test) == set(range(23))
            assert set(train) & set(test) == set()


class TestSynth:
    def test_noiseless_rows_satisfy_power_law(self):
        spec = SynthSpec(c=2000.0, m=-0.1, noise_sigma=0.0, n=100, seed=3)
        ds = synth_generate(spec)
        implied = 2000.0 * ds.target() ** -0.1
        assert np.allclose(ds.stress(), implied, rtol=1e-9)

    def test_seed_determinism(self):
        spec = SynthSpec(c=2000.0, m=-0.1, noise_sigma=0.05, n=50, n_nuisance=2, seed=11)
        a, b = synth_generate(spec), synth_generate(spec)
        assert a.values.tobytes() == b.values.tobytes()
        assert a.provenance == b.provenance

    def test_noisy_recovery_within_tolerance(self):
        spec = SynthSpec(c=2000.0, m=-0.1, noise_sigma=0.05, n=300, seed=17)
        ds = synth_generate(spec)
        fit = basquin_fit(np.column_stack([ds.stress(), ds.target()]))
        assert abs(fit.m - -0.1) < 0.02

    def test_noiseless_r2_is_one(self):
        ds = synth_generate(SynthSpec(c=2000.0, m=-0.1, noise_sigma=0.0, n=300, seed=17))
        fit = basquin_fit(np.column_stack([ds.stress(), ds.target()]))
        assert fit.r2_loglog == 1.0

    def test_nuisance_columns_present(self):
        ds = synth_generate(SynthSpec(c=2000.0, m=-0.1, noise_sigma=0.0, n=10, n_nuisance=3, seed=0))
        assert ds.schema.column_names == (
            "stress", "nuisance_0", "nuisance_1", "nuisance_2", "fatigue_life",
        )
        assert ds.schema == synth_schema(3)

    def test_invalid_specs(self):
        with pytest.raises(InvalidSpecError):
            SynthSpec(c=2000.0, m=0.1, noise_sigma=0.0, n=10)
        with pytest.raises(InvalidSpecError):
            SynthSpec(c=-1.0, m=-0.1, noise_sigma=0.0, n=10)
        with pytest.raises(InvalidSpecError):
            SynthSpec(c=1.0, m=-0.1, noise_sigma=-0.5, n=10)
        with pytest.raises(InvalidSpecError):
            SynthSpec(c=1.0, m=-0.1, noise_sigma=0.0, n=10, stress_range=(5.0, 2.0))
