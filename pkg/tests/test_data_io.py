import numpy as np
import pytest

from fspn.data_io import DataError, SyntheticSpec, generate_synthetic, load_benchmark, load_csv, save_csv, \
    synthetic_true_joint
from fspn.evalharness import empirical_joint, kl_divergence
from fspn.events import VariableMeta


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_csv_binary_column(tmp_path):
    d = load_csv(write(tmp_path / "a.csv", "flag,x\n0,1.5\n1,2.5\n1,0.5\n"))
    assert d.variables[0] == VariableMeta.discrete("flag", 2)
    assert not d.variables[1].is_discrete
    assert d.n_rows == 3
    np.testing.assert_array_equal(d.values[:, 0], [0, 1, 1])


def test_string_labels_are_coded(tmp_path):
    d = load_csv(write(tmp_path / "s.csv", "color\nred\nblue\nred\n"))
    assert d.value_maps[0] == ["blue", "red"]
    np.testing.assert_array_equal(d.values[:, 0], [1, 0, 1])


def test_ragged_row_names_line(tmp_path):
    with pytest.raises(DataError, match=":3:"):
        load_csv(write(tmp_path / "r.csv", "a,b\n1,2\n3\n"))


def test_unparseable_continuous_cell(tmp_path):
    with pytest.raises(DataError, match=":3:"):
        load_csv(write(tmp_path / "u.csv", "a\n1.5\nfoo\n"), schema={"a": "continuous"})


def test_csv_roundtrip(tmp_path):
    d = load_csv(write(tmp_path / "a.csv", "flag,x,c\n0,1.5,u\n1,2.25,v\n1,-0.5,u\n"))
    save_csv(d, tmp_path / "b.csv")
    assert load_csv(tmp_path / "b.csv") == d


def bench_dir(tmp_path, rows=("0,1,1", "1,0,1"), skip=None, extra=None):
    for split in ("ts", "valid", "test"):
        if split == skip:
            continue
        lines = list(rows) + ([extra] if extra and split == "test" else [])
        (tmp_path / f"toy.{split}.data").write_text("\n".join(lines) + "\n")
    return tmp_path


def test_load_benchmark(tmp_path):
    train, valid, test = load_benchmark(bench_dir(tmp_path), "toy")
    assert train.n_cols == valid.n_cols == test.n_cols == 3
    assert all(v.cardinality == 2 for v in train.variables)


def test_benchmark_missing_split(tmp_path):
    with pytest.raises(DataError, match="missing"):
        load_benchmark(bench_dir(tmp_path, skip="valid"), "toy")


def test_benchmark_non_binary(tmp_path):
    with pytest.raises(DataError, match="non-binary value"):
        load_benchmark(bench_dir(tmp_path, extra="0,2,1"), "toy")


def test_benchmark_column_mismatch(tmp_path):
    with pytest.raises(DataError):
        load_benchmark(bench_dir(tmp_path, extra="0,1"), "toy")


def test_synthetic_generation_is_deterministic():
    spec = SyntheticSpec(1000, 5, [3, 4, 5, 3, 2], [[0, 1], [2, 3]], 0.2, seed=7)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.n_rows == 1000
    assert SyntheticSpec.from_json(spec.to_json()) == spec


def test_synthetic_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(10, 3, [2, 2, 2], [[0, 1], [1, 2]], 0.1)
    with pytest.raises(ValueError):
        SyntheticSpec(10, 2, [1, 2], [], 0.1)


def test_true_joint_matches_large_sample():
    spec = SyntheticSpec(200_000, 4, [3, 2, 3, 2], [[2, 0], [1, 3]], 0.3, seed=3, latent_card=4)
    truth = synthetic_true_joint(spec)
    assert truth.masses.sum() == pytest.approx(1.0, abs=1e-12)
    emp = empirical_joint(generate_synthetic(spec))
    assert np.abs(emp.masses - truth.masses).max() < 0.01
