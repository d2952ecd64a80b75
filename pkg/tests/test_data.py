import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfmfusion import (
    Bag,
    CandidateSet,
    Dataset,
    SynthSpec,
    ValidationError,
    choquet_batch,
    dataset_from_dict,
    dataset_to_dict,
    from_minimal_coalitions,
    generate_synthetic,
    has_both_polarities,
    load_dataset,
    objective_total,
    sample_random,
    save_dataset,
    spec_from_dict,
    spec_to_dict,
)

TRUTH3 = from_minimal_coalitions(3, [{0, 1}, {0, 2}])


def small_dataset():
    return Dataset(
        2,
        (
            Bag(0, [np.array([[0.1, 0.2], [0.3, 0.4]])]),
            Bag(1, [np.array([[0.9, 0.8]]), np.array([[0.5, 0.6]])]),
        ),
    )


def spec3(sigma=0.0, seed=11, pos=6, neg=6):
    return SynthSpec(3, pos, neg, (2, 3), (2, 4), sigma, TRUTH3, rng_seed=seed)


class TestModelValidation:
    def test_minimal_valid(self):
        ds = small_dataset()
        assert len(ds.bags) == 2
        assert ds.n_instances == 4
        assert has_both_polarities(ds)

    def test_out_of_range_confidence_names_indices(self):
        with pytest.raises(ValidationError) as exc:
            Dataset(2, (Bag(0, [np.array([[0.1, 1.3]])]),))
        msg = str(exc.value)
        assert "bag 0" in msg and "candidate set 0" in msg and "instance 0" in msg

    def test_empty_candidate_set(self):
        with pytest.raises(ValidationError):
            CandidateSet(np.empty((0, 2)))

    def test_empty_bag(self):
        with pytest.raises(ValidationError):
            Bag(0, [])

    def test_no_bags(self):
        with pytest.raises(ValidationError):
            Dataset(2, ())

    def test_nonbinary_label(self):
        with pytest.raises(ValidationError):
            Bag(2, [np.array([[0.1, 0.2]])])

    def test_source_count_mismatch(self):
        with pytest.raises(ValidationError) as exc:
            Dataset(3, (Bag(0, [np.array([[0.1, 0.2]])]),))
        assert "3" in str(exc.value)

    def test_single_polarity_allowed_but_flagged(self):
        ds = Dataset(2, (Bag(0, [np.array([[0.1, 0.2]])]),))
        assert not has_both_polarities(ds)

    def test_truth_shape_must_parallel_bags(self):
        with pytest.raises(ValidationError):
            Dataset(
                2,
                (Bag(0, [np.array([[0.1, 0.2]])]),),
                instance_truth=(((0, 1),),),
            )

    def test_instance_matrix_flatten_order(self):
        ds = small_dataset()
        m = ds.instance_matrix()
        assert m.shape == (4, 2)
        assert m[0].tolist() == [0.1, 0.2]
        assert m[2].tolist() == [0.9, 0.8]
        assert m[3].tolist() == [0.5, 0.6]


class TestSerialization:
    def test_dict_round_trip(self):
        ds = small_dataset()
        assert dataset_to_dict(dataset_from_dict(dataset_to_dict(ds))) == dataset_to_dict(ds)

    def test_file_round_trip(self, tmp_path):
        ds = generate_synthetic(spec3(sigma=0.05))
        p = tmp_path / "data.json"
        save_dataset(p, ds)
        back = load_dataset(p)
        assert dataset_to_dict(back) == dataset_to_dict(ds)

    def test_minimal_file(self, tmp_path):
        p = tmp_path / "tiny.json"
        p.write_text(
            json.dumps(
                {
                    "source_count": 2,
                    "bags": [
                        {"label": 0, "candidate_sets": [[[0.1, 0.2]]]},
                        {"label": 1, "candidate_sets": [[[0.9, 0.8]]]},
                    ],
                }
            )
        )
        ds = load_dataset(p)
        assert len(ds.bags) == 2
        assert ds.instance_truth is None

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text('{"source_count": 2,')
        with pytest.raises(ValidationError):
            load_dataset(p)

    def test_ragged_instances(self):
        with pytest.raises(ValidationError):
            dataset_from_dict(
                {
                    "source_count": 2,
                    "bags": [{"label": 0, "candidate_sets": [[[0.1, 0.2], [0.3]]]}],
                }
            )

    def test_out_of_range_file_value_names_instance(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(
            json.dumps(
                {
                    "source_count": 2,
                    "bags": [{"label": 0, "candidate_sets": [[[0.1, 1.3]]]}],
                }
            )
        )
        with pytest.raises(ValidationError) as exc:
            load_dataset(p)
        assert "instance 0" in str(exc.value)

    def test_spec_round_trip(self):
        spec = spec3(sigma=0.1)
        assert spec_from_dict(spec_to_dict(spec)) == spec


class TestSynthSpecValidation:
    def test_bad_counts(self):
        with pytest.raises(ValidationError):
            SynthSpec(3, 0, 5, (2, 3), (2, 4), 0.0, TRUTH3, 1)

    def test_empty_range(self):
        with pytest.raises(ValidationError):
            SynthSpec(3, 5, 5, (3, 2), (2, 4), 0.0, TRUTH3, 1)

    def test_negative_sigma(self):
        with pytest.raises(ValidationError):
            SynthSpec(3, 5, 5, (2, 3), (2, 4), -0.1, TRUTH3, 1)

    def test_truth_source_count_mismatch(self):
        with pytest.raises(ValidationError):
            SynthSpec(4, 5, 5, (2, 3), (2, 4), 0.0, TRUTH3, 1)

    def test_invalid_truth_measure(self):
        from bfmfusion import BinaryFuzzyMeasure

        bad = BinaryFuzzyMeasure(2, np.array([0, 1, 0, 0]))
        with pytest.raises(ValidationError):
            SynthSpec(2, 5, 5, (2, 3), (2, 4), 0.0, bad, 1)


class TestGenerator:
    def test_sigma_zero_truth_objective_is_exactly_zero(self):
        for seed in (0, 1, 2, 3, 17):
            ds = generate_synthetic(spec3(seed=seed))
            assert objective_total(TRUTH3, ds) == 0.0

    @given(seed=st.integers(0, 10_000), s=st.integers(2, 5))
    @settings(max_examples=40, deadline=None)
    def test_sigma_zero_exactness_random_truths(self, seed, s):
        truth = sample_random(s, 0.5, seed)
        spec = SynthSpec(s, 4, 4, (2, 3), (2, 3), 0.0, truth, rng_seed=seed)
        assert objective_total(truth, generate_synthetic(spec)) == 0.0

    def test_determinism(self):
        a = generate_synthetic(spec3(sigma=0.05))
        b = generate_synthetic(spec3(sigma=0.05))
        assert dataset_to_dict(a) == dataset_to_dict(b)

    def test_structure_respects_spec(self):
        spec = spec3(sigma=0.05, pos=4, neg=7)
        ds = generate_synthetic(spec)
        labels = [bag.label for bag in ds.bags]
        assert labels.count(0) == 7 and labels.count(1) == 4
        for bag in ds.bags:
            assert 2 <= len(bag.candidate_sets) <= 3
            for cs in bag.candidate_sets:
                assert 2 <= cs.instances.shape[0] <= 4
                assert cs.instances.shape[1] == 3
                assert (cs.instances >= 0).all() and (cs.instances <= 1).all()

    def test_extremal_instances_before_noise(self):
        # noise-free: positives reach fused confidence exactly 1 in some set,
        # negatives stay at exactly 0 everywhere
        ds = generate_synthetic(spec3(seed=5))
        for bag in ds.bags:
            per_set = [choquet_batch(cs.instances, TRUTH3) for cs in bag.candidate_sets]
            if bag.label == 1:
                assert max(ci.max() for ci in per_set) == 1.0
            else:
                assert all((ci == 0.0).all() for ci in per_set)

    def test_truth_labels_parallel_structure(self):
        ds = generate_synthetic(spec3(sigma=0.05))
        assert ds.instance_truth is not None
        assert len(ds.instance_truth) == len(ds.bags)
        for bag, bag_truth in zip(ds.bags, ds.instance_truth):
            assert len(bag_truth) == len(bag.candidate_sets)
            for cs, cs_truth in zip(bag.candidate_sets, bag_truth):
                assert len(cs_truth) == cs.instances.shape[0]
                assert set(cs_truth) <= {0, 1}

    def test_flat_truth_matches_flatten_order(self):
        ds = generate_synthetic(spec3(sigma=0.05))
        flat = ds.flat_truth()
        assert flat.shape == (ds.n_instances,)
        k = 0
        for bag_truth in ds.instance_truth:
            for cs_truth in bag_truth:
                for v in cs_truth:
                    assert flat[k] == v
                    k += 1

    def test_noise_moves_values(self):
        clean = generate_synthetic(spec3(seed=9))
        noisy = generate_synthetic(spec3(sigma=0.05, seed=9))
        assert not np.allclose(clean.instance_matrix(), noisy.instance_matrix())
        # labels computed pre-noise: identical across the two
        assert clean.instance_truth == noisy.instance_truth
