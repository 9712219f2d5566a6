import numpy as np
import pytest

from lkb.errors import DimensionMismatchError
from lkb.kmeans import kmeans
from lkb.pq import train_pq
from lkb.rng import SplitMix64


def test_single_subspace_large_codebook_zero_error():
    # ksub >= number of distinct vectors: every training vector becomes
    # its own codeword, so reconstruction is exact.
    data = SplitMix64(50).normal(10 * 4).reshape(10, 4).astype(np.float32)
    with pytest.warns(UserWarning):
        cb = train_pq(data, num_subspaces=1, bits=4, seed=0)
    for row in data:
        decoded = cb.decode(cb.encode(row))
        assert np.array_equal(decoded, row)


def test_two_point_set_codebooks_contain_both_subpoints():
    data = np.array([[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]], dtype=np.float32)
    cb = train_pq(data, num_subspaces=2, bits=1, seed=1)
    for m in range(2):
        sub = {tuple(np.round(r, 6)) for r in cb.codebooks[m]}
        want = {tuple(data[0, 2 * m : 2 * m + 2]), tuple(data[1, 2 * m : 2 * m + 2])}
        assert sub == want


def test_reconstruction_error_matches_per_subspace_lloyd_oracle():
    data = SplitMix64(51).normal(1000 * 16).reshape(1000, 16).astype(np.float32)
    cb = train_pq(data, num_subspaces=4, bits=4, seed=2)
    got = np.mean(
        [np.sum((cb.decode(cb.encode(row)).astype(np.float64) - row) ** 2) for row in data]
    )
    # Oracle: run the shared kmeans per slice, then nearest-codeword scan.
    want = 0.0
    for m in range(4):
        sub = data[:, m * 4 : (m + 1) * 4]
        centroids = kmeans(sub, 16, seed=2 + m).centroids.astype(np.float64)
        for row in sub.astype(np.float64):
            dists = [float(np.dot(row - c, row - c)) for c in centroids]
            want += min(dists)
    want /= len(data)
    assert abs(got - want) < 1e-9


def test_encode_matches_exhaustive_scan():
    data = SplitMix64(52).normal(200 * 8).reshape(200, 8).astype(np.float32)
    cb = train_pq(data, num_subspaces=2, bits=3, seed=3)
    row = data[17].astype(np.float64)
    code = cb.encode(data[17])
    for m in range(2):
        sub = row[m * 4 : (m + 1) * 4]
        dists = [
            float(np.dot(sub - c, sub - c)) for c in cb.codebooks[m].astype(np.float64)
        ]
        assert code[m] == min(range(len(dists)), key=lambda i: (dists[i], i))


def test_encode_decode_fixed_point():
    data = SplitMix64(53).normal(300 * 8).reshape(300, 8).astype(np.float32)
    cb = train_pq(data, num_subspaces=4, bits=3, seed=4)
    for value in range(cb.ksub):
        code = np.full(4, value, dtype=np.uint16)
        assert np.array_equal(cb.encode(cb.decode(code)), code)


def test_encode_many_matches_encode():
    data = SplitMix64(54).normal(50 * 8).reshape(50, 8).astype(np.float32)
    cb = train_pq(data, num_subspaces=2, bits=4, seed=5)
    batch = cb.encode_many(data)
    for i in range(50):
        assert np.array_equal(batch[i], cb.encode(data[i]))


def test_adc_table_sum_identity():
    data = SplitMix64(55).normal(400 * 16).reshape(400, 16).astype(np.float32)
    cb = train_pq(data, num_subspaces=4, bits=5, seed=6)
    query = SplitMix64(56).normal(16)
    table = cb.score_table(query)
    codes = cb.encode_many(data[:50])
    scores = cb.scores_for_codes(table, codes)
    for i in range(50):
        direct = float(np.dot(cb.decode(codes[i]).astype(np.float64), query))
        assert abs(scores[i] - direct) < 1e-9


def test_dimension_validation():
    data = np.ones((4, 6), dtype=np.float32)
    with pytest.raises(DimensionMismatchError):
        train_pq(data, num_subspaces=4, bits=2)
    cb = train_pq(data, num_subspaces=2, bits=1, seed=7)
    with pytest.raises(DimensionMismatchError):
        cb.encode(np.ones(5))
    with pytest.raises(ValueError):
        cb.decode(np.array([9, 0], dtype=np.uint16))
