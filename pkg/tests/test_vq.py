import math

import numpy as np
import pytest

from hcvq.errors import DimensionMismatch, EmptyBatch
from hcvq.vq import (
    CodebookState,
    code_usage_entropy,
    input_entropy,
    nearest_codes,
    paper_latent_entropy,
    quantize,
    quantize_backward,
    soft_usage_entropy,
)


def brute_nearest(latents, emb):
    out = []
    for z in latents:
        best, arg = np.inf, -1
        for k, e in enumerate(emb):
            dist = float(np.sum((z - e) ** 2))
            if dist < best:
                best, arg = dist, k
        out.append(arg)
    return np.array(out)


class TestCodebook:
    def test_initialization_range(self, rng):
        st = CodebookState.initialize(128, 64, rng)
        assert st.embeddings.shape == (128, 64)
        assert st.embeddings.dtype == np.float32
        assert np.all(np.abs(st.embeddings) <= 1 / 128)

    def test_needs_two_codes(self):
        with pytest.raises(ValueError):
            CodebookState(np.zeros((1, 3)))


class TestQuantize:
    def test_exact_code(self, rng):
        st = CodebookState(rng.normal(size=(8, 3)))
        res = quantize(st.embeddings[[5]].copy(), st)
        assert res.codes.tolist() == [5]
        assert res.commit_loss == 0.0
        assert res.codebook_loss == 0.0

    def test_tie_goes_to_lowest_index(self):
        st = CodebookState(np.array([[1.0, 0.0], [-1.0, 0.0], [5.0, 5.0]]))
        assert quantize(np.zeros((1, 2)), st).codes.tolist() == [0]

    def test_matches_exhaustive_search(self, rng):
        st = CodebookState(rng.normal(size=(8, 3)))
        z = rng.normal(size=(50, 3))
        np.testing.assert_array_equal(quantize(z, st).codes, brute_nearest(z, st.embeddings))

    def test_counts(self, rng):
        st = CodebookState(rng.normal(size=(8, 3)))
        res = quantize(rng.normal(size=(33, 3)), st)
        assert res.counts.sum() == 33
        np.testing.assert_array_equal(st.usage_counts, res.counts)

    def test_idempotent(self, rng):
        st = CodebookState(rng.normal(size=(8, 3)))
        q = quantize(rng.normal(size=(20, 3)), st).quantized
        np.testing.assert_array_equal(quantize(q, st).quantized, q)

    def test_permutation_invariance(self, rng):
        st = CodebookState(rng.normal(size=(8, 3)))
        z = rng.normal(size=(20, 3))
        a, b = quantize(z, st), quantize(z[::-1], st)
        assert code_usage_entropy(a.counts) == code_usage_entropy(b.counts)
        assert abs(a.commit_loss - b.commit_loss) <= 1e-15

    def test_joint_scaling(self, rng):
        emb, z = rng.normal(size=(8, 3)), rng.normal(size=(20, 3))
        np.testing.assert_array_equal(nearest_codes(z, emb), nearest_codes(3.5 * z, 3.5 * emb))

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            quantize(np.zeros((2, 4)), CodebookState(rng.normal(size=(8, 3))))

    def test_backward_matches_finite_difference(self, rng):
        emb = rng.normal(size=(6, 3))
        z = rng.normal(size=(10, 3))
        beta = 0.25
        res = quantize(z, CodebookState(emb))
        gq = np.zeros_like(z)
        dz, de = quantize_backward(gq, z, res, 6, beta)
        # with codes frozen, commit depends on z and codebook loss on e
        h = 1e-6
        num_e = np.zeros_like(emb)
        for k in range(6):
            for j in range(3):
                ep, em = emb.copy(), emb.copy()
                ep[k, j] += h
                em[k, j] -= h
                num_e[k, j] = (np.mean((z - ep[res.codes]) ** 2) - np.mean((z - em[res.codes]) ** 2)) / (2 * h)
        np.testing.assert_allclose(de, num_e, atol=1e-8)
        num_z = 2 * beta * (z - emb[res.codes]) / z.size
        np.testing.assert_allclose(dz, num_z, atol=1e-15)


class TestEntropies:
    def test_uniform_usage(self):
        assert abs(code_usage_entropy(np.ones(128)) - math.log(128)) <= 1e-9

    def test_collapsed(self):
        c = np.zeros(128)
        c[7] = 64
        assert code_usage_entropy(c) == 0.0

    def test_three_one(self):
        ref = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
        assert abs(code_usage_entropy([3, 1]) - ref) <= 1e-15

    def test_usage_bounds(self, rng):
        for _ in range(20):
            c = rng.integers(0, 5, size=16)
            c[0] += 1
            assert 0.0 <= code_usage_entropy(c) <= math.log(16) + 1e-12

    def test_empty_counts(self):
        with pytest.raises(EmptyBatch):
            code_usage_entropy(np.zeros(4))

    def test_paper_entropy_uniform(self):
        assert abs(paper_latent_entropy(np.full(10, 2.0)) - math.log(10)) <= 1e-12

    def test_paper_entropy_one_two_three(self):
        ref = -sum(v / 6 * math.log(v / 6) for v in (1, 2, 3))
        assert abs(paper_latent_entropy([1.0, 2.0, 3.0]) - ref) <= 1e-12
        assert abs(ref - 1.0114) <= 1e-4

    def test_paper_entropy_concentrated(self):
        v = np.full(50, -1.0)
        v[3] = 4.0
        assert paper_latent_entropy(v) < 1e-5

    def test_input_entropy_constant(self):
        assert input_entropy(np.full((4, 16), 0.3)) == 0.0

    def test_input_entropy_all_bins(self):
        assert abs(input_entropy(np.arange(256) / 255.0) - math.log(256)) <= 1e-12

    def test_input_entropy_eight_pixels(self):
        px = np.array([0, 0, 128, 128, 255, 255, 255, 255]) / 255.0
        ref = -(0.25 * math.log(0.25) * 2 + 0.5 * math.log(0.5))
        assert abs(input_entropy(px) - ref) <= 1e-12
        assert abs(input_entropy(px * 255, max_value=255) - ref) <= 1e-12

    def test_soft_usage_entropy_gradient(self, rng):
        z, e = rng.normal(size=(7, 3)), rng.normal(size=(5, 3))
        h, gz, ge = soft_usage_entropy(z, e)
        assert 0 <= h <= math.log(5)
        eps = 1e-6
        for arr, g in ((z, gz), (e, ge)):
            num = np.zeros_like(arr)
            for idx in np.ndindex(arr.shape):
                old = arr[idx]
                arr[idx] = old + eps
                hp = soft_usage_entropy(z, e)[0]
                arr[idx] = old - eps
                hm = soft_usage_entropy(z, e)[0]
                arr[idx] = old
                num[idx] = (hp - hm) / (2 * eps)
            np.testing.assert_allclose(g, num, atol=1e-8)
