import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cluster_ent.classify import classify
from cluster_ent.criteria import biseparable_verdict
from cluster_ent.errors import NegativeEntry, NotNormalized, RegionUnreachable
from cluster_ent.state_model import (
    BLOCKS,
    EXCHANGE,
    HALF_SWAP,
    NoiseSpec,
    block_params,
    block_params_batch,
    dephasing_state,
    permute,
    sample_random,
    validate,
)
from helpers import PURE, UNIFORM, fvectors


class TestValidate:
    def test_uniform_unchanged(self):
        out = validate(UNIFORM)
        assert np.array_equal(out, UNIFORM)
        assert not out.flags.writeable

    def test_negative_entry(self):
        F = UNIFORM.copy()
        F[3] = -0.01
        F[4] += 0.01
        with pytest.raises(NegativeEntry):
            validate(F)

    def test_tiny_negative_clamped(self):
        F = UNIFORM.copy()
        F[3] = -1e-13
        F[4] += 1e-13 + 1 / 16
        out = validate(F)
        assert out[3] == 0.0

    def test_sum_slightly_off_is_renormalised(self):
        F = UNIFORM * (1 + 5e-9)
        out = validate(F)
        assert math.fsum(out) == 1.0

    def test_sum_far_off(self):
        with pytest.raises(NotNormalized):
            validate(UNIFORM * 1.01)

    def test_shape_and_finite(self):
        with pytest.raises(ValueError):
            validate(np.ones(15) / 15)
        F = UNIFORM.copy()
        F[0] = np.nan
        with pytest.raises(ValueError):
            validate(F)

    @given(fvectors())
    def test_idempotent(self, F):
        assert np.array_equal(validate(F), F)


class TestBlockParams:
    def test_pure(self):
        bp = block_params(PURE)
        assert bp.p.tolist() == [1, 0, 0, 0, 0, 0, 0, 0]

    def test_four_entry_example(self):
        F = np.zeros(16)
        F[0b0000], F[0b1001], F[0b1011], F[0b0010] = 0.4, 0.25, 0.2, 0.15
        bp = block_params(validate(F))
        p = bp.p
        assert [p[0], p[3], p[7], p[4]] == pytest.approx([0.4, 0.25, 0.2, 0.15], abs=1e-16)
        assert p[1] == p[2] == p[5] == p[6] == 0
        assert bp.max_index(0) == 0b0000 and bp.max_index(3) == 0b1001

    def test_uniform(self):
        p = block_params(UNIFORM).p
        assert np.allclose(p[:4], 1 / 16) and np.allclose(p[4:], 3 / 16)

    def test_ties_go_to_first_position(self):
        bp = block_params(UNIFORM)
        assert bp.argmax == ((0, 0),) * 4

    def test_block_layout(self):
        assert BLOCKS[0].tolist() == [0, 2, 4, 6]
        assert BLOCKS[3].tolist() == [9, 11, 13, 15]

    @given(fvectors())
    def test_invariants(self, F):
        p = block_params(F).p
        assert np.all(p[:4] >= 0)
        assert np.all(p[4:] <= 3 * p[:4] + 1e-15)
        assert abs(math.fsum(p) - 1) <= 1e-10

    @given(fvectors(), st.integers(0, 3), st.permutations(range(3)))
    def test_non_max_permutation_invariance(self, F, k, perm):
        bp = block_params(F)
        idx = BLOCKS[k]
        rest = idx[idx != bp.max_index(k)]
        G = np.array(F)
        G[rest] = G[rest[list(perm)]]
        q = block_params(G).p
        assert np.array_equal(q[:4], bp.p[:4])
        assert np.allclose(q[4:], bp.p[4:], rtol=0, atol=1e-15)

    def test_batch_matches_scalar(self, rng):
        F = rng.dirichlet(np.ones(16), size=50)
        batch = block_params_batch(F)
        for row, f in zip(batch, F):
            assert np.array_equal(row, block_params(f).p)

    @given(fvectors())
    def test_half_swap_and_exchange(self, F):
        p = block_params(F).p
        q = block_params(permute(F, HALF_SWAP)).p
        assert np.array_equal(q, p[[1, 0, 3, 2, 5, 4, 7, 6]])
        r = block_params(permute(F, EXCHANGE)).p
        assert np.array_equal(r, p[[3, 2, 1, 0, 7, 6, 5, 4]])


class TestDephasing:
    def test_noiseless(self):
        assert np.array_equal(dephasing_state(NoiseSpec((0, 0, 0, 0))), PURE)

    def test_fully_dephased(self):
        assert np.allclose(dephasing_state(NoiseSpec((0.5,) * 4)), UNIFORM, atol=0)

    def test_q_point_one(self):
        F = dephasing_state(NoiseSpec.parse("0.1,0.1,0.1,0.1"))
        # enumeration by Hamming weight
        brute = [
            math.prod(0.1 if b else 0.9 for b in bits) for bits in itertools.product((0, 1), repeat=4)
        ]
        assert np.allclose(F, brute, atol=1e-16)
        p = block_params(F).p
        assert p[0] == pytest.approx(0.6561, abs=1e-12)
        assert p[4] == pytest.approx(0.1539, abs=1e-12)
        assert p[3] == pytest.approx(0.0081, abs=1e-12)
        assert p[7] == pytest.approx(0.0019, abs=1e-12)

    @given(st.tuples(*[st.floats(0, 1)] * 4))
    def test_always_valid(self, q):
        F = dephasing_state(NoiseSpec(q))
        assert math.fsum(F) == 1.0 and F.min() >= 0

    def test_noise_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec((0.1, 0.2, 0.3))
        with pytest.raises(ValueError):
            NoiseSpec((0.1, 0.2, 0.3, 1.5))
        with pytest.raises(ValueError):
            NoiseSpec.parse("0.1,abc,0,0")


class TestSampler:
    def test_valid(self):
        F = sample_random(1)
        assert math.fsum(F) == 1.0

    def test_deterministic(self):
        assert np.array_equal(sample_random(1), sample_random(1))
        assert not np.array_equal(sample_random(1), sample_random(2))

    def test_region_b(self):
        F = sample_random(7, region="B")
        assert classify(F).region == "B"
        assert not biseparable_verdict(F, with_raw=True)[1].biseparable

    def test_region_and_half(self):
        F = sample_random(3, region="C1", half="second")
        label = classify(F)
        assert (label.region, label.half) == ("C1", "second")

    def test_biseparable_sublabel(self):
        F = sample_random(4, region="D2")
        label = classify(F)
        assert not label.entangled and label.name == "D2"

    def test_unreachable(self):
        with pytest.raises(RegionUnreachable):
            sample_random(0, region="B", max_draws=10)

    def test_unknown_region(self):
        with pytest.raises(ValueError):
            sample_random(0, region="Z9")
