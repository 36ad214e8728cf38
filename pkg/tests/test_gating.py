import numpy as np
import pytest

from cxkit.gating import (
    EmbeddingGrid,
    GateParams,
    GateVariant,
    MlpWeights,
    gate,
    load_gate_params,
    save_gate_params,
)


def random_grid(rng, n=32, d=8):
    return EmbeddingGrid(n, d, rng.normal(size=(n, d)))


class TestLinearGate:
    def test_full_mask_is_identity(self):
        rng = np.random.default_rng(0)
        e = random_grid(rng)
        out = gate(e, np.ones(e.n), GateParams(GateVariant.LINEAR, alpha=0.1))
        assert np.allclose(out.values, e.values, atol=1e-12)

    def test_constant_mask_scales(self):
        rng = np.random.default_rng(1)
        e = random_grid(rng)
        alpha, c = 0.3, 0.25
        out = gate(e, np.full(e.n, c), GateParams(GateVariant.LINEAR, alpha=alpha))
        assert np.allclose(out.values, e.values * (alpha * c + 1 - alpha))

    def test_monotone_in_mask(self):
        rng = np.random.default_rng(2)
        e = EmbeddingGrid(4, 3, np.abs(rng.normal(size=(4, 3))))
        p = GateParams(GateVariant.LINEAR, alpha=0.5)
        lo = gate(e, np.full(4, 0.2), p).values
        hi = gate(e, np.full(4, 0.9), p).values
        assert np.all(hi >= lo)


class TestResidualGate:
    def test_zero_mask_full_skip(self):
        rng = np.random.default_rng(3)
        e = random_grid(rng)
        p = GateParams.seeded(GateVariant.RESIDUAL, d=e.d, seed=9)
        out = gate(e, np.zeros(e.n), p)
        assert np.allclose(out.values, e.values, atol=1e-12)

    def test_one_mask_full_transform(self):
        rng = np.random.default_rng(4)
        e = random_grid(rng)
        p = GateParams.seeded(GateVariant.RESIDUAL, d=e.d, seed=9)
        out = gate(e, np.ones(e.n), p)
        assert np.allclose(out.values, p.residual_mlp.apply(e.values))

    def test_convex_combination(self):
        rng = np.random.default_rng(5)
        e = random_grid(rng)
        p = GateParams.seeded(GateVariant.RESIDUAL, d=e.d, seed=9)
        m = rng.random(e.n)
        out = gate(e, m, p).values
        t = p.residual_mlp.apply(e.values)
        lo = np.minimum(e.values, t)
        hi = np.maximum(e.values, t)
        assert np.all(out >= lo - 1e-12) and np.all(out <= hi + 1e-12)


class TestSpatialGate:
    def test_uniform_mask_closed_form(self):
        # a = (1/n each) after normalization (epsilon-shifted), so every
        # feature scales by 1 + alpha * 1/(n + eps).
        rng = np.random.default_rng(6)
        e = random_grid(rng, n=16)
        alpha, eps = 0.2, 1e-6
        p = GateParams(GateVariant.SPATIAL_ATTENTION, alpha=alpha, epsilon=eps)
        out = gate(e, np.ones(e.n), p)
        factor = 1 + alpha / (e.n + eps)
        assert np.allclose(out.values, e.values * factor, atol=1e-12)

    def test_zero_mask_identity(self):
        rng = np.random.default_rng(7)
        e = random_grid(rng)
        out = gate(e, np.zeros(e.n), GateParams(GateVariant.SPATIAL_ATTENTION))
        assert np.allclose(out.values, e.values)


class TestFilmGate:
    def test_zero_weights_identity(self):
        rng = np.random.default_rng(8)
        e = random_grid(rng)
        p = GateParams.film_zeros(d=e.d)
        out = gate(e, rng.random(e.n), p)
        assert np.allclose(out.values, e.values, atol=1e-12)

    def test_affine_in_embeddings(self):
        rng = np.random.default_rng(9)
        e1 = random_grid(rng)
        e2 = EmbeddingGrid(e1.n, e1.d, rng.normal(size=(e1.n, e1.d)))
        m = rng.random(e1.n)
        p = GateParams.seeded(GateVariant.FILM, d=e1.d, seed=4)
        lam = 0.37
        mix = EmbeddingGrid(e1.n, e1.d, lam * e1.values + (1 - lam) * e2.values)
        out_mix = gate(mix, m, p).values
        expected = lam * gate(e1, m, p).values + (1 - lam) * gate(e2, m, p).values
        # Affine in E for fixed mask: beta contributes once on each side.
        beta = p.film_beta.apply(m[:, None])
        assert np.allclose(out_mix, expected - (lam + (1 - lam) - 1) * beta, atol=1e-9)
        assert np.allclose(out_mix, expected, atol=1e-9)


class TestContracts:
    def test_shape_preserved_all_variants(self):
        rng = np.random.default_rng(10)
        e = random_grid(rng, n=12, d=5)
        m = rng.random(12)
        for variant in GateVariant:
            p = GateParams.seeded(variant, d=5, seed=1)
            out = gate(e, m, p)
            assert (out.n, out.d) == (e.n, e.d)

    def test_mask_out_of_range_rejected(self):
        rng = np.random.default_rng(11)
        e = random_grid(rng)
        with pytest.raises(ValueError):
            gate(e, np.full(e.n, 1.5), GateParams(GateVariant.LINEAR))
        with pytest.raises(ValueError):
            gate(e, np.full(e.n, -0.1), GateParams(GateVariant.LINEAR))

    def test_shape_mismatch_rejected(self):
        rng = np.random.default_rng(12)
        e = random_grid(rng)
        with pytest.raises(ValueError):
            gate(e, np.ones(e.n + 1), GateParams(GateVariant.LINEAR))

    def test_bit_identical_determinism(self):
        rng = np.random.default_rng(13)
        e = random_grid(rng)
        m = rng.random(e.n)
        for variant in GateVariant:
            p1 = GateParams.seeded(variant, d=e.d, seed=21)
            p2 = GateParams.seeded(variant, d=e.d, seed=21)
            a = gate(e, m, p1).values
            b = gate(e, m, p2).values
            assert a.tobytes() == b.tobytes()

    def test_seed_changes_mlp_weights(self):
        p1 = GateParams.seeded(GateVariant.FILM, d=6, seed=0)
        p2 = GateParams.seeded(GateVariant.FILM, d=6, seed=1)
        assert not np.allclose(p1.film_gamma.w1, p2.film_gamma.w1)

    def test_initializer_bounds(self):
        p = GateParams.seeded(GateVariant.RESIDUAL, d=64, seed=5)
        bound = 1 / np.sqrt(64)
        assert np.all(np.abs(p.residual_mlp.w1) <= bound)
        assert np.all(np.abs(p.residual_mlp.w2) <= bound)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(14)
        e = random_grid(rng)
        m = rng.random(e.n)
        p = GateParams.seeded(GateVariant.FILM, d=e.d, seed=2)
        path = tmp_path / "gate.json"
        save_gate_params(p, path)
        loaded = load_gate_params(path)
        assert loaded.variant is GateVariant.FILM
        # Weight blobs are float32, so the round trip is float32-exact.
        a = gate(e, m, GateParams(GateVariant.FILM, film_gamma=_as_f32(p.film_gamma), film_beta=_as_f32(p.film_beta)))
        b = gate(e, m, loaded)
        assert np.allclose(a.values, b.values, atol=0)

    def test_linear_round_trip(self, tmp_path):
        p = GateParams(GateVariant.LINEAR, alpha=0.25, epsilon=1e-5, seed=3)
        path = tmp_path / "gate.json"
        save_gate_params(p, path)
        loaded = load_gate_params(path)
        assert loaded.alpha == 0.25 and loaded.epsilon == 1e-5 and loaded.seed == 3


def _as_f32(mlp: MlpWeights) -> MlpWeights:
    return MlpWeights(*(np.asarray(getattr(mlp, k), dtype=np.float32).astype(np.float64) for k in ("w1", "b1", "w2", "b2")))
