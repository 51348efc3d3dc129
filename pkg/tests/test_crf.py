from __future__ import annotations

import numpy as np
import pytest

from countquant.crf import (
    CrfModel,
    DegenerateTrainingError,
    FeatureTemplate,
    ModelFormatError,
    TAG_BIGRAM,
    TOKEN_NGRAM,
    TrainingProblem,
    decode,
    default_templates,
    extract_features,
    load_model,
    log_partition,
    marginals,
    save_model,
    train,
    viterbi,
)
from countquant.crf.model import path_score

from oracles import (
    assert_viterbi_optimal,
    brute_force_log_partition,
    brute_force_marginals,
    random_model,
    random_sequence,
)

VOCAB = ["CARDINAL", "child", "have", "x", "y"]

TOY_DATA = [
    (["trump", "have", "CARDINAL", "child", "from"], ["O", "O", "COUNT", "O", "O"]),
    (["she", "have", "CARDINAL", "child"], ["O", "O", "COUNT", "O"]),
    (["he", "wrote", "CARDINAL", "book"], ["O", "O", "O", "O"]),
]


class TestExtractFeatures:
    def test_centered_pentagram(self):
        seq = ["trump", "have", "CARDINAL", "child", "from"]
        tpl = FeatureTemplate(kind=TOKEN_NGRAM, offsets=(-2, -1, 0, 1, 2))
        assert extract_features(seq, 2, [tpl]) == ["U5:trump|have|CARDINAL|child|from"]

    def test_boundary_symbols(self):
        tpl = FeatureTemplate(kind=TOKEN_NGRAM, offsets=(-1,))
        assert extract_features(["a", "b"], 0, [tpl]) == ["U1[-1]:BOS"]
        assert extract_features(["a", "b"], 1, [FeatureTemplate(kind=TOKEN_NGRAM, offsets=(1,))]) == ["U1[1]:EOS"]

    def test_deterministic(self):
        seq = ["a", "b", "c"]
        templates = default_templates()
        assert extract_features(seq, 1, templates) == extract_features(seq, 1, templates)

    def test_tag_bigram_emits_nothing(self):
        tpl = FeatureTemplate(kind=TAG_BIGRAM)
        assert extract_features(["a"], 0, [tpl]) == []

    def test_default_template_set(self):
        templates = default_templates()
        ngrams = [t for t in templates if t.kind == TOKEN_NGRAM]
        assert len(ngrams) == 15
        assert all(0 in t.offsets for t in ngrams)
        assert all(-4 <= t.offsets[0] and t.offsets[-1] <= 4 for t in ngrams)
        assert sum(t.kind == TAG_BIGRAM for t in templates) == 1

    def test_invalid_length_rejected(self):
        with pytest.raises(ValueError):
            FeatureTemplate(kind=TOKEN_NGRAM, offsets=(0, 1, 2, 3, 4, 5))


class TestGradient:
    def test_matches_central_differences(self):
        problem = TrainingProblem(TOY_DATA, l2_sigma=0.5, feature_cutoff=1)
        rng = np.random.default_rng(42)
        h = 1e-5
        worst = 0.0
        for _ in range(5):
            theta = rng.normal(scale=0.5, size=problem.n_params)
            _, grad = problem.value_and_grad(theta)
            fd = np.empty_like(grad)
            for i in range(len(theta)):
                up, down = theta.copy(), theta.copy()
                up[i] += h
                down[i] -= h
                fd[i] = (problem.value_and_grad(up)[0] - problem.value_and_grad(down)[0]) / (2 * h)
            rel = np.abs(grad - fd) / np.maximum(1.0, np.maximum(np.abs(grad), np.abs(fd)))
            worst = max(worst, float(rel.max()))
        assert worst < 1e-4

    def test_gradient_zero_at_optimum_direction(self):
        # after training, the gradient norm should be tiny at the solution
        problem = TrainingProblem(TOY_DATA, l2_sigma=1.0, feature_cutoff=1)
        model = train(TOY_DATA, l2_sigma=1.0, feature_cutoff=1, max_iter=200)
        theta = np.concatenate([model.weights.ravel(), model.transitions.ravel()])
        _, grad = problem.value_and_grad(theta)
        assert np.abs(grad).max() < 1e-3


class TestTrain:
    def test_objective_ascends(self):
        history: list[float] = []
        train(TOY_DATA[:2], feature_cutoff=1, max_iter=50, history=history)
        assert len(history) >= 2
        assert all(b >= a - 1e-12 for a, b in zip(history, history[1:]))
        assert history[-1] > history[0]

    def test_all_negative_refused(self):
        data = [(["a", "b"], ["O", "O"]), (["c"], ["O"])]
        with pytest.raises(DegenerateTrainingError):
            train(data, feature_cutoff=1)

    def test_empty_refused(self):
        with pytest.raises(ValueError):
            train([], feature_cutoff=1)

    def test_feature_cutoff_drops_singletons(self):
        problem = TrainingProblem(TOY_DATA, feature_cutoff=2)
        # "U1:trump" appears once over the corpus and must be gone
        assert "U1:trump" not in problem.feature_index
        assert "U1:CARDINAL" in problem.feature_index  # appears three times

    def test_stronger_penalty_shrinks_weights(self):
        norms = []
        for sigma in (0.1, 1.0, 10.0):
            model = train(TOY_DATA, l2_sigma=sigma, feature_cutoff=1, max_iter=200)
            norms.append(float(np.linalg.norm(
                np.concatenate([model.weights.ravel(), model.transitions.ravel()])
            )))
        assert norms[0] >= norms[1] >= norms[2]

    def test_learns_toy_pattern(self):
        model = train(TOY_DATA, feature_cutoff=1, max_iter=200)
        assert decode(model, ["she", "have", "CARDINAL", "child"]) == ["O", "O", "COUNT", "O"]
        assert decode(model, ["he", "wrote", "CARDINAL", "book"]) == ["O", "O", "O", "O"]


class TestDecode:
    def test_matches_exhaustive_argmax(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            model = random_model(rng, VOCAB)
            for length in (1, 2, 4, 8):
                seq = random_sequence(rng, VOCAB, length)
                em = model.emissions(seq)
                assert_viterbi_optimal(
                    em, model.transitions, viterbi(em, model.transitions)
                )

    def test_empty_sequence(self):
        rng = np.random.default_rng(0)
        model = random_model(rng, VOCAB)
        assert decode(model, []) == []

    def test_viterbi_beats_sampled_paths(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, VOCAB)
        seq = random_sequence(rng, VOCAB, 9)
        em = model.emissions(seq)
        best = viterbi(em, model.transitions)
        best_score = path_score(em, model.transitions, best)
        for _ in range(200):
            other = list(rng.integers(0, 3, size=len(seq)))
            assert best_score >= path_score(em, model.transitions, other) - 1e-12


class TestMarginals:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(11)
        model = random_model(rng, VOCAB, scale=2.0)
        for length in (1, 3, 6, 10):
            seq = random_sequence(rng, VOCAB, length)
            probs = marginals(model, seq)
            assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9

    def test_matches_exhaustive_path_sums(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            model = random_model(rng, VOCAB)
            for length in (1, 2, 4, 6):
                seq = random_sequence(rng, VOCAB, length)
                em = model.emissions(seq)
                expected = brute_force_marginals(em, model.transitions)
                got = marginals(model, seq)
                assert np.abs(got - expected).max() < 1e-8

    def test_uniform_model_gives_thirds(self):
        templates = (FeatureTemplate(kind=TOKEN_NGRAM, offsets=(0,)),)
        model = CrfModel(
            feature_index={"U1:a": 0},
            weights=np.zeros((1, 3)),
            transitions=np.zeros((3, 3)),
            templates=templates,
        )
        probs = marginals(model, ["a", "a", "a"])
        assert np.abs(probs - 1.0 / 3.0).max() < 1e-12

    def test_log_partition_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            model = random_model(rng, VOCAB)
            seq = random_sequence(rng, VOCAB, 6)
            em = model.emissions(seq)
            assert abs(
                log_partition(em, model.transitions)
                - brute_force_log_partition(em, model.transitions)
            ) < 1e-8


class TestModelFile:
    def test_roundtrip_decodes_identically(self, tmp_path):
        model = train(TOY_DATA, feature_cutoff=1, max_iter=100)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        rng = np.random.default_rng(23)
        for _ in range(20):
            seq = random_sequence(rng, VOCAB + ["trump", "book", "wrote"], 7)
            assert decode(model, seq) == decode(loaded, seq)
        assert np.array_equal(model.weights, loaded.weights)
        assert np.array_equal(model.transitions, loaded.transitions)

    def test_truncated_file_raises(self, tmp_path):
        model = train(TOY_DATA, feature_cutoff=1, max_iter=20)
        path = tmp_path / "model.json"
        save_model(model, path)
        path.write_text(path.read_text(encoding="utf-8")[: 100], encoding="utf-8")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_wrong_magic_raises(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"magic": "something-else", "version": 1}', encoding="utf-8")
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_templates_restored_from_file(self, tmp_path):
        templates = [
            FeatureTemplate(kind=TOKEN_NGRAM, offsets=(0,)),
            FeatureTemplate(kind=TOKEN_NGRAM, offsets=(-1, 0)),
            FeatureTemplate(kind=TAG_BIGRAM),
        ]
        model = train(TOY_DATA, templates=templates, feature_cutoff=1, max_iter=50)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.templates == tuple(templates)

    def test_weights_immutable(self):
        model = train(TOY_DATA, feature_cutoff=1, max_iter=20)
        with pytest.raises(ValueError):
            model.weights[0, 0] = 1.0
