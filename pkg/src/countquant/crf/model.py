"""Linear-chain CRF over the COUNT/COMP/O tag scheme.

All dynamic programs run in log-space with log-sum-exp. A trained model is
immutable (weight arrays are write-protected) and safe to share across
threads; decoding and marginal inference are reentrant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .features import FeatureTemplate, extract_features


def logsumexp(a: np.ndarray, axis: Optional[int] = None) -> np.ndarray:
    m = a.max(axis=axis, keepdims=True)
    out = m + np.log(np.exp(a - m).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())

TAGS = ("COUNT", "COMP", "O")

MODEL_MAGIC = "countquant-crf"
MODEL_VERSION = 1


class ModelFormatError(Exception):
    """Model file is corrupt, truncated, or of an unsupported version."""


@dataclass(frozen=True)
class CrfModel:
    feature_index: dict[str, int]
    weights: np.ndarray          # (n_features, n_tags) observation weights
    transitions: np.ndarray      # (n_tags, n_tags) tag-transition weights
    templates: tuple[FeatureTemplate, ...]
    tags: tuple[str, ...] = TAGS
    l2_sigma: float = 1.0
    relation: Optional[dict] = None
    final_objective: float = 0.0
    n_iterations: int = 0
    _tag_ids: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.weights.flags.writeable = False
        self.transitions.flags.writeable = False
        object.__setattr__(self, "_tag_ids", {t: i for i, t in enumerate(self.tags)})

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def n_parameters(self) -> int:
        return self.weights.size + self.transitions.size

    def feature_ids(self, sequence: list[str]) -> list[np.ndarray]:
        """Known-feature ids per position (unseen features are ignored)."""
        ids = []
        for pos in range(len(sequence)):
            row = [
                self.feature_index[f]
                for f in extract_features(sequence, pos, list(self.templates))
                if f in self.feature_index
            ]
            ids.append(np.asarray(row, dtype=np.intp))
        return ids

    def emissions(self, sequence: list[str]) -> np.ndarray:
        """Per-position observation scores, shape (len(sequence), n_tags)."""
        em = np.zeros((len(sequence), self.n_tags))
        for pos, row in enumerate(self.feature_ids(sequence)):
            if row.size:
                em[pos] = self.weights[row].sum(axis=0)
        return em


def log_forward(emissions: np.ndarray, transitions: np.ndarray) -> np.ndarray:
    n, k = emissions.shape
    alpha = np.empty((n, k))
    alpha[0] = emissions[0]
    for t in range(1, n):
        alpha[t] = emissions[t] + logsumexp(alpha[t - 1][:, None] + transitions, axis=0)
    return alpha


def log_backward(emissions: np.ndarray, transitions: np.ndarray) -> np.ndarray:
    n, k = emissions.shape
    beta = np.zeros((n, k))
    for t in range(n - 2, -1, -1):
        beta[t] = logsumexp(transitions + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def log_partition(emissions: np.ndarray, transitions: np.ndarray) -> float:
    if emissions.shape[0] == 0:
        return 0.0
    return float(logsumexp(log_forward(emissions, transitions)[-1]))


def viterbi(emissions: np.ndarray, transitions: np.ndarray) -> list[int]:
    """Argmax tag-id path; ties break toward the lower tag id."""
    n, k = emissions.shape
    if n == 0:
        return []
    delta = emissions[0].copy()
    back = np.zeros((n, k), dtype=np.intp)
    for t in range(1, n):
        scores = delta[:, None] + transitions
        back[t] = scores.argmax(axis=0)
        delta = emissions[t] + scores.max(axis=0)
    path = [int(delta.argmax())]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t][path[-1]]))
    path.reverse()
    return path


def path_score(
    emissions: np.ndarray, transitions: np.ndarray, tag_ids: list[int]
) -> float:
    n = len(tag_ids)
    score = sum(emissions[t, tag_ids[t]] for t in range(n))
    score += sum(transitions[tag_ids[t - 1], tag_ids[t]] for t in range(1, n))
    return float(score)


def decode(model: CrfModel, sequence: list[str]) -> list[str]:
    """Viterbi tag sequence for a placeholder/lemma sequence."""
    if not sequence:
        return []
    path = viterbi(model.emissions(sequence), model.transitions)
    return [model.tags[i] for i in path]


def marginals(model: CrfModel, sequence: list[str]) -> np.ndarray:
    """Forward-backward per-position tag probabilities, shape (n, n_tags).

    Each row sums to 1; entry [t, k] is the probability that position t
    carries tag k, used downstream as the mention confidence score.
    """
    if not sequence:
        return np.zeros((0, model.n_tags))
    em = model.emissions(sequence)
    alpha = log_forward(em, model.transitions)
    beta = log_backward(em, model.transitions)
    log_z = logsumexp(alpha[-1])
    return np.exp(alpha + beta - log_z)


def tag_marginal(model: CrfModel, sequence: list[str], position: int, tag: str) -> float:
    return float(marginals(model, sequence)[position, model._tag_ids[tag]])


def _template_to_dict(tpl: FeatureTemplate) -> dict:
    return {"kind": tpl.kind, "offsets": list(tpl.offsets)}


def _template_from_dict(d: dict) -> FeatureTemplate:
    return FeatureTemplate(kind=d["kind"], offsets=tuple(d.get("offsets", ())))


def save_model(model: CrfModel, path: Path | str) -> None:
    """Write the model as versioned JSON; load_model round-trips it exactly."""
    payload = {
        "magic": MODEL_MAGIC,
        "version": MODEL_VERSION,
        "tags": list(model.tags),
        "l2_sigma": model.l2_sigma,
        "relation": model.relation,
        "final_objective": model.final_objective,
        "n_iterations": model.n_iterations,
        "templates": [_template_to_dict(t) for t in model.templates],
        "features": list(model.feature_index.keys()),
        "weights": model.weights.tolist(),
        "transitions": model.transitions.tolist(),
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_model(path: Path | str) -> CrfModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("magic") != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a {MODEL_MAGIC} model file")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported model version {payload.get('version')!r}"
        )
    try:
        features = payload["features"]
        weights = np.asarray(payload["weights"], dtype=float)
        transitions = np.asarray(payload["transitions"], dtype=float)
        tags = tuple(payload["tags"])
        templates = tuple(_template_from_dict(d) for d in payload["templates"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: corrupt model payload: {exc}") from exc
    if weights.shape != (len(features), len(tags)) or transitions.shape != (
        len(tags),
        len(tags),
    ):
        raise ModelFormatError(f"{path}: weight shapes do not match feature/tag counts")
    return CrfModel(
        feature_index={f: i for i, f in enumerate(features)},
        weights=weights,
        transitions=transitions,
        templates=templates,
        tags=tags,
        l2_sigma=float(payload.get("l2_sigma", 1.0)),
        relation=payload.get("relation"),
        final_objective=float(payload.get("final_objective", 0.0)),
        n_iterations=int(payload.get("n_iterations", 0)),
    )
