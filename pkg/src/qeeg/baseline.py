"""Traditional real-PCA comparator.

The four channels' band-power vectors are concatenated into one real vector
(Ch1 then Ch2 then Ch3 then Ch4, segment-major within each channel),
classical PCA extracts the leading components, and the same linear SVM
classifies them.  `compare` runs this arm and the quaternion arm on
identical inputs and settings so the representations are the only
difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import confusion, metrics, svm_fit, svm_predict
from .errors import DegenerateDataError, ParameterError, ShapeError
from .pipeline import FeatureCache, PipelineParams, TrialOutcome, evaluate_quadruple

__all__ = ["RealPcaModel", "fit_real_pca", "transform_real",
           "concatenated_features", "compare"]


@dataclass(frozen=True, eq=False)
class RealPcaModel:
    mean: np.ndarray
    basis: np.ndarray        # (dim, p), orthonormal columns
    eigenvalues: np.ndarray  # full spectrum, descending
    p: int


def fit_real_pca(training: np.ndarray, p: int | None = None,
                 energy_threshold: float = 0.90) -> RealPcaModel:
    """Classical PCA via the covariance eigendecomposition (1/m) X~^T X~."""
    x = np.asarray(training, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DegenerateDataError(f"need a 2-D sample matrix with >= 2 rows, got {x.shape}")
    m, dim = x.shape
    mean = x.mean(axis=0)
    centered = x - mean
    if np.linalg.norm(centered) <= 1e-12 * max(1.0, np.linalg.norm(x)):
        raise DegenerateDataError("degenerate spectrum: all training vectors identical")
    cov = centered.T @ centered / m
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.maximum(vals[order], 0.0)
    vecs = vecs[:, order]
    # sign convention: largest-magnitude entry of each column positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs[None, :]

    p_max = min(m, dim)
    if p is None:
        share = np.cumsum(vals) / vals.sum()
        p = int(np.searchsorted(share, energy_threshold) + 1)
        p = min(p, p_max)
    if not 1 <= p <= p_max:
        raise ParameterError(f"p={p} outside [1, {p_max}]")
    return RealPcaModel(mean=mean, basis=vecs[:, :p].copy(), eigenvalues=vals, p=p)


def transform_real(model: RealPcaModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != len(model.mean):
        raise ShapeError(f"vector length {x.shape[1]} does not match model dim {len(model.mean)}")
    return (x - model.mean) @ model.basis


def concatenated_features(cache: FeatureCache, keys, channels, band: str) -> np.ndarray:
    """Rows of Ch1||Ch2||Ch3||Ch4 band-power values, shape (len(keys), 4*N_s)."""
    bi = cache.band_index(band)
    cidx = [cache.channel_index(c) for c in channels]
    return np.stack([np.concatenate([cache.values[k][ci, bi, :] for ci in cidx])
                     for k in keys])


def _evaluate_real(cache: FeatureCache, train_keys, test_keys, channels, band,
                   params: PipelineParams) -> TrialOutcome:
    x_train = concatenated_features(cache, train_keys, channels, band)
    x_test = concatenated_features(cache, test_keys, channels, band)
    y_train = cache.labels_pm1(train_keys)
    y_test = cache.labels_pm1(test_keys)

    p_max = min(x_train.shape)
    if params.p is not None:
        if params.p > p_max:
            raise ParameterError(f"p={params.p} exceeds min{x_train.shape}")
        fit_p, candidates = params.p, [params.p]
    elif params.p_sweep_limit is not None:
        fit_p = min(params.p_sweep_limit, p_max)
        candidates = list(range(1, fit_p + 1))
    else:
        fit_p, candidates = None, None
    model = fit_real_pca(x_train, p=fit_p, energy_threshold=params.p_threshold)
    if candidates is None:
        candidates = [model.p]
    train_scores = transform_real(model, x_train)
    test_scores = transform_real(model, x_test)

    best = None
    for p in candidates:
        svm = svm_fit(train_scores[:, :p], y_train, regularization_c=params.svm_c)
        m = metrics(confusion(y_test, svm_predict(svm, test_scores[:, :p])))
        acc = -1.0 if m.acc is None else m.acc
        if best is None or acc > best[0] + 1e-12:
            best = (acc, p, m)
    _, p_used, m = best
    return TrialOutcome(acc=m.acc, sen=m.sen, spe=m.spe, p_used=p_used, result=m)


def compare(cache: FeatureCache, train_keys, test_keys, quadruple, band: str,
            params: PipelineParams) -> dict:
    """Paired quaternion-PCA vs real-PCA metrics from identical inputs."""
    qpca_outcome = evaluate_quadruple(cache, (train_keys, test_keys),
                                      quadruple, band, params)
    real_outcome = _evaluate_real(cache, train_keys, test_keys,
                                  tuple(quadruple), band, params)
    return {"qpca": qpca_outcome.to_json(), "real_pca": real_outcome.to_json(),
            "params": params.to_json(), "band": band,
            "quadruple": list(quadruple)}
