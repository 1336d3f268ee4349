"""Shared machinery: per-recording feature cache and the single-trial
featurize -> embed -> QPCA -> project -> SVM -> metrics cycle.

A FeatureCache holds relative band powers for every recording at one
segmentation setting, keyed by (subject_id, session_index).  Everything
downstream (search trials, sweeps, the baseline comparison, the CLI) reads
from it, which keeps trials cheap and byte-reproducible.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from . import qpca
from .classifier import MetricsResult, confusion, metrics, svm_fit, svm_predict
from .errors import ParameterError, ValidationError
from .spectral import BAND_NAMES, band_power_matrix

__all__ = ["PipelineParams", "FeatureCache", "TrialOutcome",
           "evaluate_quadruple", "train_pipeline", "evaluate_model"]

POSITIVE_LABEL = "AD"  # a true positive is a correctly detected AD sample


def label_sign(label: str) -> float:
    return 1.0 if label == POSITIVE_LABEL else -1.0


@dataclass(frozen=True)
class PipelineParams:
    """Resolved trial parameters.

    Component count resolution order: fixed `p` when given, otherwise a
    best-accuracy sweep over 1..p_sweep_limit when set, otherwise the
    eigenvalue-energy threshold."""

    segment_seconds: float = 1.0
    projection: str = "mean"
    p: int | None = None
    p_sweep_limit: int | None = 20
    p_threshold: float = 0.90
    svm_c: float = 1.0

    def __post_init__(self):
        if self.projection not in qpca.PROJECTION_METHODS:
            raise ParameterError(
                f"unknown projection {self.projection!r}; expected one of "
                f"{qpca.PROJECTION_METHODS}")
        if self.p is not None and self.p < 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if self.p_sweep_limit is not None and self.p_sweep_limit < 1:
            raise ParameterError(f"p_sweep_limit must be >= 1, got {self.p_sweep_limit}")
        if not 0 < self.p_threshold <= 1:
            raise ParameterError(f"p_threshold must be in (0, 1], got {self.p_threshold}")
        if self.svm_c <= 0:
            raise ParameterError(f"svm_c must be positive, got {self.svm_c}")

    def with_(self, **kw) -> "PipelineParams":
        return replace(self, **kw)

    def to_json(self) -> dict:
        return {"segment_seconds": self.segment_seconds, "projection": self.projection,
                "p": self.p, "p_sweep_limit": self.p_sweep_limit,
                "p_threshold": self.p_threshold, "svm_c": self.svm_c}


@dataclass(eq=False)
class FeatureCache:
    """Relative band powers for a recording set at one segmentation setting.

    values[key] has shape (n_channels, n_bands, n_segments); keys are sorted
    (subject_id, session_index) pairs."""

    segment_seconds: float
    channels: tuple
    bands: tuple
    keys: tuple
    labels: dict
    values: dict

    @property
    def n_segments(self) -> int:
        return next(iter(self.values.values())).shape[2]

    @classmethod
    def from_recordings(cls, recordings, segment_seconds: float) -> "FeatureCache":
        recordings = sorted(recordings, key=lambda r: r.key())
        if not recordings:
            raise ValidationError("no recordings to featurize")
        channels = recordings[0].channel_labels
        values, labels = {}, {}
        n_segments = None
        for rec in recordings:
            if rec.channel_labels != channels:
                raise ValidationError(
                    f"montage mismatch: {rec.subject_id} s{rec.session_index} has "
                    f"{rec.channel_labels}, expected {channels}")
            key = rec.key()
            if key in values:
                raise ValidationError(f"duplicate recording key {key}")
            matrix = band_power_matrix(rec, segment_seconds)
            if n_segments is None:
                n_segments = matrix.shape[2]
            elif matrix.shape[2] != n_segments:
                raise ValidationError(
                    f"segment count mismatch for {key}: {matrix.shape[2]} vs {n_segments}")
            values[key] = matrix
            labels[key] = rec.label
        return cls(segment_seconds=segment_seconds, channels=channels,
                   bands=BAND_NAMES, keys=tuple(sorted(values)),
                   labels=labels, values=values)

    def band_index(self, band: str) -> int:
        try:
            return self.bands.index(band)
        except ValueError:
            raise ParameterError(f"band {band!r} not cached; have {self.bands}") from None

    def channel_index(self, channel: str) -> int:
        try:
            return self.channels.index(channel)
        except ValueError:
            raise ParameterError(f"channel {channel!r} not in montage {self.channels}") from None

    def labels_pm1(self, keys) -> np.ndarray:
        return np.array([label_sign(self.labels[k]) for k in keys])

    def vectors(self, keys, channels, band: str):
        """Quaternion rows for the given ordered channel tuple.

        Four channels embed as a full quaternion (Ch1 -> scalar part); three
        channels embed as a pure quaternion (scalar part zero)."""
        bi = self.band_index(band)
        cidx = [self.channel_index(c) for c in channels]
        rows = np.stack([self.values[k][cidx, bi, :] for k in keys])  # (m, len(c), N_s)
        if len(cidx) == 4:
            return qpca.embed_rows(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3])
        if len(cidx) == 3:
            zero = np.zeros_like(rows[:, 0])
            return qpca.embed_rows(zero, rows[:, 0], rows[:, 1], rows[:, 2])
        raise ParameterError(f"need 3 or 4 channels, got {len(cidx)}")

    # -- CSV cache file (subject_id, session_index, label, channel, band,
    #    segment_index, value) -----------------------------------------

    def to_csv_text(self) -> str:
        out = io.StringIO()
        out.write("subject_id,session_index,label,channel,band,segment_index,value\n")
        for key in self.keys:
            subject, session = key
            label = self.labels[key]
            matrix = self.values[key]
            for ci, channel in enumerate(self.channels):
                for bi, band in enumerate(self.bands):
                    for si in range(matrix.shape[2]):
                        out.write(f"{subject},{session},{label},{channel},{band},"
                                  f"{si},{float(matrix[ci, bi, si])!r}\n")
        return out.getvalue()

    @classmethod
    def from_csv_text(cls, text: str, segment_seconds: float) -> "FeatureCache":
        lines = [ln for ln in text.splitlines()
                 if ln and not ln.startswith("#")]
        header = "subject_id,session_index,label,channel,band,segment_index,value"
        if not lines or lines[0] != header:
            raise ValidationError("feature cache header mismatch")
        raw: dict = {}
        labels: dict = {}
        channels: list = []
        for ln in lines[1:]:
            subject, session, label, channel, band, si, value = ln.split(",")
            key = (subject, int(session))
            labels[key] = label
            if channel not in channels:
                channels.append(channel)
            raw.setdefault(key, {}).setdefault(channel, {}).setdefault(band, {})[
                int(si)] = float(value)
        values = {}
        shape = None
        for key, per_channel in raw.items():
            try:
                arr = np.array([[[per_channel[c][b][s] for s in sorted(per_channel[c][b])]
                                 for b in BAND_NAMES] for c in channels],
                               dtype=np.float64)
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"incomplete feature cache for {key}: {exc}") from None
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ValidationError(
                    f"feature cache shape mismatch for {key}: {arr.shape} vs {shape}")
            values[key] = arr
        return cls(segment_seconds=segment_seconds, channels=tuple(channels),
                   bands=BAND_NAMES, keys=tuple(sorted(values)),
                   labels=labels, values=values)


@dataclass(frozen=True)
class TrialOutcome:
    acc: float | None
    sen: float | None
    spe: float | None
    p_used: int
    result: MetricsResult

    def to_json(self) -> dict:
        out = self.result.to_json()
        out["p_used"] = self.p_used
        return out


def _candidate_ps(params: PipelineParams, m: int, n_s: int):
    """(fit_p, candidate list) under the resolution order of PipelineParams."""
    p_max = min(m, n_s)
    if params.p is not None:
        if params.p > p_max:
            raise ParameterError(f"p={params.p} exceeds min(m={m}, N_s={n_s})")
        return params.p, [params.p]
    if params.p_sweep_limit is not None:
        limit = min(params.p_sweep_limit, p_max)
        return limit, list(range(1, limit + 1))
    return None, None  # energy threshold decides inside fit


def evaluate_quadruple(cache: FeatureCache, split, quadruple, band: str,
                       params: PipelineParams) -> TrialOutcome:
    """One full train/test cycle; with a p sweep the best test accuracy wins
    (ties resolve to the smallest component count)."""
    train_keys, test_keys = _split_keys(split)
    channels = tuple(quadruple)
    q_train = cache.vectors(train_keys, channels, band)
    q_test = cache.vectors(test_keys, channels, band)
    y_train = cache.labels_pm1(train_keys)
    y_test = cache.labels_pm1(test_keys)

    fit_p, candidates = _candidate_ps(params, q_train.rows, q_train.cols)
    model = qpca.fit(q_train, p=fit_p, energy_threshold=params.p_threshold,
                     band=band, segment_seconds=cache.segment_seconds,
                     projection=params.projection)
    if candidates is None:
        candidates = [model.p]
    train_feats = qpca.project(qpca.transform(model, q_train), params.projection)
    test_feats = qpca.project(qpca.transform(model, q_test), params.projection)

    best = None
    for p in candidates:
        svm = svm_fit(train_feats[:, :p], y_train, regularization_c=params.svm_c)
        pred = svm_predict(svm, test_feats[:, :p])
        m = metrics(confusion(y_test, pred))
        acc = -1.0 if m.acc is None else m.acc
        if best is None or acc > best[0] + 1e-12:
            best = (acc, p, m)
    _, p_used, m = best
    return TrialOutcome(acc=m.acc, sen=m.sen, spe=m.spe, p_used=p_used, result=m)


def train_pipeline(cache: FeatureCache, train_keys, quadruple, band: str,
                   params: PipelineParams):
    """Fit QPCA + SVM on the training keys at a resolved component count
    (fixed p or energy threshold; no test-side sweep)."""
    channels = tuple(quadruple)
    q_train = cache.vectors(train_keys, channels, band)
    fit_p = params.p
    if fit_p is None and params.p_sweep_limit is not None:
        fit_p = min(params.p_sweep_limit, q_train.rows, q_train.cols)
    model = qpca.fit(q_train, p=fit_p, energy_threshold=params.p_threshold,
                     band=band, quadruple=qpca.ChannelQuadruple(channels),
                     segment_seconds=cache.segment_seconds,
                     projection=params.projection)
    feats = qpca.project(qpca.transform(model, q_train), params.projection)
    svm = svm_fit(feats, cache.labels_pm1(train_keys), regularization_c=params.svm_c)
    return model, svm


def evaluate_model(model, svm, cache: FeatureCache, keys) -> MetricsResult:
    """Metrics of a fitted (QPCA, SVM) pair on the given recordings."""
    channels = tuple(model.quadruple)
    q = cache.vectors(keys, channels, model.band)
    feats = qpca.project(qpca.transform(model, q), model.projection)
    pred = svm_predict(svm, feats)
    return metrics(confusion(cache.labels_pm1(keys), pred))


def _split_keys(split):
    """Accept a DatasetSplit or a (train_keys, test_keys) pair."""
    if hasattr(split, "training"):
        return ([r.key() for r in split.training], [r.key() for r in split.testing])
    train_keys, test_keys = split
    return list(train_keys), list(test_keys)
