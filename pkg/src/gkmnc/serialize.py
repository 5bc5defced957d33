"""Versioned model file: self-describing JSON holding the routing structure
(schema, grouping attribute, per-group normalizers and centroids) and every
leaf classifier payload. Floats go through json's repr round-trip, so a
loaded model forecasts bit-identically.

GPC leaves store kernel parameters, normalizer, training inputs, targets,
the posterior mode, and its gradient; the W^(1/2) vector and the Cholesky
factor of B are recomputed on load rather than stored.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataset import Attribute, AttributeKind, NormalizationParams, Schema
from .errors import CorruptFile, FormatVersionMismatch
from .gpc import GpcModel, KernelParams, kernel_matrix, logistic_link, _cholesky_b
from .kmeans import ClusterModel
from .mlp import MlpModel
from .pipeline import GkmncModel, GroupNode, LeafNode

FORMAT_NAME = "gkmnc-model"
FORMAT_VERSION = 1


def _norm_to_json(params: NormalizationParams) -> dict:
    return {"mean": params.mean.tolist(), "std": params.std.tolist()}


def _norm_from_json(payload: dict) -> NormalizationParams:
    mean = np.array(payload["mean"], dtype=float)
    std = np.array(payload["std"], dtype=float)
    return NormalizationParams(mean=mean, std=std, constant=std == 0.0)


def _classifier_to_json(clf: MlpModel | GpcModel) -> dict:
    if isinstance(clf, MlpModel):
        return {
            "kind": "mlp",
            "architecture": clf.architecture,
            "input_size": clf.input_size,
            "hidden_size": clf.hidden_size,
            "seed": clf.seed,
            "normalizer": _norm_to_json(clf.normalizer),
            "w1": clf.w1.tolist(),  # row-major (hidden, input)
            "b1": clf.b1.tolist(),
            "w2": clf.w2.tolist(),
            "b2": clf.b2,
        }
    return {
        "kind": "gpc",
        "seed": clf.seed,
        "normalizer": _norm_to_json(clf.normalizer),
        "kernel": {
            "signal_variance": clf.kernel.signal_variance,
            "length_scale": clf.kernel.length_scale,
            "jitter": clf.kernel.jitter,
        },
        "constant_class": clf.constant_class,
        "training_inputs": clf.training_inputs.tolist(),
        "training_targets": clf.training_targets.tolist(),
        "f_hat": clf.f_hat.tolist(),
        "alpha": clf.alpha.tolist(),
        "log_marginal_likelihood": clf.log_marginal_likelihood,
    }


def _classifier_from_json(payload: dict) -> MlpModel | GpcModel:
    if payload["kind"] == "mlp":
        return MlpModel(
            input_size=int(payload["input_size"]),
            hidden_size=int(payload["hidden_size"]),
            w1=np.array(payload["w1"], dtype=float).reshape(
                payload["hidden_size"], payload["input_size"]
            ),
            b1=np.array(payload["b1"], dtype=float),
            w2=np.array(payload["w2"], dtype=float),
            b2=float(payload["b2"]),
            normalizer=_norm_from_json(payload["normalizer"]),
            seed=int(payload["seed"]),
        )
    kernel = KernelParams(
        signal_variance=float(payload["kernel"]["signal_variance"]),
        length_scale=float(payload["kernel"]["length_scale"]),
        jitter=float(payload["kernel"]["jitter"]),
    )
    normalizer = _norm_from_json(payload["normalizer"])
    constant = payload["constant_class"]
    n_features = normalizer.n_features
    inputs = np.array(payload["training_inputs"], dtype=float).reshape(-1, n_features)
    f_hat = np.array(payload["f_hat"], dtype=float)
    if constant is None and len(f_hat):
        pi = logistic_link(f_hat)
        sqrt_w = np.sqrt(pi * (1.0 - pi))
        chol = _cholesky_b(kernel_matrix(inputs, None, kernel), sqrt_w)
    else:
        sqrt_w = np.empty(0)
        chol = np.empty((0, 0))
    return GpcModel(
        training_inputs=inputs,
        training_targets=np.array(payload["training_targets"], dtype=int),
        kernel=kernel,
        f_hat=f_hat,
        alpha=np.array(payload["alpha"], dtype=float),
        sqrt_w=sqrt_w,
        chol_lower=chol,
        log_marginal_likelihood=float(payload["log_marginal_likelihood"]),
        normalizer=normalizer,
        seed=int(payload["seed"]),
        constant_class=None if constant is None else int(constant),
    )


def _group_to_json(node: GroupNode) -> dict:
    cluster = None
    if node.cluster_model is not None:
        cluster = {
            "k": node.cluster_model.k,
            "centroids": node.cluster_model.centroids.tolist(),
            "within_cluster_sse": node.cluster_model.within_cluster_sse,
            "dbi": node.cluster_model.dbi,
        }
    return {
        "group_normalizer": _norm_to_json(node.group_normalizer),
        "cluster": cluster,
        "training_row_count": node.training_row_count,
        "leaves": [
            {
                "training_row_count": leaf.training_row_count,
                "classifier": _classifier_to_json(leaf.classifier),
            }
            for leaf in node.leaves
        ],
    }


def _group_from_json(payload: dict) -> GroupNode:
    cluster = None
    if payload["cluster"] is not None:
        centroids = np.array(payload["cluster"]["centroids"], dtype=float)
        cluster = ClusterModel(
            k=int(payload["cluster"]["k"]),
            centroids=centroids,
            assignments=np.empty(0, dtype=int),  # training artifact, not persisted
            within_cluster_sse=float(payload["cluster"]["within_cluster_sse"]),
            dbi=payload["cluster"]["dbi"],
        )
    leaves = tuple(
        LeafNode(
            classifier=_classifier_from_json(leaf["classifier"]),
            training_row_count=int(leaf["training_row_count"]),
        )
        for leaf in payload["leaves"]
    )
    expected_leaves = cluster.k if cluster is not None else 1
    if len(leaves) != expected_leaves:
        raise ValueError(
            f"group carries {len(leaves)} leaves but expects {expected_leaves}"
        )
    return GroupNode(
        group_normalizer=_norm_from_json(payload["group_normalizer"]),
        cluster_model=cluster,
        leaves=leaves,
        training_row_count=int(payload["training_row_count"]),
    )


def save_model(model: GkmncModel, path) -> None:
    payload = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "model_name": model.model_name,
        "classifier_kind": model.classifier_kind,
        "grouping_attribute": model.grouping_attribute,
        "unseen_label_policy": model.unseen_label_policy,
        "hidden_size": model.hidden_size,
        "schema": {
            "positive_label": model.schema.positive_label,
            "attributes": [[a.name, a.kind.value] for a in model.schema.attributes],
        },
        "groups": {label: _group_to_json(node) for label, node in model.groups.items()},
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def load_model(path) -> GkmncModel:
    try:
        payload = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptFile(f"{path}: not a valid model file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise CorruptFile(f"{path}: missing {FORMAT_NAME!r} format marker")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"{path}: format version {version!r}, this build reads {FORMAT_VERSION}"
        )
    try:
        schema = Schema(
            attributes=tuple(
                Attribute(name, AttributeKind(kind))
                for name, kind in payload["schema"]["attributes"]
            ),
            positive_label=payload["schema"]["positive_label"],
        )
        groups = {
            label: _group_from_json(node) for label, node in payload["groups"].items()
        }
        return GkmncModel(
            schema=schema,
            classifier_kind=payload["classifier_kind"],
            grouping_attribute=payload["grouping_attribute"],
            groups=groups,
            unseen_label_policy=payload["unseen_label_policy"],
            hidden_size=payload["hidden_size"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"{path}: malformed model payload: {exc}") from exc
