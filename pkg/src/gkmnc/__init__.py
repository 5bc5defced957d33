"""Grouped / clustered nonlinear classification for financial tabular data.

Training groups a dataset by its most informative nominal attribute (gain
ratio), optionally partitions each group with k-means (K chosen by the
Davies-Bouldin index), and fits one nonlinear classifier (MLP or Gaussian
process) per partition, in parallel. Forecasting routes an example to its
group, then to the nearest centroid, then through that leaf's classifier.
"""

from .dataset import (
    AttributeKind,
    Attribute,
    DataTable,
    FoldSplit,
    NormalizationParams,
    Schema,
    apply_normalizer,
    fit_normalizer,
    invert_normalizer,
    load_schema,
    load_table,
    split_folds,
)
from .infogain import (
    GainRatioReport,
    compute_gain_report,
    entropy,
    gain_ratio,
    partition_by_attribute,
    select_grouping_attribute,
)
from .kmeans import ClusterModel, assign, davies_bouldin, kmeans_fit, select_k
from .optim import (
    CgConfig,
    LineSearchConfig,
    bracket_minimum,
    conjugate_gradient,
    finite_difference_gradient,
    golden_section,
)
from .mlp import MlpModel, mlp_classify, mlp_forward, mlp_loss_and_gradient, mlp_train, search_hidden_size
from .gpc import (
    GpcModel,
    KernelParams,
    gpc_classify,
    gpc_predict_prob,
    gpc_train,
    kernel_matrix,
    laplace_mode,
    logistic_link,
)
from .pipeline import (
    EvaluationReport,
    GkmncModel,
    PipelineConfig,
    aggregate_accuracy,
    cross_validate,
    derive_leaf_seed,
    evaluate,
    forecast,
    train_gkmnc,
)
from .serialize import load_model, save_model

__version__ = "0.1.0"
