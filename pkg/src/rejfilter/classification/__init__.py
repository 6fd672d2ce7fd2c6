"""Active binary classification over a labelled corpus, plus a kNN baseline."""

from .active import (
    ClassifyResult,
    ClassifySession,
    ParticleCloud,
    PixelLikelihood,
    classify,
    feature_select,
    initial_cloud,
    percentile_table,
    pixel_likelihood,
    resample_cloud,
    rf_classify_update,
    select_query,
)
from .corpus import Corpus, make_blobs, task_corpus, task_labels
from .idx import load_mnist, read_idx, write_idx
from .knn import knn_classify, knn_predict
