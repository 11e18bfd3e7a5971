"""Rank-value hybrid (Gini prametric) dissimilarities and the learners
built on them: KNN, k-means, agglomerative clustering, plus a benchmark
harness over UCI-style CSV datasets.
"""

from .agglomerative import Dendrogram, agglomerative_fit
from .bench import BenchConfig, run_benchmark
from .data import (DataMatrix, FoldPlan, derive_seed, inject_noise, load_csv,
                   load_manifest, save_csv, split_folds)
from .errors import ConfigError, DomainError, GinilearnError, IngestError
from .evaluation import (EvalReport, RankTable, classification_report, competition_ranks,
                         hungarian_align, rank_table, silhouette_score, wilcoxon_signed_rank)
from .kmeans import (KMeansModel, default_nu_grid, kmeans_fit, kmeans_predict,
                     kmeanspp_init, select_nu_silhouette)
from .knn import KnnModel, knn_fit, knn_grid_search, knn_predict
from .metrics import (MetricSpec, generalized_gini_prametric, gini_mean_difference,
                      gini_prametric, pairwise_dissimilarity, parse_metric, zoo_distance)
from .ranks import (RankContext, ascending_ranks, build_rank_context, conditional_ranks,
                    descending_ranks, interpolated_insertion_ranks, pooled_rank_split)

__version__ = "0.1.0"
