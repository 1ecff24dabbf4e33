"""Binary sketches of sparse categorical vectors with Hamming distance estimation."""

from .baselines import (BaselineSet, BaselineSketch, baseline_estimate_hamming, baseline_sketch,
                        feature_hash_sketch, hlsh_sketch, simhash_sketch, sketch_dataset_baseline)
from .cabin import SketchSet, bin_em, bin_sketch, cabin, sketch_dataset
from .cham import DistanceEstimate, cham, estimate_binary_hamming, estimate_cardinality, pairwise_estimates
from .clustering import ClusterAssignment, ari, kmodes, nmi, purity
from .core import (BinaryVector, CategoricalVector, Dataset, density, hamming_distance,
                   pairwise_hamming)
from .dataio import load_dataset, sample_dataset, synthetic_corpus
from .errors import CatsketchError, ComputeError, InputError, ParseError
from .model import SketchModel, SketchParams, build_model, choose_dimension, parse_model, serialize_model

__version__ = "0.1.0"

__all__ = [
    "BaselineSet", "BaselineSketch", "BinaryVector", "CategoricalVector", "CatsketchError",
    "ClusterAssignment", "ComputeError", "Dataset", "DistanceEstimate", "InputError", "ParseError",
    "SketchModel", "SketchParams", "SketchSet", "ari", "baseline_estimate_hamming", "baseline_sketch",
    "bin_em", "bin_sketch", "build_model", "cabin", "cham", "choose_dimension", "density",
    "estimate_binary_hamming", "estimate_cardinality", "feature_hash_sketch", "hamming_distance",
    "hlsh_sketch", "kmodes", "load_dataset", "nmi", "pairwise_estimates", "pairwise_hamming",
    "parse_model", "purity", "sample_dataset", "serialize_model", "simhash_sketch", "sketch_dataset",
    "sketch_dataset_baseline", "synthetic_corpus",
]
