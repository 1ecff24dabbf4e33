from .kmodes import ClusterAssignment, clustering_cost, compute_mode, kmodes
from .metrics import ari, contingency, mutual_information, nmi, purity

__all__ = [
    "ClusterAssignment",
    "ari",
    "clustering_cost",
    "compute_mode",
    "contingency",
    "kmodes",
    "mutual_information",
    "nmi",
    "purity",
]
