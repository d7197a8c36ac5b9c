"""Rule families: k-nearest neighbours, pruned CART, local-polynomial plug-in."""

from .cart import (
    CartRule,
    CartTree,
    PrunePath,
    alpha_grid,
    cart_family,
    cart_grow,
    cart_prune_path,
    cart_rule,
)
from .knn import KnnClassifier, KnnRule, knn_family, knn_train
from .localpoly import (
    LocalPolyClassifier,
    LocalPolyRule,
    localpoly_eta,
    localpoly_eta_batch,
    localpoly_rule,
    lp_collection,
    monomial_exponents,
)

__all__ = [
    "CartRule", "CartTree", "PrunePath", "alpha_grid", "cart_family", "cart_grow",
    "cart_prune_path", "cart_rule", "KnnClassifier", "KnnRule", "knn_family", "knn_train",
    "LocalPolyClassifier", "LocalPolyRule", "localpoly_eta", "localpoly_eta_batch",
    "localpoly_rule", "lp_collection", "monomial_exponents",
]
