from .mixing import (Buckets, InsufficientSamples, MixingError, MixingReport, SpectralBounds, bucketize,
                     closeness_test, estimate_mixing, spectral_bounds)
from .rst import SpanningTree, TreeError, check_cover, check_cover_positions, random_spanning_tree

__all__ = ["Buckets", "InsufficientSamples", "MixingError", "MixingReport", "SpanningTree", "SpectralBounds",
           "TreeError", "bucketize", "check_cover", "check_cover_positions", "closeness_test", "estimate_mixing",
           "random_spanning_tree", "spectral_bounds"]
