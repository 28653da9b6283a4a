"""Saccade-sequence generation with central/peripheral saliency and inhibition of return."""
from .engine import (FixationHistory, FusionStrategy, apply_ior, center_sequence, fuse,
                     run_sequence, sample_static_map, select_next)
from .metrics import (FixationSequence, euclidean_distance, frechet_distance,
                      hausdorff_distance, score_curve)
from .retina import AcuityParams, Foveator, apply_transform
from .saliency import BackendSpec, SaliencyMap, compute_central, compute_peripheral, normalize
from .viewgeom import ViewingGeometry, eccentricity_degrees, from_field_of_view, pixels_per_degree

__version__ = "0.1.0"
