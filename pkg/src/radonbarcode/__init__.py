"""Radon barcodes for grayscale images, plus projection-angle optimization.

The pipeline: project an image onto a set of angles (forward Radon
transform), threshold each projection at the median of its nonzero bins to
get a binary barcode fragment, and concatenate fragments.  Angle subsets are
scored by how well a filtered back-projection from only those angles
correlates with the source image; subsets can be picked by exhaustive search
over small candidate grids or by a micro differential-evolution optimizer.
"""

from .barcode import (
    RadonBarcode,
    barcode_from_text,
    barcode_to_text,
    binarize_projection,
    generate_barcode,
    hamming_distance,
    render_barcode,
)
from .fitness import UNDEFINED_SCORE, CorrelationScore, correlation, reconstruction_fitness
from .image_io import (
    DEFAULT_WORKING_SIZE,
    PHANTOM_KINDS,
    GrayImage,
    load_image,
    make_phantom,
    normalize,
    save_pgm,
)
from .microde import DEFAULT_STEP, DEConfig, decode_genome, default_config, mde_optimize
from .radon import AngleSet, Sinogram, bin_count, equidistant_angles, project, sinogram
from .reconstruct import Reconstruction, filter_projections, inverse_radon, save_reconstruction_pgm
from .search import (
    DEFAULT_BUDGET_CAP,
    BudgetExceededError,
    SearchResult,
    count_combinations,
    exhaustive_search,
)

__version__ = "0.1.0"

__all__ = [
    "AngleSet",
    "BudgetExceededError",
    "CorrelationScore",
    "DEConfig",
    "DEFAULT_BUDGET_CAP",
    "DEFAULT_STEP",
    "DEFAULT_WORKING_SIZE",
    "GrayImage",
    "PHANTOM_KINDS",
    "RadonBarcode",
    "Reconstruction",
    "SearchResult",
    "Sinogram",
    "UNDEFINED_SCORE",
    "barcode_from_text",
    "barcode_to_text",
    "bin_count",
    "binarize_projection",
    "correlation",
    "count_combinations",
    "decode_genome",
    "default_config",
    "equidistant_angles",
    "exhaustive_search",
    "filter_projections",
    "generate_barcode",
    "hamming_distance",
    "inverse_radon",
    "load_image",
    "make_phantom",
    "mde_optimize",
    "normalize",
    "project",
    "reconstruction_fitness",
    "render_barcode",
    "save_pgm",
    "sinogram",
    "__version__",
]
