"""Coronary vessel enhancement ahead of fixed-threshold Frangi vesselness."""
from .evaluation import EvalReport, RocCurve, auc, compare, roc_auc, roc_curve
from .frangi import FrangiParams, Polarity, VesselnessMap, frangi_filter
from .homomorphic import HomomorphicParams, homomorphic_filter
from .imaging import compute_stats, load_image, rescale_to_range, save_image
from .normalize import NormalizationParams, normalize
from .nsct import EnhanceParams, NsctConfig, nsct_decompose, nsct_reconstruct
from .phantom import PhantomSpec, benchmark_suite, generate_phantom
from .pipeline import PipelineConfig, StageToggles, enhance_full, frangi_only

__version__ = "0.1.0"
