"""Heavy feature extraction for the scratch-creativity core.

Writes per-asset CFV1 sidecar files: CNN image embeddings (1 x 2048) and
136-dimensional framewise audio feature matrices.  The core discovers
the sidecars by asset digest; nothing else is shared between the two
packages.
"""

from .audiofeat import (
    FRAME_TABLE,
    N_FEATURES,
    decode_wav,
    extract_audio_matrix,
    extract_features,
    window_for_rate,
)
from .cli import ExtractionJob, run_job
from .encoder import EMBEDDING_DIM, ImageEncoder, extract_image_vector, shared_encoder
from .sidecar import write_sidecar

__version__ = "0.1.0"
