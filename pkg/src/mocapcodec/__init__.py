"""Low-latency mocap compression with a learned orthogonal spatial transform."""

from .bitstream import CompressedStream, read_stream, write_stream
from .codec import (
    decode,
    decode_clip_based,
    decode_frame_based,
    encode,
    encode_clip_based,
    encode_frame_based,
)
from .metrics import (
    RDPoint,
    SparsityPoint,
    compression_ratio,
    distortion,
    gen_synthetic,
    per_joint_distortion,
    rd_sweep,
    sparsity_distortion_curve,
)
from .motion import Clip, MotionSequence, load_motion, partition_clips, save_motion
from .quantize import QuantizerSpec, SparseVectorCode, dequantize, quantize
from .training import (
    TrainingBatch,
    TransformModel,
    batch_from_sequences,
    load_model,
    objective,
    procrustes_step,
    save_model,
    sparse_step,
    train_lsdt,
)
from .transforms import (
    OrthonormalBasis,
    apply_forward,
    apply_inverse,
    dct_matrix,
    haar_dwt_forward,
    haar_dwt_inverse,
    truncate,
)

__version__ = "0.1.0"
