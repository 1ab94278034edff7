"""Simplified H.264-style inter codec (luma only, integer-pel motion)."""
from .container import deserialize, read_stream, serialize, write_stream
from .decoder import decode_frames, decode_sequence
from .encoder import encode_sequence, encode_with_reconstruction, lagrangians
from .inter import neighbour_mvp, p_skip_test
from .motion import compute_mvd, motion_estimate, mvd_bits, predict_mvp
from .transform import dequantize_inverse, qstep, transform_quantize
from .types import (EncodedFrame, EncodedStream, MacroblockRecord, MotionVector,
                    PartitionKind, StreamHeader)

__all__ = [
    "EncodedFrame", "EncodedStream", "MacroblockRecord", "MotionVector", "PartitionKind",
    "StreamHeader", "compute_mvd", "decode_frames", "decode_sequence", "dequantize_inverse",
    "deserialize", "encode_sequence", "encode_with_reconstruction", "lagrangians",
    "motion_estimate", "mvd_bits", "neighbour_mvp", "p_skip_test", "predict_mvp",
    "qstep", "read_stream", "serialize", "transform_quantize", "write_stream",
]
