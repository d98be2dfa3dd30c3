"""Polyharmonic subdivision wavelet image codec.

A DFT along the periodic ``y`` axis turns the image into frequency rows; each
row ``eta`` is analysed along ``t`` by a non-stationary Daubechies-type filter
bank tuned to ``theta = c |eta| / H``.  The ``theta = 0`` filters are the
classical dbN, which also drive the tensor-product baseline.
"""
from .baseline_db import TensorPyramid, dwt2_db, idwt2_db
from .codec import CodedStream, QuantizedStream, decode, dequantize, encode, keep_threshold, quantize, threshold
from .errors import (ConditioningFailure, CorruptStream, GeometryError, InvalidOrder, ParseError,
                     PhswError, SearchFailure, SymmetryError)
from .filterbank import FilterPair, build_filter_pair, filter_cache_get
from .imageio import ImageBuffer, gen_edge, read_fits, read_image, read_pgm, write_pgm
from .metrics import CompareReport, match_psnr_search, psnr, total_entropy
from .phsd2d import SubbandPyramid, dft_y, forward_phsd, inverse_phsd
from .pipeline import MethodConfig, Pipeline, decode_image, reconstruct
from .transform1d import FrequencyRowPyramid, analyze_row, synthesize_row

__version__ = "0.1.0"
