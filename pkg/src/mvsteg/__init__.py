"""Motion-vector video steganalysis lab built around skipped macroblocks.

Pipeline: synthesize or read raw YUV -> encode with a small H.264-style
inter codec (optionally embedding into motion vectors) -> recompress the
decoded video -> compare skipped macroblocks across both compressions ->
11-dimensional feature vectors -> Gaussian-kernel SVM.
"""

__version__ = "0.1.0"
