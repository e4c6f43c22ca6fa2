"""convseg: restructure step-based instructional text into conversational steps.

The toolkit covers the full desk-scale pipeline: corpus ingestion and
deduplication, document flattening with gold break labels, baseline and
trainable boundary segmenters, and a segmentation metric suite.
"""

__version__ = "0.1.0"
