"""Hashtag segmentation with beam search, re-ranking and code-mixed translation."""

__version__ = "0.1.0"
