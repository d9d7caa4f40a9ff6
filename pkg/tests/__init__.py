"""Tests for the hashtag segmenter."""
