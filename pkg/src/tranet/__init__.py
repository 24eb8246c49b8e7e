"""Encoder-decoder number translation/transcription experiments with a
minimal dense-network training stack and an encouraged-bottleneck
training regime."""

__version__ = "0.1.0"
