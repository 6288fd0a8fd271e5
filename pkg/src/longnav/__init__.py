"""Long-range outdoor navigation: GPS routing, candidate trajectory scoring
with semantic and ranking cues, dynamic-window tracking, and a deterministic
2D simulator to evaluate it all."""

__version__ = "0.1.0"
