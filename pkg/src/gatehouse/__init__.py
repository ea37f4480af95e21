"""Camera-driven home access pipeline: change gating, face identification,
visual summaries, event history, and remote door control."""

__version__ = "0.1.0"
