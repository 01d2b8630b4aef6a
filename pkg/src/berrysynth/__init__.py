"""berrysynth: procedural strawberry scenes, auto-labels, dataset mixing, metrics."""

__version__ = "0.1.0"
