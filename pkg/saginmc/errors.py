"""
Exception types raised across saginmc.
"""


class ConfigError(ValueError):
    """Invalid experiment configuration or override."""


class ShapeError(ValueError):
    """Array shapes do not chain, or a forward cache does not match its network."""


class CheckpointError(RuntimeError):
    """Checkpoint file missing, unreadable, or written by an unknown format version."""


class TrainingError(RuntimeError):
    """A learner was asked to update before it holds enough experience."""
