"""Linear 1-D thermoacoustics with reversible-irreversible splitting."""

__version__ = "0.1.0"
