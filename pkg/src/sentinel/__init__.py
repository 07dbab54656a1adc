"""Motion-detection notification daemon with a simulated camera and modem."""

__version__ = "0.1.0"
