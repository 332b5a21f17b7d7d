"""Line segment detection, description matching, and evaluation toolkit."""

__version__ = "0.1.0"
