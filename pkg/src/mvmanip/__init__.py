"""mvmanip: point-cloud re-rendering, a staged multi-view transformer, and
heatmap back-projection for learning desk-scale gripper actions by behavior
cloning."""

__version__ = "0.1.0"
