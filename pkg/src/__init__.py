"""
Fatigue plasticity toolkit
Cyclic plasticity, two-index damage and gradient regularization
"""

__version__ = "0.1.0"

# NOTE:
# Avoid importing heavy modules (like configuration) at package import time to
# keep "import src" lightweight and side-effect free for unit tests.

__all__ = []
