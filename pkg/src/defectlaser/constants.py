"""Physical constants used throughout the package (SI)."""

HBAR = 1.054571817e-34  # J s
EV = 1.602176634e-19    # J

PACKAGE_VERSION = "0.1.0"
