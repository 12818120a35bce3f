"""cadforge: MiniCQ CAD-program data pipeline."""

__version__ = "0.1.0"
