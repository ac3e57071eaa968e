"""Command-line surface of the pair-calibration toolkit."""
