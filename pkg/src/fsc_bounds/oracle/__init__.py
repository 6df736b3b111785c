"""Independent exact and Monte Carlo checks for the bounds."""
