"""Closed-form RLL bounds and the single-letter V-graph bound."""
