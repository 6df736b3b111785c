"""Logging setup, logging decorators, information helpers and exceptions."""
