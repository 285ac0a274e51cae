"""Data sources and their readers."""
