"""Tests for the workbench."""
