"""Tests for ritz-bounds."""
