"""Tests for the ranking toolkit."""
