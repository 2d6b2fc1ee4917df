"""Command-line surface and figure reproduction."""
