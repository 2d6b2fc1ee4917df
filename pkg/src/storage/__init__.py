"""Storage: configuration, presets and file formats."""
