"""Channel trees: construction, grafting and code parameters."""
