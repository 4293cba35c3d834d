"""Domain-specific corpus curation, topic modeling, and retrieval-augmented QA."""

__version__ = "0.1.0"
