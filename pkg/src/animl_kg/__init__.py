"""AnIML XML to RDF knowledge graphs: mapping, validation, queries and alignments."""

__version__ = "0.1.0"
