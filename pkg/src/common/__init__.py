# Shared utilities package (logging, closed vocabularies).
