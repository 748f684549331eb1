class NumericalError(RuntimeError):
    """A numerical routine produced an unusable result (NaN, failed solve, lost unitarity)."""
