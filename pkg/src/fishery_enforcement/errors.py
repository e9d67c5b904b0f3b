"""Exception types raised by the solvers."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class SolverError(RuntimeError):
    """A numerical procedure failed to converge or to bracket a root."""


class NoRootError(SolverError):
    def __init__(self, message, samples=()):
        super().__init__(message)
        self.samples = tuple(samples)


class NegativeDenominatorError(SolverError):
    pass


class NonDifferentiableError(SolverError):
    """A finite-difference stencil straddles a change of decision regime."""


class UnattainableError(ValueError):
    """The requested aggregate catch cannot be induced by any detection probability.

    The fee is bounded, so as detection becomes certain the fleet catch tends to
    a positive floor. ``infimum`` carries that floor.
    """

    def __init__(self, target, infimum, stock):
        super().__init__(
            f"catch target {target:.12g} is below the attainable infimum "
            f"{infimum:.12g} at stock {stock:.12g}"
        )
        self.target = target
        self.infimum = infimum
        self.stock = stock
