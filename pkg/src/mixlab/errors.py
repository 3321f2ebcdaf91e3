"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Invalid geometric input: non-SPD matrix, degenerate curve, bad density."""


class SolverError(RuntimeError):
    """PDE solver refused to run or produced invalid state (CFL, non-finite)."""


class SimulationError(RuntimeError):
    """Monte Carlo engine failure: non-finite path state, broken coupling."""


class ConfigError(ValueError):
    """Experiment configuration could not be parsed or resolved."""
