"""Exception hierarchy shared by all earcg modules."""


class EarcgError(Exception):
    """Base class for all errors raised by earcg."""


class DimensionError(EarcgError, ValueError):
    """Operands have incompatible shapes."""


class EigensolverError(EarcgError):
    """A dense Hermitian eigensolver failed to converge."""

    def __init__(self, dim, msg=None):
        self.dim = dim
        super().__init__(msg or f"Hermitian eigensolver did not converge (dim={dim})")


class SingularPencilError(EarcgError):
    """Lyapunov operator S X + X S is singular (S not positive definite)."""


class NearSingularSylvesterError(EarcgError):
    """Spectra of the two Sylvester coefficients (nearly) intersect."""

    def __init__(self, gap, spec_a, spec_b):
        self.gap = gap
        self.spec_a = spec_a
        self.spec_b = spec_b
        super().__init__(
            f"Sylvester spectral gap {gap:.3e} too small; "
            f"spec(A) in [{min(spec_a):.6g}, {max(spec_a):.6g}], "
            f"spec(Sigma) = {list(map(float, spec_b))}"
        )


class RankDeficiencyError(EarcgError):
    """A block matrix expected to have full column rank does not."""


class IllConditionedGramError(EarcgError):
    """The p x p Gram matrix <phi, x> is too ill-conditioned to invert."""


class SpectralError(EarcgError):
    """Shifted Hamiltonian is singular: some eigenvalue pair resonates with the shift."""

    def __init__(self, resonance, msg=None):
        self.resonance = resonance
        super().__init__(
            msg or f"shifted operator singular: min |lambda_l - sigma_m| = {resonance:.3e}"
        )


class SizeGuardError(EarcgError):
    """Dense assembly refused because the basis is too large."""


class ParameterError(EarcgError, ValueError):
    """Invalid algorithm parameter."""


class ConfigError(EarcgError):
    """Experiment configuration could not be parsed or validated."""


class TangencyError(EarcgError):
    """A vector expected to be tangent at a frame is not (debug-mode check)."""
