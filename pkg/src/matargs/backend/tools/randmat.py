from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import SPDMatrix, SymMatrix, cholesky, load_matrix_json
from .misc import DomainError, ParseError

DEFAULT_SEED = 42
_U64 = 2**64


class RngStream:
    """
    A reproducible random stream keyed by (seed, stream). The bits come from the
    counter-based Philox generator, so identical (seed, stream, counter) give
    identical draws on every platform and distinct streams never overlap.
    """

    def __init__(self, seed: int = DEFAULT_SEED, stream: int = 0, counter: int = 0):
        if not 0 <= seed < _U64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
        if not 0 <= stream < _U64:
            raise DomainError(f"stream must be an unsigned 64-bit integer, got {stream}")
        self.seed = seed
        self.stream = stream
        self.counter = counter
        self.generator = np.random.Generator(
            np.random.Philox(key=seed + stream * _U64, counter=counter)
        )

    def spawn(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream}, counter={self.counter})"


@dataclass(frozen=True)
class WishartSpec:
    """
    Wishart law with m x m scale matrix Sigma and n > m - 1 degrees of freedom:
    density proportional to det(X)^((n-m-1)/2) etr(-Sigma^-1 X / 2).
    """

    m: int
    n: float
    scale: SPDMatrix

    def __post_init__(self):
        if self.scale.m != self.m:
            raise DomainError(f"scale is {self.scale.m}x{self.scale.m}, expected m={self.m}")
        if not self.n > self.m - 1:
            raise DomainError(f"requires n > m - 1, got n={self.n}, m={self.m}")


def gamma_variate(rng: RngStream, shape: float) -> float:
    """
    One Gamma(shape, scale 1) draw (Marsaglia-Tsang squeeze, with the
    U^(1/shape) boost below shape 1, as numpy implements it).

    :param rng: The stream to draw from.
    :type rng: RngStream
    :param shape: Shape parameter, > 0.
    :type shape: float
    :return: The variate.
    :rtype: float
    """

    return float(gamma_variates(rng, shape, 1)[0])


def gamma_variates(rng: RngStream, shape: float, size: int) -> np.ndarray:
    if not shape > 0:
        raise DomainError(f"gamma shape must be > 0, got {shape}")
    return rng.generator.standard_gamma(shape, size=size)


def bartlett_factors(rng: RngStream, spec: WishartSpec, size: int) -> np.ndarray:
    """
    Lower-triangular factors L A of size Wishart draws X = L A A' L', with
    Sigma = L L' and A lower-triangular, A_ii^2 ~ chi^2(n - i + 1) and standard
    normal entries below the diagonal. Every factor has a positive diagonal.

    :param rng: The stream to draw from.
    :type rng: RngStream
    :param spec: The Wishart law.
    :type spec: WishartSpec
    :param size: Number of draws.
    :type size: int
    :return: An array of shape (size, m, m).
    :rtype: np.ndarray
    """

    m = spec.m
    lower = spec.scale.factor.T
    bartlett = np.zeros((size, m, m))
    for i in range(m):
        # chi^2(n - i) = 2 * Gamma((n - i) / 2) for the 0-based row i
        bartlett[:, i, i] = np.sqrt(2.0 * gamma_variates(rng, (spec.n - i) / 2, size))
    rows, cols = np.tril_indices(m, -1)
    if rows.size:
        bartlett[:, rows, cols] = rng.generator.standard_normal((size, rows.size))
    return lower @ bartlett


def wishart_batch(rng: RngStream, spec: WishartSpec, size: int) -> np.ndarray:
    """size Wishart draws (L A)(L A)' as an array of shape (size, m, m)."""
    factor = bartlett_factors(rng, spec, size)
    return factor @ np.swapaxes(factor, -1, -2)


def wishart(rng: RngStream, spec: WishartSpec) -> SPDMatrix:
    """
    One Wishart draw carrying its Bartlett factor as the Cholesky factor. With n
    close to m - 1 a draw can be nearly singular, so the factor is never
    recomputed from X.

    :param rng: The stream to draw from.
    :type rng: RngStream
    :param spec: The Wishart law.
    :type spec: WishartSpec
    :return: The draw; the same bits as wishart_batch(rng, spec, 1)[0].
    :rtype: SPDMatrix
    """

    factor = bartlett_factors(rng, spec, 1)[0]
    return SPDMatrix(factor @ factor.T, factor.T)


def random_spd(rng: RngStream, m: int, condition_cap: float = 10.0) -> SPDMatrix:
    """
    Q diag(d) Q' with Q orthogonal (QR of a Gaussian matrix) and d log-uniform on
    [cap^-1/2, cap^1/2], so the condition number never exceeds condition_cap.

    :param rng: The stream to draw from.
    :type rng: RngStream
    :param m: Dimension.
    :type m: int
    :param condition_cap: Largest allowed eigenvalue ratio, >= 1.
    :type condition_cap: float
    :return: A positive definite matrix.
    :rtype: SPDMatrix
    """

    if m < 1:
        raise DomainError(f"requires m >= 1, got {m}")
    if not condition_cap >= 1:
        raise DomainError(f"requires condition_cap >= 1, got {condition_cap}")
    q, r = np.linalg.qr(rng.generator.standard_normal((m, m)))
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    half_width = 0.5 * np.log(condition_cap)
    d = np.exp(rng.generator.uniform(-half_width, half_width, size=m))
    return cholesky(SymMatrix.symmetrized((q * d) @ q.T))


def parse_matrix_spec(text: str, m: int, seed: int = DEFAULT_SEED, stream: int = 0) -> SymMatrix:
    """
    Resolves a matrix specifier: "identity", "diag:a,b,...", "random" or a path
    to a JSON matrix file. "random" is a random_spd with condition number at most
    10, drawn from the given stream of seed + 1 so it never shares bits with the
    sampler streams.

    :param text: The specifier.
    :type text: str
    :param m: The dimension the matrix must have.
    :type m: int
    :param seed: Seed for "random".
    :type seed: int
    :param stream: Stream for "random", so two random operands differ.
    :type stream: int
    :return: The validated matrix.
    :rtype: SymMatrix
    """

    text = text.strip()
    if text == "identity":
        return SymMatrix.identity(m)
    if text == "random":
        return random_spd(RngStream((seed + 1) % _U64, stream), m)
    if text.startswith("diag:"):
        try:
            values = [float(v) for v in text[5:].split(",")]
        except ValueError:
            raise ParseError(f"malformed diagonal specifier {text!r}, expected e.g. 'diag:1,2'")
        a = SymMatrix.diag(values)
    else:
        a = load_matrix_json(Path(text))
    if a.m != m:
        raise ParseError(f"matrix {text!r} is {a.m}x{a.m}, expected m={m}")
    return a
