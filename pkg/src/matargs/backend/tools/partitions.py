from dataclasses import dataclass
from functools import lru_cache
from itertools import accumulate, zip_longest

from .misc import DomainError, ParseError


@dataclass(frozen=True)
class Partition:
    """
    A weakly decreasing sequence of positive integers, kept in canonical form
    (trailing zeros trimmed) so that equal partitions compare and hash equal.
    """

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise DomainError(f"partition parts must be non-negative, got {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise DomainError(f"partition parts must be weakly decreasing, got {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def padded(self, m: int) -> tuple[int, ...]:
        """
        The parts zero-padded to exactly m entries.

        :param m: Number of entries wanted; must be at least the length.
        :type m: int
        :return: A tuple of m non-negative integers.
        :rtype: tuple
        """

        if self.length > m:
            raise DomainError(f"partition {self} has more than m={m} parts")
        return self.parts + (0,) * (m - self.length)

    def __getitem__(self, i: int) -> int:
        return self.parts[i] if i < self.length else 0

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.parts) if self.parts else "0"

    def __repr__(self) -> str:
        return f"Partition({self.parts})"

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """
        Parses the "2,1" form; "0" and "" give the empty partition.

        :param text: Comma-separated parts.
        :type text: str
        :return: The parsed partition.
        :rtype: Partition
        """

        text = text.strip()
        if text in ("", "0", "()"):
            return cls(())
        try:
            parts = tuple(int(p) for p in text.strip("()").split(","))
        except ValueError:
            raise ParseError(f"malformed partition {text!r}, expected e.g. '2,1'")
        try:
            return cls(parts)
        except DomainError as e:
            raise ParseError(str(e))


EMPTY = Partition(())


@lru_cache(maxsize=None)
def _enumerate(k: int, max_parts: int, max_part: int) -> tuple[Partition, ...]:
    if k == 0:
        return (EMPTY,)
    if max_parts == 0:
        return ()
    out = []
    for first in range(min(k, max_part), 0, -1):
        for rest in _enumerate(k - first, max_parts - 1, first):
            out.append(Partition((first,) + rest.parts))
    return tuple(out)


def enumerate_partitions(k: int, max_parts: int | None = None) -> list[Partition]:
    """
    Lists every partition of k with at most max_parts parts, in descending
    lexicographic order.

    :param k: The weight; k >= 0.
    :type k: int
    :param max_parts: Maximum length; defaults to k (no restriction).
    :type max_parts: int
    :return: The partitions, each exactly once.
    :rtype: list
    """

    if k < 0:
        raise DomainError(f"requires k >= 0, got {k}")
    if max_parts is None:
        max_parts = max(k, 1)
    if max_parts < 1:
        raise DomainError(f"requires max_parts >= 1, got {max_parts}")
    return list(_enumerate(k, max_parts, k))


def partition_count(k: int) -> int:
    """
    p(k), the number of partitions of k, from Euler's pentagonal number
    recurrence. Independent of enumerate_partitions, which it is checked against.

    :param k: The weight; k >= 0.
    :type k: int
    :return: The count.
    :rtype: int
    """

    if k < 0:
        raise DomainError(f"requires k >= 0, got {k}")
    counts = [1] + [0] * k
    for n in range(1, k + 1):
        j, total = 1, 0
        while (pentagonal := j * (3 * j - 1) // 2) <= n:
            sign = 1 if j % 2 else -1
            total += sign * counts[n - pentagonal]
            if pentagonal + j <= n:
                total += sign * counts[n - pentagonal - j]
            j += 1
        counts[n] = total
    return counts[k]


def dominates(mu: Partition, lam: Partition) -> bool:
    """
    Dominance order: True iff every prefix sum of mu is at least that of lam.

    :param mu: The (candidate) larger partition.
    :type mu: Partition
    :param lam: The (candidate) smaller partition.
    :type lam: Partition
    :return: Whether lam <= mu.
    :rtype: bool
    """

    if mu.weight != lam.weight:
        raise DomainError(
            f"dominance needs equal weights, got |{mu}|={mu.weight} and |{lam}|={lam.weight}"
        )
    pairs = list(zip_longest(mu.parts, lam.parts, fillvalue=0))
    mu_sums = accumulate(p for p, _ in pairs)
    lam_sums = accumulate(q for _, q in pairs)
    return all(a >= b for a, b in zip(mu_sums, lam_sums))


def conjugate(lam: Partition) -> Partition:
    if not lam.parts:
        return EMPTY
    return Partition(tuple(sum(1 for p in lam.parts if p > j) for j in range(lam.parts[0])))


def kappa_star(kappa: Partition, n: int, m: int) -> Partition:
    """
    The dual partition (n - k_m, ..., n - k_1) of kappa padded to m parts.

    :param kappa: The partition; at most m parts.
    :type kappa: Partition
    :param n: Any integer n >= k_1.
    :type n: int
    :param m: Number of parts to pad to.
    :type m: int
    :return: The dual partition of weight n*m - |kappa|.
    :rtype: Partition
    """

    if m < 1:
        raise DomainError(f"requires m >= 1, got {m}")
    if n < kappa[0]:
        raise DomainError(f"requires n >= k_1, got n={n} and k_1={kappa[0]}")
    padded = kappa.padded(m)
    return Partition(tuple(n - k for k in reversed(padded)))


def rho(kappa: Partition, m: int) -> int:
    return sum(k * (k - i) for i, k in enumerate(kappa.padded(m), start=1))
