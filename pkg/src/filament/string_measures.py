"""
String distances used to suggest a known name for a misspelled one

Notes
-----
* Both distances fill a ``len(s)+1`` by ``len(t)+1`` numpy matrix
"""
import logging
from typing import Iterable, Optional

import numpy as np

logger = logging.getLogger(__name__)


def levenshtein_distance(s: str, t: str) -> int:
    """
    Calculate the Levenshtein distance

    Parameters
    ----------
    s: str
        First string
    t: str
        Second string

    Returns
    -------
    int:
        Minimal number of insertions, deletions and substitutions turning ``s`` into ``t``

    Examples
    --------
    >>> levenshtein_distance("books", "back")
    3
    """
    m = len(s) + 1
    n = len(t) + 1
    d = np.zeros(shape=(m, n), dtype=int)
    d[:, 0] = np.arange(m)
    d[0, :] = np.arange(n)
    for i in range(1, m):
        for j in range(1, n):
            substitution_cost = 0 if s[i - 1] == t[j - 1] else 1
            d[i, j] = min(d[i - 1, j] + 1,
                          d[i, j - 1] + 1,
                          d[i - 1, j - 1] + substitution_cost)
    return int(d[len(s), len(t)])


def optimal_string_alignment_distance(s: str, t: str) -> int:
    """
    Levenshtein distance that also counts a swap of two adjacent characters as one edit

    Parameters
    ----------
    s: str
        First string
    t: str
        Second string

    Returns
    -------
    int:
        OSA distance, a cheap estimate of the Damerau-Levenshtein distance

    Examples
    --------
    >>> optimal_string_alignment_distance("left", "lfet")
    1
    """
    m = len(s) + 1
    n = len(t) + 1
    d = np.zeros(shape=(m, n), dtype=int)
    d[:, 0] = np.arange(m)
    d[0, :] = np.arange(n)
    for i in range(1, m):
        for j in range(1, n):
            cost = 0 if s[i - 1] == t[j - 1] else 1
            d[i, j] = min(d[i - 1, j] + 1,
                          d[i, j - 1] + 1,
                          d[i - 1, j - 1] + cost)
            if i > 1 and j > 1 and s[i - 1] == t[j - 2] and s[i - 2] == t[j - 1]:
                # transposition
                d[i, j] = min(d[i, j], d[i - 2, j - 2] + cost)
    return int(d[len(s), len(t)])


def closest_match(name: str, candidates: Iterable[str], max_distance: Optional[int] = None
                  ) -> Optional[str]:
    """Return the candidate closest to ``name`` or None if nothing is close enough

    Parameters
    ----------
    name: str
        The unknown name
    candidates: iterable of str
        Names that are in scope
    max_distance: int, optional
        Largest accepted OSA distance. Defaults to a third of the name length, at least 1

    Returns
    -------
    str or None:
        The best candidate. Ties are broken alphabetically

    Examples
    --------
    >>> closest_match("Mutl", ["Mult", "Mux", "Add"])
    'Mult'
    >>> closest_match("q", ["Register"]) is None
    True
    """
    if max_distance is None:
        max_distance = max(1, len(name) // 3)
    scored = sorted((optimal_string_alignment_distance(name, candidate), candidate)
                    for candidate in set(candidates) if candidate != name)
    if not scored or scored[0][0] > max_distance:
        return None
    logger.debug("Suggesting {} for {} (distance {})".format(scored[0][1], name, scored[0][0]))
    return scored[0][1]
