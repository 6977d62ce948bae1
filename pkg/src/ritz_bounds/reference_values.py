"""Published reference cells for the two-by-two demonstration family.

The family has Ritz value mu_e = 0.01 from the test vector e_1 and is
tabulated for eta = 1..5 with two lower estimates of lambda_1: the
Temple-Kato one and (1 - sin(Theta)) mu_e.
"""

from typing import Optional

RITZ_VALUE = 0.01

# (1 - sin(Theta)) * mu_e, printed with 12 significant digits
PUBLISHED_SIN_THETA_BOUND = {
    1: 0.009004962810,
    2: 0.009500623831,
    3: 0.009666851698,
    4: 0.009750078088,
    5: 0.009800039988,
}

# Printed Temple-Kato cells. They equal mu - eps^2 / (lambda_2 - mu) with
# eps^2 = 1e-2, not the 1e-4 of the displayed matrix, so they do not match
# a self-consistent evaluation.
PUBLISHED_TEMPLE_KATO = {
    1: 9.998000499860e-7,
    2: 0.007500015625,
    3: 0.008888890261,
    4: 0.009375000244,
    5: 0.009600000064,
}

# Absolute tolerance for a "match" flag; cells are printed to 12 digits.
MATCH_TOL = 1e-11

TEMPLE_KATO_NOTE = (
    "Published Temple-Kato cells are reproduced by eps^2 = 1e-2, one hundred "
    "times the squared residual 1e-4 of the stated matrix; the computed column "
    "is self-consistent and the published one is shown for reference."
)

FACTOR_NOTE = (
    "H_eta is evaluated through its factor [[0.1, -0.1], [0, eta]], giving "
    "bottom-right entry 0.01 + eta^2; the displayed matrix has 1 + eta^2. "
    "Both choices of H'^{-1} are listed per row."
)


def _lookup(table: dict[int, float], eta: float) -> Optional[float]:
    if float(eta).is_integer():
        return table.get(int(eta))
    return None


def published_sin_theta_bound(eta: float) -> Optional[float]:
    """Published sin(Theta) lower estimate, or None if eta is not tabulated."""
    return _lookup(PUBLISHED_SIN_THETA_BOUND, eta)


def published_temple_kato(eta: float) -> Optional[float]:
    """Published Temple-Kato cell, or None if eta is not tabulated."""
    return _lookup(PUBLISHED_TEMPLE_KATO, eta)


def match_flag(computed: float, published: Optional[float]) -> str:
    """"match", "mismatch" or "n/a" for a computed cell."""
    if published is None:
        return "n/a"
    return "match" if abs(computed - published) <= MATCH_TOL else "mismatch"
