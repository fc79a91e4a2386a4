"""Hand-transcribed closed forms of the one-parameter ImEx coefficients.

Each entry maps order r to ``{"a": rows, "b": rows, "c": rows}`` where
``rows[j]`` holds the coefficient of ``z**j`` as a polynomial in delta,
stored with ascending powers of delta. These are kept independent of the
generator in :mod:`imexstab.coeffs` so the two can be cross-checked.
"""
from fractions import Fraction as F

TABULATED = {
    1: {
        "a": [(0, -1), (0, 1)],
        "c": [(-1, 1), (1,)],
        "b": [(0, 1), (0,)],
    },
    2: {
        "a": [(0, 2, F(-3, 2)), (0, -4, 2), (0, 2, F(-1, 2))],
        "c": [(1, -2, 1), (-2, 2), (1,)],
        "b": [(0, -2, 1), (0, 2), (0,)],
    },
    3: {
        "a": [
            (0, -3, F(9, 2), F(-11, 6)),
            (0, 9, F(-21, 2), 3),
            (0, -9, F(15, 2), F(-3, 2)),
            (0, 3, F(-3, 2), F(1, 3)),
        ],
        "c": [(-1, 3, -3, 1), (3, -6, 3), (-3, 3), (1,)],
        "b": [(0, 3, -3, 1), (0, -6, 3), (0, 3), (0,)],
    },
    4: {
        "a": [
            (0, 4, -9, F(22, 3), F(-25, 12)),
            (0, -16, 30, F(-58, 3), 4),
            (0, 24, -36, 18, -3),
            (0, -16, 18, F(-22, 3), F(4, 3)),
            (0, 4, -3, F(4, 3), F(-1, 4)),
        ],
        "c": [(1, -4, 6, -4, 1), (-4, 12, -12, 4), (6, -12, 6), (-4, 4), (1,)],
        "b": [(0, -4, 6, -4, 1), (0, 12, -12, 4), (0, -12, 6), (0, 4), (0,)],
    },
    5: {
        "a": [
            (0, -5, 15, F(-55, 3), F(125, 12), F(-137, 60)),
            (0, 25, -65, F(200, 3), F(-365, 12), 5),
            (0, -50, 110, F(-280, 3), 35, -5),
            (0, 50, -90, F(190, 3), F(-65, 3), F(10, 3)),
            (0, -25, 35, F(-65, 3), F(95, 12), F(-5, 4)),
            (0, 5, -5, F(10, 3), F(-5, 4), F(1, 5)),
        ],
        "c": [
            (-1, 5, -10, 10, -5, 1),
            (5, -20, 30, -20, 5),
            (-10, 30, -30, 10),
            (10, -20, 10),
            (-5, 5),
            (1,),
        ],
        "b": [
            (0, 5, -10, 10, -5, 1),
            (0, -20, 30, -20, 5),
            (0, 30, -30, 10),
            (0, -20, 10),
            (0, 5),
            (0,),
        ],
    },
}
