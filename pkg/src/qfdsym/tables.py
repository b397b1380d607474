"""Published degrees-of-freedom counts for full point-group symmetrisation.

Each entry maps ``n`` to ``(N, permutation_only_total, linear, quadratic, total)``
under permutation plus full geometric symmetry.
"""

SQUARE_DOF = {
    1: (1, 2, 1, 1, 2),
    2: (4, 14, 1, 3, 4),
    3: (9, 54, 3, 11, 14),
    4: (16, 152, 3, 24, 27),
    5: (25, 350, 6, 55, 61),
    6: (36, 702, 6, 99, 105),
    7: (49, 1274, 10, 181, 191),
    8: (64, 2144, 10, 288, 298),
    9: (81, 3402, 15, 461, 476),
    10: (100, 5150, 15, 675, 690),
    12: (144, 10584, 21, 1368, 1389),
    14: (196, 19502, 28, 2499, 2527),
    16: (256, 33152, 36, 4224, 4260),
    18: (324, 52974, 45, 6723, 6768),
    20: (400, 80600, 55, 10200, 10255),
    25: (625, 196250, 91, 24805, 24896),
}

HEXAGONAL_DOF = {
    1: (1, 2, 1, 1, 2),
    2: (7, 35, 2, 6, 8),
    3: (19, 209, 4, 26, 30),
    4: (37, 740, 6, 77, 83),
    5: (61, 1952, 9, 189, 198),
    6: (91, 4277, 12, 394, 406),
    7: (127, 8255, 16, 742, 758),
    8: (169, 14534, 20, 1281, 1301),
    9: (217, 23870, 25, 2081, 2106),
    10: (271, 37127, 30, 3206, 3236),
    11: (331, 55277, 36, 4746, 4782),
    12: (397, 79400, 42, 6781, 6823),
    13: (469, 110684, 49, 9421, 9470),
    14: (547, 150425, 56, 12762, 12818),
    15: (631, 200027, 64, 16934, 16998),
}


def reference_table(kind: str) -> dict:
    return SQUARE_DOF if kind == "square" else HEXAGONAL_DOF
