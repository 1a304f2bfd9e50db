"""Frozen exact values for the worked urns.

Matrices are stored as strings and converted with :func:`rat_matrix`.
Type orders follow the builders: for the ternary urn the external node,
the 1-key leaf, the full leaf, then the 3-, 4- and 4-key trees; for the
quaternary urn the three leaves, the full leaf and the five trees with a
full root; for attachment urns the single node, the 2-path, the 3-path,
the cherry and the star.
"""

from fractions import Fraction

QUATERNARY_TARGETS = ["3(1,1,0,0)", "3(3(0,0,0,0),0,0,0)"]
PA_POINTS = {"half": (1, 1), "one": (0, 1), "two": (-1, 2)}


def rat_matrix(rows):
    return [[Fraction(x) for x in r] for r in rows]


TERNARY_A = [
    [-1, 0, 0, 0, 4, 8],
    [1, -2, 0, 0, 7, 2],
    [0, 2, -3, 0, 4, 2],
    [0, 0, 3, -4, 0, 3],
    [0, 0, 0, 2, -5, 0],
    [0, 0, 0, 2, 0, -5],
]
TERNARY_V1 = ["3/25", "1/10", "2/25", "3/50", "1/50", "1/50"]
TERNARY_EIGENVALUES = [1, -3, -4, -4, -5, -5]
# indicator rows of fringe subtrees with 1..4 keys, and the leaf count
TERNARY_SIZE_ROWS = {
    1: ([0, 1, 0, 1, 2, 0], "8/75"),
    2: ([0, 0, 1, 0, 0, 1], "131/2100"),
    3: ([0, 0, 0, 1, 0, 0], "39227/945000"),
    4: ([0, 0, 0, 0, 1, 1], "38477/1299375"),
}
TERNARY_LEAVES = ([0, 1, 1, 1, 2, 1], "89/2100")

QUATERNARY_A = [
    [-1, 0, 0, 6, 4, 10, 10, 6, 24],
    [1, -2, 0, 2, 4, 4, 10, 3, 5],
    [0, 2, -3, 0, 0, 2, 4, 3, 0],
    [0, 0, 3, -4, 0, 0, 0, 0, 3],
    [0, 0, 0, 1, -5, 0, 0, 0, 1],
    [0, 0, 0, 1, 0, -5, 0, 0, 1],
    [0, 0, 0, 0, 1, 1, -6, 0, 0],
    [0, 0, 0, 0, 2, 0, 0, -6, 0],
    [0, 0, 0, 0, 0, 0, 0, 3, -7],
]
QUATERNARY_V1 = ["113/520", "61/455", "34/455", "33/728", "1/130", "1/130", "1/455", "1/455", "3/3640"]
QUATERNARY_HMU = ["1/455", "3/3640"]
QUATERNARY_GAMMA = [["157523/72872800", "-2884319/194424630400"], ["-2884319/194424630400", "5681341/6943736800"]]
QUATERNARY_LEAVES_ROW = [0, 1, 1, 1, 1, 1, 2, 1, 1]
QUATERNARY_SMALL_LEAVES_ROW = [0, 1, 1, 1]
QUATERNARY_LEAF_VARIANCE = "5276/122525"
QUATERNARY_SMALL_A = [[-1, 0, 0, 12], [1, -2, 0, 4], [0, 2, -3, 0], [0, 0, 3, -4]]
QUATERNARY_SMALL_SIGMA = [
    ["34466/122525", "153/49010", "-963/24505", "-10393/245050"],
    ["153/49010", "519/4901", "-339/9802", "-681/24505"],
    ["-963/24505", "-339/9802", "276/4901", "-57/3770"],
    ["-10393/245050", "-681/24505", "-57/3770", "4391/122525"],
]

# second moments of one replacement, as weighted outer products
TERNARY_B5 = [("1/5", [0, 3, 0, 0, -1, 0]), ("4/5", [1, 1, 1, 0, -1, 0])]
QUATERNARY_B7 = [("4/6", [2, 1, 1, 0, 0, 0, -1, 0, 0]), ("2/6", [1, 3, 0, 0, 0, 0, -1, 0, 0])]

# fringe-size variances for the attachment urns, keyed as PA_POINTS
PA_SIZE_VARIANCES = {
    "half": ("1/9", "49/600", "663/15680"),
    "one": ("1/12", "7/90", "17/336"),
    "two": ("2/45", "23/420", "8/175"),
}
# functionals counting fringe subtrees with 1, 2 and 3 nodes
PA_SIZE_ROWS = {1: [1, 1, 1, 2, 0], 2: [0, 1, 1, 0, 0], 3: [0, 0, 1, 1, 0]}


def pa_intensity_chi_one(rho):
    """Intensity of the five-type attachment urn with ``chi = 1``."""
    r = Fraction(rho)
    return [
        [-r, 0, r + 1, 5 * r + 6, 1],
        [r, -2 * r - 1, r + 1, 2 * r, 0],
        [0, r, -2 * r - 2, 0, 0],
        [0, r + 1, r + 1, -3 * r - 2, 0],
        [0, 0, 3 * (r + 1) ** 2, 3 * (r + 1) * (r + 2), 1],
    ]


def pa_v1_chi_one(rho):
    r = Fraction(rho)
    d = (2 * r + 1) * (3 * r + 2) * (4 * r + 3)
    return [6 * (r + 1) ** 2 / d, 3 * r * (r + 1) / d, r**2 / d, r * (r + 1) / d, 6 * (r + 1) ** 3 / d]

TERNARY_SIGMA = [
    ["29017/259875", "-117371/10395000", "-44311/5197500", "-2143/945000", "-28289/5197500", "-28289/5197500"],
    ["-117371/10395000", "7379/83160", "-34927/5197500", "-3907/236250", "-166037/20790000", "-166037/20790000"],
    ["-44311/5197500", "-34927/5197500", "159241/2598750", "-4747/236250", "-84709/10395000", "-84709/10395000"],
    ["-2143/945000", "-3907/236250", "-4747/236250", "39227/945000", "-13309/1890000", "-13309/1890000"],
    ["-28289/5197500", "-166037/20790000", "-84709/10395000", "-13309/1890000", "22613/1299375", "-6749/2598750"],
    ["-28289/5197500", "-166037/20790000", "-84709/10395000", "-13309/1890000", "-6749/2598750", "22613/1299375"],
]

QUATERNARY_SIGMA = [
    ["3400704921/13887473600", "54821229/3738935200", "-55644023/2991148160", "-5396373387/194424630400", "-47473653/6943736800", "-47473653/6943736800", "-19950493/7776985216", "-19950493/7776985216", "-228203991/194424630400"],
    ["54821229/3738935200", "7300603/66040975", "-8044611/325124800", "-2117030913/97212315200", "-1469561/301901600", "-1469561/301901600", "-7204037/4226622400", "-7204037/4226622400", "-1334771/1767496640"],
    ["-55644023/2991148160", "-8044611/325124800", "118631347/2113311200", "-2729459079/194424630400", "-3532337/1207606400", "-3532337/1207606400", "-161089/162562400", "-161089/162562400", "-83883901/194424630400"],
    ["-5396373387/194424630400", "-2117030913/97212315200", "-2729459079/194424630400", "617325/17359342", "-7661559/3967849600", "-7661559/3967849600", "-123349341/194424630400", "-123349341/194424630400", "-3764589/13887473600"],
    ["-47473653/6943736800", "-1469561/301901600", "-3532337/1207606400", "-7661559/3967849600", "63201/8625760", "-3151/8625760", "-4847/41641600", "-4847/41641600", "-193079/3967849600"],
    ["-47473653/6943736800", "-1469561/301901600", "-3532337/1207606400", "-7661559/3967849600", "-3151/8625760", "63201/8625760", "-4847/41641600", "-4847/41641600", "-193079/3967849600"],
    ["-19950493/7776985216", "-7204037/4226622400", "-161089/162562400", "-123349341/194424630400", "-4847/41641600", "-4847/41641600", "157523/72872800", "-2637/72872800", "-2884319/194424630400"],
    ["-19950493/7776985216", "-7204037/4226622400", "-161089/162562400", "-123349341/194424630400", "-4847/41641600", "-4847/41641600", "-2637/72872800", "157523/72872800", "-2884319/194424630400"],
    ["-228203991/194424630400", "-1334771/1767496640", "-83883901/194424630400", "-3764589/13887473600", "-193079/3967849600", "-193079/3967849600", "-2884319/194424630400", "-2884319/194424630400", "5681341/6943736800"],
]
