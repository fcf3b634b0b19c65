"""Reference matrices and rounded state vectors used across the test-suite."""
from fractions import Fraction as F

from privcon.core.exactla import RationalMatrix
from privcon.core.netgraph import WeightedDigraph

# ---------------- cycle-3 ---------------- #

CYCLE3_A = RationalMatrix.from_rows([
    [0, F(1, 2), F(1, 2)],
    [F(1, 2), 0, F(1, 2)],
    [F(1, 2), F(1, 2), 0],
])
CYCLE3_X0 = (F(1, 2), F(1, 3), F(1, 5))
CYCLE3_CONSENSUS = F(31, 90)


def cycle3_graph() -> WeightedDigraph:
    return WeightedDigraph.from_triples(3, [(i, j, F(1, 2)) for i in range(3) for j in range(3) if i != j])


# ---------------- three-state gadget on cycle-3 ---------------- #


def alg2_cycle3_matrix() -> RationalMatrix:
    n = 3
    values = {}
    for i in range(n):
        z1, z2, z3 = n + 3 * i, n + 3 * i + 1, n + 3 * i + 2
        for j in range(n):
            if j != i:
                values[(i, j)] = F(1, 5)
        values[(i, z1)] = F(2, 5)
        values[(i, z3)] = F(1, 5)
        values[(z1, i)] = 1
        values[(z2, i)] = 1
        values[(z3, z2)] = 1
    return RationalMatrix.from_sparse(12, 12, values)


ALG2_V_LEFT = (F(5, 27),) * 3 + (F(2, 27), F(1, 27), F(1, 27)) * 3

ALG2_SPLIT = (
    (F("0.684605"), F("0.596201"), F("0.719194")),
    (F("0.347897"), F("0.726167"), F("0.25927")),
    (F("0.0304891"), F("0.0956126"), F("0.673898")),
)
ALG2_XTILDE = (
    0, 0, 0,
    0.770181, 1.34145, 1.61819,
    0.391384, 1.63388, 0.583356,
    0.0343002, 0.215128, 1.51627,
)

# ---------------- four-state reversible gadget on cycle-3 ---------------- #


def example1_matrix() -> RationalMatrix:
    n = 3
    values = {}
    for i in range(n):
        a, z1, z2, z3, z4 = i, n + 4 * i, n + 4 * i + 1, n + 4 * i + 2, n + 4 * i + 3
        for j in range(n):
            if j != i:
                values[(a, j)] = F(1, 4)
        values[(a, z1)] = F(1, 12)
        values[(a, z2)] = F(1, 8)
        values[(a, z3)] = F(1, 4)
        values[(a, z4)] = F(1, 24)
        values[(z1, a)] = F(1, 11)
        values[(z1, z2)] = F(3, 22)
        values[(z1, z3)] = F(1, 11)
        values[(z1, z4)] = F(15, 22)
        values[(z2, a)] = F(1, 2)
        values[(z2, z1)] = F(1, 2)
        values[(z3, a)] = F(3, 4)
        values[(z3, z1)] = F(1, 4)
        values[(z4, a)] = F(1, 16)
        values[(z4, z1)] = F(15, 16)
    return RationalMatrix.from_sparse(15, 15, values)


EXAMPLE1_S = (F(2, 19),) * 3 + (F(11, 114), F(1, 38), F(2, 57), F(4, 57)) * 3
EXAMPLE1_XTILDE = (
    0, 0, 0,
    0.5894, 0.8522, 0.7909, 0.8495,
    0.3415, 0.7026, 1.1778, 0.2615,
    0.0254, 0.0305, 1.1357, 0.3357,
)
# per-agent share x_i / N hidden by the encoding
EXAMPLE1_SHARES = (F(1, 6), F(1, 9), F(1, 15))

# D block of one gadget, observer 0
GADGET_D_BLOCK = RationalMatrix.from_rows([
    [1, 0, 0, 0],
    [0, 1, 0, F(22, 3)],
    [0, 0, 1, F(-7, 2)],
])

# ---------------- eleven-agent network ---------------- #

EXAMPLE2_NEIGHBORS = (
    (1, 2, 10),
    (0, 2, 4),
    (0, 1, 3),
    (2, 4, 7),
    (1, 3, 5),
    (4, 6, 9),
    (5, 7),
    (3, 6, 8),
    (7, 9),
    (5, 8, 10),
    (0, 9),
)
EXAMPLE2_X0 = (
    F("0.1"), F("0.3"), F("0.6"), F("0.43"), F("0.85"), F("0.9"),
    F("0.45"), F("0.11"), F("0.06"), F("0.51"), F("0.13"),
)
EXAMPLE2_MEAN = 4.44 / 11
EXAMPLE2_S_ORIGINAL = (F(1, 10),) * 6 + (F(1, 15), F(1, 10), F(1, 15), F(1, 10), F(1, 15))
EXAMPLE2_GADGETS = (
    (0.0789501, 0.358511, 0.0528758, 0.162382),
    (0.143901, 0.667626, 0.9161, 0.389181),
    (0.772374, 2.01193, 1.53623, 0.00630652),
    (0.554657, 0.965073, 0.479013, 0.492756),
    (0.137887, 2.89792, 2.14223, 1.32303),
    (1.04491, 0.596246, 2.74642, 0.852806),
    (0.792219, 0.802344, 2.86735, 0.0909197),
    (0.106131, 0.280592, 0.173293, 0.137202),
    (0.0931979, 0.560345, 0.0542549, 0.0232326),
    (0.650005, 2.73045, 0.448699, 0.0602469),
    (0.0534166, 0.548742, 0.437764, 0.343937),
)
EXAMPLE2_XTILDE = (0,) * 11 + tuple(x for g in EXAMPLE2_GADGETS for x in g)


def example2_matrix() -> RationalMatrix:
    values = {}
    for i, row in enumerate(EXAMPLE2_NEIGHBORS):
        for j in row:
            values[(i, j)] = F(1, len(row))
    return RationalMatrix.from_sparse(11, 11, values)


def example2_s() -> tuple:
    agent = tuple(F(3, 95) if len(r) == 3 else F(2, 95) for r in EXAMPLE2_NEIGHBORS)
    gadget = []
    for r in EXAMPLE2_NEIGHBORS:
        if len(r) == 3:
            gadget += [F(11, 380), F(3, 380), F(1, 95), F(2, 95)]
        else:
            gadget += [F(11, 570), F(1, 190), F(2, 285), F(4, 285)]
    return agent + tuple(gadget)


# ---------------- gadget catalogs ---------------- #

def _directed(text: str) -> tuple:
    return tuple(tuple(int(c) for c in e.split(">")) for e in text.split())


DIRECTED_GADGETS = tuple(_directed(t) for t in (
    "0>1 0>2 1>0 2>3 3>0",
    "0>1 0>2 0>3 1>0 2>0 3>1",
    "0>1 0>2 0>3 1>0 2>1 3>1",
    "0>1 0>2 1>0 1>3 2>0 3>0",
    "0>1 0>2 1>0 1>3 2>3 3>0",
    "0>1 0>2 1>0 2>1 2>3 3>0",
    "0>1 0>2 0>3 1>0 1>2 2>0 3>0",
    "0>1 0>2 0>3 1>0 1>2 2>0 3>2",
    "0>1 0>2 0>3 1>0 1>2 2>1 3>1",
    "0>1 0>2 0>3 1>0 2>0 3>1 3>2",
    "0>1 0>2 1>0 1>3 2>0 2>3 3>0",
    "0>1 0>2 0>3 1>0 1>2 1>3 2>0 3>0",
    "0>1 0>2 0>3 1>0 1>2 2>0 3>0 3>2",
))


def _undirected(text: str) -> tuple:
    pairs = [(int(e[0]) - 1, int(e[1]) - 1) for e in text.split()]
    return tuple(sorted(pairs + [(j, i) for i, j in pairs]))


_K5 = " ".join(f"{i}{j}" for i in range(1, 6) for j in range(i + 1, 6))

BIDIRECTED_GADGETS = tuple(_undirected(t) for t in (
    "12 13 14 15 23 24 25 34 35",
    "12 13 14 15 23",
    "12 13 14 23 25",
    "12 13 14 23 45",
    "12 13 14 25 35",
    "12 13 14 15 23 24",
    "12 13 14 15 23 45",
    "12 13 14 23 24 35",
    "12 13 14 23 25 45",
    "12 13 14 15 23 24 25",
    "12 13 14 15 23 24 34",
    "12 13 14 15 23 24 35",
    "12 13 14 23 24 35 45",
    "12 13 14 15 23 24 25 34",
    "12 13 14 15 23 24 35 45",
    _K5,
))
