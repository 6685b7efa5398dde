"""Scripted reference scenarios with frozen expected traces.

Each scenario pins the slot conventions of the simulator against a trace
worked out by hand: one for free idle signaling, one for a message
deferred behind a null codeword's last bit, and one for a preempted null
codeword.  The expected CSVs were derived from the framing rules directly
and must match `Trace.to_csv` byte for byte.
"""

from .coding import Codebook
from .schemes import SchemeKind, SchemeSpec
from .simulator import SimConfig

# Shared 4-symbol demo code: A=0, B=10, C=110, D=111.
DEMO_CODE = Codebook(("A", "B", "C", "D"), ("0", "10", "110", "111"))

# The same alphabet with a null codeword folded in mid-tree:
# A=0, B=100, NULL=101, C=110, D=111.
DEMO_CODE_WITH_NULL = Codebook(("A", "B", "C", "D"), ("0", "100", "110", "111"))
DEMO_NULL_CODEWORD = "101"


def ideal_signaling_config() -> SimConfig:
    """Ideal framing; C, B, A arrive at slots 0, 2, 8."""
    return SimConfig(
        scheme=SchemeSpec(SchemeKind.IDEAL, DEMO_CODE),
        arrival=None,
        horizon=30,
        warmup=0,
        scripted_arrivals=((0, "C"), (2, "B"), (8, "A")),
    )


def null_deferral_config() -> SimConfig:
    """Predictive framing; A lands while the null codeword's last bit is due."""
    scheme = SchemeSpec(
        SchemeKind.PREDICTIVE, DEMO_CODE_WITH_NULL, null_codeword=DEMO_NULL_CODEWORD
    )
    return SimConfig(
        scheme=scheme,
        arrival=None,
        horizon=30,
        warmup=0,
        scripted_arrivals=((0, "C"), (2, "B"), (8, "A")),
    )


def preemptive_switch_config() -> SimConfig:
    """Adaptive framing; B arrives two bits into a null codeword it extends."""
    scheme = SchemeSpec(
        SchemeKind.ADAPTIVE,
        DEMO_CODE_WITH_NULL,
        null_codeword=DEMO_NULL_CODEWORD,
        preemptible=True,
    )
    return SimConfig(
        scheme=scheme,
        arrival=None,
        horizon=30,
        warmup=0,
        scripted_arrivals=((2, "B"),),
    )


IDEAL_SIGNALING_CSV = """\
t,pending_bits,bit,decoded,age,u,N
0,3,1,,1,,1
1,2,1,,2,,1
2,3,0,,3,,2
3,2,1,C,3,0,2
4,1,0,,4,0,2
5,0,-,B,3,2,2
6,0,-,,4,2,2
7,0,-,,5,2,2
8,1,0,,6,2,3
9,0,-,A,1,8,3
10,0,-,,2,8,3
11,0,-,,3,8,3
12,0,-,,4,8,3
13,0,-,,5,8,3
14,0,-,,6,8,3
15,0,-,,7,8,3
16,0,-,,8,8,3
17,0,-,,9,8,3
18,0,-,,10,8,3
19,0,-,,11,8,3
20,0,-,,12,8,3
21,0,-,,13,8,3
22,0,-,,14,8,3
23,0,-,,15,8,3
24,0,-,,16,8,3
25,0,-,,17,8,3
26,0,-,,18,8,3
27,0,-,,19,8,3
28,0,-,,20,8,3
29,0,-,,21,8,3
30,0,,,22,8,3
"""

NULL_DEFERRAL_CSV = """\
t,pending_bits,bit,decoded,age,u,N
0,3,1,,1,,1
1,2,1,,2,,1
2,4,0,,3,,2
3,3,1,C,3,0,2
4,2,0,,4,0,2
5,1,0,,5,0,2
6,0,1,B,4,2,2
7,0,0,,5,2,2
8,1,1,,6,2,3
9,1,0,,7,2,3
10,0,1,A,2,8,3
11,0,0,,3,8,3
12,0,1,,4,8,3
13,0,1,,5,8,3
14,0,0,,6,8,3
15,0,1,,7,8,3
16,0,1,,8,8,3
17,0,0,,9,8,3
18,0,1,,10,8,3
19,0,1,,11,8,3
20,0,0,,12,8,3
21,0,1,,13,8,3
22,0,1,,14,8,3
23,0,0,,15,8,3
24,0,1,,16,8,3
25,0,1,,17,8,3
26,0,0,,18,8,3
27,0,1,,19,8,3
28,0,1,,20,8,3
29,0,0,,21,8,3
30,0,,,22,8,3
"""

PREEMPTIVE_SWITCH_CSV = """\
t,pending_bits,bit,decoded,age,u,N
0,0,1,,1,,0
1,0,0,,2,,0
2,1,0,,3,,1
3,0,1,B,1,2,1
4,0,0,,2,2,1
5,0,1,,3,2,1
6,0,1,,4,2,1
7,0,0,,5,2,1
8,0,1,,6,2,1
9,0,1,,7,2,1
10,0,0,,8,2,1
11,0,1,,9,2,1
12,0,1,,10,2,1
13,0,0,,11,2,1
14,0,1,,12,2,1
15,0,1,,13,2,1
16,0,0,,14,2,1
17,0,1,,15,2,1
18,0,1,,16,2,1
19,0,0,,17,2,1
20,0,1,,18,2,1
21,0,1,,19,2,1
22,0,0,,20,2,1
23,0,1,,21,2,1
24,0,1,,22,2,1
25,0,0,,23,2,1
26,0,1,,24,2,1
27,0,1,,25,2,1
28,0,0,,26,2,1
29,0,1,,27,2,1
30,0,,,28,2,1
"""

ALL_SCENARIOS = (
    ("ideal-signaling", ideal_signaling_config, IDEAL_SIGNALING_CSV),
    ("null-deferral", null_deferral_config, NULL_DEFERRAL_CSV),
    ("preemptive-switch", preemptive_switch_config, PREEMPTIVE_SWITCH_CSV),
)
