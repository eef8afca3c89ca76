"""Linear register-machine GP problems: Median and Grade.

Programs are (L, 4) int32 arrays of (opcode, a, b, c) instructions run
on eight integer registers preloaded with the case inputs. Evaluation is
pass/fail per training case. The interpreter itself lives in the kernel
backends; this module owns program mutation, problem generation, and
solution checking.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import RngStream

MEDIAN_MAX_LEN = 64
MEDIAN_MAX_STEPS = 64
GRADE_MAX_LEN = 128
GRADE_MAX_STEPS = 128

NUM_TRAINING_CASES = 100
NUM_TESTING_CASES = 1000

# Letter-grade output codes for the Grade problem.
GRADE_CODES = {"A": 0, "B": 1, "C": 2, "D": 3, "F": 4}

RATE_POINT_MUTATION = 0.001  # per instruction, for each of insert/delete/substitute
RATE_SLIP = 0.05             # per program

INIT_LEN_MIN = 4
INIT_LEN_MAX = 32


@dataclass(frozen=True)
class TrainingCase:
    inputs: tuple
    expected_output: int
    category: str


@dataclass
class ProblemSpec:
    name: str
    training: list
    testing: list
    max_len: int
    max_steps: int
    n_inputs: int

    def case_matrix(self, cases):
        inputs = np.array([c.inputs for c in cases], dtype=np.int64)
        expected = np.array([c.expected_output for c in cases], dtype=np.int64)
        return inputs, expected


def program_key(program: np.ndarray) -> bytes:
    """Opaque genotype key for phylogeny tracking."""
    return program.tobytes()


def random_instruction(gen) -> np.ndarray:
    parts = [gen.integers(kernels.N_OPCODES), *gen.integers(0, kernels.N_REGISTERS, size=3)]
    return np.array(parts, dtype=np.int32)


def random_program(gen, max_len: int) -> np.ndarray:
    length = int(gen.integers(INIT_LEN_MIN, min(INIT_LEN_MAX, max_len) + 1))
    ops = gen.integers(kernels.N_OPCODES, size=(length, 1))
    args = gen.integers(0, kernels.N_REGISTERS, size=(length, 3))
    return np.hstack([ops, args]).astype(np.int32)


def execute(program: np.ndarray, inputs, max_steps: int):
    """Run the register machine; returns the submitted output or None."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    has_output, output = kernels.run_program(
        np.ascontiguousarray(program, dtype=np.int32),
        np.asarray(inputs, dtype=np.int64), max_steps)
    return output if has_output else None


def evaluate_case(program: np.ndarray, case: TrainingCase, max_steps: int) -> float:
    output = execute(program, case.inputs, max_steps)
    return 1.0 if output is not None and output == case.expected_output else 0.0


def evaluate_cases(program: np.ndarray, case_inputs: np.ndarray,
                   expected: np.ndarray, max_steps: int) -> np.ndarray:
    """Pass/fail float vector over a batch of cases (kernel-backed)."""
    passes = kernels.run_program_cases(
        np.ascontiguousarray(program, dtype=np.int32), case_inputs, expected, max_steps)
    return passes.astype(np.float64)


def mutate_program(program: np.ndarray, rng: RngStream, max_len: int,
                   point_rate: float = RATE_POINT_MUTATION,
                   slip_rate: float = RATE_SLIP) -> np.ndarray:
    """Per-instruction insertion/deletion/substitution, then an optional
    slip mutation that duplicates or deletes a random segment. Length is
    kept within [1, max_len]."""
    gen = rng.mutation
    rows = list(program)

    n = len(rows)
    sub_hits = gen.random(n) < point_rate
    ins_hits = gen.random(n) < point_rate
    del_hits = gen.random(n) < point_rate
    out = []
    for i in range(n):
        row = random_instruction(gen) if sub_hits[i] else rows[i]
        if not del_hits[i] or n == 1:
            out.append(row)
        if ins_hits[i]:
            out.append(random_instruction(gen))
    if not out:
        out.append(random_instruction(gen))

    if gen.random() < slip_rate:
        i, j = sorted(int(gen.integers(len(out))) for _ in range(2))
        if gen.random() < 0.5:
            out[j + 1:j + 1] = [row.copy() for row in out[i:j + 1]]
        else:
            if len(out) > (j - i + 1):
                del out[i:j + 1]

    out = out[:max_len]
    return np.array(out, dtype=np.int32).reshape(len(out), 4)


def _median_of(triple) -> int:
    return int(sorted(triple)[1])


def _grade_of(a, b, c, d, score) -> int:
    for code, threshold in zip((0, 1, 2, 3), (a, b, c, d)):
        if score >= threshold:
            return code
    return GRADE_CODES["F"]


def _median_edge_cases():
    cases = []
    for v in (-100, 0, 100):
        cases.append(TrainingCase((v, v, v), v, "all_equal"))
    for a, b in ((-100, 100), (100, -100), (0, 100), (0, -100)):
        cases.append(TrainingCase((a, a, b), _median_of((a, a, b)), "two_equal"))
        cases.append(TrainingCase((a, b, a), _median_of((a, b, a)), "two_equal"))
    for triple in ((-100, 0, 100), (100, 0, -100), (-100, 100, 0)):
        cases.append(TrainingCase(triple, _median_of(triple), "boundary"))
    return cases


def _random_median_case(gen):
    if gen.random() < 0.15:
        a, b = (int(v) for v in gen.integers(-100, 101, size=2))
        perm = int(gen.integers(3))
        triple = [(a, a, b), (a, b, a), (b, a, a)][perm]
        return TrainingCase(triple, _median_of(triple), "two_equal")
    triple = tuple(int(v) for v in gen.integers(-100, 101, size=3))
    return TrainingCase(triple, _median_of(triple), "random")


def _random_grade_thresholds(gen):
    # Monotonically decreasing and unique; D >= 1 keeps an F band reachable.
    vals = gen.choice(np.arange(1, 101), size=4, replace=False)
    a, b, c, d = (int(v) for v in np.sort(vals)[::-1])
    return a, b, c, d


def _grade_edge_cases(gen):
    cases = []
    for _ in range(3):
        a, b, c, d = _random_grade_thresholds(gen)
        for threshold, label in zip((a, b, c, d), "ABCD"):
            cases.append(TrainingCase((a, b, c, d, threshold),
                                      _grade_of(a, b, c, d, threshold),
                                      f"at_threshold_{label}"))
            cases.append(TrainingCase((a, b, c, d, threshold - 1),
                                      _grade_of(a, b, c, d, threshold - 1),
                                      f"below_threshold_{label}"))
        for extreme in (0, 100):
            cases.append(TrainingCase((a, b, c, d, extreme),
                                      _grade_of(a, b, c, d, extreme), "extreme"))
    return cases


def _random_grade_case(gen):
    a, b, c, d = _random_grade_thresholds(gen)
    score = int(gen.integers(0, 101))
    return TrainingCase((a, b, c, d, score), _grade_of(a, b, c, d, score), "random")


def build_problem(name: str, rng: RngStream) -> ProblemSpec:
    """Generate the 100-case training and 1000-case testing sets.

    Edge cases are injected into both sets; the remainder is uniform
    random, with no balancing across output categories.
    """
    gen = rng.subsampling
    if name == "median":
        edge, sampler = _median_edge_cases(), _random_median_case
        max_len, max_steps, n_inputs = MEDIAN_MAX_LEN, MEDIAN_MAX_STEPS, 3
    elif name == "grade":
        edge, sampler = _grade_edge_cases(gen), _random_grade_case
        max_len, max_steps, n_inputs = GRADE_MAX_LEN, GRADE_MAX_STEPS, 5
    else:
        raise ValueError(f"unknown problem {name!r}")

    training = list(edge)
    while len(training) < NUM_TRAINING_CASES:
        training.append(sampler(gen))
    testing = list(edge)
    while len(testing) < NUM_TESTING_CASES:
        testing.append(sampler(gen))
    return ProblemSpec(name, training[:NUM_TRAINING_CASES], testing[:NUM_TESTING_CASES],
                       max_len, max_steps, n_inputs)


def check_solution(program: np.ndarray, spec: ProblemSpec) -> bool:
    """True iff the program passes every training and testing case."""
    for cases in (spec.training, spec.testing):
        inputs, expected = spec.case_matrix(cases)
        if not evaluate_cases(program, inputs, expected, spec.max_steps).all():
            return False
    return True


def write_cases_csv(path, cases) -> None:
    n_inputs = len(cases[0].inputs)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"input_{i}" for i in range(n_inputs)]
                        + ["expected_output", "category"])
        for case in cases:
            writer.writerow([*case.inputs, case.expected_output, case.category])


def read_cases_csv(path) -> list:
    cases = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_inputs = len(header) - 2
        for row in reader:
            cases.append(TrainingCase(tuple(int(v) for v in row[:n_inputs]),
                                      int(row[n_inputs]), row[n_inputs + 1]))
    return cases
