"""Pure-Python fallback for the hot kernels.

Must stay observably identical to the compiled twin in
``_kernels_c.pyx``: same inputs, same outputs, bit for bit. Neither
backend consumes randomness; callers own all RNG draws.
"""

import numpy as np

REG_CLAMP_MAX = 2**31 - 1
REG_CLAMP_MIN = -(2**31)
N_REGISTERS = 8

# Register-machine opcodes. Registers r0..r7 start preloaded with the
# case inputs (r_i = inputs[i] for i < number of inputs), remainder zero.
OP_LOAD_INPUT = 0   # r[a] = inputs[b % n_inputs]
OP_LOAD_CONST = 1   # r[a] = b
OP_ADD = 2          # r[a] = r[b] + r[c]
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5          # protected: 0 when r[c] == 0, else truncated division
OP_MOD = 6          # protected: 0 when r[c] == 0, else C-style remainder
OP_LT = 7           # r[a] = 1 if r[b] < r[c] else 0
OP_EQ = 8
OP_IF_SKIP = 9      # skip next instruction when r[a] == 0
OP_JUMP_FWD = 10    # pc += 1 + a (clamps at program end)
OP_COPY = 11        # r[a] = r[b]
OP_OUTPUT = 12      # submit r[a]; last submission wins
OP_MAX = 13
OP_MIN = 14
OP_HALT = 15
N_OPCODES = 16


def backend_name():
    return "python"


def lexicase_filter(scores, unknown, candidates, case_order):
    """Survivors of one lexicase selection event.

    scores: (N, T) float64; unknown: (N, T) uint8; candidates: int64 row
    indices forming the initial pool; case_order: int64 case sequence.
    Cases where any current pool member is unknown are skipped outright;
    otherwise the pool keeps exactly the rows matching the pool maximum.
    Returns surviving row indices in input order.
    """
    pool = np.asarray(candidates, dtype=np.int64)
    for c in case_order:
        if unknown[pool, c].any():
            continue
        col = scores[pool, c]
        pool = pool[col == col.max()]
        if pool.size == 1:
            break
    return pool.copy()


def _clamp(v):
    if v > REG_CLAMP_MAX:
        return REG_CLAMP_MAX
    if v < REG_CLAMP_MIN:
        return REG_CLAMP_MIN
    return v


def _trunc_div(x, d):
    q = abs(x) // abs(d)
    return q if (x < 0) == (d < 0) else -q


def run_program(code, inputs, max_steps):
    """Execute one program on one input vector.

    code: (L, 4) int32 rows of (opcode, a, b, c); inputs: int64 vector.
    Returns (has_output, output).
    """
    n = code.shape[0]
    n_inputs = len(inputs)
    regs = [0] * N_REGISTERS
    for i in range(min(n_inputs, N_REGISTERS)):
        regs[i] = int(inputs[i])
    pc = 0
    steps = 0
    has_output = False
    output = 0
    while pc < n and steps < max_steps:
        steps += 1
        # Plain ints: numpy scalars would silently wrap at 32 bits in the
        # arithmetic below instead of hitting the explicit clamp.
        op = int(code[pc, 0])
        a = int(code[pc, 1]) & 7
        b = int(code[pc, 2]) & 7
        c = int(code[pc, 3]) & 7
        if op == OP_LOAD_INPUT:
            regs[a] = int(inputs[b % n_inputs])
        elif op == OP_LOAD_CONST:
            regs[a] = b
        elif op == OP_ADD:
            regs[a] = _clamp(regs[b] + regs[c])
        elif op == OP_SUB:
            regs[a] = _clamp(regs[b] - regs[c])
        elif op == OP_MUL:
            regs[a] = _clamp(regs[b] * regs[c])
        elif op == OP_DIV:
            regs[a] = 0 if regs[c] == 0 else _clamp(_trunc_div(regs[b], regs[c]))
        elif op == OP_MOD:
            if regs[c] == 0:
                regs[a] = 0
            else:
                regs[a] = _clamp(regs[b] - _trunc_div(regs[b], regs[c]) * regs[c])
        elif op == OP_LT:
            regs[a] = 1 if regs[b] < regs[c] else 0
        elif op == OP_EQ:
            regs[a] = 1 if regs[b] == regs[c] else 0
        elif op == OP_IF_SKIP:
            if regs[a] == 0:
                pc += 1
        elif op == OP_JUMP_FWD:
            pc += a
        elif op == OP_COPY:
            regs[a] = regs[b]
        elif op == OP_OUTPUT:
            output = regs[a]
            has_output = True
        elif op == OP_MAX:
            regs[a] = regs[b] if regs[b] > regs[c] else regs[c]
        elif op == OP_MIN:
            regs[a] = regs[b] if regs[b] < regs[c] else regs[c]
        else:  # OP_HALT and anything unmapped
            break
        pc += 1
    return has_output, output


def run_program_cases(code, case_inputs, expected, max_steps):
    """Pass/fail vector for one program over a batch of cases.

    case_inputs: (M, K) int64; expected: (M,) int64. Returns (M,) uint8.
    """
    m = case_inputs.shape[0]
    passes = np.zeros(m, dtype=np.uint8)
    for i in range(m):
        has_output, output = run_program(code, case_inputs[i], max_steps)
        if has_output and output == expected[i]:
            passes[i] = 1
    return passes
