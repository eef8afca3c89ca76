# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: lexicase pool filtering and the GP register
machine. Observably identical to the pure-Python twin in _kernels_py.py;
neither backend consumes randomness."""

import numpy as np

cimport cython
from libc.stdint cimport int32_t, int64_t, uint8_t

DEF N_REGISTERS = 8

cdef int64_t REG_MAX = 2147483647
cdef int64_t REG_MIN = -2147483648


def backend_name():
    return "cython"


def lexicase_filter(double[:, ::1] scores, uint8_t[:, ::1] unknown,
                    candidates, case_order):
    """See _kernels_py.lexicase_filter."""
    pool_arr = np.array(candidates, dtype=np.int64)
    cdef int64_t[::1] pool = pool_arr
    order_arr = np.ascontiguousarray(case_order, dtype=np.int64)
    cdef int64_t[::1] order = order_arr
    cdef Py_ssize_t m = pool.shape[0]
    cdef Py_ssize_t n_cases = order.shape[0]
    cdef Py_ssize_t i, j, k
    cdef int64_t c
    cdef double best
    cdef bint skip
    for j in range(n_cases):
        c = order[j]
        skip = False
        for i in range(m):
            if unknown[pool[i], c]:
                skip = True
                break
        if skip:
            continue
        best = scores[pool[0], c]
        for i in range(1, m):
            if scores[pool[i], c] > best:
                best = scores[pool[i], c]
        k = 0
        for i in range(m):
            if scores[pool[i], c] == best:
                pool[k] = pool[i]
                k += 1
        m = k
        if m == 1:
            break
    return pool_arr[:m].copy()


cdef inline int64_t _clamp(int64_t v) nogil:
    if v > REG_MAX:
        return REG_MAX
    if v < REG_MIN:
        return REG_MIN
    return v


cdef inline bint _run(const int32_t[:, ::1] code, const int64_t[::1] inputs,
                      int64_t max_steps, int64_t* out) nogil:
    cdef int64_t regs[N_REGISTERS]
    cdef Py_ssize_t n = code.shape[0]
    cdef Py_ssize_t n_inputs = inputs.shape[0]
    cdef Py_ssize_t i
    cdef Py_ssize_t pc = 0
    cdef int64_t steps = 0
    cdef bint has_output = False
    cdef int64_t output = 0
    cdef int32_t op, a, b, c

    for i in range(N_REGISTERS):
        regs[i] = inputs[i] if i < n_inputs else 0

    while pc < n and steps < max_steps:
        steps += 1
        op = code[pc, 0]
        a = code[pc, 1] & 7
        b = code[pc, 2] & 7
        c = code[pc, 3] & 7
        if op == 0:    # LOAD_INPUT
            regs[a] = inputs[b % n_inputs]
        elif op == 1:  # LOAD_CONST
            regs[a] = b
        elif op == 2:  # ADD
            regs[a] = _clamp(regs[b] + regs[c])
        elif op == 3:  # SUB
            regs[a] = _clamp(regs[b] - regs[c])
        elif op == 4:  # MUL
            regs[a] = _clamp(regs[b] * regs[c])
        elif op == 5:  # DIV (protected, truncating like C)
            regs[a] = 0 if regs[c] == 0 else _clamp(regs[b] / regs[c])
        elif op == 6:  # MOD (protected, C-style remainder)
            regs[a] = 0 if regs[c] == 0 else _clamp(regs[b] % regs[c])
        elif op == 7:  # LT
            regs[a] = 1 if regs[b] < regs[c] else 0
        elif op == 8:  # EQ
            regs[a] = 1 if regs[b] == regs[c] else 0
        elif op == 9:  # IF_SKIP
            if regs[a] == 0:
                pc += 1
        elif op == 10:  # JUMP_FWD
            pc += a
        elif op == 11:  # COPY
            regs[a] = regs[b]
        elif op == 12:  # OUTPUT
            output = regs[a]
            has_output = True
        elif op == 13:  # MAX
            regs[a] = regs[b] if regs[b] > regs[c] else regs[c]
        elif op == 14:  # MIN
            regs[a] = regs[b] if regs[b] < regs[c] else regs[c]
        else:           # HALT and anything unmapped
            break
        pc += 1
    out[0] = output
    return has_output


def run_program(code, inputs, max_steps):
    """See _kernels_py.run_program."""
    code_arr = np.ascontiguousarray(code, dtype=np.int32)
    inputs_arr = np.ascontiguousarray(inputs, dtype=np.int64)
    cdef int64_t output = 0
    cdef bint has_output = _run(code_arr, inputs_arr, max_steps, &output)
    return bool(has_output), int(output)


def run_program_cases(code, case_inputs, expected, max_steps):
    """See _kernels_py.run_program_cases."""
    code_arr = np.ascontiguousarray(code, dtype=np.int32)
    inputs_arr = np.ascontiguousarray(case_inputs, dtype=np.int64)
    expected_arr = np.ascontiguousarray(expected, dtype=np.int64)
    cdef const int32_t[:, ::1] code_v = code_arr
    cdef const int64_t[:, ::1] inputs_v = inputs_arr
    cdef const int64_t[::1] expected_v = expected_arr
    cdef Py_ssize_t m = inputs_v.shape[0]
    passes_arr = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[::1] passes = passes_arr
    cdef Py_ssize_t i
    cdef int64_t output
    cdef int64_t steps = max_steps
    with nogil:
        for i in range(m):
            output = 0
            if _run(code_v, inputs_v[i], steps, &output):
                if output == expected_v[i]:
                    passes[i] = 1
    return passes_arr
