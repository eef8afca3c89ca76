"""Kernel backend selection.

The compiled extension is used when available; set PHYLEX_PURE_PYTHON=1
to force the pure-Python fallback. Both backends are observably
identical (tests/test_kernels.py enforces this), so the choice only
affects speed.
"""

import os

from . import _kernels_py

if os.environ.get("PHYLEX_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_c as _impl
    except ImportError:
        _impl = _kernels_py

lexicase_filter = _impl.lexicase_filter
run_program = _impl.run_program
run_program_cases = _impl.run_program_cases
backend_name = _impl.backend_name

# Instruction-set constants live with the reference implementation.
N_REGISTERS = _kernels_py.N_REGISTERS
N_OPCODES = _kernels_py.N_OPCODES
