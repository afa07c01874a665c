from ._core import (
    DhisqError,
    assemble,
    bench,
    canonical,
    compile,
    disassemble,
    dynamic_circuit,
    fig10,
    long_range_cnot,
    run,
)

__all__ = [
    "DhisqError",
    "assemble",
    "bench",
    "canonical",
    "compile",
    "disassemble",
    "dynamic_circuit",
    "fig10",
    "long_range_cnot",
    "run",
]
