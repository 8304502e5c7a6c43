"""OPS back end: macro rewriting, kernel outlining and program emission."""
from .kernel import KernelPrinter, OpsKernel, kernel_source, outline_kernel
from .printer import CPrinter, literal
from .program import OpsProgram, ProgramMeta, emit_program, float_literal, generate
from .reference import ReferencePrinter, emit_reference_c
from .translate import (AccessMode, ArgRegistry, OpsAccess, OpsArg, make_ops_ast,
                        name_time_access)

__all__ = ["KernelPrinter", "OpsKernel", "kernel_source", "outline_kernel", "CPrinter",
           "literal", "OpsProgram", "ProgramMeta", "emit_program", "float_literal", "generate",
           "ReferencePrinter", "emit_reference_c", "AccessMode", "ArgRegistry", "OpsAccess",
           "OpsArg", "make_ops_ast", "name_time_access"]
