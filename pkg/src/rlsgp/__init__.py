"""RLS-GP with HVL-Prime mutation on AND_n over {AND, OR}, plus drift-analysis tools."""
from .engine import (LOCAL_OPTIMA, Mode, RunConfig, RunResult, Termination,
                     construct_theorem1_tree, is_absorbing, is_trapped, run, step)
from .fitness import (conjunction_ctt_error, ctt_error, exact_generalisation_error,
                      sample_rows, sampled_error)
from .tree import AND, OR, FunctionKind, Leaf, Node, parse, serialize
from .variation import Deletion, Op, enumerate_neighbors, hvl_prime

__version__ = "0.1.0"
