"""Lowering pipeline: clustering, symbolic optimization and loop-nest construction."""
from .cluster import Bound, Cluster, lower
from .dse import DseLevel, OptimizedCluster, Temp, count_ops, flop_count, optimize
from .iet import ExprStatement, KernelCallSite, SpaceLoop, TimeLoop, build_iet

__all__ = ["Bound", "Cluster", "lower", "DseLevel", "OptimizedCluster", "Temp", "count_ops",
           "flop_count", "optimize", "ExprStatement", "KernelCallSite", "SpaceLoop",
           "TimeLoop", "build_iet", "Compiled", "build"]


class Compiled:
    """Everything the back ends need from one lowering run."""

    def __init__(self, clusters, optimized, iet, level):
        self.clusters = clusters
        self.optimized = optimized
        self.iet = iet
        self.level = level

    @property
    def flop_count(self):
        return sum(oc.flop_count for oc in self.optimized)


def build(equations, targets, level="basic", time_steps=1, time_order=2):
    """Lower, optimize and wrap ``equations`` in a time loop."""
    clusters = lower(equations, targets)
    optimized = [optimize(c, level) for c in clusters]
    return Compiled(clusters, optimized, build_iet(optimized, time_steps, time_order),
                    DseLevel(level))

