"""
How a chain gets cut into overlapping segments
==============================================

A searchable chain is a sequence of blocks, each contributing a few
hyperparameter dimensions. Segments grow block by block until they hold
enough dimensions, then the next segment restarts one fifth of the way
back so neighbors share a block or two. Those shared dims are later
negotiated between the two segments that both price them.
"""

from chaincoop.decomposition import exclusive_decompose, sod_decompose
from chaincoop.problems import PipelineChain

problem = PipelineChain(n_blocks=10)
print(f"chain: {problem.layout.n_blocks} blocks, {problem.layout.total_dims} dims")

# threshold 18 over 3-dim blocks: segments of 6 blocks, stepping back 2
plan = sod_decompose(problem.layout, epsilon=18)
print(f"\noverlapping plan, threshold {plan.epsilon}:")
for seg in plan.segments:
    print(
        f"  segment {seg.index}: blocks {seg.first_block}..{seg.last_block} "
        f"({seg.dims.size} dims)"
    )
for part in plan.overlaps:
    print(f"  shared blocks {part.shared_blocks}: {part.com.size} negotiated dims")

# the ablation that drops micro cooperation uses disjoint segments instead
excl = exclusive_decompose(problem.layout, epsilon=18)
print("\nexclusive plan for comparison:")
for seg in excl.segments:
    print(f"  segment {seg.index}: blocks {seg.first_block}..{seg.last_block}")

# each segment's unshared dims are optimized on its own; the rest is
# negotiated with the downstream neighbor
print("\nper-segment split of dim ownership:")
for seg in plan.segments:
    pec = plan.peculiar_dims(seg.index)
    print(f"  segment {seg.index}: {pec.size} peculiar of {seg.dims.size} total")
