"""The order-12 group behind the Geronimo-Hardin maps and its random walk.

Usage: python3 demos/group_walk.py
"""

from fslab.markov import BLOCK_ORDER, build_gd_ifs, chain_analysis, gh_group, return_counts, t_hat, transition_matrix

group = gh_group()
chain = chain_analysis(transition_matrix(group, BLOCK_ORDER))
print(f"group order {group.order}, walk period {chain.period}, two-step matrix block diagonal: {chain.block_diagonal}")
print("two-step block on the even class:")
for row in chain.R:
    print("   " + "  ".join(f"{str(x):>5}" for x in row))
print(f"R^n is within 1e-12 of the all-1/6 matrix from n = {chain.converged_at}")

rc = return_counts(group, 12)
print("\n n        N_n   N_n/16^n   t_hat(n, 0.82)")
for n, c in enumerate(rc.counts, start=1):
    print(f"{n:2d} {c:12d}   {c / 16**n:.6f}   {t_hat(n, 0.82):.6f}")
print(f"matrix powers agree with enumeration up to n=5: {rc.agree}; 16^n/12 bound holds from n = {rc.N0}")

gd = build_gd_ifs(group)
print(f"\ngraph-directed system: {len(gd.edges)} edges, degrees {set(gd.out_degree)}, distinct offsets {gd.distinct_offsets}")
