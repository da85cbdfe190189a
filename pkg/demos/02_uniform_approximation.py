"""Approximate smooth copulas uniformly by permutation copulas.

The pipeline extracts cell masses on an m-grid, rounds them to exact
rationals with every axis slab summing to 1/m, splits each slab into one
interval per cell, and lays the cell mass on a diagonal of the resulting
sub-box.  The uniform error is certified to be at most (2n+1)/m, and the
output is itself an extreme copula (its support is a graph over axis 0).
"""

import argparse

import extremal_copulas as xc

parser = argparse.ArgumentParser()
parser.add_argument("--plot", action="store_true")
args = parser.parse_args()

targets = {"independence": xc.Independence(2), "FGM(1)": xc.FGM(1)}

print(f"{'copula':>14} {'m':>4} {'q':>8} {'rho':>12} {'lattice dinf':>14} "
      f"{'bound':>8}")
results = {}
for name, model in targets.items():
    for m in (4, 8, 16, 32):
        res = xc.approximate(model, m)
        results[(name, m)] = res
        print(f"{name:>14} {m:>4} {res.q:>8} {res.rho:>12.3e} "
              f"{res.lattice_dinf:>14.5f} {res.certified_bound:>8.4f}")

print("\nEvery approximant is an exact copula and carries a sufficient-")
print("condition certificate (its support is covered by graph slabs):")
res = results[("FGM(1)", 16)]
print("  validate tol=0:", xc.validate_copula_measure(res.measure, 16).ok)
print("  cover certificate:", xc.functional_cover_check(res.measure, 8).covered)

print("\nThe comonotone copula is reproduced without error (its diagonal")
print("cells already form a permutation copula):")
print("  lattice dinf:", xc.approximate(xc.Comonotone(2), 8).lattice_dinf)

if args.plot:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    for ax, m in zip(axes, (4, 8, 16)):
        sm = results[("FGM(1)", m)].measure
        for seg in sm.segments:
            ax.plot([seg.a[0], seg.b[0]], [seg.a[1], seg.b[1]], "b-", lw=1)
        ax.set_title(f"FGM(1) approximant, m={m}")
        ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig("demo02_approximants.png", dpi=120)
    print("\nwrote demo02_approximants.png")
