"""Star products of the coordinate functionals on the quotient, and their Poisson limit."""

from qhverify import starprod
from qhverify.qdouble import CONSISTENT, format_key, load_default


def main(order=2):
    dp = load_default("2")
    alg = dp.algebra(order)
    cd = starprod.CosetDecomposition(alg, dp.beta(CONSISTENT))
    sp = starprod.StarProduct(dp, cd, dp.twist(CONSISTENT, order))
    coords = [alg.mono(g) for g in starprod.C_GENS]
    fmt = alg.field.to_str
    for i in coords:
        for j in coords:
            prod = sp.star(starprod.Functional.delta(alg, i), starprod.Functional.delta(alg, j), 2)
            terms = ", ".join(
                f"{format_key(alg, (m,))}: [{' '.join(fmt(c) for c in s)}]" for m, s in prod.values
            )
            print(f"d[{format_key(alg, (i,))}] * d[{format_key(alg, (j,))}] = {{{terms}}}")
    print()
    for i in coords:
        for j in coords:
            if i < j:
                bracket = {
                    format_key(alg, (m,)): fmt(starprod.poisson_limit(sp, i, j, m)[1])
                    for m in starprod.c_monomials(alg, 2)
                    if starprod.poisson_limit(sp, i, j, m)[1]
                }
                print(f"{{{format_key(alg, (i,))}, {format_key(alg, (j,))}}} -> {bracket}")


if __name__ == "__main__":
    main()
