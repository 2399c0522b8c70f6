"""Print analytic alpha-values over a grid of intensities, both phases, constant radius.

    python3 scripts/alpha_table.py --radius 1.0 --lambdas 0.1 0.2 0.3 0.4 0.8
"""

import argparse

from hypvis.analytic import NumericalError, OccupiedEquation, alpha_vacant


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--lambdas", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.4, 0.8])
    args = p.parse_args()
    print("lambda,alpha_vacant,alpha_occupied_density,phi0_density,alpha_occupied_literal")
    for lam in args.lambdas:
        vac = alpha_vacant(lam, args.radius).value
        dens = OccupiedEquation(lam, args.radius, "density")
        lit = OccupiedEquation(lam, args.radius, "literal")
        try:
            lit_alpha = f"{lit.solve().value:.8f}"
        except NumericalError:
            lit_alpha = "none"  # Phi(0) >= 1: no nonnegative root
        print(f"{lam},{vac:.8f},{dens.solve().value:.8f},{dens.phi0():.6f},{lit_alpha}")


if __name__ == "__main__":
    main()
