"""Independent scalar oracle for the two-cell electrostatic energy.

Written before the package physics engine, against the energy expression
directly: E = sum over the 4x4 dot pairs of q_n * q_m / (4 pi eps0 epsr r).
Kept deliberately primitive (explicit charge lists, plain loops, no shared
code with the package) so the test suite can cross-check the engine against
an implementation with no common ancestry.
"""

import math

E_CHARGE = 1.602176634e-19  # C
EPS0 = 8.8541878128e-12     # F/m
NM = 1e-9


def dot_sites(orientation, cx_nm, cy_nm, d_nm):
    """Four dot coordinates (nm). Standard: corners at (+-d, +-d).
    Rotated: the same square turned 45 degrees: (+-d*sqrt2, 0), (0, +-d*sqrt2).
    Order: the P=+1 diagonal first, then the P=-1 diagonal."""
    if orientation == "standard":
        plus = [(cx_nm + d_nm, cy_nm - d_nm), (cx_nm - d_nm, cy_nm + d_nm)]
        minus = [(cx_nm + d_nm, cy_nm + d_nm), (cx_nm - d_nm, cy_nm - d_nm)]
    elif orientation == "rotated":
        s = d_nm * math.sqrt(2.0)
        plus = [(cx_nm + s, cy_nm), (cx_nm - s, cy_nm)]
        minus = [(cx_nm, cy_nm + s), (cx_nm, cy_nm - s)]
    else:
        raise ValueError(orientation)
    return plus, minus


def charge_list(orientation, cx_nm, cy_nm, d_nm, polarization):
    """[(x_nm, y_nm, charge_C)] for one cell: two electron dots at -e/2 net,
    two empty dots at +e/2 (each dot carries an e/2 neutralizing background)."""
    plus, minus = dot_sites(orientation, cx_nm, cy_nm, d_nm)
    occupied, empty = (plus, minus) if polarization > 0 else (minus, plus)
    out = []
    for (x, y) in occupied:
        out.append((x, y, -E_CHARGE / 2.0))
    for (x, y) in empty:
        out.append((x, y, +E_CHARGE / 2.0))
    return out


def pair_energy(cfg_a, cfg_b, epsilon_r):
    """Direct 16-term double sum, joules."""
    k = 1.0 / (4.0 * math.pi * EPS0 * epsilon_r)
    total = 0.0
    for (xa, ya, qa) in cfg_a:
        for (xb, yb, qb) in cfg_b:
            r = math.hypot(xa - xb, ya - yb) * NM
            total += k * qa * qb / r
    return total


def energy(orient_a, pos_a_nm, pa, orient_b, pos_b_nm, pb,
           d_nm=4.5, epsilon_r=12.9):
    ca = charge_list(orient_a, pos_a_nm[0], pos_a_nm[1], d_nm, pa)
    cb = charge_list(orient_b, pos_b_nm[0], pos_b_nm[1], d_nm, pb)
    return pair_energy(ca, cb, epsilon_r)


def kink(orient_a, pos_a_nm, orient_b, pos_b_nm, d_nm=4.5, epsilon_r=12.9):
    """E(opposite polarizations) - E(same polarizations)."""
    e_same = energy(orient_a, pos_a_nm, +1, orient_b, pos_b_nm, +1,
                    d_nm=d_nm, epsilon_r=epsilon_r)
    e_opp = energy(orient_a, pos_a_nm, +1, orient_b, pos_b_nm, -1,
                   d_nm=d_nm, epsilon_r=epsilon_r)
    return e_opp - e_same


if __name__ == "__main__":
    # Survey the coupling landscape at the default 20 nm pitch.
    p = 20.0
    cases = [
        ("std-std 1 pitch orthogonal", "standard", (0, 0), "standard", (p, 0)),
        ("std-std 1 pitch diagonal", "standard", (0, 0), "standard", (p, p)),
        ("std-std 2 pitch inline", "standard", (0, 0), "standard", (2 * p, 0)),
        ("std-std 2 pitch diagonal", "standard", (0, 0), "standard", (2 * p, 2 * p)),
        ("std-std knight (2,1)", "standard", (0, 0), "standard", (2 * p, p)),
        ("std-std 3 pitch inline", "standard", (0, 0), "standard", (3 * p, 0)),
        ("std-rot 1 pitch orthogonal", "standard", (0, 0), "rotated", (p, 0)),
        ("std-rot 1 pitch diagonal", "standard", (0, 0), "rotated", (p, p)),
        ("std-rot knight (2,1)", "standard", (0, 0), "rotated", (2 * p, p)),
        ("rot-rot 1 pitch orthogonal", "rotated", (0, 0), "rotated", (p, 0)),
        ("rot-rot 1 pitch vertical", "rotated", (0, 0), "rotated", (0, p)),
        ("rot-rot 2 pitch inline", "rotated", (0, 0), "rotated", (2 * p, 0)),
        ("rot-rot 1 pitch diagonal", "rotated", (0, 0), "rotated", (p, p)),
    ]
    ref = kink("standard", (0, 0), "standard", (p, 0))
    print("reference std-std orthogonal kink: %.6e J" % ref)
    for name, oa, a, ob, b in cases:
        kk = kink(oa, a, ob, b)
        e_same = energy(oa, a, +1, ob, b, +1)
        print("%-28s kink=% .6e J  (%.4f of ref)   E(same)=% .6e J"
              % (name, kk, kk / ref, e_same))
