#!/usr/bin/env python3
# Copyright 2026 The QONN Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Ground-state CI coefficients of H2 in a minimal STO-3G basis.

Two-configuration model: the bonding pair |g g~| and the antibonding pair
|u u~|. With four spin orbitals ordered (g up, g down, u up, u down), the
bonding configuration is |1100> and the antibonding one |0011>.

Writes JSON records {bond_length_angstrom, alpha, beta} where alpha is the
|0011> coefficient and beta the |1100> coefficient, both as [re, im]. Each
record also carries the electronic 2x2 CI matrix (hartree) and the total
energy including nuclear repulsion.
"""

import argparse
import json
import math
import sys

import numpy as np

BOHR_PER_ANGSTROM = 1.8897261254578281

# STO-3G expansion of the hydrogen 1s function (Slater exponent 1.24).
STO3G_EXPONENTS = (3.42525091, 0.62391373, 0.16885540)
STO3G_COEFFS = (0.15432897, 0.53532814, 0.44463454)


def boys0(t):
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))


def primitives():
    """(exponent, normalised coefficient) pairs."""
    return [(a, d * (2.0 * a / math.pi) ** 0.75)
            for a, d in zip(STO3G_EXPONENTS, STO3G_COEFFS)]


def overlap(a, b, r2):
    p = a + b
    return (math.pi / p) ** 1.5 * math.exp(-a * b / p * r2)


def kinetic(a, b, r2):
    p = a + b
    mu = a * b / p
    return mu * (3.0 - 2.0 * mu * r2) * (math.pi / p) ** 1.5 * math.exp(-mu * r2)


def nuclear(a, b, r2, rpc2, charge=1.0):
    p = a + b
    return -2.0 * math.pi / p * charge * math.exp(-a * b / p * r2) * boys0(p * rpc2)


def repulsion(a, b, c, d, rab2, rcd2, rpq2):
    p = a + b
    q = c + d
    pref = 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))
    return pref * math.exp(-a * b / p * rab2 - c * d / q * rcd2) * boys0(p * q / (p + q) * rpq2)


def ao_integrals(r_bohr):
    centers = (0.0, r_bohr)
    prims = primitives()
    s = np.zeros((2, 2))
    h = np.zeros((2, 2))
    eri = np.zeros((2, 2, 2, 2))

    def gauss_center(a, xa, b, xb):
        return (a * xa + b * xb) / (a + b)

    for i in range(2):
        for j in range(2):
            rab2 = (centers[i] - centers[j]) ** 2
            for a, ca in prims:
                for b, cb in prims:
                    c = ca * cb
                    xp = gauss_center(a, centers[i], b, centers[j])
                    s[i, j] += c * overlap(a, b, rab2)
                    h[i, j] += c * kinetic(a, b, rab2)
                    for xc in centers:
                        h[i, j] += c * nuclear(a, b, rab2, (xp - xc) ** 2)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    rab2 = (centers[i] - centers[j]) ** 2
                    rcd2 = (centers[k] - centers[l]) ** 2
                    total = 0.0
                    for a, ca in prims:
                        for b, cb in prims:
                            xp = gauss_center(a, centers[i], b, centers[j])
                            for c, cc in prims:
                                for d, cd in prims:
                                    xq = gauss_center(c, centers[k], d, centers[l])
                                    total += ca * cb * cc * cd * repulsion(
                                        a, b, c, d, rab2, rcd2, (xp - xq) ** 2)
                    eri[i, j, k, l] = total
    return s, h, eri


def ci_matrix(r_bohr):
    """Electronic Hamiltonian on {|1100>, |0011>}, in hartree."""
    s, h, eri = ao_integrals(r_bohr)
    s12 = s[0, 1]
    mo = np.array([[1.0, 1.0], [1.0, -1.0]])
    mo[:, 0] /= math.sqrt(2.0 * (1.0 + s12))
    mo[:, 1] /= math.sqrt(2.0 * (1.0 - s12))
    h_mo = mo.T @ h @ mo
    eri_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", mo, mo, mo, mo, eri)
    return np.array([
        [2.0 * h_mo[0, 0] + eri_mo[0, 0, 0, 0], eri_mo[0, 1, 0, 1]],
        [eri_mo[0, 1, 0, 1], 2.0 * h_mo[1, 1] + eri_mo[1, 1, 1, 1]],
    ])


def ci_ground_state(r_bohr):
    """Returns (total energy in hartree, c_bonding, c_antibonding, CI matrix)."""
    ci = ci_matrix(r_bohr)
    values, vectors = np.linalg.eigh(ci)
    ground = vectors[:, 0]
    if ground[0] < 0.0:
        ground = -ground
    return values[0] + 1.0 / r_bohr, ground[0], ground[1], ci


def records_for(bond_lengths):
    records = []
    for length in bond_lengths:
        energy, c_bond, c_anti, ci = ci_ground_state(length * BOHR_PER_ANGSTROM)
        records.append({
            "bond_length_angstrom": length,
            "alpha": [float(c_anti), 0.0],
            "beta": [float(c_bond), 0.0],
            "energy_hartree": float(energy),
            "ci_matrix_hartree": ci.tolist(),
        })
    return records


def self_test(data_path):
    """Textbook reference point at R = 1.4 bohr, then the shipped file."""
    energy, c_bond, c_anti, _ = ci_ground_state(1.4)
    failures = []
    if abs(energy - (-1.1373)) > 2e-4:
        failures.append(f"energy at 1.4 bohr is {energy:.6f}, expected -1.1373")
    if abs(c_bond - 0.9936) > 5e-4 or abs(c_anti + 0.1127) > 5e-4:
        failures.append(f"coefficients at 1.4 bohr are ({c_bond:.4f}, {c_anti:.4f})")
    if data_path:
        with open(data_path, encoding="utf-8") as fh:
            shipped = json.load(fh)
        fresh = records_for([r["bond_length_angstrom"] for r in shipped])
        for old, new in zip(shipped, fresh):
            for key in ("alpha", "beta"):
                if max(abs(a - b) for a, b in zip(old[key], new[key])) > 1e-12:
                    failures.append(f"{key} at {old['bond_length_angstrom']} A differs from "
                                    "a fresh derivation")
    for f in failures:
        print("FAIL:", f)
    return 1 if failures else 0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bond-lengths", type=float, nargs="+",
                        default=[0.5, 1.0, 1.5, 2.0], help="in angstrom")
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")
    parser.add_argument("--self-test", nargs="?", const="", default=None, metavar="DATA",
                        help="check a reference point and, if given, a shipped data file")
    args = parser.parse_args()

    if args.self_test is not None:
        return self_test(args.self_test)
    records = records_for(args.bond_lengths)
    text = json.dumps(records, indent=2) + "\n"
    if args.out == "-":
        print(text, end="")
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
