"""Regenerate the FCIDUMP fixtures and their reference energies.

Requires pyscf. Run from the repository root:

    python3 tools/gen_fixtures.py

Writes fixtures/*.fcidump and fixtures/reference.json. The Rust test
suites only read these files; pyscf is never needed at test time.
"""
import json
import os

import numpy as np
from pyscf import ao2mo, fci, gto, mcscf, scf
from pyscf.tools import fcidump

OUT = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fix_signs(mo):
    # largest-magnitude AO coefficient positive, so neighbouring geometries
    # of a scan share a consistent orbital phase
    mo = mo.copy()
    for k in range(mo.shape[1]):
        i = np.argmax(np.abs(mo[:, k]))
        if mo[i, k] < 0:
            mo[:, k] *= -1
    return mo


def dump(name, mol, mo, mf):
    h1 = mo.T @ mf.get_hcore() @ mo
    eri = ao2mo.full(mol, mo, compact=False).reshape([mo.shape[1]] * 4)
    path = os.path.join(OUT, name + ".fcidump")
    fcidump.from_integrals(
        path, h1, ao2mo.restore(8, eri, mo.shape[1]), mo.shape[1],
        mol.nelectron, mol.energy_nuc(), ms=mol.spin, tol=1e-14,
        float_format=" %.17e",
    )
    return path


def chain(n, r, basis):
    atoms = [["H", (0.0, 0.0, i * r)] for i in range(n)]
    return gto.M(atom=atoms, basis=basis, unit="Angstrom", verbose=0)


def closed_shell(name, mol, ncas, nelecas, extra=None):
    mf = scf.RHF(mol).run(conv_tol=1e-12)
    mf.mo_coeff = fix_signs(mf.mo_coeff)
    dump(name, mol, mf.mo_coeff, mf)
    rec = {
        "file": name + ".fcidump",
        "norb": int(mol.nao),
        "nelec": int(mol.nelectron),
        "e_hf": float(mf.e_tot),
        "e_fci": float(fci.FCI(mf).kernel()[0]),
    }
    if ncas is not None:
        ncore = (mol.nelectron - nelecas) // 2
        ci = mcscf.CASCI(mf, ncas, nelecas).run()
        mc = mcscf.CASSCF(mf, ncas, nelecas)
        mc.conv_tol = 1e-12
        mc.conv_tol_grad = 1e-7
        mc.run()
        rec.update(
            ncore=int(ncore), nact=int(ncas), nelec_act=int(nelecas),
            e_casci=float(ci.e_tot), e_casscf=float(mc.e_tot),
        )
    if extra:
        rec.update(extra)
    return rec, mf


def main():
    os.makedirs(OUT, exist_ok=True)
    ref = {}

    ref["h2_sto3g"], _ = closed_shell("h2_sto3g", chain(2, 0.74, "sto-3g"), 2, 2)
    ref["h4_sto3g"], _ = closed_shell("h4_sto3g", chain(4, 1.5, "sto-3g"), 4, 4)
    ref["h4_631g"], _ = closed_shell("h4_631g", chain(4, 1.5, "6-31g"), 4, 4)
    lih = gto.M(atom="Li 0 0 0; H 0 0 1.6", basis="sto-3g", verbose=0)
    ref["lih_sto3g"], _ = closed_shell("lih_sto3g", lih, 4, 4)

    # stretched H2: near-degenerate singlet/triplet pair for state averaging
    mol = chain(2, 2.5, "6-31g")
    rec, mf = closed_shell("h2_631g_stretched", mol, 2, 2)
    mc = mcscf.CASSCF(mf, 2, 2)
    s0 = fci.direct_spin1.FCI(mol)
    s0.spin = 0
    s0 = fci.addons.fix_spin(s0, ss=0)
    s1 = fci.direct_spin1.FCI(mol)
    s1.spin = 2
    mcscf.state_average_mix_(mc, [s0, s1], [0.5, 0.5])
    mc.conv_tol = 1e-12
    mc.conv_tol_grad = 1e-7
    mc.run()
    rec["e_sa_casscf"] = float(mc.e_tot)
    rec["e_sa_states"] = [float(e) for e in mc.e_states]
    ref["h2_631g_stretched"] = rec

    scan = []
    for k, r in enumerate(np.arange(0.60, 0.901, 0.05)):
        name = "h2_631g_pec_%d" % k
        rec, _ = closed_shell(name, chain(2, float(r), "6-31g"), 2, 2)
        rec["r"] = round(float(r), 4)
        scan.append(rec)
    ref["h2_631g_pec"] = scan

    with open(os.path.join(OUT, "reference.json"), "w") as f:
        json.dump(ref, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
