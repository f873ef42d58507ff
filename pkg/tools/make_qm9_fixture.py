"""Regenerate the bundled 97-molecule fixture in ``src/qlustering/data/qm9_subset``.

Molecules are small C/N/O/F species with 2-5 heavy atoms, the size range
of a SID fingerprint of length 10. Geometries come from RDKit ETKDG
embedding followed by MMFF94 optimization. Descriptors are computed from
those geometries (rotational constants from the principal moments of
inertia, in GHz; A = 0 for linear molecules) or from RDKit's empirical
models. They stand in for the QM9 property columns and are not DFT values.

Needs RDKit (``pip install rdkit``); the library itself does not.

    python tools/make_qm9_fixture.py
"""

import sys
from pathlib import Path

import numpy as np
from rdkit import Chem
from rdkit.Chem import AllChem, Crippen, Descriptors, Descriptors3D, rdMolDescriptors

OUT = Path(__file__).resolve().parents[1] / "src" / "qlustering" / "data" / "qm9_subset"
N_MOLECULES = 97
SEED = 20240601
GHZ_AMU_A2 = 505.379009  # h / (8 pi^2) in GHz * amu * Angstrom^2
DEBYE_PER_E_A = 4.80320

SMILES = """
CC C=C C#C CO C=O CN C=N C#N CF OO NN NO
CCC CC=C CC#C C=C=C CCO COC CC=O CCN CNC CC#N C1CC1 C1CO1 C1CN1 OC=O NC=O CCF
C=CO NC#N OC#N C1=CC1 OCO NCO FCF FC=O C=CF CC(F) OCF N=CN CN=O O=CO
CCCC CC(C)C CC=CC C=CC=C CC#CC C#CC#C CCCO CC(C)O CCOC CCC=O CC(C)=O CC(=O)O
COC=O CC(N)=O C1CCC1 CC1CC1 OC1CC1 C1CCO1 C1CCN1 OCCO NCCO CCC#N N#CC#N O=CC=O
C1=CCC1 CC1CO1 C#CCO C#CC=O CCCN CC(C)N CCNC CN(C)C NC(=O)N OC(=O)O FCCF CC(F)F
C1CC1F C=CC#N C=CC=O N#CC=O OCC#N NCC#N C1OCO1 O=C1CC1 CC(O)=O
CCCCC CC(C)CC CC(C)(C)C CCCCO CCC(C)O CC(C)CO CC(C)(C)O CCOCC CCCOC CC(C)OC
CCCC=O CC(C)C=O CCC(C)=O CC(=O)OC CCC(=O)O C1CCCC1 C1CCOC1 C1CCNC1 CC1CCC1
CC1CC1C C1CC11CC1 c1ccoc1 c1cc[nH]c1 c1cnoc1 c1c[nH]cn1 c1cn[nH]c1 c1cocn1
CC=CC=C C=CCC=C CCCC#N NCCCO OCCCO CC(O)CO OCC(=O)O CC(=O)CO CC(C)C#N C#CCCC
CCC#CC CC(=O)C=O OC1CCC1 NC1CCC1 CC1(C)CC1 O=C1CCC1 O=C1CCO1 C1COCO1 CN1CCC1
""".split()


def embed(smi, seed):
    mol = Chem.AddHs(Chem.MolFromSmiles(smi))
    params = AllChem.ETKDGv3()
    params.randomSeed = seed
    if AllChem.EmbedMolecule(mol, params) != 0:
        return None
    props = AllChem.MMFFGetMoleculeProperties(mol)
    if props is None:
        return None
    ff = AllChem.MMFFGetMoleculeForceField(mol, props)
    ff.Minimize(maxIts=5000)
    return mol, ff.CalcEnergy()


def rotational_constants(mol):
    conf = mol.GetConformer()
    pos = np.array(conf.GetPositions())
    mass = np.array([a.GetMass() for a in mol.GetAtoms()])
    com = (mass[:, None] * pos).sum(0) / mass.sum()
    r = pos - com
    inertia = np.einsum("i,ij,ik->jk", mass, r, r)
    inertia = np.trace(inertia) * np.eye(3) - inertia
    moments = np.sort(np.linalg.eigvalsh(inertia))
    consts = [0.0 if m < 1e-3 else GHZ_AMU_A2 / m for m in moments]
    return consts, r


def dipole(mol, centred):
    AllChem.ComputeGasteigerCharges(mol)
    q = np.array([a.GetDoubleProp("_GasteigerCharge") for a in mol.GetAtoms()])
    return float(np.linalg.norm((q[:, None] * centred).sum(0)) * DEBYE_PER_E_A)


def descriptors(mol, energy):
    (a, b, c), centred = rotational_constants(mol)
    z = np.array([at.GetAtomicNum() for at in mol.GetAtoms()])
    return {
        "A": a,
        "B": b,
        "C": c,
        "dipole": dipole(mol, centred),
        "molar_refractivity": Crippen.MolMR(mol),
        "spatial_extent": float((z * (centred**2).sum(1)).sum()),
        "mmff_energy": float(energy),
        "mol_weight": Descriptors.MolWt(mol),
        "tpsa": rdMolDescriptors.CalcTPSA(mol),
        "logp": Crippen.MolLogP(mol),
        "asphericity": Descriptors3D.Asphericity(mol),
        "eccentricity": Descriptors3D.Eccentricity(mol),
        "npr1": Descriptors3D.NPR1(mol),
        "radius_of_gyration": Descriptors3D.RadiusOfGyration(mol),
    }


def xyz_text(name, smi, mol, desc):
    conf = mol.GetConformer()
    lines = [str(mol.GetNumAtoms())]
    kv = " ".join(f"{k}={v:.8g}" for k, v in desc.items())
    lines.append(f'name={name} smiles="{smi}" {kv}')
    for atom, p in zip(mol.GetAtoms(), conf.GetPositions()):
        lines.append(f"{atom.GetSymbol():<2s} {p[0]: .6f} {p[1]: .6f} {p[2]: .6f}")
    return "\n".join(lines) + "\n"


def main():
    rng = np.random.default_rng(SEED)
    unique = list(dict.fromkeys(Chem.MolToSmiles(Chem.MolFromSmiles(s)) for s in SMILES))
    usable = [s for s in unique if 2 <= Chem.MolFromSmiles(s).GetNumHeavyAtoms() <= 5]
    order = rng.permutation(len(usable))
    chosen = []
    for k in order:
        smi = usable[k]
        out = embed(smi, SEED)
        if out is None:
            print(f"skip {smi}: embedding failed", file=sys.stderr)
            continue
        chosen.append((smi, *out))
        if len(chosen) == N_MOLECULES:
            break
    if len(chosen) < N_MOLECULES:
        sys.exit(f"only {len(chosen)} usable molecules")
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.xyz"):
        old.unlink()
    for i, (smi, mol, energy) in enumerate(chosen, start=1):
        name = f"mol_{i:03d}"
        (OUT / f"{name}.xyz").write_text(xyz_text(name, smi, mol, descriptors(mol, energy)))
    print(f"wrote {len(chosen)} molecules to {OUT}")


if __name__ == "__main__":
    main()
