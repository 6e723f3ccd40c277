// Builds tests/fixtures/smiles_corpus.tsv for the molgraf crate by running
// a curated SMILES list through OpenChemLib and dumping what it perceives:
// per-atom element, aromatic flag, implicit hydrogen count and formal
// charge, plus the bond list with aromatic bonds marked "ar".
//
// The corpus stays inside the subset the crate's parser accepts: organic
// subset elements, written aromaticity (no Kekule-form aromatic rings), no
// stereochemistry, no isotopes, no dot-separated fragments, and no atoms
// past their default valence (so no sulfones, sulfoxides or phosphates).
// The script cross-checks every entry and refuses to write the fixture if
// the toolkit's aromaticity perception disagrees with the written form,
// which keeps the fixture an honest oracle rather than a mirror of the
// parser under test.
//
// Usage: npm install && npm run generate

"use strict";

const fs = require("fs");
const path = require("path");
const OCL = require("openchemlib");

const MOLECULES = [
  // Alkanes, branched and straight.
  "C",
  "CC",
  "CCC",
  "CCCC",
  "CC(C)C",
  "CC(C)(C)C",
  "CCCCC",
  "CC(C)CC",
  "CCCCCC",
  "CC(C)C(C)C",
  "CCC(C)(C)CC",
  "CCCCCCC",
  "CC(C)(C)CC(C)C",
  "CCCCCCCC",
  "CC(CC)CC",
  // Cycloalkanes.
  "C1CC1",
  "C1CCC1",
  "C1CCCC1",
  "C1CCCCC1",
  "C1CCCCCC1",
  "CC1CC1",
  "CC1CCC1C",
  "C1CC1C1CC1",
  "CC1(C)CCCCC1",
  "C1CC2CCC1CC2",
  // Alkenes and alkynes.
  "C=C",
  "CC=C",
  "C=CC=C",
  "CC=CC",
  "CC(C)=C",
  "C=C(C)C",
  "C#C",
  "CC#C",
  "CC#CC",
  "C#CC#C",
  "C1=CCCCC1",
  "C1=CCCC1",
  "CC=C(C)C",
  "C=CCC#N",
  "C=CCO",
  // Alcohols and ethers.
  "CO",
  "CCO",
  "OCC(O)CO",
  "CC(C)O",
  "CC(C)(C)O",
  "COC",
  "CCOCC",
  "C1CCOC1",
  "C1CCOCC1",
  "OC1CCCCC1",
  "COCCOC",
  "CC(O)CO",
  "OCCO",
  "COC(C)C",
  "CCCO",
  // Amines.
  "CN",
  "CCN",
  "CNC",
  "CN(C)C",
  "NCCN",
  "CC(C)N",
  "NC1CCCCC1",
  "C1CCNC1",
  "C1CCNCC1",
  "CCN(CC)CC",
  "NCCO",
  "CNCC",
  "C1CN1",
  "CN1CCC1",
  // Carbonyls, acids, esters, amides.
  "C=O",
  "CC=O",
  "CCC=O",
  "CC(C)=O",
  "O=C(C)CC",
  "CC(=O)O",
  "C(=O)O",
  "OC(=O)CC",
  "CC(=O)OC",
  "CC(=O)OCC",
  "C(=O)N",
  "CC(=O)N",
  "CC(=O)NC",
  "CC(=O)N(C)C",
  "O=C1CCCCC1",
  "O=C1CCCC1",
  "CC(=O)CC(=O)C",
  "OC(=O)C(=O)O",
  "NC(=O)CC",
  "OC(=O)CCC(=O)O",
  "CCOC(=O)C",
  "CC(N)C(=O)O",
  // Imines and nitriles.
  "C#N",
  "CC#N",
  "N#CC#N",
  "CCC#N",
  "NC=O",
  "CC=N",
  "CC=NC",
  // Halides.
  "CF",
  "CCl",
  "CBr",
  "CI",
  "FCF",
  "ClCCl",
  "FC(F)F",
  "CC(F)(F)F",
  "ClC(Cl)(Cl)Cl",
  "BrCCBr",
  "CCCl",
  "FCCF",
  "FC(F)(F)Cl",
  "ICCI",
  // Thiols, sulfides, disulfides.
  "CS",
  "CCS",
  "CSC",
  "CSSC",
  "SC1CCCCC1",
  "C1CCSC1",
  "C1CCSCC1",
  "CCSC",
  // Phosphines.
  "CP",
  "CPC",
  "CP(C)C",
  "PCC",
  // Benzene derivatives.
  "c1ccccc1",
  "Cc1ccccc1",
  "CCc1ccccc1",
  "CC(C)c1ccccc1",
  "Oc1ccccc1",
  "COc1ccccc1",
  "Nc1ccccc1",
  "CNc1ccccc1",
  "CN(C)c1ccccc1",
  "Fc1ccccc1",
  "Clc1ccccc1",
  "Brc1ccccc1",
  "Ic1ccccc1",
  "Cc1ccccc1C",
  "Cc1ccc(C)cc1",
  "Cc1cccc(C)c1",
  "Oc1ccc(O)cc1",
  "Cc1ccc(O)cc1",
  "Nc1ccc(N)cc1",
  "Clc1ccc(Cl)cc1",
  "O=Cc1ccccc1",
  "CC(=O)c1ccccc1",
  "OC(=O)c1ccccc1",
  "N#Cc1ccccc1",
  "C=Cc1ccccc1",
  "CC(C)c1ccc(C)cc1",
  "OCc1ccccc1",
  "NC(=O)c1ccccc1",
  "OC(=O)c1ccccc1O",
  "Oc1ccccc1C=O",
  "CSc1ccccc1",
  "CCOc1ccccc1",
  // Polycyclic aromatics, explicit single bond between rings.
  "c1ccc2ccccc2c1",
  "Cc1cccc2ccccc12",
  "Oc1ccc2ccccc2c1",
  "c1ccc2cc3ccccc3cc2c1",
  "c1ccccc1-c1ccccc1",
  "Cc1ccccc1-c1ccccc1",
  // Nitrogen heteroaromatics.
  "c1ccncc1",
  "Cc1ccccn1",
  "Cc1ccncc1",
  "Nc1ccncc1",
  "Clc1ccncc1",
  "CCc1ccncc1",
  "c1ccnnc1",
  "c1cncnc1",
  "c1cnccn1",
  "c1ncncn1",
  "Cc1ncncn1",
  "c1cc[nH]c1",
  "Cc1ccc[nH]1",
  "Cn1cccc1",
  "c1nc[nH]c1",
  "c1cn[nH]c1",
  "Cc1cncnc1",
  "Nc1ncncn1",
  "c1ccc2ncccc2c1",
  "c1ccc2cnccc2c1",
  "c1ccc2[nH]ccc2c1",
  "Cc1cc2ccccc2[nH]1",
  // Oxygen and sulfur heteroaromatics.
  "c1ccoc1",
  "Cc1ccco1",
  "CCc1ccco1",
  "c1ccsc1",
  "Cc1cccs1",
  "c1cnco1",
  "c1cncs1",
  "c1ccc2occc2c1",
  "c1ccc2sccc2c1",
  "O=Cc1ccco1",
  "O=Cc1cccs1",
  "Cc1occc1C",
  // Charged species.
  "[NH4+]",
  "C[NH3+]",
  "CC[NH3+]",
  "C[N+](C)(C)C",
  "CC[N+](C)(C)C",
  "[O-]C(=O)C",
  "CCC(=O)[O-]",
  "C[N+](=O)[O-]",
  "[O-][N+](=O)c1ccccc1",
  "[NH3+]CC([O-])=O",
  "[O-]c1ccccc1",
  "[NH3+]CCC([O-])=O",
  // Larger mixed molecules.
  "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
  "CC(=O)Oc1ccccc1C(=O)O",
  "CC(=O)Nc1ccc(O)cc1",
  "NCCc1ccc(O)c(O)c1",
  "NCCc1c[nH]c2ccccc12",
  "COc1ccc(CC=O)cc1",
  "OCC1CCCCC1",
  "CC1CCC(C)CC1O",
  "NCCc1ccccc1",
  "COc1cccc(OC)c1",
  "CC(O)c1ccccc1",
  "CCOC(=O)c1ccccc1",
  "CN(C)CCc1ccccc1",
  "OC(=O)c1ccc(N)cc1",
  "OC(=O)c1ccc(O)cc1",
  "Clc1ccc(CC#N)cc1",
  "O=C1CCCN1",
  "O=C1CCCCN1",
  "CC1CCCO1",
  "C1COCCO1",
  "C1CSCCS1",
  "C1CNCCN1",
  "CC(=O)C1CCCCC1",
  "FC(F)(F)c1ccccc1",
  "CC(C)(C)c1ccc(O)cc1",
  "Cc1ccc(S)cc1",
  "CCCCCCBr",
  "OCCCCO",
  "NC(=O)C1CCCCC1",
  "CC(C)=CCO",
  // Ring closures written with the percent form.
  "C%10CCCCC%10",
  "c%11ccccc%11",
  "C%25(CC)CCCC%25",
];

// Atom positions written lowercase in the input string. A small scan over
// the SMILES grammar: bracket atoms read their leading element symbol,
// two-letter halogens consume both letters, everything else is one token.
function writtenAromaticAtoms(smiles) {
  const aromatic = [];
  let atomIndex = 0;
  let i = 0;
  while (i < smiles.length) {
    const c = smiles[i];
    if (c === "[") {
      const close = smiles.indexOf("]", i);
      if (close < 0) throw new Error(`unterminated bracket in ${smiles}`);
      let j = i + 1;
      while (j < close && /[0-9]/.test(smiles[j])) j++; // isotope digits
      aromatic.push(/[a-z]/.test(smiles[j]));
      atomIndex++;
      i = close + 1;
    } else if (c === "C" && smiles[i + 1] === "l") {
      aromatic.push(false);
      atomIndex++;
      i += 2;
    } else if (c === "B" && smiles[i + 1] === "r") {
      aromatic.push(false);
      atomIndex++;
      i += 2;
    } else if (/[A-Z]/.test(c)) {
      aromatic.push(false);
      atomIndex++;
      i++;
    } else if (/[bcnops]/.test(c)) {
      aromatic.push(true);
      atomIndex++;
      i++;
    } else {
      i++; // bonds, digits, branches, percent closures
    }
  }
  return aromatic;
}

function dump(smiles) {
  const mol = OCL.Molecule.fromSmiles(smiles);
  mol.ensureHelperArrays(OCL.Molecule.cHelperRings);
  const n = mol.getAllAtoms();

  const written = writtenAromaticAtoms(smiles);
  if (written.length !== n) {
    throw new Error(
      `${smiles}: toolkit produced ${n} atoms, input writes ${written.length}`
    );
  }

  const atoms = [];
  for (let i = 0; i < n; i++) {
    const arom = mol.isAromaticAtom(i);
    if (arom !== written[i]) {
      throw new Error(
        `${smiles}: atom ${i} written ${written[i] ? "aromatic" : "aliphatic"} but toolkit perceives ${arom ? "aromatic" : "aliphatic"}`
      );
    }
    atoms.push(
      [
        mol.getAtomLabel(i),
        arom ? 1 : 0,
        mol.getImplicitHydrogens(i),
        mol.getAtomCharge(i),
      ].join(",")
    );
  }

  const bonds = [];
  for (let b = 0; b < mol.getAllBonds(); b++) {
    let x = mol.getBondAtom(0, b);
    let y = mol.getBondAtom(1, b);
    if (x > y) [x, y] = [y, x];
    const order = mol.isAromaticBond(b) ? "ar" : String(mol.getBondOrder(b));
    bonds.push({ x, y, order });
  }
  bonds.sort((p, q) => p.x - q.x || p.y - q.y);

  return [
    smiles,
    atoms.join(";"),
    bonds.map((b) => `${b.x},${b.y},${b.order}`).join(";"),
  ].join("\t");
}

function main() {
  const seen = new Set();
  const rows = [];
  const failures = [];
  for (const smiles of MOLECULES) {
    if (seen.has(smiles)) {
      failures.push(`${smiles}: duplicate entry`);
      continue;
    }
    seen.add(smiles);
    try {
      rows.push(dump(smiles));
    } catch (err) {
      failures.push(String(err.message || err));
    }
  }

  if (failures.length > 0) {
    console.error(`${failures.length} entries failed the oracle cross-check:`);
    for (const f of failures) console.error(`  ${f}`);
    process.exit(1);
  }
  if (rows.length < 200) {
    console.error(`corpus has only ${rows.length} molecules, need at least 200`);
    process.exit(1);
  }

  const out = path.join(
    __dirname,
    "..",
    "..",
    "crates",
    "molgraf",
    "tests",
    "fixtures",
    "smiles_corpus.tsv"
  );
  fs.mkdirSync(path.dirname(out), { recursive: true });
  fs.writeFileSync(out, "smiles\tatoms\tbonds\n" + rows.join("\n") + "\n");
  console.log(`wrote ${rows.length} molecules to ${out}`);
}

main();
