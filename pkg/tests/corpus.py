"""Shared test molecules, fragments and skeletons."""

MOLECULES = [
    "C", "CC", "CCO", "COC", "CC(=O)O", "CC(C)(C)C", "C=CC=C", "C#N", "CC#CC", "OC(=O)C(N)CS",
    "c1ccccc1", "Cc1ccccc1", "CCCCCCCc1ccccc1", "Oc1ccccc1O", "Cc1ccc(CC)cc1", "c1ccc2ccccc2c1",
    "c1ccc2cc3ccccc3cc2c1", "c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "c1ccsc1", "c1ncc[nH]1", "O=c1cccc[nH]1",
    "C1CCCCC1", "C1CC1", "C1CCC2(CC1)CCCC2", "C12C3C4C1C5C2C3C45", "C1CC2CCC1C2", "O=C1C=CC(=O)C=C1",
    "C1=CCC=C1", "CN1CCN(C)CC1", "CC(=O)Nc1ccc(O)cc1", "CC(=O)Oc1ccccc1C(=O)O", "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",
    "OC[C@H]1OC(O)[C@H](O)[C@@H](O)[C@@H]1O", "C[N+](C)(C)C", "[O-][N+](=O)c1ccccc1", "CS(=O)(=O)N",
    "OP(=O)(O)O", "FC(F)(F)c1ccc(Cl)cc1", "BrCCBr", "ClC(Cl)Cl", "[13CH4]", "[NH4+]", "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "c1ccc(cc1)-c1ccccc1", "C1CCOC1", "N#CC(C#N)=C(C#N)C#N", "c1ccc2[nH]ccc2c1", "c1cnc2ccccc2c1",
    "CCN(CC)CC", "OCCOCCO", "c1ccc2c(c1)OCO2", "Cc1nc2ccccc2[nH]1", "C1CCC2CCCCC2C1",
]

FRAGMENTS = [
    "*C", "*CC", "*CCC", "*C(C)C", "*O", "*N", "*Cl", "*F", "*Br", "*OC", "*C(=O)O", "*C#N",
    "*c1ccccc1", "*C1CC1", "*N(C)C", "*CO", "*C=C", "*S(=O)(=O)C",
]

SMALL_FRAGMENTS = ["*C", "*CC", "*CCC", "*C(C)C", "*O", "*N", "*Cl", "*F", "*OC", "*C=O", "*C#N", "*C=C", "*CO", "*NC"]

SMALL_SKELETONS = [
    "[R1]CC[R2]", "[R1]C([R2])C", "[R1]c1ccccc1", "[R1]c1ccc([R2])cc1", "[R1]c1ccccc1[R2]", "[R1]C1CC1",
    "[R1]N([R2])C", "[R1]OC(=O)C[R2]", "[R1]C(=O)[R2]", "[R1]CCC[R1]", "[R1]C1CCC([R2])CC1", "[R1]c1ccncc1",
    "[R1]C(C)(C)[R2]", "[R1]OCCO[R1]", "[R1]CC[R1]", "[R1]C([R2])([R3])C", "[R1]c1cc([R2])cc([R3])c1",
    "[R1]N1CCCC1", "O=C([R1])N[R2]", "[R1]C=C[R2]",
]
