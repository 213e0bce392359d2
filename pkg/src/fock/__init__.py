# Fock — operator models: Heisenberg Fock space and the classical affine vacuum module
