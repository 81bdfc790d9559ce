"""Double covers of Gaussian unitary groups: metaplectic and spin phases."""
