"""countquant: extract counting quantifiers (subject, relation, count) from text.

The pipeline generates sequence-labeled training data from a knowledge
base, trains a linear-chain CRF per relation, and consolidates labeled
numeric mentions into one count prediction per subject.
"""

__version__ = "0.1.0"
