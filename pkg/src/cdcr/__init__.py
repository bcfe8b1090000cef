"""Cross-document event coreference toolkit.

Pipeline stages: corpus loading and lemma-pruned pair generation,
embedding stores, ridge bridge maps between modality spaces, a pairwise
MLP scorer, transitive-closure clustering, coreference metrics,
difficulty categorization, and difficulty-routed model ensembling.
"""

__version__ = "0.1.0"
