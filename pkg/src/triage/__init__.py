"""Severity triage for free-text incident-learning safety reports.

Library + CLI covering ingestion and binarization of labeled report
corpora, deterministic preprocessing, TF-IDF/SVM baselines, embedding
classification heads with cross-institution transfer, and AUROC /
alert-rate evaluation.
"""

__version__ = "0.1.0"
