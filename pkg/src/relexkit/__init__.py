"""relexkit: typed relation extraction for small annotated corpora.

Rule-based window-bounded co-occurrence extraction, a bag-of-concepts
feature pipeline over pretrained word embeddings, from-scratch linear /
kernel / feed-forward classifiers, and a micro-F1 evaluation harness.
"""

__version__ = "0.1.0"
