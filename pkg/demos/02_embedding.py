"""The deterministic reference embedder, from tokens to unit vectors.

Run: python3 demos/02_embedding.py
"""

import numpy as np

from lkb import ReferenceEmbedder, cosine, softmax_rows, tokenize_hash

embedder = ReferenceEmbedder(dim=64, vocab=4096, heads=4, seed=42)

# Tokens are hash buckets: stable across runs, case-insensitive.
print("token ids:", tokenize_hash("Insulator leakage distance", 4096))
print("same text:", tokenize_hash("insulator LEAKAGE distance", 4096))

# Attention weights are softmax rows: every row sums to one.
scores = np.array([[0.0, 1.0, -1.0], [2.0, 2.0, 2.0]])
print("\nsoftmax rows:\n", softmax_rows(scores).round(4))

# Embeddings are unit length and bit-stable for a fixed seed.
a = embedder.embed("bearing inner race spalling")
b = embedder.embed("bearing inner race spalling")
print("\nnorm:", float(np.linalg.norm(a)))
print("bit-identical across calls:", a.tobytes() == b.tobytes())

# Cosine similarity orders related texts above unrelated ones.
texts = [
    "bearing outer race defect frequency",
    "grease the bearing every 2000 hours",
    "invoice processing for office supplies",
]
query = embedder.embed("bearing race fault analysis")
print("\nsimilarity to 'bearing race fault analysis':")
for text in texts:
    print(f"  {cosine(query, embedder.embed(text)):+.4f}  {text}")
