"""Walk through the three chunking strategies on one document.

Run: python3 demos/01_chunking.py
"""

from lkb import SplitterConfig, load_document, split_document

RAW = b"""Gearbox maintenance overview.

Oil sampling. Draw the sample from the mid-level port while the unit is
warm. Label the bottle with the unit id and the operating hours.

Backlash measurement. Lock the output shaft, mount a dial indicator on a
tooth flank, and rock the input shaft gently. Record the total movement.
Values above 0.25 mm call for an inspection of the mesh pattern.
"""

doc = load_document(RAW, "plain-text", "gearbox.txt")
print(f"document {doc.doc_id}: {len(doc.text)} chars\n")

for strategy, size, overlap in [("fixed", 120, 20), ("token", 25, 3), ("recursive", 160, 20)]:
    cfg = SplitterConfig(strategy=strategy, chunk_size=size, overlap=overlap)
    chunks = split_document(doc, cfg)
    unit = "tokens" if strategy == "token" else "chars"
    print(f"--- {strategy} (chunk_size={size} {unit}, overlap={overlap}) -> {len(chunks)} chunks")
    for chunk in chunks:
        lo, hi = chunk.char_span
        preview = chunk.text.replace("\n", "↵")
        if len(preview) > 64:
            preview = preview[:61] + "..."
        print(f"  [{lo:4d},{hi:4d}) {preview}")
    print()

# Every chunk is an exact slice of the parent text; spans prove provenance.
cfg = SplitterConfig(strategy="recursive", chunk_size=160, overlap=20)
for chunk in split_document(doc, cfg):
    assert chunk.text == doc.text[chunk.char_span[0] : chunk.char_span[1]]
print("all chunks verified as exact parent slices")
