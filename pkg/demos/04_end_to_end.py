"""The full pipeline: ingest -> retrieve -> prompt -> answer.

Uses a temporary data directory and the deterministic mock LLM, so it
runs fully offline. Point llm.url/llm.mock at a real chat-json endpoint
to get live answers with the same evidence trail.

Run: python3 demos/04_end_to_end.py
"""

import tempfile

from lkb import CorpusStore, assemble_prompt, mock_complete, retrieve
from lkb.config import load_config

MANUALS = {
    "hydraulics.txt": (
        "Hydraulic heater protection. A protection signal reading of zero "
        "usually means the heater element or its sensor has failed. Stop "
        "the unit, inspect the heater circuit, and replace the faulty "
        "part before restarting.\n\n"
        "Accumulator pre-charge. Check the nitrogen pre-charge every six "
        "months with the system depressurized."
    ),
    "generator.txt": (
        "Carbon brush temperature. Overheating brushes point to uneven "
        "current sharing, a worn contact face, or blocked ventilation "
        "holes in the slip ring. Measure each brush current and compare "
        "against the nameplate range."
    ),
}

with tempfile.TemporaryDirectory() as tmp:
    config = load_config(env={"LKB_DATA_DIR": tmp, "LKB_SPLITTER_CHUNK_SIZE": "200",
                              "LKB_SPLITTER_OVERLAP": "20"})
    store = CorpusStore(config)
    for name, text in MANUALS.items():
        doc, n_chunks, _ = store.ingest(text.encode(), "plain-text", name)
        print(f"ingested {doc.doc_id}: {n_chunks} chunks")

    query = "Why would the hydraulic heater protection signal read zero?"
    result = retrieve(store, query, k=3)
    print(f"\ntop hits for: {query}")
    for chunk, score in result.hits:
        print(f"  {score:+.4f}  {chunk.chunk_id}")

    bundle = assemble_prompt(result, budget=600)
    print(f"\nprompt ({bundle.context_chars} context chars, truncated={bundle.truncated}):")
    print("-" * 60)
    print(bundle.prompt_text)
    print("-" * 60)

    answer = mock_complete(bundle)
    print(f"\n{answer.model_id} answered: {answer.text}")

    # The HTTP service and CLI expose exactly this pipeline; see README.
