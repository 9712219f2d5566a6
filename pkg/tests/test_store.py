import pytest

from lkb.config import load_config
from lkb.errors import EmptyIndexError, StoreCorruptionError
from lkb.store import CorpusStore


def make_store(tmp_path, **env) -> CorpusStore:
    base = {"LKB_DATA_DIR": str(tmp_path / "data")}
    base.update(env)
    return CorpusStore(load_config(env=base))


def test_ingest_splits_embeds_and_indexes(tmp_path):
    store = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="40", LKB_SPLITTER_OVERLAP="5")
    text = "First paragraph about pumps.\n\nSecond paragraph about belts and rollers."
    doc, chunk_count, created = store.ingest(text.encode(), "plain-text", "notes.txt")
    assert created
    assert chunk_count >= 2
    assert store.vector_count == chunk_count
    assert len(store.documents) == 1


def test_ingest_is_idempotent(tmp_path):
    store = make_store(tmp_path)
    payload = b"hello world"
    doc1, count1, created1 = store.ingest(payload, "plain-text", "h.txt")
    size_after_first = store.vector_count
    doc2, count2, created2 = store.ingest(payload, "plain-text", "h.txt")
    assert created1 and not created2
    assert doc1.doc_id == doc2.doc_id
    assert count1 == count2 == 1
    assert store.vector_count == size_after_first


def test_query_payload_round_trip(tmp_path):
    store = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="60", LKB_SPLITTER_OVERLAP="0")
    store.ingest(b"bearing wear inspection procedure", "plain-text", "a.txt")
    store.ingest(b"belt tension adjustment steps", "plain-text", "b.txt")
    payload = store.query_payload("bearing wear inspection procedure", k=1)
    assert len(payload["hits"]) == 1
    hit = payload["hits"][0]
    assert set(hit) == {"chunk_id", "doc_id", "score", "text"}
    assert hit["text"] == "bearing wear inspection procedure"
    assert hit["score"] == pytest.approx(1.0, abs=1e-6)


def test_query_empty_store_raises(tmp_path):
    store = make_store(tmp_path)
    with pytest.raises(EmptyIndexError):
        store.query_payload("anything")


def test_ask_payload_uses_mock_and_reports_evidence(tmp_path):
    store = make_store(tmp_path)
    store.ingest(b"coolant pressure must stay above 2 bar", "plain-text", "c.txt")
    payload = store.ask_payload("what coolant pressure is required?", k=2)
    assert payload["model_id"] == "mock"
    assert payload["answer"].startswith("MOCK-ANSWER sha=")
    assert len(payload["hits"]) == 1
    assert payload["truncated"] is False
    assert payload["prompt_chars"] > 0


def test_ask_with_k_zero_uses_sentinel(tmp_path):
    store = make_store(tmp_path)
    store.ingest(b"some indexed text", "plain-text", "s.txt")
    payload = store.ask_payload("question", k=0)
    assert payload["hits"] == []
    assert "chunks=[]" in payload["answer"]


def test_restart_preserves_query_results(tmp_path):
    store = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="50", LKB_SPLITTER_OVERLAP="10")
    store.ingest(
        b"gearbox oil sampling: draw from the mid port after 10 minutes of operation",
        "plain-text", "g.txt",
    )
    store.ingest(b"hydraulic filter swap intervals depend on duty cycle", "plain-text", "h.txt")
    before = store.query_payload("hydraulic filter intervals", k=3)

    reopened = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="50", LKB_SPLITTER_OVERLAP="10")
    after = reopened.query_payload("hydraulic filter intervals", k=3)
    assert before == after


def test_rebuild_ivf_and_query_modes(tmp_path):
    store = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="30", LKB_SPLITTER_OVERLAP="0")
    for i in range(6):
        store.ingest(
            f"document {i} has text about topic {i} with several words".encode(),
            "plain-text", f"d{i}.txt",
        )
    stats = store.rebuild("ivf", nlist=4)
    assert stats["kind"] == "ivf"
    assert stats["nlist"] == 4
    assert sum(stats["list_sizes"]) == store.vector_count

    flat_hits = store.query_payload("topic 3 words", k=5, mode="flat")
    ivf_hits = store.query_payload("topic 3 words", k=5, mode="ivf", nprobe=4)
    assert flat_hits == ivf_hits  # exhaustive probe equals flat

    store.rebuild("flat")
    assert store.active_kind == "flat"


@pytest.mark.filterwarnings("ignore::UserWarning")  # tiny corpus: duplicated codewords
def test_rebuild_persists_across_restart(tmp_path):
    store = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="30", LKB_SPLITTER_OVERLAP="0")
    for i in range(8):
        store.ingest(f"entry number {i} body text".encode(), "plain-text", f"e{i}.txt")
    store.rebuild("ivfpq", nlist=2, pq_m=8, pq_bits=4)
    before = store.query_payload("entry number 5", k=4, mode="ivfpq")

    reopened = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="30", LKB_SPLITTER_OVERLAP="0")
    assert reopened.active_kind == "ivfpq"
    after = reopened.query_payload("entry number 5", k=4, mode="ivfpq")
    assert before == after


def test_mode_without_index_is_rejected(tmp_path):
    store = make_store(tmp_path)
    store.ingest(b"plain content", "plain-text", "p.txt")
    with pytest.raises(ValueError, match="rebuild"):
        store.query_payload("content", mode="ivf")


def test_corrupted_doc_detected_on_load(tmp_path):
    store = make_store(tmp_path)
    doc, _, _ = store.ingest(b"original content here", "plain-text", "o.txt")
    doc_path = tmp_path / "data" / "docs" / f"{doc.doc_id}.txt"
    doc_path.write_text("tampered content", encoding="utf-8")
    with pytest.raises(StoreCorruptionError, match="digest"):
        make_store(tmp_path)


def test_embedder_mismatch_detected_on_load(tmp_path):
    store = make_store(tmp_path)
    store.ingest(b"content", "plain-text", "c.txt")
    with pytest.raises(StoreCorruptionError, match="embedder"):
        make_store(tmp_path, LKB_EMBEDDER_SEED="43")


def test_ingested_vectors_route_into_existing_ivf(tmp_path):
    store = make_store(tmp_path, LKB_SPLITTER_CHUNK_SIZE="30", LKB_SPLITTER_OVERLAP="0")
    for i in range(5):
        store.ingest(f"seed doc {i} words".encode(), "plain-text", f"s{i}.txt")
    store.rebuild("ivf", nlist=2)
    store.ingest(b"late arriving document text", "plain-text", "late.txt")
    assert store.derived.size == store.vector_count
    hits = store.query_payload("late arriving document", k=1, mode="ivf", nprobe=2)
    assert hits["hits"][0]["doc_id"].startswith("late.txt-")


def test_health_and_stats_shapes(tmp_path):
    store = make_store(tmp_path)
    assert store.health() == {"status": "ok", "index_kind": "flat", "vectors": 0, "docs": 0}
    store.ingest(b"hello world", "plain-text", "hw.txt")
    health = store.health()
    assert health["vectors"] == 1 and health["docs"] == 1
    stats = store.index_stats()
    assert stats["kind"] == "flat"
    assert stats["nlist"] is None
    assert stats["list_sizes"] == [1]
