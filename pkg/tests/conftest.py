import numpy as np
import pytest

from lkb.rng import SplitMix64


def unit_vectors(n: int, dim: int, seed: int) -> np.ndarray:
    """Seeded random unit vectors, float32, for index tests."""
    stream = SplitMix64(seed)
    data = stream.normal(n * dim).reshape(n, dim)
    data /= np.sqrt(np.sum(data * data, axis=1, keepdims=True))
    return data.astype(np.float32)


def clustered_dataset(
    n: int, dim: int, n_clusters: int, seed: int, spread: float = 0.05,
    n_queries: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Corpus-like data: many tight topic clusters on the unit sphere.

    Returns (vectors, queries); queries perturb the same cluster centers
    the data was drawn from, the way real questions sit near indexed
    content.
    """
    stream = SplitMix64(seed)
    centers = stream.normal(n_clusters * dim).reshape(n_clusters, dim)
    centers /= np.sqrt(np.sum(centers * centers, axis=1, keepdims=True))

    def draw(count: int) -> np.ndarray:
        picks = (stream.uint64(count) % np.uint64(n_clusters)).astype(np.int64)
        noise = stream.normal(count * dim).reshape(count, dim) * spread
        data = centers[picks] + noise
        data /= np.sqrt(np.sum(data * data, axis=1, keepdims=True))
        return data.astype(np.float32)

    vectors = draw(n)
    queries = draw(n_queries) if n_queries else np.empty((0, dim), dtype=np.float32)
    return vectors, queries


def ids_for(n: int, prefix: str = "c") -> list[str]:
    return [f"{prefix}{i:06d}" for i in range(n)]


def brute_force_top_k(vectors: np.ndarray, ids: list[str], query: np.ndarray,
                      k: int) -> list[tuple[str, float]]:
    """Independent oracle: per-row np.dot, full sort by (-score, id)."""
    q = np.asarray(query, dtype=np.float64)
    scored = [
        (str(id), float(np.dot(row.astype(np.float64), q)))
        for row, id in zip(vectors, ids)
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[: min(k, len(scored))]


@pytest.fixture
def tiny_corpus_files(tmp_path):
    """Three small maintenance-flavored documents on disk."""
    texts = {
        "pump.txt": (
            "Pump bearing inspection. Measure the axial play of the drive-end "
            "bearing and record the value in the logbook. Replace the bearing "
            "when the play exceeds 0.3 mm or when grinding noise is audible.\n\n"
            "Lubrication schedule. Apply lithium grease every 2000 operating "
            "hours. Overgreasing raises the housing temperature and must be "
            "avoided."
        ),
        "belt.txt": (
            "Conveyor belt tensioning. Check belt sag midway between idlers; "
            "correct sag is between 15 and 20 mm. Re-tension using the take-up "
            "screws, turning both sides evenly.\n\n"
            "Belt tracking. A belt drifting to one side indicates uneven "
            "tension or a misaligned idler. Adjust in quarter-turn steps and "
            "observe for two full revolutions."
        ),
        "valve.txt": (
            "Coolant valve fault codes. Code 21 means the actuator did not "
            "reach the commanded position within 5 seconds; inspect the "
            "linkage and the supply pressure.\n\n"
            "Code 34 means the position sensor reading is out of range; "
            "check the wiring harness for chafing and replace the sensor if "
            "the reading stays saturated."
        ),
    }
    paths = []
    for name, text in texts.items():
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths
