"""
Annotation service tour
=======================

Boots the annotation service against a generated three-image cohort (in
process, via the test client; `dermcontrast serve` runs the same app over
uvicorn) and walks the annotator workflow: list pending images, submit picks
by coordinate, read back scores. Pixel colors are read server-side, so the
submitted body carries only coordinates.
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient
from PIL import Image

from dermcontrast import ImageRecord
from dermcontrast.fileio import write_cohort_csv
from dermcontrast.server import create_app

workdir = Path(tempfile.mkdtemp(prefix="dermcontrast-svc-"))
image_dir = workdir / "images"
image_dir.mkdir()

# Each image: dark lesion block on the left, lighter skin on the right.
palettes = {
    "img-a": ((45, 30, 25), (215, 170, 150)),
    "img-b": ((85, 60, 50), (190, 160, 140)),
    "img-c": ((120, 110, 100), (180, 175, 170)),
}
records = []
for image_id, (lesion, skin) in palettes.items():
    img = Image.new("RGB", (32, 32))
    for x in range(32):
        for y in range(32):
            img.putpixel((x, y), lesion if x < 16 else skin)
    img.save(image_dir / f"{image_id}.png")
    records.append(ImageRecord(image_id, f"{image_id}.png", "III-IV", False))

cohort = workdir / "cohort.csv"
write_cohort_csv(cohort, records)

app = create_app(cohort, image_dir, workdir / "annotations.jsonl")
client = TestClient(app)

print(client.get("/api/health").json())

pending = client.get("/api/images", params={"labeller": "demo", "filter": "pending"})
print(f"pending for 'demo': {[e['image_id'] for e in pending.json()['items']]}")

for image_id in palettes:
    resp = client.post(
        "/api/annotations",
        json={
            "image_id": image_id,
            "labeller_id": "demo",
            "foreground": [{"x": 3, "y": 3 + i} for i in range(3)],
            "background": [{"x": 28, "y": 3 + i} for i in range(3)],
            "lighting_flag": True,
            "checklist": {
                "avoid_ulceration": True,
                "avoid_adjacent": True,
                "matched_lighting": True,
            },
        },
    )
    score = resp.json()["score"]
    print(f"{image_id}: score {score['value']:.4f} "
          f"(L1 {score['lighter']:.4f}, L2 {score['darker']:.4f})")

# a wrong pick count is a protocol violation, rejected with 422
bad = client.post(
    "/api/annotations",
    json={
        "image_id": "img-a",
        "labeller_id": "demo",
        "foreground": [{"x": 3, "y": 3}, {"x": 3, "y": 4}],
        "background": [{"x": 28, "y": 3 + i} for i in range(3)],
        "lighting_flag": True,
    },
)
print(f"2 foreground picks -> {bad.status_code}: {bad.json()['detail']}")

scores = client.get("/api/scores", params={"labeller": "demo"}).json()["scores"]
print(f"stored scores: {len(scores)}")
print(f"log at {workdir / 'annotations.jsonl'}")
