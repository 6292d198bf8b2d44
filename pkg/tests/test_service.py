from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient
from PIL import Image

from fixtures import make_collection, manifest_dict
from treecollage.document import document_from_bytes
from treecollage.service import create_app

SQUARE = [(0.0, 0.0), (320.0, 0.0), (320.0, 320.0), (0.0, 320.0)]


@pytest.fixture()
def client(tmp_path):
    app = create_app(data_dir=tmp_path)
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def small_manifest_bytes() -> bytes:
    items = make_collection(10, seed=4, category_count=3)
    return json.dumps(manifest_dict(items, shape_polygon=SQUARE)).encode()


def create_collection(client, payload: bytes) -> str:
    resp = client.post(
        "/api/collections", content=payload,
        headers={"content-type": "application/json"},
    )
    assert resp.status_code == 201, resp.text
    return resp.json()["id"]


class TestCreate:
    def test_create_returns_id(self, client, small_manifest_bytes):
        resp = client.post(
            "/api/collections", content=small_manifest_bytes,
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 201
        body = resp.json()
        assert body["revision"] == 1
        assert body["item_count"] == 10
        assert body["id"]

    def test_malformed_manifest_creates_nothing(self, client):
        resp = client.post(
            "/api/collections", content=b'{"version": 1}',
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400
        assert "schema" in resp.json()["detail"]

    def test_identical_creates_distinct_ids_identical_layouts(self, client, small_manifest_bytes):
        id_a = create_collection(client, small_manifest_bytes)
        id_b = create_collection(client, small_manifest_bytes)
        assert id_a != id_b
        lay_a = client.get(f"/api/collections/{id_a}/layout").content
        lay_b = client.get(f"/api/collections/{id_b}/layout").content
        assert lay_a == lay_b


class TestLayout:
    def test_layout_roundtrips_and_validates(self, client, small_manifest_bytes):
        cid = create_collection(client, small_manifest_bytes)
        resp = client.get(f"/api/collections/{cid}/layout")
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("application/json")
        doc = document_from_bytes(resp.content)
        assert len(doc.items) == 10

    def test_unknown_collection_404(self, client):
        assert client.get("/api/collections/nope/layout").status_code == 404


class TestFocus:
    def test_focus_on_root_rebumps_revision_same_layout(self, client, small_manifest_bytes):
        cid = create_collection(client, small_manifest_bytes)
        before = client.get(f"/api/collections/{cid}/layout").content
        root = next(
            item["id"] for item in json.loads(before)["items"]
            if item["parent"] == item["id"]
        )
        resp = client.post(f"/api/collections/{cid}/focus", json={"image_id": root})
        assert resp.status_code == 200
        assert resp.headers["X-Layout-Revision"] == "2"
        assert resp.content == before

    def test_focus_changes_root(self, client, small_manifest_bytes):
        cid = create_collection(client, small_manifest_bytes)
        before = json.loads(client.get(f"/api/collections/{cid}/layout").content)
        some_leaf = max(before["items"], key=lambda it: it["level"])["id"]
        resp = client.post(f"/api/collections/{cid}/focus", json={"image_id": some_leaf})
        assert resp.status_code == 200
        doc = document_from_bytes(resp.content)
        roots = [item for item in doc.items if item.parent == item.id]
        assert roots[0].id == some_leaf
        # layout invariants hold on the focus response too
        rects = [(i.x, i.y, i.w, i.h) for i in doc.items]
        for a in range(len(rects)):
            for b in range(a + 1, len(rects)):
                ax, ay, aw, ah = rects[a]
                bx, by, bw, bh = rects[b]
                ox = min(ax + aw / 2, bx + bw / 2) - max(ax - aw / 2, bx - bw / 2)
                oy = min(ay + ah / 2, by + bh / 2) - max(ay - ah / 2, by - bh / 2)
                assert ox <= 1e-12 or oy <= 1e-12

    def test_focus_back_is_deterministic(self, client, small_manifest_bytes):
        cid = create_collection(client, small_manifest_bytes)
        original = client.get(f"/api/collections/{cid}/layout").content
        root = next(
            item["id"] for item in json.loads(original)["items"]
            if item["parent"] == item["id"]
        )
        leaf = max(json.loads(original)["items"], key=lambda it: it["level"])["id"]
        client.post(f"/api/collections/{cid}/focus", json={"image_id": leaf})
        resp = client.post(f"/api/collections/{cid}/focus", json={"image_id": root})
        # re-focusing the original root recomputes the original layout bytes
        assert resp.content == original
        assert resp.headers["X-Layout-Revision"] == "3"

    def test_unknown_image_404(self, client, small_manifest_bytes):
        cid = create_collection(client, small_manifest_bytes)
        resp = client.post(f"/api/collections/{cid}/focus", json={"image_id": "ghost"})
        assert resp.status_code == 404

    def test_focus_on_leaf_of_identical_collection(self, client):
        # one category, identical colors: deep descent chains form; focusing a
        # leaf exercises the transfer plus the balance-triggered rebuild path
        items = [
            {
                "id": f"c{i}",
                "width": 120,
                "height": 100,
                "properties": {"category": "only", "color": [0.5, 0.3, 0.2]},
            }
            for i in range(8)
        ]
        doc = {
            "version": 1,
            "schema": [
                {"name": "category", "kind": "semantic"},
                {"name": "color", "kind": "visual"},
            ],
            "items": items,
            "shape": {"polygon": [[x, y] for x, y in SQUARE]},
        }
        cid = create_collection(client, json.dumps(doc).encode())
        layout = json.loads(client.get(f"/api/collections/{cid}/layout").content)
        leaf = max(layout["items"], key=lambda it: it["level"])["id"]
        resp = client.post(f"/api/collections/{cid}/focus", json={"image_id": leaf})
        assert resp.status_code == 200
        focused = document_from_bytes(resp.content)
        root = next(item for item in focused.items if item.parent == item.id)
        assert root.id == leaf


class TestImages:
    def test_image_bytes_served(self, tmp_path):
        Image.new("RGB", (6, 6), (10, 200, 30)).save(tmp_path / "green.png")
        items = [
            {
                "id": "a",
                "width": 100,
                "height": 100,
                "path": "green.png",
                "properties": {"category": "x", "color": [1.0]},
            },
            {
                "id": "b",
                "width": 100,
                "height": 100,
                "properties": {"category": "y", "color": [1.0]},
            },
        ]
        doc = {
            "version": 1,
            "schema": [
                {"name": "category", "kind": "semantic"},
                {"name": "color", "kind": "visual"},
            ],
            "items": items,
            "shape": {"polygon": [[x, y] for x, y in SQUARE]},
        }
        app = create_app(data_dir=tmp_path)
        with TestClient(app) as client:
            cid = create_collection(client, json.dumps(doc).encode())
            ok = client.get(f"/api/collections/{cid}/images/a")
            assert ok.status_code == 200
            assert ok.content[:8] == b"\x89PNG\r\n\x1a\n"
            assert client.get(f"/api/collections/{cid}/images/b").status_code == 404
            assert client.get(f"/api/collections/{cid}/images/ghost").status_code == 404


class TestPersistence:
    def test_write_through(self, tmp_path, small_manifest_bytes):
        app = create_app(data_dir=tmp_path)
        with TestClient(app) as client:
            cid = create_collection(client, small_manifest_bytes)
            session_dir = tmp_path / cid
            assert (session_dir / "manifest.json").read_bytes() == small_manifest_bytes
            layout = client.get(f"/api/collections/{cid}/layout").content
            assert (session_dir / "layout.json").read_bytes() == layout
