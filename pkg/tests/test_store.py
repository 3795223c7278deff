import json
import random
import threading

import pytest

from comet.errors import Corrupt, MalformedXml, NotFound
from comet.persona import DEFAULT_PERSONAS
from comet.store import Catalog, export_interop_xml, import_interop_xml
from comet.track import (Danmaku, DanmakuTrack, DanmakuType, Position,
                         track_to_json)
from conftest import random_track


class TestInteropXml:
    def test_export_shape(self):
        records = (
            Danmaku("d0001", "A", 1.5, DanmakuType.DISCUSSION, "hello"),
            Danmaku("d0002", "B", 3.0, DanmakuType.HIGHLIGHT, "key point",
                    color=0xFF0000, position=Position.TOP),
            Danmaku("d0003", None, 4.25, DanmakuType.USER_POSTED, "a <viewer> & co"),
        )
        xml = export_interop_xml(DanmakuTrack(video_id="v", danmaku=records))
        text = xml.decode("utf-8")
        assert text.startswith('<?xml version="1.0" encoding="UTF-8"?><i>')
        assert '<d p="1.50,1,25,16777215,0,A,1">hello</d>' in text
        assert '<d p="3.00,5,25,16711680,0,B,2">key point</d>' in text
        assert '<d p="4.25,1,25,16777215,0,user,3">a &lt;viewer&gt; &amp; co</d>' in text

    def test_empty_track_renders_empty_container(self):
        xml = export_interop_xml(DanmakuTrack(video_id="v", danmaku=()))
        assert xml == b'<?xml version="1.0" encoding="UTF-8"?><i></i>'
        assert import_interop_xml(xml, "v", 10.0).danmaku == ()

    def test_import_maps_modes_and_clamps(self):
        xml = (b'<?xml version="1.0" encoding="UTF-8"?><i>'
               b'<d p="2.00,5,25,255,0,A,1">pinned</d>'
               b'<d p="99.00,1,25,16777215,0,user,2">late</d>'
               b'</i>')
        track = import_interop_xml(xml, "vid", 50.0)
        assert [d.position for d in track.danmaku] == [Position.TOP, Position.SCROLL]
        assert track.danmaku[1].time_s == 50.0
        # imported comments are platform comments: no persona, user-posted type
        assert all(d.persona_label is None for d in track.danmaku)
        assert all(d.dtype is DanmakuType.USER_POSTED for d in track.danmaku)

    @pytest.mark.parametrize("data", [
        b"not xml at all",
        b"<wrong></wrong>",
        b'<i><d p="1,2">short</d></i>',
        b'<i><d p="abc,1,25,0,0,u,1">bad time</d></i>',
    ])
    def test_malformed_xml_raises(self, data):
        with pytest.raises(MalformedXml):
            import_interop_xml(data, "v", 10.0)

    def test_randomized_round_trip(self):
        rng = random.Random(20240820)
        for _ in range(100):
            track = random_track(rng, rng.randint(0, 30), 400.0,
                                 user_posted_only=True)
            xml = export_interop_xml(track)
            again = import_interop_xml(xml, track.video_id, 400.0)
            assert export_interop_xml(again) == xml


class TestCatalog:
    def test_manifest_round_trip(self, tmp_path, manifest300):
        cat = Catalog(tmp_path)
        cat.save_manifest(manifest300)
        assert cat.load_manifest(manifest300.id) == manifest300
        assert cat.list_videos() == [manifest300.id]

    def test_track_and_personas_round_trip(self, tmp_path, manifest300, personas):
        cat = Catalog(tmp_path)
        rng = random.Random(1)
        track = random_track(rng, 20, 300.0, video_id=manifest300.id)
        cat.save_track(track)
        cat.save_personas(manifest300.id, personas)
        assert cat.load_track(manifest300.id) == track
        assert cat.load_personas(manifest300.id).personas == personas.personas

    def test_missing_artifacts_raise_not_found(self, tmp_path):
        cat = Catalog(tmp_path)
        with pytest.raises(NotFound):
            cat.load_manifest("nope")
        with pytest.raises(NotFound):
            cat.load_track("nope")
        with pytest.raises(NotFound):
            cat.load_job("nope")

    def test_corrupt_artifacts_raise(self, tmp_path, manifest300):
        cat = Catalog(tmp_path)
        cat.save_manifest(manifest300)
        path = cat.video_dir(manifest300.id) / "track.json"
        path.write_text('{"video_id": "x", "danmaku": [{"broken": true}]}')
        with pytest.raises(Corrupt):
            cat.load_track(manifest300.id)

    def test_video_id_is_sanitized_for_paths(self, tmp_path):
        cat = Catalog(tmp_path)
        d = cat.video_dir("../../evil/id")
        assert tmp_path in d.parents
        assert d.parent == tmp_path / "videos"
        assert "/" not in d.name

    def test_atomic_write_leaves_no_temp_files(self, tmp_path, manifest300):
        cat = Catalog(tmp_path)
        for _ in range(5):
            cat.save_manifest(manifest300)
        leftovers = [p for p in cat.video_dir(manifest300.id).iterdir()
                     if p.name.startswith(".tmp-")]
        assert leftovers == []

    def test_concurrent_appends_do_not_lose_records(self, tmp_path):
        cat = Catalog(tmp_path)
        base = DanmakuTrack(video_id="vid", danmaku=())
        cat.save_track(base)

        def append(i):
            from comet.track import with_appended
            with cat.lock("vid"):
                track = cat.load_track("vid")
                record = Danmaku(f"c{i:03d}", None, float(i),
                                 DanmakuType.USER_POSTED, f"comment {i}")
                cat.save_track(with_appended(track, record))

        threads = [threading.Thread(target=append, args=(i,)) for i in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(cat.load_track("vid").danmaku) == 16

    def test_jobs_round_trip(self, tmp_path):
        cat = Catalog(tmp_path)
        cat.save_job("j1", json.dumps({"state": "Done"}))
        assert json.loads(cat.load_job("j1")) == {"state": "Done"}
