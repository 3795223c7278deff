import { describe, expect, it } from "vitest";

import { DEFAULT_SCREEN, estimateWidth } from "../src/geometry.js";
import { MAX_DELAY_S, layout, simulateOverlaps } from "../src/layout.js";
import type { LaneAssignment, Track } from "../src/types.js";
import lessonFixture from "./fixtures/lesson.json";
import randomTracks from "./fixtures/random_tracks.json";

const lesson = lessonFixture as unknown as {
  video: { id: string; duration_s: number };
  track: Track;
  schedule: LaneAssignment[];
};
const tracks = randomTracks as unknown as Track[];

describe("client-side lane layout", () => {
  it("matches the server layout on the lesson fixture", () => {
    // same width model -> byte-for-byte the same geometry
    expect(layout(lesson.track)).toEqual(lesson.schedule);
  });

  it("never overlaps on the lesson fixture", () => {
    expect(simulateOverlaps(layout(lesson.track), DEFAULT_SCREEN)).toEqual([]);
  });

  it.each(tracks.map((t, i) => [i, t] as const))(
    "never overlaps on random track %i",
    (_i, track) => {
      const assignments = layout(track, DEFAULT_SCREEN);
      expect(simulateOverlaps(assignments, DEFAULT_SCREEN)).toEqual([]);
      const byId = new Map(track.danmaku.map((d) => [d.id, d.time_s]));
      for (const a of assignments) {
        const delay = a.enter_s - byId.get(a.danmaku_id)!;
        expect(delay).toBeGreaterThanOrEqual(0);
        expect(delay).toBeLessThanOrEqual(MAX_DELAY_S + 1e-9);
      }
    },
  );

  it("stays sound under measured (non-estimated) text widths", () => {
    // a crude fixed-advance "font": every code point 14 px
    const measure = (text: string) => [...text].length * 14;
    for (const track of tracks) {
      const assignments = layout(track, DEFAULT_SCREEN, measure);
      expect(simulateOverlaps(assignments, DEFAULT_SCREEN)).toEqual([]);
    }
  });

  it("estimateWidth distinguishes ascii from wide characters", () => {
    expect(estimateWidth("abcd", 25)).toBeCloseTo(4 * 0.6 * 25);
    expect(estimateWidth("中文", 25)).toBeCloseTo(2 * 25);
  });

  it("the server schedule itself passes the overlap oracle", () => {
    expect(simulateOverlaps(lesson.schedule, DEFAULT_SCREEN)).toEqual([]);
  });
});
