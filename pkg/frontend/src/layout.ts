/** Client-side lane layout with measured text widths.
 *
 * The client recomputes the layout so measured font metrics drive the
 * geometry; the server's schedule file is a fallback when a canvas is
 * unavailable. Semantics match the server: greedy first-fit in time order,
 * delay steps of 0.25 s up to a 5 s budget, unplaceable items dropped.
 */

import {
  DEFAULT_SCREEN,
  ScreenConfig,
  TextMeasurer,
  collides,
  estimateWidth,
  scrollSpeed,
} from "./geometry.js";
import type { LaneAssignment, Track } from "./types.js";

export const DELAY_STEP_S = 0.25;
export const MAX_DELAY_S = 5.0;

export function layout(
  track: Track,
  screen: ScreenConfig = DEFAULT_SCREEN,
  measure: TextMeasurer = estimateWidth,
): LaneAssignment[] {
  const assignments: LaneAssignment[] = [];
  const lanes: LaneAssignment[][] = Array.from(
    { length: screen.laneCount },
    () => [],
  );
  const topSlots: number[] = new Array(screen.pinnedSlotCount).fill(-1e18);
  const bottomSlots: number[] = new Array(screen.pinnedSlotCount).fill(-1e18);
  const steps = Math.round(MAX_DELAY_S / DELAY_STEP_S);

  for (const d of track.danmaku) {
    const width = measure(d.text, screen.fontSizePx);

    if (d.position === "top" || d.position === "bottom") {
      const slots = d.position === "top" ? topSlots : bottomSlots;
      outer: for (let step = 0; step <= steps; step++) {
        const enter = d.time_s + step * DELAY_STEP_S;
        for (let slot = 0; slot < slots.length; slot++) {
          if (slots[slot]! <= enter) {
            slots[slot] = enter + screen.pinnedDurationS;
            assignments.push({
              danmaku_id: d.id,
              lane: slot,
              enter_s: enter,
              exit_s: enter + screen.pinnedDurationS,
              width_px: width,
              speed_px_s: 0,
              pinned: d.position,
            });
            break outer;
          }
        }
      }
      continue;
    }

    const speed = scrollSpeed(width, screen);
    // occupants gone before this item's earliest entry can never collide
    const horizon = d.time_s - screen.scrollDurationS;
    for (let lane = 0; lane < screen.laneCount; lane++) {
      lanes[lane] = lanes[lane]!.filter((p) => p.enter_s > horizon);
    }
    outer: for (let step = 0; step <= steps; step++) {
      const enter = d.time_s + step * DELAY_STEP_S;
      const cand: LaneAssignment = {
        danmaku_id: d.id,
        lane: 0,
        enter_s: enter,
        exit_s: enter + screen.scrollDurationS,
        width_px: width,
        speed_px_s: speed,
        pinned: null,
      };
      for (let lane = 0; lane < screen.laneCount; lane++) {
        // delay steps make enter times non-monotonic, so every occupant
        // still within a scroll window must be checked
        const occupants = lanes[lane]!.filter(
          (p) => Math.abs(p.enter_s - enter) < screen.scrollDurationS,
        );
        if (occupants.every((p) => !collides(p, cand, screen))) {
          const final = { ...cand, lane };
          lanes[lane]!.push(final);
          assignments.push(final);
          break outer;
        }
      }
    }
  }
  return assignments;
}

/** Dense-time overlap scan; the test oracle for layout soundness. */
export function simulateOverlaps(
  assignments: LaneAssignment[],
  screen: ScreenConfig,
  tickS = 0.01,
): Array<[string, string]> {
  const byLane = new Map<string, LaneAssignment[]>();
  for (const a of assignments) {
    const key = `${a.pinned ?? "scroll"}:${a.lane}`;
    if (!byLane.has(key)) byLane.set(key, []);
    byLane.get(key)!.push(a);
  }
  const bad: Array<[string, string]> = [];
  for (const group of byLane.values()) {
    group.sort((x, y) => x.enter_s - y.enter_s);
    for (let i = 0; i < group.length; i++) {
      const a = group[i]!;
      for (let j = i + 1; j < group.length; j++) {
        const b = group[j]!;
        if (b.enter_s >= a.exit_s) break;
        if (pairOverlaps(a, b, screen, tickS)) bad.push([a.danmaku_id, b.danmaku_id]);
      }
    }
  }
  return bad;
}

function pairOverlaps(
  a: LaneAssignment,
  b: LaneAssignment,
  screen: ScreenConfig,
  tickS: number,
): boolean {
  if (a.pinned || b.pinned) {
    // pinned slots: any dwell intersection is an overlap
    return b.enter_s < a.exit_s && a.enter_s < b.exit_s;
  }
  const start = Math.max(a.enter_s, b.enter_s);
  const end = Math.min(a.exit_s, b.exit_s);
  for (let t = start; t <= end; t += tickS) {
    const ax = screen.widthPx - a.speed_px_s * (t - a.enter_s);
    const bx = screen.widthPx - b.speed_px_s * (t - b.enter_s);
    if (ax < bx + b.width_px && bx < ax + a.width_px) return true;
  }
  return false;
}
