/** Pure overlay state: which items are on screen at a media time, and where.
 *
 * Scroll items follow x(t) = W - v * (t - enter); pinned items are centered
 * horizontally in a top or bottom lane band. Pausing the clock freezes t
 * and therefore every position.
 */

import { DEFAULT_SCREEN, ScreenConfig } from "./geometry.js";
import type { ToggleState } from "./controls.js";
import type { Danmaku, LaneAssignment, Track } from "./types.js";

export interface OverlayItem {
  danmaku: Danmaku;
  lane: number;
  band: "scroll" | "top" | "bottom";
  x: number; // left edge in px
  widthPx: number;
}

export function indexTrack(track: Track): Map<string, Danmaku> {
  return new Map(track.danmaku.map((d) => [d.id, d]));
}

export function frame(
  assignments: LaneAssignment[],
  byId: Map<string, Danmaku>,
  timeS: number,
  screen: ScreenConfig = DEFAULT_SCREEN,
  toggles?: ToggleState,
): OverlayItem[] {
  const out: OverlayItem[] = [];
  for (const a of assignments) {
    if (timeS < a.enter_s || timeS >= a.exit_s) continue;
    const d = byId.get(a.danmaku_id);
    if (!d) continue;
    if (toggles && !toggles.isVisible(d)) continue;
    if (a.pinned) {
      out.push({
        danmaku: d,
        lane: a.lane,
        band: a.pinned,
        x: (screen.widthPx - a.width_px) / 2,
        widthPx: a.width_px,
      });
    } else {
      out.push({
        danmaku: d,
        lane: a.lane,
        band: "scroll",
        x: screen.widthPx - a.speed_px_s * (timeS - a.enter_s),
        widthPx: a.width_px,
      });
    }
  }
  return out;
}
