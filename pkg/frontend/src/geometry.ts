/** Screen geometry: text widths, scroll speeds and the collision test. */

import type { LaneAssignment } from "./types.js";

export interface ScreenConfig {
  widthPx: number;
  laneCount: number;
  laneHeightPx: number;
  scrollDurationS: number;
  pinnedDurationS: number;
  fontSizePx: number;
  pinnedSlotCount: number;
}

export const DEFAULT_SCREEN: ScreenConfig = {
  widthPx: 1280,
  laneCount: 12,
  laneHeightPx: 32,
  scrollDurationS: 8.0,
  pinnedDurationS: 4.0,
  fontSizePx: 25,
  pinnedSlotCount: 3,
};

/** Measured pixel width of a rendered text; browser code passes canvas metrics. */
export type TextMeasurer = (text: string, fontSizePx: number) => number;

/** Fallback estimate: ASCII at 0.6 em, wide characters at 1 em. */
export const estimateWidth: TextMeasurer = (text, fontSizePx) => {
  let width = 0;
  for (const ch of text) {
    width += (ch.codePointAt(0)! < 128 ? 0.6 : 1.0) * fontSizePx;
  }
  return width;
};

/** Canvas-backed measurer when a 2D context is available. */
export function canvasMeasurer(ctx: CanvasRenderingContext2D): TextMeasurer {
  return (text, fontSizePx) => {
    ctx.font = `${fontSizePx}px sans-serif`;
    return ctx.measureText(text).width;
  };
}

export function scrollSpeed(widthPx: number, screen: ScreenConfig): number {
  return (screen.widthPx + widthPx) / screen.scrollDurationS;
}

/**
 * Closed-form scroll-collision test for two same-lane items.
 *
 * With the earlier entrant as a: no collision requires a's tail to have
 * cleared the right edge when b enters, and b never catching a before a
 * leaves the left edge.
 */
export function collides(
  a: LaneAssignment,
  b: LaneAssignment,
  screen: ScreenConfig,
): boolean {
  if (b.enter_s < a.enter_s) {
    [a, b] = [b, a];
  }
  const dt = b.enter_s - a.enter_s;
  const tailClear = a.speed_px_s * dt >= a.width_px;
  const noOvertake =
    b.speed_px_s * (a.enter_s + screen.scrollDurationS - b.enter_s) <=
    screen.widthPx;
  return !(tailClear && noOvertake);
}
