/** Danmaku display controls: master switch and per-type visibility. */

import type { Category, Danmaku, DanmakuType } from "./types.js";

export const EMOTION_TYPES: readonly DanmakuType[] = [
  "emotion_expression",
  "compliment",
  "encouragement",
];

export const CONTENT_TYPES: readonly DanmakuType[] = [
  "discussion",
  "highlight",
  "qa",
  "summary",
  "user_posted",
];

export const ALL_TYPES: readonly DanmakuType[] = [
  ...CONTENT_TYPES,
  ...EMOTION_TYPES,
];

export class ToggleState {
  danmakuEnabled = true;
  private readonly enabled = new Set<DanmakuType>(ALL_TYPES);

  setType(type: DanmakuType, on: boolean): void {
    if (on) this.enabled.add(type);
    else this.enabled.delete(type);
  }

  setCategory(category: Category, on: boolean): void {
    const types = category === "emotion" ? EMOTION_TYPES : CONTENT_TYPES;
    for (const t of types) this.setType(t, on);
  }

  typeEnabled(type: DanmakuType): boolean {
    return this.enabled.has(type);
  }

  isVisible(d: Pick<Danmaku, "type">): boolean {
    return this.danmakuEnabled && this.enabled.has(d.type);
  }

  hiddenTypes(): DanmakuType[] {
    return ALL_TYPES.filter((t) => !this.enabled.has(t));
  }
}
