/** Wire types mirroring the service's JSON responses. */

export type DanmakuType =
  | "emotion_expression"
  | "compliment"
  | "encouragement"
  | "discussion"
  | "highlight"
  | "qa"
  | "summary"
  | "user_posted";

export type Category = "content" | "emotion";

export type PositionKind = "scroll" | "top" | "bottom";

export interface Danmaku {
  id: string;
  persona: string | null;
  time_s: number;
  type: DanmakuType;
  category: Category;
  text: string;
  color: string; // "#rrggbb"
  position: PositionKind;
  reply_to: string | null;
}

export interface Track {
  video_id: string;
  generated_at: string | null;
  model_id: string | null;
  config_snapshot: Record<string, unknown> | null;
  danmaku: Danmaku[];
}

export interface LaneAssignment {
  danmaku_id: string;
  lane: number;
  enter_s: number;
  exit_s: number;
  width_px: number;
  speed_px_s: number; // 0 for pinned
  pinned: "top" | "bottom" | null;
}

export interface VideoSummary {
  id: string;
  title: string;
  course: string;
  duration_s: number;
}

export interface PostRequest {
  time_s: number;
  text: string;
  color?: string;
  position?: PositionKind;
}

export interface StreamDanmaku extends Danmaku {
  replay: boolean;
}

export type StreamEvent =
  | { kind: "danmaku"; danmaku: StreamDanmaku }
  | { kind: "end" }
  | { kind: "expired" };
