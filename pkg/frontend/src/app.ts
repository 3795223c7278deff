/** Browser wiring: video player, danmaku overlay, controls and sidebar. */

import { ApiClient } from "./client.js";
import { PlaybackClock } from "./clock.js";
import { ToggleState, EMOTION_TYPES, CONTENT_TYPES } from "./controls.js";
import { DEFAULT_SCREEN, ScreenConfig, canvasMeasurer } from "./geometry.js";
import { layout } from "./layout.js";
import { frame, indexTrack } from "./overlay.js";
import type { Danmaku, LaneAssignment, PositionKind, Track } from "./types.js";

interface PlayerElements {
  root: HTMLElement;
  video: HTMLVideoElement;
  overlay: HTMLElement;
  sidebar: HTMLElement;
  postForm: HTMLFormElement;
  errorBox: HTMLElement;
}

export class DanmakuPlayer {
  private readonly clock = new PlaybackClock();
  private readonly toggles = new ToggleState();
  private assignments: LaneAssignment[] = [];
  private byId = new Map<string, Danmaku>();
  private track: Track | null = null;
  private videoId: string | null = null;
  private duration = 0;
  private readonly session = `ui-${Math.random().toString(36).slice(2, 10)}`;
  private readonly screen: ScreenConfig;

  constructor(
    private readonly api: ApiClient,
    private readonly els: PlayerElements,
  ) {
    this.screen = { ...DEFAULT_SCREEN, widthPx: els.overlay.clientWidth || 1280 };
    this.wireControls();
  }

  async start(): Promise<void> {
    const videos = await this.api.listVideos();
    this.renderSidebar(videos.map((v) => [v.id, v.title]));
    if (videos.length > 0) await this.loadVideo(videos[0]!.id, videos[0]!.duration_s);
    requestAnimationFrame(() => this.tick());
  }

  async loadVideo(videoId: string, durationS: number): Promise<void> {
    this.videoId = videoId;
    this.duration = durationS;
    this.track = await this.api.getTrack(videoId);
    this.byId = indexTrack(this.track);
    const canvas = document.createElement("canvas").getContext("2d");
    this.assignments = layout(
      this.track,
      this.screen,
      canvas ? canvasMeasurer(canvas) : undefined,
    );
    this.clock.seek(0);
    void this.pumpStream();
  }

  private async pumpStream(): Promise<void> {
    if (!this.videoId || !this.track) return;
    const videoId = this.videoId;
    const heartbeat = setInterval(() => {
      void this.api
        .updateCursor(videoId, this.session, this.clock.currentTime())
        .catch((e) => this.showError(e));
    }, 1000);
    try {
      for await (const event of this.api.stream(videoId, this.session)) {
        if (event.kind !== "danmaku" || this.videoId !== videoId) continue;
        if (this.byId.has(event.danmaku.id)) continue;
        // live additions (own posts, other viewers) join the local layout
        this.track.danmaku.push(event.danmaku);
        this.track.danmaku.sort((a, b) => a.time_s - b.time_s);
        this.byId.set(event.danmaku.id, event.danmaku);
        this.assignments = layout(this.track, this.screen);
      }
    } catch (e) {
      this.showError(e);
    } finally {
      clearInterval(heartbeat);
    }
  }

  private tick(): void {
    const t = Math.min(this.clock.currentTime(), this.duration);
    this.els.overlay.replaceChildren(
      ...frame(this.assignments, this.byId, t, this.screen, this.toggles).map(
        (item) => {
          const div = document.createElement("div");
          div.className = `danmaku danmaku-${item.band}`;
          div.textContent = item.danmaku.text;
          div.style.color = item.danmaku.color;
          div.style.left = `${item.x}px`;
          div.style.top =
            item.band === "bottom"
              ? `calc(100% - ${(item.lane + 1) * this.screen.laneHeightPx}px)`
              : `${item.lane * this.screen.laneHeightPx}px`;
          return div;
        },
      ),
    );
    requestAnimationFrame(() => this.tick());
  }

  private wireControls(): void {
    const { video, postForm, root } = this.els;
    video.addEventListener("play", () => this.clock.play());
    video.addEventListener("pause", () => this.clock.pause());
    video.addEventListener("ratechange", () => this.clock.setRate(video.playbackRate));
    video.addEventListener("seeked", () => this.clock.seek(video.currentTime));

    root.querySelector("#toggle-danmaku")?.addEventListener("change", (e) => {
      this.toggles.danmakuEnabled = (e.target as HTMLInputElement).checked;
    });
    root.querySelector("#toggle-emotion")?.addEventListener("change", (e) => {
      this.toggles.setCategory("emotion", (e.target as HTMLInputElement).checked);
    });
    root.querySelector("#toggle-content")?.addEventListener("change", (e) => {
      this.toggles.setCategory("content", (e.target as HTMLInputElement).checked);
    });
    for (const type of [...EMOTION_TYPES, ...CONTENT_TYPES]) {
      root.querySelector(`#toggle-${type}`)?.addEventListener("change", (e) => {
        this.toggles.setType(type, (e.target as HTMLInputElement).checked);
      });
    }

    postForm.addEventListener("submit", (e) => {
      e.preventDefault();
      if (!this.videoId) return;
      const data = new FormData(postForm);
      void this.api
        .postDanmaku(this.videoId, {
          time_s: this.clock.currentTime(),
          text: String(data.get("text") ?? ""),
          color: String(data.get("color") ?? "#ffffff"),
          position: String(data.get("position") ?? "scroll") as PositionKind,
        })
        .then(() => postForm.reset())
        .catch((err) => this.showError(err));
    });
  }

  private renderSidebar(entries: Array<[string, string]>): void {
    this.els.sidebar.replaceChildren(
      ...entries.map(([id, title]) => {
        const li = document.createElement("li");
        const a = document.createElement("a");
        a.href = "#";
        a.textContent = title;
        a.addEventListener("click", (e) => {
          e.preventDefault();
          void this.api.listVideos().then((videos) => {
            const v = videos.find((x) => x.id === id);
            if (v) void this.loadVideo(v.id, v.duration_s);
          });
        });
        li.appendChild(a);
        return li;
      }),
    );
  }

  private showError(err: unknown): void {
    this.els.errorBox.textContent = err instanceof Error ? err.message : String(err);
  }
}
