/** Thin typed client for the danmaku service REST + event-stream API. */

import type {
  Danmaku,
  PostRequest,
  StreamDanmaku,
  StreamEvent,
  Track,
  VideoSummary,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return resp.json();
  }

  listVideos(): Promise<VideoSummary[]> {
    return this.request("/videos") as Promise<VideoSummary[]>;
  }

  getTrack(videoId: string): Promise<Track> {
    return this.request(`/videos/${videoId}/track`) as Promise<Track>;
  }

  getDanmaku(videoId: string, fromS: number, toS: number): Promise<Danmaku[]> {
    return this.request(
      `/videos/${videoId}/danmaku?from=${fromS}&to=${toS}`,
    ) as Promise<Danmaku[]>;
  }

  postDanmaku(videoId: string, req: PostRequest): Promise<Danmaku> {
    return this.request(`/videos/${videoId}/danmaku`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    }) as Promise<Danmaku>;
  }

  updateCursor(videoId: string, session: string, positionS: number): Promise<void> {
    return this.request(`/videos/${videoId}/cursor`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session, position_s: positionS }),
    }) as Promise<void>;
  }

  startGeneration(videoId: string, seed = 0): Promise<{ job_id: string }> {
    return this.request(`/videos/${videoId}/generate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seed }),
    }) as Promise<{ job_id: string }>;
  }

  getJob(jobId: string): Promise<{ state: string; error: string | null }> {
    return this.request(`/jobs/${jobId}`) as Promise<{
      state: string;
      error: string | null;
    }>;
  }

  /** Server-sent delivery stream; yields until the server signals the end. */
  async *stream(videoId: string, session: string): AsyncGenerator<StreamEvent> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/videos/${videoId}/stream?session=${session}`,
    );
    if (!resp.ok || !resp.body) {
      throw new ApiError(resp.status, "stream unavailable");
    }
    yield* parseSse(resp.body);
  }
}

/** Incremental parser for a text/event-stream body. */
export async function* parseSse(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<StreamEvent> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { value, done } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let sep;
    while ((sep = buffer.indexOf("\n\n")) >= 0) {
      const block = buffer.slice(0, sep);
      buffer = buffer.slice(sep + 2);
      const event = blockToEvent(block);
      if (event) {
        yield event;
        if (event.kind !== "danmaku") return;
      }
    }
  }
}

function blockToEvent(block: string): StreamEvent | null {
  let event = "message";
  let data = "";
  for (const line of block.split("\n")) {
    if (line.startsWith("event: ")) event = line.slice(7);
    else if (line.startsWith("data: ")) data += line.slice(6);
  }
  switch (event) {
    case "danmaku":
      return { kind: "danmaku", danmaku: JSON.parse(data) as StreamDanmaku };
    case "end":
      return { kind: "end" };
    case "expired":
      return { kind: "expired" };
    default:
      return null;
  }
}
