// Server-sent-events consumption. The parser is incremental and shared by
// the live connection and the test fixtures, so the browser path and the
// test path interpret the byte stream identically.

export interface SSEFrame {
  event: string;
  data: string;
}

export class SSEParser {
  private buffer = "";

  /** Feed one chunk of stream text; returns every frame completed by it. */
  feed(chunk: string): SSEFrame[] {
    this.buffer += chunk.replace(/\r\n/g, "\n").replace(/\r/g, "\n");
    const frames: SSEFrame[] = [];
    let boundary = this.buffer.indexOf("\n\n");
    while (boundary >= 0) {
      const block = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      const frame = parseBlock(block);
      if (frame) frames.push(frame);
      boundary = this.buffer.indexOf("\n\n");
    }
    return frames;
  }
}

function parseBlock(block: string): SSEFrame | null {
  let event = "message";
  const data: string[] = [];
  for (const line of block.split("\n")) {
    if (line.startsWith(":")) continue; // comment / keepalive
    const colon = line.indexOf(":");
    if (colon < 0) continue;
    const field = line.slice(0, colon);
    let value = line.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "event") event = value;
    else if (field === "data") data.push(value);
  }
  if (data.length === 0) return null;
  return { event, data: data.join("\n") };
}

export type ConnectionStatus = "connecting" | "open" | "reconnecting";

export interface StreamHandlers {
  onFrame: (frame: SSEFrame) => void;
  onStatus: (status: ConnectionStatus) => void;
  /** Called when a reconnect happened: frames may have been missed. */
  onGap: () => void;
}

const RECONNECT_BASE_MS = 500;
const RECONNECT_MAX_MS = 10_000;

export function reconnectDelay(attempt: number): number {
  return Math.min(RECONNECT_MAX_MS, RECONNECT_BASE_MS * 2 ** attempt);
}

export interface EventStream {
  close(): void;
}

/**
 * Stream a session's SSE endpoint via fetch. Reconnects automatically with
 * exponential backoff; every reconnect is reported through onGap so views
 * can show a gap indicator (the server also emits explicit `gap` frames
 * when it had to drop events for a slow consumer).
 */
export function openEventStream(url: string, handlers: StreamHandlers): EventStream {
  let closed = false;
  let attempt = 0;
  let controller: AbortController | null = null;

  async function run(): Promise<void> {
    while (!closed) {
      handlers.onStatus(attempt === 0 ? "connecting" : "reconnecting");
      controller = new AbortController();
      try {
        const resp = await fetch(url, {
          headers: { Accept: "text/event-stream" },
          signal: controller.signal,
        });
        if (!resp.ok || !resp.body) throw new Error(`stream HTTP ${resp.status}`);
        handlers.onStatus("open");
        if (attempt > 0) handlers.onGap();
        attempt = 0;
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        const parser = new SSEParser();
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          for (const frame of parser.feed(decoder.decode(value, { stream: true }))) {
            handlers.onFrame(frame);
          }
        }
        throw new Error("stream ended");
      } catch (err) {
        if (closed) return;
        await sleep(reconnectDelay(attempt));
        attempt += 1;
      }
    }
  }

  void run();
  return {
    close() {
      closed = true;
      controller?.abort();
    },
  };
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
