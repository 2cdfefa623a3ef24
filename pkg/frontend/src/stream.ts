/**
 * Playback stream client. The socket is injected so the browser uses the
 * native WebSocket and tests can use `ws` or a fake.
 */

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err: unknown) => void) | null;
  onopen: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface Frame {
  type: "frame";
  tick: number;
  t: number;
  poses: number[][];
  events: { pair: number[]; time: number; penetration: number }[];
}

export interface StreamCallbacks {
  onMeta?: (meta: { ticks: number; tick_rate_hz: number; n_agents: number;
                    revision: number }) => void;
  onFrame?: (frame: Frame) => void;
  onSummary?: (summary: { metrics: Record<string, number>; ticks: number }) => void;
  onPaused?: (tick: number) => void;
  onError?: (message: string) => void;
}

export class PlaybackClient {
  private sock: SocketLike | null = null;

  constructor(private factory: SocketFactory, private callbacks: StreamCallbacks) {}

  connect(url: string): Promise<void> {
    return new Promise((resolve, reject) => {
      const sock = this.factory(url);
      this.sock = sock;
      sock.onopen = () => resolve();
      sock.onerror = (e) => reject(e);
      sock.onclose = () => { this.sock = null; };
      sock.onmessage = (ev) => {
        let msg: any;
        try {
          msg = JSON.parse(String(ev.data));
        } catch {
          this.callbacks.onError?.("malformed stream message");
          return;
        }
        if (msg.type === "meta") this.callbacks.onMeta?.(msg);
        else if (msg.type === "frame") this.callbacks.onFrame?.(msg);
        else if (msg.type === "summary") this.callbacks.onSummary?.(msg);
        else if (msg.type === "paused") this.callbacks.onPaused?.(msg.tick);
        else if (msg.type === "error") this.callbacks.onError?.(msg.error);
      };
    });
  }

  private send(obj: Record<string, unknown>): void {
    if (!this.sock) throw new Error("stream not connected");
    this.sock.send(JSON.stringify(obj));
  }

  play(stride = 1, from?: number): void {
    const msg: Record<string, unknown> = { cmd: "play", stride };
    if (from !== undefined) msg.from = from;
    this.send(msg);
  }

  pause(): void {
    this.send({ cmd: "pause" });
  }

  seek(tick: number): void {
    this.send({ cmd: "seek", tick });
  }

  close(): void {
    if (this.sock) {
      try {
        this.send({ cmd: "close" });
      } catch {
        /* already closing */
      }
      this.sock.close();
      this.sock = null;
    }
  }
}
