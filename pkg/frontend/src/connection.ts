// WebSocket transport: sends protocol bodies as text frames and surfaces
// decoded server messages. Reconnecting starts a fresh session (the server
// is single-session; state resets on hello).

import { ClientMsg, ServerMsg, decodeBody, encodeBody } from "./protocol.js";

export interface ConnectionEvents {
  onMessage: (msg: ServerMsg) => void;
  onOpen: () => void;
  onClose: (reason: string) => void;
}

export class Connection {
  private ws: WebSocket | null = null;

  constructor(private events: ConnectionEvents) {}

  connect(url: string): void {
    this.close();
    const ws = new WebSocket(url);
    this.ws = ws;
    ws.onopen = () => this.events.onOpen();
    ws.onmessage = (ev) => {
      try {
        this.events.onMessage(decodeBody(String(ev.data)) as unknown as ServerMsg);
      } catch {
        // tolerate malformed frames; the server closes on real violations
      }
    };
    ws.onclose = (ev) => this.events.onClose(ev.reason || "connection closed");
    ws.onerror = () => this.events.onClose("connection error");
  }

  send(msg: ClientMsg): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(encodeBody(msg as unknown as Record<string, unknown>));
    return true;
  }

  close(): void {
    if (this.ws) {
      this.ws.onclose = null;
      this.ws.close();
      this.ws = null;
    }
  }

  get open(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }
}

export function defaultServiceUrl(): string {
  const loc = typeof location !== "undefined" ? location : null;
  if (loc && loc.host) return `ws://${loc.host}`;
  return "ws://127.0.0.1:7465";
}
