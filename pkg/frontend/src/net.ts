// Connection wrapper around a WebSocket-like object. The socket type is
// structural so tests can drive the same code with a Node websocket
// implementation against a real server.

import {
  EndMessage,
  ErrorMessage,
  ProtocolError,
  ServerHello,
  StateFrame,
  ToggleKey,
  helloMessage,
  inputMessage,
  parseServerMessage,
  toggleMessage,
} from "./protocol.js";
import type { ConnectionStatus } from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(code?: number): void;
  addEventListener(type: string, listener: (event: any) => void): void;
}

export interface ConnectionHandlers {
  onHello?(hello: ServerHello): void;
  onState?(frame: StateFrame): void;
  onServerError?(error: ErrorMessage): void;
  onEnd?(end: EndMessage): void;
  onStatus?(status: ConnectionStatus): void;
  onProtocolError?(error: ProtocolError): void;
}

export class Connection {
  status: ConnectionStatus = "connecting";

  constructor(
    private readonly socket: SocketLike,
    private readonly handlers: ConnectionHandlers,
    config?: Record<string, number | boolean>,
  ) {
    socket.addEventListener("open", () => {
      this.status = "open";
      handlers.onStatus?.("open");
      socket.send(helloMessage(config));
    });
    socket.addEventListener("message", (event) => {
      const raw =
        typeof event.data === "string" ? event.data : String(event.data);
      this.receive(raw);
    });
    socket.addEventListener("close", () => {
      if (this.status === "closed") return;
      this.status = "closed";
      handlers.onStatus?.("closed");
    });
    socket.addEventListener("error", () => {
      // the close event follows and carries the state change
    });
  }

  private receive(raw: string): void {
    let msg;
    try {
      msg = parseServerMessage(raw);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.handlers.onProtocolError?.(err);
        return;
      }
      throw err;
    }
    switch (msg.type) {
      case "hello":
        this.handlers.onHello?.(msg);
        break;
      case "state":
        this.handlers.onState?.(msg);
        break;
      case "error":
        this.handlers.onServerError?.(msg);
        break;
      case "end":
        this.handlers.onEnd?.(msg);
        break;
    }
  }

  /** Steering update; returns false when disconnected (input dropped). */
  sendInput(tick: number, dx: number, dy: number): boolean {
    if (this.status !== "open") return false;
    this.socket.send(inputMessage(tick, dx, dy));
    return true;
  }

  sendToggle(tick: number, key: ToggleKey, value: boolean | number): boolean {
    if (this.status !== "open") return false;
    this.socket.send(toggleMessage(tick, key, value));
    return true;
  }

  close(): void {
    this.status = "closed";
    this.socket.close();
  }
}
