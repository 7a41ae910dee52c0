/**
 * WebSocket wiring between the console state and the ground station.
 * One JSON envelope per text frame, decoded strictly; anything the
 * codec rejects surfaces as a toast rather than breaking the session.
 */
import { decode, encode, ProtocolError, type Envelope } from "./protocol.js";
import type { ConsoleState } from "./state.js";

export class ConsoleClient {
  private socket: WebSocket | null = null;

  constructor(private state: ConsoleState, private url: string) {}

  connect(): void {
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.state.setConnected(true);
      this.send(this.state.helloEnvelope());
    };
    socket.onmessage = (message: MessageEvent<string>) => {
      try {
        this.state.applyEnvelope(decode(message.data));
      } catch (err) {
        if (err instanceof ProtocolError) {
          this.state.toast("error", `bad frame from server: ${err.message}`);
        } else {
          throw err;
        }
      }
    };
    socket.onclose = () => {
      this.state.setConnected(false);
      this.socket = null;
      setTimeout(() => this.connect(), 2000);
    };
    socket.onerror = () => socket.close();
  }

  /** Send a command envelope; no-op (false) while disconnected. */
  send(env: Envelope | null): boolean {
    if (env === null) return false;
    if (this.socket === null || this.socket.readyState !== WebSocket.OPEN) return false;
    this.socket.send(encode(env));
    return true;
  }
}
