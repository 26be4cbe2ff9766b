import type { UiAction } from "./actions.js";

export interface EventContext {
  category?: string;
  record_id?: string;
  query?: string;
  has_links?: boolean;
  target_category?: string;
}

const CLIENT_ID_KEY = "datanexus.client_id";

function randomId(): string {
  if (typeof crypto !== "undefined" && "randomUUID" in crypto) {
    return crypto.randomUUID();
  }
  return `c-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 10)}`;
}

/** Stable anonymous id, minted once per browser profile. */
export function clientId(storage: Storage): string {
  let id = storage.getItem(CLIENT_ID_KEY);
  if (!id) {
    id = randomId();
    storage.setItem(CLIENT_ID_KEY, id);
  }
  return id;
}

export class Telemetry {
  constructor(
    private readonly base: string = "",
    private readonly storage: Storage = localStorage,
    private readonly retryDelayMs: number = 300,
  ) {}

  /** Fire-and-forget event post: one retry on any failure, then the
   * event is dropped. Never throws, so callers never wait on it.
   */
  emit(action: UiAction, context: EventContext = {}): Promise<void> {
    const doc: Record<string, unknown> = {
      action,
      client_id: clientId(this.storage),
      timestamp: new Date().toISOString(),
    };
    for (const [key, value] of Object.entries(context)) {
      if (value !== undefined) doc[key] = value;
    }
    return this.post(JSON.stringify(doc)).catch(() => undefined);
  }

  private async post(body: string, attempt = 0): Promise<void> {
    try {
      const response = await fetch(`${this.base}/api/log`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body,
        keepalive: true,
      });
      if (!response.ok) throw new Error(`status ${response.status}`);
    } catch (error) {
      if (attempt === 0) {
        await new Promise((resolve) => setTimeout(resolve, this.retryDelayMs));
        return this.post(body, 1);
      }
      // second failure: drop silently
    }
  }
}
