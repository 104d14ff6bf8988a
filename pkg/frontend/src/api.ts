/** Typed client for the entryway HTTP/JSON service. */

export interface AwaitInfo {
  user_id: string;
  attempts_used: number;
  deadline: number;
  entered_digits: number;
}

export interface DoorState {
  phase: string;
  locked: boolean;
  lcd: [string, string];
  mode: string;
  latest_seq: number;
  await: AwaitInfo | null;
}

export interface FeedEvent {
  seq: number;
  t: number;
  kind: string; // event | phase | effect | noop
  name?: string;
  text: string;
  notification?: string; // unknown_user | door_unlocked | enrollment_done | command_ack
  photo?: string;
  user_id?: string;
  locked?: boolean;
  lines?: [string, string];
  phase?: string;
  mode?: string;
  time?: number;
  frames?: number;
  text_body?: string;
}

export interface EventsPage {
  events: FeedEvent[];
  latest: number;
}

export interface CommandReply {
  ok: boolean;
  reply: string;
  photo: string | null;
  state: DoorState;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let message = `HTTP ${resp.status}`;
  try {
    const doc = (await resp.json()) as { error?: string };
    if (doc.error) message = doc.error;
  } catch {
    /* non-JSON error body; keep the status text */
  }
  return new ApiError(resp.status, message);
}

export class ApiClient {
  constructor(
    public baseUrl: string = "",
    public adminToken: string = "",
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body: BodyInit | null, headers: Record<string, string> = {}): Promise<T> {
    const resp = await fetch(this.baseUrl + path, { method: "POST", body, headers });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  getState(): Promise<DoorState> {
    return this.getJson<DoorState>("/state");
  }

  getEvents(since: number): Promise<EventsPage> {
    return this.getJson<EventsPage>(`/events?since=${since}`);
  }

  postMotion(): Promise<{ ok: boolean; state: DoorState }> {
    return this.post("/door/motion", null);
  }

  postFrame(pgmBytes: Uint8Array): Promise<{ ok: boolean; ref: string; state: DoorState }> {
    const body = new Uint8Array(pgmBytes); // detached copy keeps BodyInit happy
    return this.post("/door/frame", body, { "Content-Type": "image/x-portable-graymap" });
  }

  postKey(key: string): Promise<{ ok: boolean; state: DoorState }> {
    return this.post("/door/key", JSON.stringify({ key }), { "Content-Type": "application/json" });
  }

  adminCommand(text: string): Promise<CommandReply> {
    return this.post("/admin/command", JSON.stringify({ text }), {
      "Content-Type": "application/json",
      "X-Admin-Token": this.adminToken,
    });
  }

  photoUrl(name: string): string {
    return `${this.baseUrl}/photos/${name}`;
  }

  async fetchPhoto(name: string): Promise<Uint8Array> {
    const resp = await fetch(this.photoUrl(name));
    if (!resp.ok) throw await parseError(resp);
    return new Uint8Array(await resp.arrayBuffer());
  }
}
