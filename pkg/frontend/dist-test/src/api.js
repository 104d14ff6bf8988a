/** Typed client for the entryway HTTP/JSON service. */
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function parseError(resp) {
    let message = `HTTP ${resp.status}`;
    try {
        const doc = (await resp.json());
        if (doc.error)
            message = doc.error;
    }
    catch {
        /* non-JSON error body; keep the status text */
    }
    return new ApiError(resp.status, message);
}
export class ApiClient {
    constructor(baseUrl = "", adminToken = "") {
        this.baseUrl = baseUrl;
        this.adminToken = adminToken;
    }
    async getJson(path) {
        const resp = await fetch(this.baseUrl + path);
        if (!resp.ok)
            throw await parseError(resp);
        return (await resp.json());
    }
    async post(path, body, headers = {}) {
        const resp = await fetch(this.baseUrl + path, { method: "POST", body, headers });
        if (!resp.ok)
            throw await parseError(resp);
        return (await resp.json());
    }
    getState() {
        return this.getJson("/state");
    }
    getEvents(since) {
        return this.getJson(`/events?since=${since}`);
    }
    postMotion() {
        return this.post("/door/motion", null);
    }
    postFrame(pgmBytes) {
        const body = new Uint8Array(pgmBytes); // detached copy keeps BodyInit happy
        return this.post("/door/frame", body, { "Content-Type": "image/x-portable-graymap" });
    }
    postKey(key) {
        return this.post("/door/key", JSON.stringify({ key }), { "Content-Type": "application/json" });
    }
    adminCommand(text) {
        return this.post("/admin/command", JSON.stringify({ text }), {
            "Content-Type": "application/json",
            "X-Admin-Token": this.adminToken,
        });
    }
    photoUrl(name) {
        return `${this.baseUrl}/photos/${name}`;
    }
    async fetchPhoto(name) {
        const resp = await fetch(this.photoUrl(name));
        if (!resp.ok)
            throw await parseError(resp);
        return new Uint8Array(await resp.arrayBuffer());
    }
}
