/** Console application: one poll loop (single in-flight request, 1 s
 * interval), one action queue (user actions run strictly in order), and two
 * views over the same service. Reloading reconstructs everything from
 * /state plus an /events replay — the only client state is the seq cursor. */
import { ApiClient, ApiError } from "./api.js";
import { bindAdminView, renderAdminView, renderFeedItem, updateModeToggle } from "./adminView.js";
import { addUserCommand, lockCommand, modeCommand } from "./commands.js";
import { bindDoorPanel, renderDoorPanel, updateDoorPanel } from "./doorPanel.js";
import { FeedStore } from "./feed.js";
import { canvasToPgm, decodePgm, drawToCanvas } from "./pgm.js";
export class ConsoleApp {
    constructor(opts) {
        this.feed = new FeedStore();
        this.state = null;
        this.stale = false;
        this.lastReply = "";
        this.pollInFlight = false;
        this.timer = null;
        this.chain = Promise.resolve();
        this.doc = opts.document;
        this.api = opts.api;
        this.pollIntervalMs = opts.pollIntervalMs ?? 1000;
        const mount = this.doc.getElementById("app");
        if (!mount)
            throw new Error("missing #app mount point");
        this.root = mount;
    }
    /** First render; needs one /state round trip. */
    async init() {
        this.state = await this.api.getState();
        this.root.innerHTML =
            `<div class="banner" id="stale-banner" hidden>connection lost; showing stale state</div>` +
                renderDoorPanel(this.state) +
                renderAdminView(this.state);
        bindDoorPanel(this.root, {
            pressKey: (k) => this.pressKey(k),
            triggerMotion: () => this.triggerMotion(),
            submitFrameBytes: (b) => this.submitFrameBytes(b),
            webcamSnapshot: () => this.webcamSnapshot(),
        });
        bindAdminView(this.root, {
            sendCommand: (t) => this.sendCommand(t),
            registerStranger: (name, photo) => this.registerStranger(name, photo),
            toggleMode: (m) => this.toggleMode(m),
            setLock: (locked) => this.setLock(locked),
        });
    }
    start() {
        if (this.timer === null) {
            this.timer = setInterval(() => void this.pollOnce(), this.pollIntervalMs);
        }
    }
    stop() {
        if (this.timer !== null) {
            clearInterval(this.timer);
            this.timer = null;
        }
    }
    // -- polling ---------------------------------------------------------------
    async pollOnce() {
        if (this.pollInFlight)
            return;
        this.pollInFlight = true;
        try {
            const page = await this.api.getEvents(this.feed.cursor);
            const fresh = this.feed.apply(page.events);
            this.renderFeedItems(fresh);
            this.applyState(await this.api.getState());
            this.setStale(false);
        }
        catch {
            this.setStale(true); // cursor untouched: nothing is lost, only delayed
        }
        finally {
            this.pollInFlight = false;
        }
    }
    setStale(stale) {
        this.stale = stale;
        const banner = this.doc.getElementById("stale-banner");
        if (banner)
            banner.hidden = !stale;
    }
    applyState(state) {
        this.state = state;
        updateDoorPanel(this.root, state);
        updateModeToggle(this.root, state);
    }
    renderFeedItems(fresh) {
        const list = this.doc.getElementById("feed");
        if (!list)
            return;
        for (const ev of fresh) {
            if (!FeedStore.isNotable(ev))
                continue;
            list.insertAdjacentHTML("afterbegin", renderFeedItem(ev));
            const item = list.firstElementChild;
            if (!item)
                continue;
            const canvas = item.querySelector("canvas[data-photo]");
            if (canvas)
                void this.loadPhoto(canvas);
            item.querySelector(".register-button")?.addEventListener("click", () => {
                const name = item.querySelector(".register-name")?.value.trim() || "visitor";
                this.registerStranger(name, canvas?.dataset.photo ?? "");
            });
        }
    }
    async loadPhoto(canvas) {
        try {
            const img = decodePgm(await this.api.fetchPhoto(canvas.dataset.photo ?? ""));
            canvas.dataset.decoded = `${img.width}x${img.height}`;
            drawToCanvas(img, canvas); // no-op where 2d contexts are unavailable
        }
        catch {
            canvas.dataset.decoded = "error";
        }
    }
    // -- actions (strictly serialized; keypad order is press order) ---------------
    enqueue(work) {
        this.chain = this.chain.then(work).catch((err) => this.showError(err));
        return this.chain;
    }
    showError(err) {
        const message = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
        const hint = this.doc.getElementById("door-hint");
        if (hint) {
            hint.textContent =
                err instanceof ApiError && err.status === 409
                    ? `${message} — trigger motion first`
                    : message;
        }
    }
    showReply(reply) {
        this.lastReply = reply;
        const pre = this.doc.getElementById("command-reply");
        if (pre)
            pre.textContent = reply;
    }
    pressKey(key) {
        return this.enqueue(async () => {
            const resp = await this.api.postKey(key);
            this.applyState(resp.state);
        });
    }
    triggerMotion() {
        return this.enqueue(async () => {
            const resp = await this.api.postMotion();
            this.applyState(resp.state);
        });
    }
    submitFrameBytes(bytes) {
        return this.enqueue(async () => {
            const preview = this.doc.getElementById("frame-preview");
            if (preview) {
                try {
                    drawToCanvas(decodePgm(bytes), preview);
                }
                catch {
                    /* preview only; the server validates for real */
                }
            }
            const resp = await this.api.postFrame(bytes);
            this.applyState(resp.state);
            const hint = this.doc.getElementById("door-hint");
            if (hint)
                hint.textContent = `frame ${resp.ref} submitted`;
        });
    }
    webcamSnapshot() {
        void this.enqueue(async () => {
            const media = this.doc.defaultView?.navigator?.mediaDevices;
            if (!media?.getUserMedia)
                throw new Error("webcam unavailable in this browser");
            const stream = await media.getUserMedia({ video: true });
            const video = this.doc.createElement("video");
            video.srcObject = stream;
            await video.play();
            const canvas = this.doc.createElement("canvas");
            canvas.width = video.videoWidth;
            canvas.height = video.videoHeight;
            canvas.getContext("2d")?.drawImage(video, 0, 0);
            stream.getTracks().forEach((t) => t.stop());
            const resp = await this.api.postFrame(canvasToPgm(canvas));
            this.applyState(resp.state);
        });
    }
    sendCommand(text) {
        return this.enqueue(async () => {
            const reply = await this.api.adminCommand(text);
            this.showReply(reply.reply);
            this.applyState(reply.state);
        });
    }
    registerStranger(name, _photo) {
        return this.sendCommand(addUserCommand(name));
    }
    toggleMode(current) {
        return this.sendCommand(modeCommand(current === "full_face" ? "occluded" : "full_face"));
    }
    setLock(locked) {
        return this.sendCommand(lockCommand(locked));
    }
    /** Wait for every queued action to finish (tests and teardown). */
    idle() {
        return this.chain;
    }
}
export async function mountApp(doc, baseUrl = "", token = "") {
    const app = new ConsoleApp({ document: doc, api: new ApiClient(baseUrl, token) });
    await app.init();
    app.start();
    return app;
}
