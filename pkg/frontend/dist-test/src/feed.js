/** Event-feed bookkeeping: a seq cursor plus dedupe, so repeated polls of an
 * overlapping window never duplicate items and a failed poll never loses
 * data (the cursor only advances on successfully applied batches). */
export class FeedStore {
    constructor() {
        this.cursor = 0;
        this.items = [];
        this.seen = new Set();
    }
    /** Returns the genuinely new events, in seq order. */
    apply(events) {
        const fresh = [];
        for (const ev of [...events].sort((a, b) => a.seq - b.seq)) {
            if (this.seen.has(ev.seq))
                continue;
            this.seen.add(ev.seq);
            this.items.push(ev);
            if (ev.seq > this.cursor)
                this.cursor = ev.seq;
            fresh.push(ev);
        }
        return fresh;
    }
    /** Feed rows worth showing to the owner (alerts and device actions). */
    static isNotable(ev) {
        if (ev.notification)
            return true;
        return ev.kind === "effect" && (ev.name === "LockSet" || ev.name === "SavePhoto");
    }
}
