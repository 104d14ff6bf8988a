import assert from "node:assert/strict";
import { test } from "node:test";

import type { FeedEvent } from "../src/api.js";
import { FeedStore } from "../src/feed.js";

function ev(seq: number, extra: Partial<FeedEvent> = {}): FeedEvent {
  return { seq, t: seq, kind: "effect", name: "LockSet", text: `${seq}`, ...extra };
}

test("cursor advances with applied events", () => {
  const store = new FeedStore();
  const fresh = store.apply([ev(1), ev(2), ev(3)]);
  assert.equal(fresh.length, 3);
  assert.equal(store.cursor, 3);
});

test("overlapping polls do not duplicate", () => {
  const store = new FeedStore();
  store.apply([ev(1), ev(2)]);
  const fresh = store.apply([ev(2), ev(3)]);
  assert.deepEqual(fresh.map((e) => e.seq), [3]);
  assert.deepEqual(store.items.map((e) => e.seq), [1, 2, 3]);
});

test("items ordered by seq even if a batch is shuffled", () => {
  const store = new FeedStore();
  store.apply([ev(4), ev(2), ev(9)]);
  assert.deepEqual(store.items.map((e) => e.seq), [2, 4, 9]);
  assert.equal(store.cursor, 9);
});

test("notable filter keeps alerts and device actions", () => {
  assert.ok(FeedStore.isNotable(ev(1, { notification: "unknown_user" })));
  assert.ok(FeedStore.isNotable(ev(2, { name: "LockSet" })));
  assert.ok(!FeedStore.isNotable(ev(3, { kind: "event", name: "Tick" })));
  assert.ok(!FeedStore.isNotable(ev(4, { kind: "effect", name: "LcdShow" })));
});
