import assert from "node:assert/strict";
import { test } from "node:test";

import {
  COMMAND_PALETTE,
  addUserCommand,
  changePinCommand,
  lockCommand,
  modeCommand,
} from "../src/commands.js";

test("palette covers all eight commands", () => {
  assert.equal(COMMAND_PALETTE.length, 8);
  const names = COMMAND_PALETTE.map((p) => p.command);
  for (const k of ["capture", "unlock", "lock", "mode1", "mode2", "showpassword"]) {
    assert.ok(names.includes(k), k);
  }
  assert.ok(names.some((n) => n.startsWith("adduser_")));
  assert.ok(names.some((n) => n.startsWith("change_")));
});

test("adduser serializer matches the bot grammar", () => {
  assert.equal(addUserCommand("Maya"), "adduser_Maya");
  assert.throws(() => addUserCommand(""));
  assert.throws(() => addUserCommand("two words"));
});

test("changepin serializer validates the pin", () => {
  assert.equal(changePinCommand("alice", "7816"), "change_alice_7816");
  assert.equal(changePinCommand("a_b", "0042"), "change_a_b_0042");
  assert.throws(() => changePinCommand("alice", "78a6"));
  assert.throws(() => changePinCommand("alice", "78167"));
});

test("mode and lock serializers", () => {
  assert.equal(modeCommand("full_face"), "mode1");
  assert.equal(modeCommand("occluded"), "mode2");
  assert.equal(lockCommand(true), "lock");
  assert.equal(lockCommand(false), "unlock");
});
