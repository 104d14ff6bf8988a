import assert from "node:assert/strict";
import { test } from "node:test";
import { decodePgm, encodePgm } from "../src/pgm.js";
test("round trip", () => {
    const img = { width: 3, height: 2, pixels: new Uint8Array([0, 50, 100, 150, 200, 250]) };
    const decoded = decodePgm(encodePgm(img));
    assert.equal(decoded.width, 3);
    assert.equal(decoded.height, 2);
    assert.deepEqual([...decoded.pixels], [...img.pixels]);
});
test("decodes header comments", () => {
    const text = new TextEncoder().encode("P5\n# camera frame\n2 2\n255\n");
    const bytes = new Uint8Array([...text, 1, 2, 3, 4]);
    const img = decodePgm(bytes);
    assert.equal(img.width, 2);
    assert.equal(img.pixels[3], 4);
});
test("rejects wrong magic", () => {
    assert.throws(() => decodePgm(new TextEncoder().encode("P6\n1 1\n255\n\x00")), /P5/);
});
test("rejects 16-bit maxval", () => {
    assert.throws(() => decodePgm(new TextEncoder().encode("P5\n1 1\n65535\n\x00")), /8-bit/);
});
test("rejects short raster", () => {
    assert.throws(() => decodePgm(new TextEncoder().encode("P5\n2 2\n255\n\x00")), /shorter/);
});
test("encode validates buffer size", () => {
    assert.throws(() => encodePgm({ width: 2, height: 2, pixels: new Uint8Array(3) }));
});
