/** Binary PGM (P5) decode/encode. The service speaks PGM only, and browsers
 * don't, so the console converts at the edges: decode for display on a
 * canvas, encode for webcam/canvas submissions. */
function isSpace(byte) {
    return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c;
}
/** Read the next header token, skipping whitespace and '#' comments. */
function readToken(data, pos) {
    let i = pos;
    for (;;) {
        while (i < data.length && isSpace(data[i]))
            i++;
        if (i < data.length && data[i] === 0x23 /* # */) {
            while (i < data.length && data[i] !== 0x0a)
                i++;
            continue;
        }
        break;
    }
    const start = i;
    while (i < data.length && !isSpace(data[i]))
        i++;
    if (start === i)
        throw new Error("truncated PGM header");
    return { token: String.fromCharCode(...data.slice(start, i)), next: i };
}
export function decodePgm(bytes) {
    const data = bytes instanceof Uint8Array ? bytes : new Uint8Array(bytes);
    if (data.length < 2 || data[0] !== 0x50 || data[1] !== 0x35) {
        throw new Error("not a binary PGM (missing P5 magic)");
    }
    let pos = 2;
    const fields = [];
    for (let k = 0; k < 3; k++) {
        const { token, next } = readToken(data, pos);
        const value = Number(token);
        if (!Number.isInteger(value))
            throw new Error(`bad PGM header token '${token}'`);
        fields.push(value);
        pos = next;
    }
    const [width, height, maxval] = fields;
    if (width < 1 || height < 1)
        throw new Error(`bad PGM dimensions ${width}x${height}`);
    if (maxval <= 0 || maxval > 255)
        throw new Error(`only 8-bit PGM supported (maxval ${maxval})`);
    pos += 1; // single whitespace after maxval
    const raster = data.slice(pos, pos + width * height);
    if (raster.length !== width * height)
        throw new Error("PGM raster shorter than width*height");
    return { width, height, pixels: raster };
}
export function encodePgm(img) {
    if (img.pixels.length !== img.width * img.height) {
        throw new Error("pixel buffer does not match dimensions");
    }
    const header = new TextEncoder().encode(`P5\n${img.width} ${img.height}\n255\n`);
    const out = new Uint8Array(header.length + img.pixels.length);
    out.set(header, 0);
    out.set(img.pixels, header.length);
    return out;
}
/** Paint a decoded frame onto a canvas (1 gray byte -> opaque RGBA). */
export function drawToCanvas(img, canvas) {
    canvas.width = img.width;
    canvas.height = img.height;
    const ctx = canvas.getContext("2d");
    if (!ctx)
        return;
    const rgba = new Uint8ClampedArray(img.width * img.height * 4);
    for (let i = 0; i < img.pixels.length; i++) {
        const v = img.pixels[i];
        rgba[i * 4] = v;
        rgba[i * 4 + 1] = v;
        rgba[i * 4 + 2] = v;
        rgba[i * 4 + 3] = 255;
    }
    ctx.putImageData(new ImageData(rgba, img.width, img.height), 0, 0);
}
/** Grayscale a canvas (e.g. a webcam snapshot) into PGM bytes. */
export function canvasToPgm(canvas) {
    const ctx = canvas.getContext("2d");
    if (!ctx)
        throw new Error("canvas has no 2d context");
    const { width, height } = canvas;
    const rgba = ctx.getImageData(0, 0, width, height).data;
    const pixels = new Uint8Array(width * height);
    for (let i = 0; i < pixels.length; i++) {
        // integer luma approximation (BT.601 weights)
        pixels[i] = (77 * rgba[i * 4] + 150 * rgba[i * 4 + 1] + 29 * rgba[i * 4 + 2]) >> 8;
    }
    return encodePgm({ width, height, pixels });
}
