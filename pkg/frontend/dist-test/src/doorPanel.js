/** Door-side panel: what a person standing at the door sees and touches —
 * the 16x2 LCD mirror, the keypad, the lock state, a motion trigger, and a
 * frame submitter standing in for the camera. */
export const KEYPAD_KEYS = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "*", "0", "#"];
export function escapeHtml(s) {
    return s
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}
function padLcd(line) {
    return (line + " ".repeat(16)).slice(0, 16);
}
export function renderLcd(state) {
    return (`<pre class="lcd-line" data-lcd="0">${escapeHtml(padLcd(state.lcd[0]))}</pre>` +
        `<pre class="lcd-line" data-lcd="1">${escapeHtml(padLcd(state.lcd[1]))}</pre>`);
}
export function renderLockIndicator(state) {
    const cls = state.locked ? "locked" : "unlocked";
    const label = state.locked ? "LOCKED" : "UNLOCKED";
    return `<span class="lock-indicator ${cls}" data-locked="${state.locked}">${label}</span>`;
}
export function renderPhase(state) {
    const attempts = state.await ? ` (attempt ${state.await.attempts_used + 1})` : "";
    return `<span class="phase" data-phase="${escapeHtml(state.phase)}">${escapeHtml(state.phase)}${attempts}</span>`;
}
export function renderKeypad() {
    const keys = KEYPAD_KEYS.map((k) => `<button class="key" data-key="${k}">${k}</button>`).join("");
    return `<div class="keypad">${keys}</div>`;
}
export function renderDoorPanel(state) {
    return `
  <section class="door-panel">
    <h2>Door panel</h2>
    <div class="lcd">${renderLcd(state)}</div>
    <div class="door-status">${renderLockIndicator(state)} ${renderPhase(state)}</div>
    ${renderKeypad()}
    <div class="door-actions">
      <button id="pir-button">Trigger motion (PIR)</button>
      <label class="upload-label">Present a frame (PGM)
        <input type="file" id="frame-file" accept=".pgm,image/x-portable-graymap" />
      </label>
      <button id="webcam-button">Webcam snapshot</button>
    </div>
    <canvas id="frame-preview" class="frame-preview"></canvas>
    <p class="door-hint" id="door-hint"></p>
  </section>`;
}
/** Attach listeners; rendering replaces only leaf nodes afterwards. */
export function bindDoorPanel(root, hooks) {
    root.querySelectorAll("button.key").forEach((btn) => {
        btn.addEventListener("click", () => hooks.pressKey(btn.dataset.key ?? ""));
    });
    root.querySelector("#pir-button")?.addEventListener("click", () => hooks.triggerMotion());
    root.querySelector("#webcam-button")?.addEventListener("click", () => hooks.webcamSnapshot());
    const file = root.querySelector("#frame-file");
    file?.addEventListener("change", async () => {
        const chosen = file.files?.[0];
        if (!chosen)
            return;
        hooks.submitFrameBytes(new Uint8Array(await chosen.arrayBuffer()));
    });
}
export function updateDoorPanel(root, state) {
    const lcd = root.querySelector(".lcd");
    if (lcd)
        lcd.innerHTML = renderLcd(state);
    const status = root.querySelector(".door-status");
    if (status)
        status.innerHTML = `${renderLockIndicator(state)} ${renderPhase(state)}`;
}
