/** Owner-side console: command input with the palette of bot commands, the
 * live notification feed (stranger photos inline, one-click registration),
 * a mode toggle, and lock/unlock buttons. */
import { COMMAND_PALETTE } from "./commands.js";
import { escapeHtml } from "./doorPanel.js";
export function renderAdminView(state) {
    const palette = COMMAND_PALETTE.map((p) => `<button class="palette-cmd" data-command="${escapeHtml(p.command)}" title="${escapeHtml(p.hint)}">` +
        `${escapeHtml(p.command)}</button>`).join("");
    return `
  <section class="admin-view">
    <h2>Admin console</h2>
    <div class="admin-controls">
      <button id="admin-unlock">unlock</button>
      <button id="admin-lock">lock</button>
      <button id="mode-toggle" data-mode="${escapeHtml(state.mode)}">mode: ${escapeHtml(state.mode)}</button>
    </div>
    <div class="command-row">
      <input id="command-input" placeholder="command, e.g. showpassword" />
      <button id="command-send">send</button>
    </div>
    <div class="palette">${palette}</div>
    <pre id="command-reply" class="command-reply"></pre>
    <h3>Notifications</h3>
    <ul id="feed" class="feed"></ul>
  </section>`;
}
export function describeEvent(ev) {
    if (ev.notification === "unknown_user")
        return "Unknown person at the door";
    if (ev.notification === "door_unlocked")
        return `${ev.user_id ?? "?"} unlocked the door`;
    if (ev.notification === "enrollment_done")
        return `Enrollment finished for ${ev.user_id ?? "?"}`;
    if (ev.notification === "command_ack")
        return ev.text_body ?? "command acknowledged";
    if (ev.name === "LockSet")
        return ev.locked ? "Door locked" : "Door opened";
    if (ev.name === "SavePhoto")
        return `Photo saved: ${ev.photo ?? "?"}`;
    return ev.text;
}
/** One feed <li>; unknown-user items carry the photo and a register control. */
export function renderFeedItem(ev) {
    const parts = [
        `<li class="feed-item" data-seq="${ev.seq}" data-kind="${escapeHtml(ev.notification ?? ev.kind)}">`,
        `<span class="feed-time">t=${ev.t.toFixed(1)}s</span> `,
        `<span class="feed-text">${escapeHtml(describeEvent(ev))}</span>`,
    ];
    if (ev.notification === "unknown_user" && ev.photo) {
        parts.push(`<div class="feed-photo"><canvas data-photo="${escapeHtml(ev.photo)}"></canvas>` +
            `<span class="register-row"><input class="register-name" placeholder="name" />` +
            `<button class="register-button" data-photo="${escapeHtml(ev.photo)}">Register as user</button></span></div>`);
    }
    parts.push("</li>");
    return parts.join("");
}
export function bindAdminView(root, hooks) {
    const input = root.querySelector("#command-input");
    const send = () => {
        const text = input?.value.trim();
        if (text)
            hooks.sendCommand(text);
        if (input)
            input.value = "";
    };
    root.querySelector("#command-send")?.addEventListener("click", send);
    input?.addEventListener("keydown", (ev) => {
        if (ev.key === "Enter")
            send();
    });
    root.querySelectorAll("button.palette-cmd").forEach((btn) => {
        btn.addEventListener("click", () => {
            const cmd = btn.dataset.command ?? "";
            if (cmd.includes("<")) {
                if (input)
                    input.value = cmd; // template: drop into the input for editing
            }
            else {
                hooks.sendCommand(cmd);
            }
        });
    });
    root.querySelector("#admin-unlock")?.addEventListener("click", () => hooks.setLock(false));
    root.querySelector("#admin-lock")?.addEventListener("click", () => hooks.setLock(true));
    const toggle = root.querySelector("#mode-toggle");
    toggle?.addEventListener("click", () => hooks.toggleMode(toggle.dataset.mode ?? "full_face"));
}
export function updateModeToggle(root, state) {
    const toggle = root.querySelector("#mode-toggle");
    if (toggle) {
        toggle.dataset.mode = state.mode;
        toggle.textContent = `mode: ${state.mode}`;
    }
}
