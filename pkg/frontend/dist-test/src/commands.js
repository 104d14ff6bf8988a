/** The chat command grammar, mirrored so every admin action on the console
 * is expressible as the exact string the bot gateway parses. */
export const KEYWORD_COMMANDS = [
    "capture",
    "unlock",
    "lock",
    "mode1",
    "mode2",
    "showpassword",
];
export const COMMAND_PALETTE = [
    { command: "capture", hint: "photograph the door camera" },
    { command: "unlock", hint: "open the lock remotely" },
    { command: "lock", hint: "engage the lock" },
    { command: "mode1", hint: "full-face recognition" },
    { command: "mode2", hint: "occluded-face recognition" },
    { command: "adduser_<name>", hint: "register a user" },
    { command: "change_<user>_<pin>", hint: "set a 4-digit PIN" },
    { command: "showpassword", hint: "list user PINs" },
];
export function addUserCommand(name) {
    if (!name || /\s/.test(name))
        throw new Error("name must be nonempty with no spaces");
    return `adduser_${name}`;
}
export function changePinCommand(user, pin) {
    if (!user || /\s/.test(user))
        throw new Error("user must be nonempty with no spaces");
    if (!/^[0-9]{4}$/.test(pin))
        throw new Error("pin must be exactly 4 digits");
    return `change_${user}_${pin}`;
}
export function modeCommand(mode) {
    return mode === "full_face" ? "mode1" : "mode2";
}
export function lockCommand(locked) {
    return locked ? "lock" : "unlock";
}
