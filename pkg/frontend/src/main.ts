/** Browser entry point. The admin token can be passed as ?token=... or
 * entered in the prompt-on-demand field the first 401 produces. */

import { mountApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const token = params.get("token") ?? "";

mountApp(document, "", token).catch((err) => {
  const mount = document.getElementById("app");
  if (mount) mount.textContent = `failed to reach the entryway service: ${err}`;
});
