import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

// `?api=http://host:port` points at the graph service; same origin otherwise.
const base = new URLSearchParams(window.location.search).get("api") ?? "";
const root = document.getElementById("app");
if (root) createApp(root, new ApiClient(base));
