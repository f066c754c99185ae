/** Browser entry: same-origin API, query-string identity. */

import { createApi } from "./api.js";
import { runApp } from "./ui.js";

const root = document.getElementById("app");
if (!root) throw new Error("page shell lacks #app");
void runApp(root, createApi(fetch.bind(globalThis)), new URLSearchParams(location.search));
