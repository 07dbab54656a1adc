import { ConsoleApi } from "./api.js";
import { App } from "./app.js";

const root = document.getElementById("root");
if (root === null) throw new Error("missing #root mount point");
new App(new ConsoleApi(), root).start();
