import { ApiClient } from "./api.js";
import { App } from "./controller.js";
import { Telemetry } from "./telemetry.js";

const base =
  document.querySelector('meta[name="api-base"]')?.getAttribute("content") ?? "";
const root = document.getElementById("app");

if (root) {
  const app = new App({
    root,
    api: new ApiClient(base),
    telemetry: new Telemetry(base),
  });
  void app.start();
}
